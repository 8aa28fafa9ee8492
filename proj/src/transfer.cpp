#include "inwdt/transfer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "inwdt/parallel.hpp"

namespace inwdt {
namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

// Direction-major projections: out[j * n + i] = e_j . row_i.
std::vector<double> project_all(const RowMatrix& points, const RotationBasis& basis, unsigned threads) {
  const std::size_t n = points.rows();
  const std::size_t d = basis.dimension();
  std::vector<double> out(n * d);
  parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto row = points.row(i);
      for (std::size_t j = 0; j < d; ++j) out[j * n + i] = dot(basis.direction(j), row);
    }
  });
  return out;
}

std::vector<double> strided(std::span<const double> values, std::size_t stride) {
  if (stride <= 1) return {values.begin(), values.end()};
  std::vector<double> out;
  out.reserve(values.size() / stride + 1);
  for (std::size_t i = 0; i < values.size(); i += stride) out.push_back(values[i]);
  return out;
}

std::vector<double> unit_vector(std::size_t d, Rng& rng) {
  std::vector<double> e(d);
  for (;;) {
    for (auto& c : e) c = rng.normal();
    const double norm = std::sqrt(dot(e, e));
    if (norm > 0.0) {
      for (auto& c : e) c /= norm;
      return e;
    }
  }
}

// k distinct indices from [0, n) in increasing order (partial Fisher-Yates).
std::vector<std::size_t> subsample_indices(std::size_t n, std::size_t k, Rng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (k >= n) return idx;
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

double exact_pair_sum(std::span<const double> a, std::span<const double> b, double inv_4h2) {
  double s = 0.0;
  for (const double ai : a) {
    for (const double bj : b) {
      const double z = ai - bj;
      s += std::exp(-z * z * inv_4h2);
    }
  }
  return s;
}

}  // namespace

RotationBasis::RotationBasis(RowMatrix directions) : directions_(std::move(directions)) {
  if (directions_.rows() != directions_.cols() || directions_.rows() == 0) {
    throw std::invalid_argument("rotation basis must be a non-empty square matrix");
  }
}

std::vector<double> RotationBasis::project(std::span<const double> a) const {
  if (a.size() != dimension()) throw std::invalid_argument("vector dimension does not match basis");
  std::vector<double> out(dimension());
  for (std::size_t j = 0; j < dimension(); ++j) out[j] = dot(direction(j), a);
  return out;
}

std::vector<double> RotationBasis::reassemble(std::span<const double> coeffs) const {
  if (coeffs.size() != dimension()) throw std::invalid_argument("vector dimension does not match basis");
  std::vector<double> out(dimension(), 0.0);
  for (std::size_t j = 0; j < dimension(); ++j) {
    const auto e = direction(j);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += coeffs[j] * e[k];
  }
  return out;
}

RotationBasis random_orthonormal_basis(std::size_t d, Rng& rng) {
  if (d == 0) throw std::invalid_argument("basis dimension must be >= 1");
  RowMatrix r(d, d);
  for (std::size_t j = 0; j < d; ++j) {
    auto e = r.row(j);
    for (;;) {
      for (auto& c : e) c = rng.normal();
      const double drawn = std::sqrt(dot(e, e));
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t p = 0; p < j; ++p) {
          const auto q = r.row(p);
          const double c = dot(q, e);
          for (std::size_t k = 0; k < d; ++k) e[k] -= c * q[k];
        }
      }
      const double norm = std::sqrt(dot(e, e));
      // Rank-deficient draw (probability zero): draw this row again.
      if (norm > 1e-10 * drawn && norm > 0.0) {
        for (auto& c : e) c /= norm;
        break;
      }
    }
  }
  return RotationBasis(std::move(r));
}

std::vector<double> project(const RowMatrix& points, std::span<const double> e) {
  if (points.cols() != e.size()) throw std::invalid_argument("projection direction has wrong dimension");
  std::vector<double> u(points.rows());
  for (std::size_t i = 0; i < points.rows(); ++i) u[i] = dot(e, points.row(i));
  return u;
}

void validate(const TransferConfig& cfg) {
  validate_patch_size(cfg.layout.patch_size);
  if (!(cfg.bandwidth > 0.0) || !std::isfinite(cfg.bandwidth)) throw std::invalid_argument("bandwidth must be > 0");
  if (cfg.max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");
  if (cfg.grid_size < 2) throw std::invalid_argument("grid size must be >= 2");
  if (!(cfg.rel_tol >= 0.0)) throw std::invalid_argument("rel_tol must be >= 0");
  if (cfg.l2_directions < 1) throw std::invalid_argument("l2_directions must be >= 1");
  if (cfg.l2_subsample < 1) throw std::invalid_argument("l2_subsample must be >= 1");
  if (cfg.fit_stride < 1) throw std::invalid_argument("fit_stride must be >= 1");
  if (!(cfg.position_scale > 0.0) || !std::isfinite(cfg.position_scale)) {
    throw std::invalid_argument("position_scale must be > 0");
  }
}

DirectionMapper make_mapper(const TransferConfig& cfg) {
  if (cfg.mapper == Mapper::kOptimalTransport) {
    return [](std::span<const double> u, std::span<const double> v) { return ot_map_1d(u, v); };
  }
  const KernelConfig kernel{cfg.bandwidth};
  const std::size_t grid = cfg.grid_size;
  return [kernel, grid](std::span<const double> u, std::span<const double> v) {
    return nw_map_1d(u, v, kernel, grid);
  };
}

RowMatrix remap_step(const RowMatrix& x, const RowMatrix& y, const RotationBasis& basis,
                     const TransferConfig& cfg) {
  return remap_step(x, y, basis, make_mapper(cfg), cfg.fit_stride, cfg.threads);
}

RowMatrix remap_step(const RowMatrix& x, const RowMatrix& y, const RotationBasis& basis,
                     const DirectionMapper& mapper, std::size_t fit_stride, unsigned threads) {
  if (x.rows() != y.rows() || x.cols() != y.cols()) {
    throw std::invalid_argument("source and target feature matrices differ in shape");
  }
  if (basis.dimension() != x.cols()) throw std::invalid_argument("basis dimension does not match features");
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  if (n == 0) return x;

  // displacement[j * n + i] starts as e_j . x_i and becomes phi_j(u) - u.
  std::vector<double> displacement = project_all(x, basis, threads);
  const std::vector<double> target = project_all(y, basis, threads);

  parallel_for(d, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t j = begin; j < end; ++j) {
      const std::span<double> u(displacement.data() + j * n, n);
      const std::span<const double> v(target.data() + j * n, n);
      const Mapping1D phi = fit_stride > 1 ? mapper(strided(u, fit_stride), strided(v, fit_stride))
                                           : mapper(u, v);
      for (auto& ui : u) ui = phi(ui) - ui;
    }
  });

  RowMatrix out = x;
  parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      auto row = out.row(i);
      for (std::size_t j = 0; j < d; ++j) {
        const double c = displacement[j * n + i];
        const auto e = basis.direction(j);
        for (std::size_t k = 0; k < d; ++k) row[k] += c * e[k];
      }
    }
  });
  return out;
}

double kde_l2_1d(std::span<const double> u, std::span<const double> v, double h) {
  if (u.empty() || v.empty()) throw std::invalid_argument("kde_l2_1d needs non-empty inputs");
  const double nu = static_cast<double>(u.size());
  const double nv = static_cast<double>(v.size());
  // Convolution of two N(0, h^2) kernels is N(0, 2 h^2).
  const double norm = 1.0 / (2.0 * h * std::sqrt(std::numbers::pi));
  const double inv_4h2 = 1.0 / (4.0 * h * h);

  if (std::max(u.size(), v.size()) <= kExactMaxPoints) {
    const double tuu = exact_pair_sum(u, u, inv_4h2) / (nu * nu);
    const double tvv = exact_pair_sum(v, v, inv_4h2) / (nv * nv);
    const double tuv = exact_pair_sum(u, v, inv_4h2) / (nu * nv);
    return std::max(0.0, norm * (tuu + tvv - 2.0 * tuv));
  }

  // Linear binning of both sets onto one grid; the sampled Gaussian is a
  // positive-definite Toeplitz form, so the quadratic form is >= 0.
  const double step = h / 16.0;
  const auto [umin, umax] = std::minmax_element(u.begin(), u.end());
  const auto [vmin, vmax] = std::minmax_element(v.begin(), v.end());
  const double lo = std::min(*umin, *vmin);
  const double hi = std::max(*umax, *vmax);
  const auto bins = static_cast<std::size_t>(std::floor((hi - lo) / step)) + 2;
  std::vector<double> wu(bins, 0.0);
  std::vector<double> wv(bins, 0.0);
  auto bin = [&](std::span<const double> pts, std::vector<double>& w) {
    for (const double p : pts) {
      const double pos = (p - lo) / step;
      const auto k = std::min(static_cast<std::size_t>(pos), bins - 2);
      const double f = pos - static_cast<double>(k);
      w[k] += 1.0 - f;
      w[k + 1] += f;
    }
  };
  bin(u, wu);
  bin(v, wv);
  std::vector<double> diff(bins);
  for (std::size_t k = 0; k < bins; ++k) diff[k] = wu[k] / nu - wv[k] / nv;

  const auto width = static_cast<std::size_t>(std::ceil(10.0 * std::sqrt(2.0) * h / step));
  std::vector<double> kernel(width + 1);
  for (std::size_t k = 0; k <= width; ++k) {
    const double z = static_cast<double>(k) * step;
    kernel[k] = std::exp(-z * z * inv_4h2);
  }
  double s = 0.0;
  for (std::size_t a = 0; a < bins; ++a) {
    if (diff[a] == 0.0) continue;
    double acc = diff[a] * kernel[0];
    const std::size_t stop = std::min(bins - 1, a + width);
    for (std::size_t b = a + 1; b <= stop; ++b) acc += 2.0 * diff[b] * kernel[b - a];
    s += diff[a] * acc;
  }
  return std::max(0.0, norm * s);
}

double l2_divergence(const RowMatrix& x, const RowMatrix& y, Rng& probe_rng, Rng& subsample_rng,
                     const TransferConfig& cfg) {
  if (x.rows() == 0 || y.rows() == 0) throw std::invalid_argument("l2_divergence needs non-empty inputs");
  if (x.cols() != y.cols()) throw std::invalid_argument("l2_divergence needs equal feature dimensions");
  const std::size_t d = x.cols();

  std::vector<std::vector<double>> directions(cfg.l2_directions);
  for (auto& e : directions) e = unit_vector(d, probe_rng);

  const auto ix = subsample_indices(x.rows(), cfg.l2_subsample, subsample_rng);
  const auto iy = x.rows() == y.rows() ? ix : subsample_indices(y.rows(), cfg.l2_subsample, subsample_rng);

  std::vector<double> per_direction(directions.size());
  parallel_for(directions.size(), cfg.threads, [&](std::size_t begin, std::size_t end) {
    std::vector<double> pu(ix.size());
    std::vector<double> pv(iy.size());
    for (std::size_t j = begin; j < end; ++j) {
      for (std::size_t i = 0; i < ix.size(); ++i) pu[i] = dot(directions[j], x.row(ix[i]));
      for (std::size_t i = 0; i < iy.size(); ++i) pv[i] = dot(directions[j], y.row(iy[i]));
      per_direction[j] = kde_l2_1d(pu, pv, kDivergenceBandwidth);
    }
  });
  double sum = 0.0;
  for (const double l2 : per_direction) sum += l2;
  return sum / static_cast<double>(per_direction.size());
}

std::string ConvergenceTrace::to_csv(bool with_timing) const {
  std::ostringstream os;
  os.precision(17);
  os << "iteration,l2,wall_ms\n";
  for (const auto& r : records) {
    os << r.iteration << ',' << r.l2 << ',';
    if (with_timing) {
      os << r.wall_ms;
    } else {
      os << 0;
    }
    os << '\n';
  }
  return os.str();
}

void ConvergenceTrace::write_csv(const std::filesystem::path& path, bool with_timing) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open trace file for writing: " + path.string());
  out << to_csv(with_timing);
  if (!out) throw std::runtime_error("failed writing trace file: " + path.string());
}

TransferResult run_transfer(const PatchPairSet& pairs, const TransferConfig& cfg) {
  validate(cfg);
  if (pairs.x.rows() == 0 || pairs.x.rows() != pairs.y.rows() || pairs.x.cols() != pairs.y.cols()) {
    throw std::invalid_argument("patch pair set is empty or misaligned");
  }
  const auto start = std::chrono::steady_clock::now();
  auto basis_rng = Rng::stream(cfg.seed, Rng::Stream::kBasis);
  const auto probe_rng = Rng::stream(cfg.seed, Rng::Stream::kDivergenceProbe);
  const auto subsample_rng = Rng::stream(cfg.seed, Rng::Stream::kSubsample);
  const DirectionMapper mapper = make_mapper(cfg);

  TransferResult result;
  result.x = pairs.x;
  auto& records = result.trace.records;
  for (int k = 0;; ++k) {
    // Same probes every iteration so successive values are comparable.
    Rng probe = probe_rng;
    Rng sub = subsample_rng;
    const double l2 = l2_divergence(result.x, pairs.y, probe, sub, cfg);
    const std::chrono::duration<double, std::milli> elapsed = std::chrono::steady_clock::now() - start;
    records.push_back({k, l2, elapsed.count()});

    if (l2 <= kDivergenceZero) {
      result.converged = true;
      break;
    }
    if (k >= kConvergenceWindow) {
      const double before = records[records.size() - 1 - kConvergenceWindow].l2;
      if ((before - l2) / before < cfg.rel_tol) {
        result.converged = true;
        break;
      }
    }
    if (k == cfg.max_iterations) break;

    const RotationBasis basis = random_orthonormal_basis(pairs.x.cols(), basis_rng);
    result.x = remap_step(result.x, pairs.y, basis, mapper, cfg.fit_stride, cfg.threads);
    ++result.iterations;
    const auto data = result.x.data();
    if (!std::all_of(data.begin(), data.end(), [](double v) { return std::isfinite(v); })) {
      throw std::runtime_error("transfer produced non-finite features at iteration " + std::to_string(k + 1));
    }
  }
  return result;
}

}  // namespace inwdt
