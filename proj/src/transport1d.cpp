#include "inwdt/transport1d.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace inwdt {
namespace {

constexpr std::size_t kMaxGridNodes = std::size_t{1} << 22;

double lerp_exact_ends(double a, double b, double f) { return (1.0 - f) * a + f * b; }

// Interpolated empirical quantile of sorted v at level q, midpoint convention:
// level (r - 0.5) / n hits the r-th order statistic exactly.
double quantile_sorted(std::span<const double> sorted_v, double level) {
  const auto n = sorted_v.size();
  const double pos = std::clamp(level * static_cast<double>(n) + 0.5, 1.0, static_cast<double>(n));
  const auto r = static_cast<std::size_t>(std::floor(pos));
  if (r >= n) return sorted_v[n - 1];
  return lerp_exact_ends(sorted_v[r - 1], sorted_v[r], pos - static_cast<double>(r));
}

}  // namespace

Mapping1D Mapping1D::uniform(double lo, double hi, std::vector<double> samples) {
  if (!(lo < hi) || samples.size() < 2) {
    throw std::invalid_argument("uniform mapping needs lo < hi and at least 2 samples");
  }
  Mapping1D m;
  m.lo_ = lo;
  m.hi_ = hi;
  m.inv_step_ = static_cast<double>(samples.size() - 1) / (hi - lo);
  m.values_ = std::move(samples);
  return m;
}

Mapping1D Mapping1D::knots(std::vector<double> nodes, std::vector<double> values) {
  if (nodes.size() < 2 || nodes.size() != values.size()) {
    throw std::invalid_argument("knot mapping needs at least 2 nodes and matching values");
  }
  if (std::adjacent_find(nodes.begin(), nodes.end(), std::greater_equal<>()) != nodes.end()) {
    throw std::invalid_argument("knot nodes must be strictly increasing");
  }
  Mapping1D m;
  m.lo_ = nodes.front();
  m.hi_ = nodes.back();
  m.nodes_ = std::move(nodes);
  m.values_ = std::move(values);
  return m;
}

Mapping1D Mapping1D::identity() { return knots({0.0, 1.0}, {0.0, 1.0}); }

double Mapping1D::node(std::size_t k) const {
  if (!nodes_.empty()) return nodes_[k];
  if (k + 1 == values_.size()) return hi_;
  return lo_ + (hi_ - lo_) * (static_cast<double>(k) / static_cast<double>(values_.size() - 1));
}

double Mapping1D::operator()(double t) const {
  const std::size_t last = values_.size() - 2;
  std::size_t k;
  if (nodes_.empty()) {
    const double pos = std::floor((t - lo_) * inv_step_);
    k = pos <= 0.0 ? 0 : std::min(static_cast<std::size_t>(pos), last);
  } else {
    const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), t);
    const auto idx = static_cast<std::size_t>(it - nodes_.begin());
    k = idx == 0 ? 0 : std::min(idx - 1, last);
  }
  const double x0 = node(k);
  const double x1 = node(k + 1);
  return lerp_exact_ends(values_[k], values_[k + 1], (t - x0) / (x1 - x0));
}

Mapping1D ot_map_1d(std::span<const double> u, std::span<const double> v) {
  if (u.empty() || v.empty()) {
    throw std::invalid_argument("ot_map_1d needs non-empty inputs");
  }
  std::vector<double> su(u.begin(), u.end());
  std::vector<double> sv(v.begin(), v.end());
  std::sort(su.begin(), su.end());
  std::sort(sv.begin(), sv.end());

  const auto n = static_cast<double>(su.size());
  std::vector<double> nodes;
  std::vector<double> values;
  for (std::size_t a = 0; a < su.size();) {
    std::size_t b = a;
    while (b + 1 < su.size() && su[b + 1] == su[a]) ++b;
    // 1-based ranks a+1 .. b+1 share the mean of their levels.
    const double level = ((static_cast<double>(a + b) + 2.0) / 2.0 - 0.5) / n;
    nodes.push_back(su[a]);
    values.push_back(quantile_sorted(sv, level));
    a = b + 1;
  }
  if (nodes.size() == 1) {
    // Degenerate projection: a unit-slope shift through the single knot.
    return Mapping1D::knots({nodes[0] - 0.5, nodes[0] + 0.5}, {values[0] - 0.5, values[0] + 0.5});
  }
  return Mapping1D::knots(std::move(nodes), std::move(values));
}

Mapping1D nw_map_1d(std::span<const double> u, std::span<const double> v, const KernelConfig& kernel,
                    std::size_t grid_size) {
  if (u.empty() || u.size() != v.size()) {
    throw std::invalid_argument("nw_map_1d needs non-empty, equal-length inputs");
  }
  const double h = kernel.bandwidth;
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw std::invalid_argument("bandwidth must be positive");
  }
  const auto [umin, umax] = std::minmax_element(u.begin(), u.end());
  const auto [vmin, vmax] = std::minmax_element(v.begin(), v.end());
  const double lo = *umin - kGridMargin * h;
  const double hi = *umax + kGridMargin * h;

  const double needed = std::ceil((hi - lo) / (kMaxNodeSpacing * h)) + 1.0;
  const std::size_t nodes =
      std::max<std::size_t>({grid_size, 2, static_cast<std::size_t>(std::min<double>(needed, kMaxGridNodes))});
  const double step = (hi - lo) / static_cast<double>(nodes - 1);
  const double s = step / h;
  const double q = std::exp(-s * s);

  std::vector<double> num(nodes, 0.0);
  std::vector<double> den(nodes, 0.0);
  const auto last = static_cast<std::ptrdiff_t>(nodes - 1);
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double ui = u[i];
    const double vi = v[i];
    const double pos = (ui - lo) / step;
    const auto k0 = std::clamp(static_cast<std::ptrdiff_t>(std::llround(pos)), std::ptrdiff_t{0}, last);
    const auto kmin = std::max<std::ptrdiff_t>(0, static_cast<std::ptrdiff_t>(std::ceil(pos - kKernelCutoff / s)));
    const auto kmax = std::min<std::ptrdiff_t>(last, static_cast<std::ptrdiff_t>(std::floor(pos + kKernelCutoff / s)));

    // Walk outward from the nearest node; consecutive Gaussian weights on a
    // uniform grid differ by a ratio that itself shrinks by exp(-s^2).
    const double z = (lo + static_cast<double>(k0) * step - ui) / h;
    const double w0 = std::exp(-0.5 * z * z);
    double w = w0;
    double r = std::exp(-0.5 * (2.0 * z * s + s * s));
    for (std::ptrdiff_t k = k0; k <= kmax; ++k) {
      num[k] += w * vi;
      den[k] += w;
      w *= r;
      r *= q;
    }
    w = w0;
    r = std::exp(0.5 * (2.0 * z * s - s * s));
    for (std::ptrdiff_t k = k0 - 1; k >= kmin; --k) {
      w *= r;
      r *= q;
      num[k] += w * vi;
      den[k] += w;
    }
  }

  std::vector<double> samples(nodes);
  std::vector<std::size_t> order;  // built lazily for the nearest-sample fallback
  for (std::size_t k = 0; k < nodes; ++k) {
    if (den[k] >= kDenominatorFloor) {
      samples[k] = std::clamp(num[k] / den[k], *vmin, *vmax);
      continue;
    }
    if (order.empty()) {
      order.resize(u.size());
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return u[a] < u[b]; });
    }
    const double g = k + 1 == nodes ? hi : lo + static_cast<double>(k) * step;
    auto it = std::lower_bound(order.begin(), order.end(), g, [&](std::size_t a, double t) { return u[a] < t; });
    if (it == order.end() || (it != order.begin() && g - u[*std::prev(it)] <= u[*it] - g)) {
      it = std::prev(it);
    }
    // Average v over every sample tied at the nearest u.
    const double un = u[*it];
    auto first = std::lower_bound(order.begin(), order.end(), un, [&](std::size_t a, double t) { return u[a] < t; });
    double acc = 0.0;
    std::size_t cnt = 0;
    for (; first != order.end() && u[*first] == un; ++first, ++cnt) acc += v[*first];
    samples[k] = std::clamp(acc / static_cast<double>(cnt), *vmin, *vmax);
  }
  return Mapping1D::uniform(lo, hi, std::move(samples));
}

}  // namespace inwdt
