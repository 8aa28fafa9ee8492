#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "inwdt/matrix.hpp"
#include "inwdt/patches.hpp"
#include "inwdt/rng.hpp"
#include "inwdt/transport1d.hpp"

namespace inwdt {

enum class Mapper { kNadarayaWatson, kOptimalTransport };

// d orthonormal directions e_1..e_d, stored one per row so that
// (R x)_j = e_j . x and the inverse (reassembly) is R^T.
class RotationBasis {
 public:
  // Throws std::invalid_argument unless directions is square.
  explicit RotationBasis(RowMatrix directions);

  std::size_t dimension() const { return directions_.rows(); }
  std::span<const double> direction(std::size_t j) const { return directions_.row(j); }
  const RowMatrix& matrix() const { return directions_; }

  // (e_j . a)_j
  std::vector<double> project(std::span<const double> a) const;
  // sum_j c_j e_j, the inverse of project.
  std::vector<double> reassemble(std::span<const double> coeffs) const;

 private:
  RowMatrix directions_;
};

// Gram-Schmidt (with one re-orthogonalisation pass) applied to a d x d matrix
// of independent standard normal draws, which yields a Haar-distributed
// orthogonal matrix.
RotationBasis random_orthonormal_basis(std::size_t d, Rng& rng);

// u_i = e . row_i. Throws std::invalid_argument on a dimension mismatch.
std::vector<double> project(const RowMatrix& points, std::span<const double> e);

struct TransferConfig {
  PatchLayout layout{3, true};
  double position_scale = 1.0;
  double bandwidth = 5.0;
  Mapper mapper = Mapper::kNadarayaWatson;
  int max_iterations = 30;
  double rel_tol = 0.01;  // over kConvergenceWindow iterations
  std::size_t grid_size = kDefaultGridSize;
  std::uint64_t seed = 0;
  std::size_t l2_directions = 32;
  std::size_t l2_subsample = 20000;
  // Fit each 1D mapping on every fit_stride-th pair; it is still applied to
  // every point.
  std::size_t fit_stride = 1;
  // Worker cap; results do not depend on it.
  unsigned threads = 1;
};

inline constexpr int kConvergenceWindow = 3;
inline constexpr double kDivergenceBandwidth = 5.0;
// A divergence at or below this is an exact match of the two point sets.
inline constexpr double kDivergenceZero = 1e-300;

// Throws std::invalid_argument on an inconsistent configuration.
void validate(const TransferConfig& cfg);

using DirectionMapper =
    std::function<Mapping1D(std::span<const double> u, std::span<const double> v)>;

// NW with cfg.bandwidth and cfg.grid_size, or quantile matching (which
// ignores the pairing).
DirectionMapper make_mapper(const TransferConfig& cfg);

// One iteration: every direction's mapping is fitted on the same x, then
// x_i += sum_j (phi_j(e_j . x_i) - e_j . x_i) e_j.
RowMatrix remap_step(const RowMatrix& x, const RowMatrix& y, const RotationBasis& basis,
                     const TransferConfig& cfg);
RowMatrix remap_step(const RowMatrix& x, const RowMatrix& y, const RotationBasis& basis,
                     const DirectionMapper& mapper, std::size_t fit_stride = 1,
                     unsigned threads = 1);

// Sliced L2 distance between Gaussian KDEs (bandwidth kDivergenceBandwidth)
// of the two point sets, averaged over cfg.l2_directions random directions
// drawn from probe_rng. Each set is subsampled to at most cfg.l2_subsample
// points using subsample_rng; index-aligned sets share one subsample.
double l2_divergence(const RowMatrix& x, const RowMatrix& y, Rng& probe_rng, Rng& subsample_rng,
                     const TransferConfig& cfg);

// Closed-form integral of (p_u - p_v)^2 for 1D Gaussian KDEs with bandwidth h.
// Exact pair sums when both sets have at most kExactMaxPoints points, linear
// binning on a grid of spacing h/16 otherwise.
double kde_l2_1d(std::span<const double> u, std::span<const double> v, double h);
inline constexpr std::size_t kExactMaxPoints = 1024;

struct TraceRecord {
  int iteration = 0;
  double l2 = 0.0;
  double wall_ms = 0.0;
};

struct ConvergenceTrace {
  std::vector<TraceRecord> records;

  // Header `iteration,l2,wall_ms`. With with_timing false every wall_ms is
  // written as 0 so traces are byte-reproducible.
  std::string to_csv(bool with_timing = true) const;
  void write_csv(const std::filesystem::path& path, bool with_timing = true) const;
};

struct TransferResult {
  RowMatrix x;
  ConvergenceTrace trace;
  int iterations = 0;  // remap steps applied
  bool converged = false;
};

// Runs remap steps with a fresh basis each iteration. The divergence of the
// current state is recorded before every step; the run stops when it is zero,
// when it improved by less than rel_tol over the last kConvergenceWindow
// iterations, or after max_iterations steps.
TransferResult run_transfer(const PatchPairSet& pairs, const TransferConfig& cfg);

}  // namespace inwdt
