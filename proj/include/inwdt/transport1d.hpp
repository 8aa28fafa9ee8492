#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace inwdt {

// Piecewise-linear 1D transfer function phi. Nodes are either equally
// spaced on [lo, hi] (constant-time lookup) or explicit sorted knots
// (binary search). Outside the node range the end segments are extended
// linearly.
class Mapping1D {
 public:
  // G = samples.size() >= 2 equally spaced nodes on [lo, hi], lo < hi.
  static Mapping1D uniform(double lo, double hi, std::vector<double> samples);
  // Strictly increasing knots, same length as values, at least 2.
  static Mapping1D knots(std::vector<double> nodes, std::vector<double> values);
  // phi(t) = t, used as the no-op mapping.
  static Mapping1D identity();

  double operator()(double t) const;

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  std::size_t size() const { return values_.size(); }
  bool is_uniform() const { return nodes_.empty(); }
  double node(std::size_t k) const;
  std::span<const double> values() const { return values_; }

 private:
  Mapping1D() = default;

  double lo_ = 0.0;
  double hi_ = 1.0;
  double inv_step_ = 1.0;
  std::vector<double> nodes_;  // empty for uniform grids
  std::vector<double> values_;
};

// Unnormalised Gaussian kernel exp(-t^2 / (2 h^2)); normalisation cancels in
// the Nadaraya-Watson ratio.
struct KernelConfig {
  double bandwidth = 5.0;
};

inline constexpr std::size_t kDefaultGridSize = 1024;
// Below this kernel mass a grid node takes the value of the nearest sample.
inline constexpr double kDenominatorFloor = 1e-12;
// Kernel support is cut at this many bandwidths. exp(-81/2) is below the
// floor relative to any node within the grid margin.
inline constexpr double kKernelCutoff = 9.0;
// Nadaraya-Watson grids extend this many bandwidths past the data.
inline constexpr double kGridMargin = 3.0;
// Upper bound on node spacing, in bandwidths, for the Nadaraya-Watson grid.
inline constexpr double kMaxNodeSpacing = 0.125;

// Quantile matching phi = P_v^-1 o P_u. Levels use the midpoint convention
// (i - 0.5) / n; tied u values share the mean level of their ranks. The
// result has one knot per distinct u. Throws std::invalid_argument on empty
// input.
Mapping1D ot_map_1d(std::span<const double> u, std::span<const double> v);

// Nadaraya-Watson regression of v on u sampled on a uniform grid over
// [min u - 3h, max u + 3h]. The grid has at least grid_size nodes and is
// refined so that nodes are never further apart than h / 8. Throws
// std::invalid_argument on empty or mismatched input or h <= 0.
Mapping1D nw_map_1d(std::span<const double> u, std::span<const double> v, const KernelConfig& kernel,
                    std::size_t grid_size = kDefaultGridSize);

}  // namespace inwdt
