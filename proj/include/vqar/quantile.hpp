#pragma once

#include <optional>
#include <span>
#include <vector>

#include "vqar/grid.hpp"
#include "vqar/kernel.hpp"
#include "vqar/points.hpp"
#include "vqar/transport.hpp"

namespace vqar {

/// Contours of several orders plus the median of one fitted map.
struct ContourSet {
  Point x;
  std::vector<double> tau_levels;
  std::vector<PointSet> contours;  // d=2: k_S vertices each, closed implicitly
  Point median;
  double monotone_max_violation = 0.0;
};

/// Per-direction points of the region boundary of order tau, any dimension.
///
/// On a grid radius these are the ring images; between rings they are linear
/// interpolations of adjacent rings, below the first ring interpolations toward
/// the median, and above the outermost ring the outermost ring itself.
PointSet ring_vertices(const QuantileMap& map, double tau);

/// Closed polygon of order tau, vertices in grid-angle order (d = 2 only).
PointSet contour(const QuantileMap& map, double tau);

/// Image of the origin gridpoint.
Point median(const QuantileMap& map);

/// Point-in-region test. For d = 2, even-odd rule on the contour polygon with
/// points within 1e-12 of an edge counted inside. For other d, y is compared
/// radially against the boundary vertex whose direction from the median is
/// closest to that of y.
bool region_contains(const QuantileMap& map, double tau, std::span<const double> y);

ContourSet contour_set(const QuantileMap& map, std::span<const double> taus);

/// Grid-measure average of |Q(u) - Q_ref(u)|^2 over r_lo <= |u| <= r_hi.
double quantile_mse(const QuantileMap& map, const QuantileMap& reference, double r_lo,
                    double r_hi);

/// Grid, kernel and transport settings for fitting conditional maps.
struct FitConfig {
  std::size_t rings = 15;
  std::size_t directions = 15;
  std::uint64_t grid_seed = 0;
  KernelSpec kernel;
  SolverOptions solver;

  /// Kernel spec with the default neighbor count k_R * k_S.
  static FitConfig with_defaults(std::size_t rings, std::size_t directions, double ell);
};

/// Conditional quantile estimator bound to one observed series: the grid and
/// bandwidth are resolved once, then maps are fitted at any conditioning point.
class ConditionalEstimator {
 public:
  ConditionalEstimator(PointSet series, const FitConfig& config);

  /// NW weights -> transport from the grid measure -> barycentric map.
  QuantileMap fit(std::span<const double> x, const NwOptions& options = {}) const;
  QuantileMap fit_at(std::size_t t, bool leave_out = false) const;

  const SphericalGrid& grid() const { return grid_; }
  const ResolvedKernel& kernel() const { return kernel_; }
  const PointSet& series() const { return series_; }

 private:
  PointSet series_;
  SphericalGrid grid_;
  WeightedSample grid_measure_;
  ResolvedKernel kernel_;
  SolverOptions solver_;
};

/// Map from the grid to an arbitrary weighted sample (e.g. the stationary measure).
QuantileMap fit_measure(const WeightedSample& sample, const SphericalGrid& grid,
                        std::span<const double> x, const SolverOptions& solver = {});

struct CoverageOptions {
  std::size_t min_length = 500;
  /// Number of evenly spaced evaluation times (capped at T - 1).
  std::size_t evaluations = 2000;
  std::size_t threads = 0;  // 0: hardware concurrency
};

struct CoverageResult {
  std::vector<double> taus;
  std::vector<double> rates;
  std::size_t evaluations = 0;
};

/// Fraction of evaluation times t where x_{t+1} falls in the region of order
/// tau fitted at x_t with the transition (x_t, x_{t+1}) left out.
CoverageResult coverage_rates(const PointSet& series, std::span<const double> taus,
                              const FitConfig& config, const CoverageOptions& options = {});
double coverage_rate(const PointSet& series, double tau, const FitConfig& config,
                     const CoverageOptions& options = {});

// Polygon diagnostics (d = 2).
double polygon_area(const PointSet& polygon);
double convex_hull_area(const PointSet& polygon);
bool polygon_is_simple(const PointSet& polygon);
bool point_in_polygon(const PointSet& polygon, std::span<const double> y,
                      double boundary_tolerance = 1e-12);

}  // namespace vqar
