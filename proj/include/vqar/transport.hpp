#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "vqar/grid.hpp"
#include "vqar/points.hpp"
#include "vqar/sample.hpp"

namespace vqar {

struct PlanEntry {
  std::size_t row;  // grid index
  std::size_t col;  // atom index
  double mass;
};

/// Sparse coupling between a grid measure (rows) and a weighted sample (columns)
/// for the cost 1/2 |u - x|^2.
struct TransportPlan {
  std::vector<PlanEntry> entries;  // sorted by (row, col), all masses > 0
  std::vector<double> row_marginals;
  std::vector<double> col_marginals;
  double cost = 0.0;
  /// Dual potentials f (rows) and g (columns): f_i + g_j <= c_ij with equality
  /// on the support. Empty for plans not produced by the solver.
  std::vector<double> row_potentials;
  std::vector<double> col_potentials;
  std::size_t pivots = 0;
};

enum class PivotRule {
  /// Scan blocks of about sqrt(#arcs) arcs, take the best candidate of the first
  /// block that contains one.
  BlockSearch,
  /// Most negative reduced cost over all arcs.
  Dantzig,
};

struct SolverOptions {
  PivotRule pivot = PivotRule::BlockSearch;
  /// Weights below this are dropped and the rest renormalized before solving.
  double prune_below = 1e-15;
};

double transport_cost(std::span<const double> u, std::span<const double> x);

/// Exact optimal basic solution of the transportation problem between two
/// discrete measures, by primal network simplex on the complete bipartite graph.
///
/// Masses are rescaled to integers with a common denominator near 2^50, so the
/// pivots are exact; the marginals of the returned plan match the inputs to
/// about 1e-15.
TransportPlan solve_transport(const WeightedSample& rows, const WeightedSample& cols,
                              const SolverOptions& options = {});

double plan_cost(const TransportPlan& plan, const PointSet& rows, const PointSet& cols);

/// Largest deviation of the plan's row/column sums from the target marginals.
double marginal_error(const TransportPlan& plan, std::span<const double> row_weights,
                      std::span<const double> col_weights);

struct DualCheck {
  double min_reduced_cost = 0.0;      // over all (i,j); >= -tol for dual feasibility
  double max_support_residual = 0.0;  // |c_ij - f_i - g_j| over the support
  double duality_gap = 0.0;           // primal cost - dual objective
};

/// Complementary slackness certificate computed from the plan's potentials.
DualCheck check_duals(const TransportPlan& plan, const WeightedSample& rows,
                      const WeightedSample& cols);

/// Largest violation of <x_j1 - x_j2, u_i1 - u_i2> >= 0 over pairs of support entries.
double support_monotonicity_violation(const TransportPlan& plan, const PointSet& rows,
                                      const PointSet& cols);

/// Fitted predictive quantile function at the gridpoints.
struct QuantileMap {
  SphericalGrid grid;
  PointSet images;
  Point conditioning_point;
  WeightedSample source;

  std::size_t size() const noexcept { return images.size(); }
};

/// Q(u_i) = k * sum_j pi_ij x_j, evaluated as the row barycenter.
QuantileMap barycentric_map(const TransportPlan& plan, const WeightedSample& sample,
                            const SphericalGrid& grid, std::span<const double> x);

struct MonotoneReport {
  double max_violation = 0.0;
  std::optional<std::pair<std::size_t, std::size_t>> offending;

  bool clean() const noexcept { return !offending.has_value(); }
};

/// Exhaustive scan of -<Q(u_s) - Q(u_r), u_s - u_r> over all pairs.
MonotoneReport check_monotone(const QuantileMap& map, double tolerance = 1e-9);

}  // namespace vqar
