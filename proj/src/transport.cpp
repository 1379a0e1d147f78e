#include "vqar/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "network_simplex.hpp"
#include "vqar/error.hpp"

namespace vqar {

namespace {

constexpr double kMarginalTolerance = 1e-9;

void require_finite(const WeightedSample& s, const char* what) {
  for (double v : s.atoms.data())
    if (!std::isfinite(v)) throw Error(ErrorCode::NonfiniteInput, std::string(what) + " atom");
  for (double w : s.weights)
    if (!std::isfinite(w) || w < 0.0)
      throw Error(ErrorCode::NonfiniteInput, std::string(what) + " weight");
}

double total(std::span<const double> w) {
  double s = 0.0;
  for (double v : w) s += v;
  return s;
}

// Integer masses on a common denominator `scale`, summing to exactly `scale`.
std::vector<std::int64_t> to_integer_masses(std::span<const double> weights, double sum,
                                            std::int64_t scale) {
  std::vector<std::int64_t> q(weights.size());
  std::int64_t acc = 0;
  std::size_t largest = 0;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    q[j] = std::max<std::int64_t>(1, std::llround(weights[j] / sum * static_cast<double>(scale)));
    acc += q[j];
    if (q[j] > q[largest]) largest = j;
  }
  q[largest] += scale - acc;
  if (q[largest] <= 0) throw Error(ErrorCode::InfeasibleMarginals, "mass rescaling failed");
  return q;
}

struct Pruned {
  WeightedSample sample;
  std::vector<std::size_t> original;
};

Pruned prune(const WeightedSample& s, double below) {
  Pruned p{{PointSet(s.dim()), {}}, {}};
  for (std::size_t j = 0; j < s.size(); ++j) {
    if (s.weights[j] >= below && s.weights[j] > 0.0) {
      p.sample.atoms.push_back(s.atoms[j]);
      p.sample.weights.push_back(s.weights[j]);
      p.original.push_back(j);
    }
  }
  return p;
}

// Row potentials of the problem restricted to every fourth column, used to warm
// start the full solve. Empty when the problem is too small to benefit.
std::vector<double> coarse_row_hint(const PointSet& rows, const std::vector<std::int64_t>& supply,
                                    const PointSet& cols, const std::vector<std::int64_t>& demand,
                                    std::int64_t scale, PivotRule rule) {
  const auto k = static_cast<std::int64_t>(rows.size());
  const auto m = static_cast<std::int64_t>(cols.size());
  if (k * m <= detail::NetworkSimplex::kDenseLimit || m < 8 * k) return {};
  PointSet sub(cols.dim());
  std::vector<double> w;
  for (std::int64_t j = 0; j < m; j += 4) {
    sub.push_back(cols[static_cast<std::size_t>(j)]);
    w.push_back(static_cast<double>(demand[static_cast<std::size_t>(j)]));
  }
  const auto sub_demand = to_integer_masses(w, total(w), scale);
  const auto hint = coarse_row_hint(rows, supply, sub, sub_demand, scale, rule);
  detail::NetworkSimplex solver(rows, sub, supply, sub_demand, rule,
                                hint.empty() ? nullptr : &hint);
  solver.run();
  const auto& pi = solver.potentials();
  const double root = pi.back();
  std::vector<double> out(static_cast<std::size_t>(k));
  for (std::int64_t i = 0; i < k; ++i) out[i] = pi[i] - root;
  return out;
}

}  // namespace

double transport_cost(std::span<const double> u, std::span<const double> x) {
  return 0.5 * squared_distance(u, x);
}

TransportPlan solve_transport(const WeightedSample& rows, const WeightedSample& cols,
                              const SolverOptions& options) {
  if (rows.size() == 0 || cols.size() == 0)
    throw Error(ErrorCode::InvalidCount, "transport needs nonempty marginals");
  if (rows.dim() != cols.dim())
    throw Error(ErrorCode::InvalidDimension, "marginals live in different dimensions");
  require_finite(rows, "row");
  require_finite(cols, "column");
  if (std::abs(total(rows.weights) - 1.0) > kMarginalTolerance ||
      std::abs(total(cols.weights) - 1.0) > kMarginalTolerance)
    throw Error(ErrorCode::InfeasibleMarginals, "marginal weights must each sum to one");

  const Pruned pr = prune(rows, options.prune_below);
  const Pruned pc = prune(cols, options.prune_below);
  if (pr.sample.size() == 0 || pc.sample.size() == 0)
    throw Error(ErrorCode::InfeasibleMarginals, "no atom carries mass after pruning");

  // A multiple of the row count keeps uniform row masses exactly equal.
  const auto k = static_cast<std::int64_t>(pr.sample.size());
  const std::int64_t scale = k * ((std::int64_t{1} << 50) / k);
  auto supply = to_integer_masses(pr.sample.weights, total(pr.sample.weights), scale);
  auto demand = to_integer_masses(pc.sample.weights, total(pc.sample.weights), scale);

  const auto hint =
      coarse_row_hint(pr.sample.atoms, supply, pc.sample.atoms, demand, scale, options.pivot);
  detail::NetworkSimplex solver(pr.sample.atoms, pc.sample.atoms, supply, demand, options.pivot,
                                hint.empty() ? nullptr : &hint);
  solver.run();

  TransportPlan plan;
  plan.pivots = solver.pivots();
  plan.row_marginals.assign(rows.size(), 0.0);
  plan.col_marginals.assign(cols.size(), 0.0);
  const double denom = static_cast<double>(scale);
  for (const auto& arc : solver.support()) {
    const std::size_t r = pr.original[arc.row];
    const std::size_t c = pc.original[arc.col];
    const double mass = static_cast<double>(arc.flow) / denom;
    plan.entries.push_back({r, c, mass});
    plan.row_marginals[r] += mass;
    plan.col_marginals[c] += mass;
  }
  plan.cost = plan_cost(plan, rows.atoms, cols.atoms);

  // Dual potentials; pruned atoms get the tightest feasible value.
  const auto& pi = solver.potentials();
  const double shift = pi[0];
  plan.row_potentials.assign(rows.size(), 0.0);
  plan.col_potentials.assign(cols.size(), 0.0);
  for (std::size_t a = 0; a < pr.original.size(); ++a)
    plan.row_potentials[pr.original[a]] = -(pi[a] - shift);
  for (std::size_t b = 0; b < pc.original.size(); ++b)
    plan.col_potentials[pc.original[b]] = pi[pr.original.size() + b] - shift;
  std::vector<char> row_kept(rows.size(), 0), col_kept(cols.size(), 0);
  for (auto r : pr.original) row_kept[r] = 1;
  for (auto c : pc.original) col_kept[c] = 1;
  for (std::size_t c = 0; c < cols.size(); ++c) {
    if (col_kept[c]) continue;
    double g = std::numeric_limits<double>::infinity();
    for (auto r : pr.original)
      g = std::min(g, transport_cost(rows.atoms[r], cols.atoms[c]) - plan.row_potentials[r]);
    plan.col_potentials[c] = g;
  }
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (row_kept[r]) continue;
    double f = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < cols.size(); ++c)
      f = std::min(f, transport_cost(rows.atoms[r], cols.atoms[c]) - plan.col_potentials[c]);
    plan.row_potentials[r] = f;
  }
  return plan;
}

double plan_cost(const TransportPlan& plan, const PointSet& rows, const PointSet& cols) {
  double c = 0.0;
  for (const auto& e : plan.entries) c += e.mass * transport_cost(rows[e.row], cols[e.col]);
  return c;
}

double marginal_error(const TransportPlan& plan, std::span<const double> row_weights,
                      std::span<const double> col_weights) {
  std::vector<double> rs(row_weights.size(), 0.0), cs(col_weights.size(), 0.0);
  for (const auto& e : plan.entries) {
    rs[e.row] += e.mass;
    cs[e.col] += e.mass;
  }
  double err = 0.0;
  for (std::size_t i = 0; i < rs.size(); ++i) err = std::max(err, std::abs(rs[i] - row_weights[i]));
  for (std::size_t j = 0; j < cs.size(); ++j) err = std::max(err, std::abs(cs[j] - col_weights[j]));
  return err;
}

DualCheck check_duals(const TransportPlan& plan, const WeightedSample& rows,
                      const WeightedSample& cols) {
  DualCheck out;
  if (plan.row_potentials.size() != rows.size() || plan.col_potentials.size() != cols.size())
    throw Error(ErrorCode::InvalidArgument, "plan carries no dual potentials");
  out.min_reduced_cost = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) {
      const double rc = transport_cost(rows.atoms[i], cols.atoms[j]) - plan.row_potentials[i] -
                        plan.col_potentials[j];
      out.min_reduced_cost = std::min(out.min_reduced_cost, rc);
    }
  for (const auto& e : plan.entries) {
    const double rc = transport_cost(rows.atoms[e.row], cols.atoms[e.col]) -
                      plan.row_potentials[e.row] - plan.col_potentials[e.col];
    out.max_support_residual = std::max(out.max_support_residual, std::abs(rc));
  }
  double dual = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) dual += rows.weights[i] * plan.row_potentials[i];
  for (std::size_t j = 0; j < cols.size(); ++j) dual += cols.weights[j] * plan.col_potentials[j];
  out.duality_gap = plan.cost - dual;
  return out;
}

double support_monotonicity_violation(const TransportPlan& plan, const PointSet& rows,
                                      const PointSet& cols) {
  double worst = 0.0;
  const auto& en = plan.entries;
  for (std::size_t a = 0; a < en.size(); ++a) {
    const auto u1 = rows[en[a].row];
    const auto x1 = cols[en[a].col];
    for (std::size_t b = a + 1; b < en.size(); ++b) {
      const auto u2 = rows[en[b].row];
      const auto x2 = cols[en[b].col];
      double s = 0.0;
      for (std::size_t c = 0; c < u1.size(); ++c) s += (x1[c] - x2[c]) * (u1[c] - u2[c]);
      worst = std::max(worst, -s);
    }
  }
  return worst;
}

QuantileMap barycentric_map(const TransportPlan& plan, const WeightedSample& sample,
                            const SphericalGrid& grid, std::span<const double> x) {
  const std::size_t k = grid.size();
  const std::size_t d = sample.dim();
  QuantileMap map{grid, PointSet(d, k), to_point(x), sample};
  std::vector<double> row_mass(k, 0.0);
  for (const auto& e : plan.entries) {
    if (e.row >= k || e.col >= sample.size())
      throw Error(ErrorCode::InvalidArgument, "plan does not match grid and sample");
    row_mass[e.row] += e.mass;
    auto q = map.images[e.row];
    const auto xj = sample.atoms[e.col];
    for (std::size_t c = 0; c < d; ++c) q[c] += e.mass * xj[c];
  }
  for (std::size_t i = 0; i < k; ++i) {
    if (!(row_mass[i] > 0.0))
      throw Error(ErrorCode::DegenerateRow, "gridpoint " + std::to_string(i) + " has no mass");
    auto q = map.images[i];
    for (std::size_t c = 0; c < d; ++c) q[c] /= row_mass[i];
  }
  return map;
}

MonotoneReport check_monotone(const QuantileMap& map, double tolerance) {
  MonotoneReport report;
  const auto& u = map.grid.points;
  const auto& q = map.images;
  std::pair<std::size_t, std::size_t> worst_pair{0, 0};
  for (std::size_t r = 0; r < q.size(); ++r) {
    const auto ur = u[r];
    const auto qr = q[r];
    for (std::size_t s = r + 1; s < q.size(); ++s) {
      const auto us = u[s];
      const auto qs = q[s];
      double ip = 0.0;
      for (std::size_t c = 0; c < ur.size(); ++c) ip += (qs[c] - qr[c]) * (us[c] - ur[c]);
      if (-ip > report.max_violation) {
        report.max_violation = -ip;
        worst_pair = {r, s};
      }
    }
  }
  if (report.max_violation > tolerance) report.offending = worst_pair;
  return report;
}

}  // namespace vqar
