#include "vqar/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "vqar/error.hpp"
#include "vqar/rng.hpp"

namespace vqar {

namespace {

constexpr double kGammaEps = 1e-14;
constexpr int kGammaMaxIter = 10'000;

double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n < kGammaMaxIter; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * kGammaEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Q(a, x) by the modified Lentz continued fraction.
double gamma_q_fraction(double a, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kGammaMaxIter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kGammaEps) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double regularized_gamma_p(double a, double x) {
  if (!(a > 0.0)) throw Error(ErrorCode::InvalidArgument, "gamma shape must be positive");
  if (x <= 0.0) return 0.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_fraction(a, x);
}

double chi2_cdf(std::size_t dof, double x) {
  if (dof == 0) throw Error(ErrorCode::InvalidDimension, "degrees of freedom must be >= 1");
  return regularized_gamma_p(0.5 * static_cast<double>(dof), 0.5 * x);
}

double chi2_quantile(std::size_t dof, double tau) {
  if (dof == 0) throw Error(ErrorCode::InvalidDimension, "degrees of freedom must be >= 1");
  if (!(tau > 0.0 && tau < 1.0)) throw Error(ErrorCode::TauOutOfRange, "tau must lie in (0, 1)");
  if (dof == 2) return -2.0 * std::log1p(-tau);
  const double d = static_cast<double>(dof);
  double lo = 0.0;
  double hi = d + 20.0 * std::sqrt(d) + 40.0;
  while (hi - lo > 1e-12 * std::max(1.0, hi)) {
    const double mid = 0.5 * (lo + hi);
    if (chi2_cdf(dof, mid) < tau) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

GaussianRegion case1_region(std::span<const double> x, double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw Error(ErrorCode::TauOutOfRange, "tau must lie in (0, 1)");
  const Vec2 xt{x[0], x[1]};
  const double v = dgp::case1_scale(xt);
  if (std::abs(v) < 1e-12)
    throw Error(ErrorCode::DegenerateScale, "conditional law is a point mass at this x");
  const Vec2 g = dgp::case1_drift(xt);
  GaussianRegion r;
  r.center = {g[0], g[1]};
  r.scale = std::abs(v);
  r.tau = tau;
  r.radius_squared = v * v * chi2_quantile(2, tau);
  return r;
}

QuantileMap case1_oracle_map(std::span<const double> x, const SphericalGrid& grid) {
  if (grid.dim != 2) throw Error(ErrorCode::DimensionUnsupported, "Case 1 lives in R^2");
  const Vec2 xt{x[0], x[1]};
  const Vec2 g = dgp::case1_drift(xt);
  const double v = std::abs(dgp::case1_scale(xt));
  QuantileMap map{grid, PointSet(2, grid.size()), to_point(x), {}};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto u = grid.points[i];
    const double r = norm(u);
    auto q = map.images[i];
    q[0] = g[0];
    q[1] = g[1];
    if (r > 0.0) {
      const double radius = v * std::sqrt(chi2_quantile(2, r));
      q[0] += radius * u[0] / r;
      q[1] += radius * u[1] / r;
    }
  }
  return map;
}

QuantileMap sim_oracle_map(int case_id, std::span<const double> x, std::size_t n,
                           const SphericalGrid& grid, std::uint64_t seed, double angle,
                           const SolverOptions& solver) {
  if (grid.dim != 2) throw Error(ErrorCode::DimensionUnsupported, "simulated cases live in R^2");
  if (n < grid.size())
    throw Error(ErrorCode::InvalidCount, "oracle sample must have at least k atoms");
  Rng rng(seed);
  const Vec2 xt{x[0], x[1]};
  WeightedSample sample{PointSet(2), std::vector<double>(n, 1.0 / static_cast<double>(n))};
  sample.atoms.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 next = dgp::step(case_id, xt, dgp::noise(case_id, rng), angle);
    sample.atoms.push_back(next);
  }
  normalize_weights(sample.weights);
  const auto plan = solve_transport(grid_measure(grid), sample, solver);
  return barycentric_map(plan, sample, grid, x);
}

namespace {

// Solves the square system A z = b in place by Gaussian elimination with partial
// pivoting; false when A is singular.
bool solve_dense(std::vector<std::vector<double>>& a, std::vector<double>& b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    if (std::abs(a[piv][col]) < 1e-12) return false;
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[r][col] / a[col][col];
      if (f == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  for (std::size_t r = 0; r < n; ++r) b[r] /= a[r][r];
  return true;
}

TransportPlan make_plan(std::size_t k, std::size_t m, const std::vector<double>& flows,
                        const WeightedSample& rows, const WeightedSample& cols) {
  TransportPlan plan;
  plan.row_marginals.assign(k, 0.0);
  plan.col_marginals.assign(m, 0.0);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      const double f = flows[i * m + j];
      if (f > 1e-15) {
        plan.entries.push_back({i, j, f});
        plan.row_marginals[i] += f;
        plan.col_marginals[j] += f;
      }
    }
  plan.cost = plan_cost(plan, rows.atoms, cols.atoms);
  return plan;
}

}  // namespace

TransportPlan brute_force_transport(const WeightedSample& rows, const WeightedSample& cols) {
  const std::size_t k = rows.size(), m = cols.size();
  if (k == 0 || m == 0) throw Error(ErrorCode::InvalidCount, "empty marginal");
  if (k > 4 || m > 4) throw Error(ErrorCode::SizeExceeded, "enumeration limited to 4 x 4");

  auto uniform = [](const std::vector<double>& w) {
    return std::all_of(w.begin(), w.end(), [&](double v) {
      return std::abs(v - 1.0 / static_cast<double>(w.size())) < 1e-12;
    });
  };

  std::vector<double> best_flows;
  double best = std::numeric_limits<double>::infinity();

  if (k == m && uniform(rows.weights) && uniform(cols.weights)) {
    std::vector<std::size_t> perm(k);
    std::iota(perm.begin(), perm.end(), 0);
    do {
      double c = 0.0;
      for (std::size_t i = 0; i < k; ++i) c += transport_cost(rows.atoms[i], cols.atoms[perm[i]]);
      c /= static_cast<double>(k);
      if (c < best) {
        best = c;
        best_flows.assign(k * m, 0.0);
        for (std::size_t i = 0; i < k; ++i) best_flows[i * m + perm[i]] = 1.0 / static_cast<double>(k);
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return make_plan(k, m, best_flows, rows, cols);
  }

  // Every basic solution has k + m - 1 basic variables; the last column
  // constraint is implied by the others and dropped.
  const std::size_t vars = k * m;
  const std::size_t basis = k + m - 1;
  std::vector<char> pick(vars, 0);
  std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(basis), 1);
  std::sort(pick.begin(), pick.end());
  do {
    std::vector<std::size_t> chosen;
    for (std::size_t v = 0; v < vars; ++v)
      if (pick[v]) chosen.push_back(v);
    std::vector<std::vector<double>> a(basis, std::vector<double>(basis, 0.0));
    std::vector<double> b(basis);
    for (std::size_t r = 0; r < k; ++r) {
      b[r] = rows.weights[r];
      for (std::size_t c = 0; c < basis; ++c)
        if (chosen[c] / m == r) a[r][c] = 1.0;
    }
    for (std::size_t col = 0; col + 1 < m; ++col) {
      b[k + col] = cols.weights[col];
      for (std::size_t c = 0; c < basis; ++c)
        if (chosen[c] % m == col) a[k + col][c] = 1.0;
    }
    if (!solve_dense(a, b)) continue;
    if (std::any_of(b.begin(), b.end(), [](double v) { return v < -1e-12; })) continue;
    std::vector<double> flows(vars, 0.0);
    double c = 0.0;
    for (std::size_t q = 0; q < basis; ++q) {
      flows[chosen[q]] = std::max(0.0, b[q]);
      c += flows[chosen[q]] * transport_cost(rows.atoms[chosen[q] / m], cols.atoms[chosen[q] % m]);
    }
    if (c < best) {
      best = c;
      best_flows = std::move(flows);
    }
  } while (std::next_permutation(pick.begin(), pick.end()));
  if (best_flows.empty()) throw Error(ErrorCode::InfeasibleMarginals, "no feasible basis");
  return make_plan(k, m, best_flows, rows, cols);
}

}  // namespace vqar
