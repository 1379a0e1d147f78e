#pragma once

#include <cstdint>
#include <span>

#include "vqar/grid.hpp"
#include "vqar/points.hpp"
#include "vqar/sample.hpp"
#include "vqar/simulate.hpp"
#include "vqar/transport.hpp"

namespace vqar {

/// Regularized lower incomplete gamma P(a, x).
double regularized_gamma_p(double a, double x);

double chi2_cdf(std::size_t dof, double x);

/// tau-quantile of the chi-square law; closed form for 2 degrees of freedom,
/// bisection on the CDF otherwise.
double chi2_quantile(std::size_t dof, double tau);

/// Disc {y : |y - center|^2 <= scale^2 chi2_{2,tau}}.
struct GaussianRegion {
  Point center;
  double scale = 0.0;
  double tau = 0.0;
  double radius_squared = 0.0;

  bool contains(std::span<const double> y) const {
    return squared_distance(center, y) <= radius_squared;
  }
};

/// Exact conditional region of the Case 1 process given X_t = x.
GaussianRegion case1_region(std::span<const double> x, double tau);

/// Exact Case 1 conditional quantile map on the gridpoints:
/// u -> g(x) + |v(x)| sqrt(chi2_{2,|u|}) u / |u|, origin -> g(x).
QuantileMap case1_oracle_map(std::span<const double> x, const SphericalGrid& grid);

/// Map fitted to n simulated one-step transitions from x (Cases 2 and 3).
/// `angle` fixes the Case 3 noise rotation.
QuantileMap sim_oracle_map(int case_id, std::span<const double> x, std::size_t n,
                           const SphericalGrid& grid, std::uint64_t seed, double angle = 0.0,
                           const SolverOptions& solver = {});

/// Exact optimum by enumeration, for at most 4 atoms on each side: permutations
/// for equal uniform marginals, otherwise every basis of the transportation LP.
TransportPlan brute_force_transport(const WeightedSample& rows, const WeightedSample& cols);

}  // namespace vqar
