#pragma once

#include <vector>

#include "vqar/points.hpp"

namespace vqar {

/// Discrete probability measure: atoms in R^d with nonnegative weights summing to one.
struct WeightedSample {
  PointSet atoms;
  std::vector<double> weights;

  std::size_t size() const noexcept { return weights.size(); }
  std::size_t dim() const noexcept { return atoms.dim(); }

  /// Weighted mean sum_j w_j x_j.
  Point mean() const;
};

/// Divide by the total and assign the rounding residual to the largest weight,
/// so the weights sum to one exactly in floating point (up to the final addition).
void normalize_weights(std::vector<double>& weights);

}  // namespace vqar
