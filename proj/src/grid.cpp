#include "vqar/grid.hpp"

#include <cmath>
#include <numbers>

#include "vqar/error.hpp"
#include "vqar/rng.hpp"

namespace vqar {

Point WeightedSample::mean() const {
  Point m(dim(), 0.0);
  for (std::size_t j = 0; j < size(); ++j) {
    const auto x = atoms[j];
    for (std::size_t c = 0; c < m.size(); ++c) m[c] += weights[j] * x[c];
  }
  return m;
}

void normalize_weights(std::vector<double>& weights) {
  if (weights.empty()) return;
  double total = 0.0;
  for (double w : weights) total += w;
  std::size_t largest = 0;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    weights[j] /= total;
    if (weights[j] > weights[largest]) largest = j;
  }
  double rest = 0.0;
  for (std::size_t j = 0; j < weights.size(); ++j)
    if (j != largest) rest += weights[j];
  weights[largest] = 1.0 - rest;
}

SphericalGrid build_grid(std::size_t dim, std::size_t rings, std::size_t directions,
                         std::uint64_t seed) {
  if (dim == 0) throw Error(ErrorCode::InvalidDimension, "grid dimension must be >= 1");
  if (rings < 1 || directions < 1)
    throw Error(ErrorCode::InvalidCount, "ring and direction counts must be >= 1");
  if (dim == 1 && directions != 2)
    throw Error(ErrorCode::InvalidCount, "a 1-d grid has exactly the two directions +1 and -1");

  SphericalGrid grid;
  grid.dim = dim;
  grid.rings = rings;
  grid.directions_count = directions;
  grid.seed = dim >= 3 ? seed : 0;
  grid.directions = PointSet(dim);
  grid.directions.reserve(directions);

  Point v(dim);
  if (dim == 1) {
    grid.directions.push_back(Point{1.0});
    grid.directions.push_back(Point{-1.0});
  } else if (dim == 2) {
    for (std::size_t s = 0; s < directions; ++s) {
      const double angle = 2.0 * std::numbers::pi * static_cast<double>(s) /
                           static_cast<double>(directions);
      v[0] = std::cos(angle);
      v[1] = std::sin(angle);
      grid.directions.push_back(v);
    }
  } else {
    Rng rng(seed);
    for (std::size_t s = 0; s < directions; ++s) {
      double n = 0.0;
      while (n < 1e-12) {
        for (auto& c : v) c = rng.normal();
        n = norm(v);
      }
      for (auto& c : v) c /= n;
      grid.directions.push_back(v);
    }
  }

  grid.points = PointSet(dim);
  grid.points.reserve(rings * directions + 1);
  for (std::size_t j = 1; j <= rings; ++j) {
    const double r = grid.ring_radius(j);
    for (std::size_t s = 0; s < directions; ++s) {
      const auto dir = grid.directions[s];
      for (std::size_t c = 0; c < dim; ++c) v[c] = r * dir[c];
      grid.points.push_back(v);
    }
  }
  grid.points.push_back(Point(dim, 0.0));
  return grid;
}

WeightedSample grid_measure(const SphericalGrid& grid) {
  const std::size_t k = grid.size();
  WeightedSample mu{grid.points, std::vector<double>(k, 1.0 / static_cast<double>(k))};
  double rest = 0.0;
  for (std::size_t i = 0; i + 1 < k; ++i) rest += mu.weights[i];
  mu.weights[k - 1] = 1.0 - rest;
  return mu;
}

std::size_t default_grid_side(std::size_t target_points) {
  auto side = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(target_points))));
  return side < 1 ? 1 : side;
}

}  // namespace vqar
