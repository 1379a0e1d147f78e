#pragma once

#include <cstdint>

#include "vqar/points.hpp"
#include "vqar/sample.hpp"

namespace vqar {

/// Regular grid of the unit ball: k_R rings of radius j/(k_R+1) crossed with
/// k_S unit directions, plus the origin.
///
/// Point index (j-1)*k_S + s holds ring j (1-based) along direction s; the
/// origin is the last point.
struct SphericalGrid {
  std::size_t dim = 0;
  std::size_t rings = 0;
  std::size_t directions_count = 0;
  std::uint64_t seed = 0;
  PointSet directions;
  PointSet points;

  std::size_t size() const noexcept { return points.size(); }
  std::size_t origin_index() const noexcept { return rings * directions_count; }
  std::size_t index(std::size_t ring, std::size_t direction) const noexcept {
    return (ring - 1) * directions_count + direction;
  }
  /// Ring number of a gridpoint, 0 for the origin.
  std::size_t ring_of(std::size_t i) const noexcept {
    return i == origin_index() ? 0 : i / directions_count + 1;
  }
  std::size_t direction_of(std::size_t i) const noexcept { return i % directions_count; }
  double ring_radius(std::size_t ring) const noexcept {
    return static_cast<double>(ring) / static_cast<double>(rings + 1);
  }

  friend bool operator==(const SphericalGrid&, const SphericalGrid&) = default;
};

/// Directions are equispaced angles from 0 for d=2, {+1,-1} for d=1 and
/// normalized seeded Gaussian draws for d>=3.
SphericalGrid build_grid(std::size_t dim, std::size_t rings, std::size_t directions,
                         std::uint64_t seed = 0);

/// Uniform discrete measure on the gridpoints.
WeightedSample grid_measure(const SphericalGrid& grid);

/// Square-balanced ring/direction count for a target grid size.
std::size_t default_grid_side(std::size_t target_points = 225);

}  // namespace vqar
