#pragma once

#include <cstdint>

#include "vqar/points.hpp"
#include "vqar/rng.hpp"
#include "vqar/sample.hpp"

namespace vqar::testing {

inline WeightedSample random_sample(std::size_t n, std::size_t d, Rng& rng, bool uniform_weights,
                                    double spread = 1.0) {
  WeightedSample s{PointSet(d), {}};
  Point p(d);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& c : p) c = spread * rng.normal();
    s.atoms.push_back(p);
    s.weights.push_back(uniform_weights ? 1.0 : 0.05 + rng.uniform());
  }
  normalize_weights(s.weights);
  return s;
}

inline WeightedSample uniform_on(const PointSet& atoms) {
  WeightedSample s{atoms, std::vector<double>(atoms.size(), 1.0)};
  normalize_weights(s.weights);
  return s;
}

}  // namespace vqar::testing
