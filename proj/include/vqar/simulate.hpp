#pragma once

#include <array>
#include <cstdint>

#include "vqar/points.hpp"
#include "vqar/rng.hpp"

namespace vqar {

struct SimConfig {
  int case_id = 1;
  std::size_t T = 10'000;
  std::size_t T0 = 10'000;
  std::uint64_t seed = 0;
  /// Case 3 only: rotate the noise by pi t / 5000.
  bool rotation_enabled = true;
  /// Case 3 only: restart the rotation clock after warm-up instead of using the raw index.
  bool rotation_reset = false;
};

using Vec2 = std::array<double, 2>;

/// One-step maps X_{t+1} = drift(X_t) + noise term, for a given noise draw.
namespace dgp {

Vec2 case1_drift(Vec2 x);
double case1_scale(Vec2 x);
Vec2 case1_step(Vec2 x, Vec2 eps);
Vec2 case1_noise(Rng& rng);

double squash(double v);  // v / (1 + |v|)
Vec2 case2_drift(Vec2 x);
Vec2 case2_step(Vec2 x, Vec2 eps);
Vec2 case2_noise(Rng& rng);

inline constexpr std::array<Vec2, 4> kCase3Means{
    {{0.0, 0.0}, {0.866, -0.5}, {-0.866, -0.5}, {0.0, 1.0}}};
inline constexpr double kCase3ComponentSd = 0.2;

Vec2 case3_drift(Vec2 x);
/// `angle` is the rotation applied to the noise.
Vec2 case3_step(Vec2 x, Vec2 eps, double angle);
Vec2 case3_noise(Rng& rng, int* component = nullptr);
double case3_angle(std::size_t t);

Vec2 step(int case_id, Vec2 x, Vec2 eps, double angle = 0.0);
Vec2 noise(int case_id, Rng& rng);

}  // namespace dgp

/// Series X_{T0+1}, ..., X_{T0+T} of the selected process.
PointSet simulate(const SimConfig& cfg);
PointSet gen_case1(const SimConfig& cfg);
PointSet gen_case2(const SimConfig& cfg);
PointSet gen_case3(const SimConfig& cfg);

/// Largest Monte-Carlo estimate of E|G(x,e) - G(y,e)|^2 / |x - y|^2 over random
/// pairs x, y in the disc of the given radius, with common noise draws.
/// Case 3 uses the identity rotation.
double contraction_estimate(int case_id, std::size_t n_pairs, std::size_t n_eps, double radius,
                            std::uint64_t seed);

/// Monte-Carlo estimate of E|e|^2 for the Case 3 noise mixture.
double case3_noise_second_moment(std::size_t n, std::uint64_t seed);

}  // namespace vqar
