#include <doctest.h>

#include <cmath>
#include <numbers>

#include "vqar/error.hpp"
#include "vqar/simulate.hpp"

using namespace vqar;

namespace {

double second_moment(const PointSet& s) {
  double acc = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) acc += dot(s[i], s[i]);
  return acc / static_cast<double>(s.size());
}

}  // namespace

TEST_CASE("case 1 deterministic steps") {
  const Vec2 y = dgp::case1_step({3.0, 4.0}, {0.0, 0.0});
  CHECK(y[0] == doctest::Approx(7.0 / 3.0));
  CHECK(y[1] == doctest::Approx(std::sqrt(30.0) / 2.0));
  CHECK(y[1] == doctest::Approx(2.73861).epsilon(1e-5));

  for (Vec2 e : {Vec2{1.0, -2.0}, Vec2{-7.5, 3.0}}) {
    const Vec2 z = dgp::case1_step({0.0, 0.0}, e);
    CHECK(z[0] == 0.0);
    CHECK(z[1] == std::sqrt(5.0) / 2.0);
  }
  CHECK(dgp::case1_scale({3.0, 4.0}) == doctest::Approx(1.0));
}

TEST_CASE("case 2 deterministic steps and noise support") {
  const Vec2 a = dgp::case2_step({0.0, 0.0}, {0.3, -0.9});
  CHECK(a[0] == -0.5);
  CHECK(a[1] == 1.0);
  const Vec2 b = dgp::case2_step({1.0, 1.0}, {0.0, 0.0});
  CHECK(b[0] == doctest::Approx(0.26159).epsilon(1e-5));
  CHECK(b[1] == doctest::Approx(0.97815).epsilon(1e-5));
  CHECK(b[1] == doctest::Approx(std::cos(std::numbers::pi / 10.0 * 2.0 / 3.0)));
  CHECK(dgp::squash(-3.0) == doctest::Approx(-0.75));

  Rng rng(3);
  for (int i = 0; i < 100000; ++i) {
    const Vec2 e = dgp::case2_noise(rng);
    REQUIRE(std::abs(e[0]) <= 1.0);
    REQUIRE(std::abs(e[1]) <= 1.0);
  }

  SimConfig cfg;
  cfg.case_id = 2;
  cfg.T = 5000;
  cfg.T0 = 0;
  cfg.seed = 9;
  const auto s = simulate(cfg);
  for (std::size_t t = 0; t + 1 < s.size(); ++t) {
    const Vec2 x{s[t][0], s[t][1]};
    const Vec2 g = dgp::case2_drift(x);
    const double v = 0.5 * std::hypot(x[0], x[1]);
    REQUIRE(std::abs(s[t + 1][0] - g[0]) <= v * (1.0 + 1e-12) + 1e-15);
    REQUIRE(std::abs(s[t + 1][1] - g[1]) <= v * (1.0 + 1e-12) + 1e-15);
  }
}

TEST_CASE("case 3 deterministic step and noise") {
  const Vec2 y = dgp::case3_step({0.0, 0.0}, {0.0, 0.0}, 1.234);
  CHECK(y[0] == doctest::Approx(0.34657).epsilon(1e-5));
  CHECK(y[0] == doctest::Approx(std::log(2.0) / 2.0));
  CHECK(y[1] == 0.0);

  // rotation by pi/2 maps (1, 0) to (0, 1)
  const Vec2 r = dgp::case3_step({0.0, 0.0}, {1.0, 0.0}, std::numbers::pi / 2.0);
  CHECK(r[0] == doctest::Approx(std::log(2.0) / 2.0));
  CHECK(r[1] == doctest::Approx(1.0));
  CHECK(dgp::case3_angle(5000) == doctest::Approx(std::numbers::pi));

  const double m = case3_noise_second_moment(1'000'000, 5);
  MESSAGE("E|eps|^2 = " << m);
  CHECK(std::abs(m - 0.83) <= 0.01);
}

TEST_CASE("case 3 mixture component frequencies") {
  std::array<std::array<double, 4>, 2> freq{};
  for (int r = 0; r < 2; ++r) {
    Rng rng(100 + r);
    const int n = 400000;
    for (int i = 0; i < n; ++i) {
      int c = -1;
      dgp::case3_noise(rng, &c);
      REQUIRE(c >= 0);
      REQUIRE(c < 4);
      freq[r][c] += 1.0 / n;
    }
  }
  for (int c = 0; c < 4; ++c) {
    CHECK(std::abs(freq[0][c] - 0.25) <= 0.01);
    CHECK(std::abs(freq[1][c] - 0.25) <= 0.01);
    CHECK(std::abs(freq[0][c] - freq[1][c]) <= 0.01);
  }
}

TEST_CASE("reproducibility and warm-up") {
  for (int c : {1, 2, 3}) {
    SimConfig cfg;
    cfg.case_id = c;
    cfg.T = 200;
    cfg.T0 = 50;
    cfg.seed = 77;
    const auto a = simulate(cfg);
    const auto b = simulate(cfg);
    CHECK(a == b);
    CHECK(a.size() == 200);

    SimConfig raw = cfg;
    raw.T0 = 0;
    raw.T = 250;
    const auto full = simulate(raw);
    for (std::size_t t = 0; t < 200; ++t) {
      REQUIRE(a[t][0] == full[t + 50][0]);
      REQUIRE(a[t][1] == full[t + 50][1]);
    }

    cfg.seed = 78;
    CHECK_FALSE(simulate(cfg) == a);
  }
  SimConfig c1;
  c1.T = 10;
  c1.T0 = 0;
  CHECK(gen_case1(c1) == simulate(c1));
  c1.case_id = 2;
  CHECK(gen_case2(c1) == simulate(c1));
  c1.case_id = 3;
  CHECK(gen_case3(c1) == simulate(c1));
}

TEST_CASE("rotation flags") {
  SimConfig cfg;
  cfg.case_id = 3;
  cfg.T = 100;
  cfg.T0 = 20;
  cfg.seed = 4;
  const auto raw_clock = simulate(cfg);
  cfg.rotation_reset = true;
  const auto reset_clock = simulate(cfg);
  CHECK_FALSE(raw_clock == reset_clock);
  cfg.rotation_enabled = false;
  const auto off = simulate(cfg);
  CHECK_FALSE(off == reset_clock);

  // Without warm-up the two clocks coincide.
  cfg.rotation_enabled = true;
  cfg.T0 = 0;
  cfg.rotation_reset = false;
  const auto a = simulate(cfg);
  cfg.rotation_reset = true;
  CHECK(simulate(cfg) == a);
}

TEST_CASE("configuration errors") {
  SimConfig cfg;
  cfg.T = 0;
  CHECK_THROWS_AS(simulate(cfg), Error);
  cfg.T = 10;
  cfg.case_id = 4;
  try {
    simulate(cfg);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidArgument);
  }
  CHECK_THROWS_AS(contraction_estimate(1, 0, 10, 1.0, 0), Error);
  CHECK_THROWS_AS(contraction_estimate(1, 10, 10, 0.0, 0), Error);
}

TEST_CASE("case 1 second moments are stable across seeds") {
  SimConfig cfg;
  cfg.T = 50000;
  cfg.seed = 1;
  const double a = second_moment(simulate(cfg));
  cfg.seed = 2;
  const double b = second_moment(simulate(cfg));
  MESSAGE("second moments " << a << " " << b);
  CHECK(std::isfinite(a));
  CHECK(std::abs(a - b) / std::max(a, b) < 0.05);
}

TEST_CASE("contraction estimates") {
  const double bound1 = 17.0 / 36.0 + std::numbers::pi * std::numbers::pi / 50.0;
  const double bound2 = (25.0 + std::numbers::pi * std::numbers::pi) / 50.0 + 1.0 / 6.0;
  CHECK(bound1 == doctest::Approx(0.669614).epsilon(1e-6));
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const double c1 = contraction_estimate(1, 500, 2000, 10.0, seed);
    const double c2 = contraction_estimate(2, 500, 2000, 10.0, seed);
    MESSAGE("seed " << seed << ": case 1 " << c1 << ", case 2 " << c2);
    CHECK(c1 <= bound1 + 0.05);
    CHECK(c2 <= bound2 + 0.05);
    CHECK(c1 <= 0.95);
    CHECK(c2 <= 0.95);
    CHECK(c1 > 0.0);
  }
  CHECK(contraction_estimate(1, 50, 100, 10.0, 8) == contraction_estimate(1, 50, 100, 10.0, 8));
}
