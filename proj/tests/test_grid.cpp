#include <doctest.h>

#include <cmath>
#include <numbers>

#include "vqar/error.hpp"
#include "vqar/grid.hpp"

using namespace vqar;

TEST_CASE("two rings by four directions") {
  const auto g = build_grid(2, 2, 4, 0);
  REQUIRE(g.size() == 9);
  CHECK(g.origin_index() == 8);
  CHECK(norm(g.points[8]) == 0.0);
  for (std::size_t j = 1; j <= 2; ++j)
    for (std::size_t s = 0; s < 4; ++s) {
      const auto u = g.points[g.index(j, s)];
      const double r = j / 3.0;
      const double a = std::numbers::pi / 2.0 * static_cast<double>(s);
      CHECK(u[0] == doctest::Approx(r * std::cos(a)).epsilon(1e-14));
      CHECK(u[1] == doctest::Approx(r * std::sin(a)).epsilon(1e-14));
      CHECK(g.ring_of(g.index(j, s)) == j);
      CHECK(g.direction_of(g.index(j, s)) == s);
    }
  CHECK(g.ring_of(8) == 0);
}

TEST_CASE("minimal grid") {
  const auto g = build_grid(2, 1, 1, 0);
  REQUIRE(g.size() == 2);
  CHECK(g.points[0][0] == 0.5);
  CHECK(g.points[0][1] == 0.0);
  CHECK(g.points[1][0] == 0.0);
  CHECK(g.points[1][1] == 0.0);
}

TEST_CASE("seeded directions in three dimensions are balanced") {
  const auto g = build_grid(3, 2, 100, 7);
  REQUIRE(g.size() == 201);
  Point mean(3, 0.0);
  for (std::size_t s = 0; s < 100; ++s) {
    CHECK(std::abs(norm(g.directions[s]) - 1.0) < 1e-12);
    for (int c = 0; c < 3; ++c) mean[c] += g.directions[s][c] / 100.0;
  }
  CHECK(norm(mean) < 0.2);
  CHECK(build_grid(3, 2, 100, 7) == g);
  CHECK_FALSE(build_grid(3, 2, 100, 8) == g);
}

TEST_CASE("one-dimensional grid") {
  const auto g = build_grid(1, 3, 2);
  REQUIRE(g.size() == 7);
  CHECK(g.directions[0][0] == 1.0);
  CHECK(g.directions[1][0] == -1.0);
  CHECK(g.points[g.index(3, 1)][0] == -0.75);
  CHECK_THROWS_AS(build_grid(1, 3, 3), Error);
}

TEST_CASE("invariants over a range of shapes") {
  for (std::size_t d : {1, 2, 3, 5}) {
    for (std::size_t rings : {1, 4, 15}) {
      const std::size_t dirs = d == 1 ? 2 : 9;
      const auto g = build_grid(d, rings, dirs, 11);
      REQUIRE(g.size() == rings * dirs + 1);
      for (std::size_t i = 0; i + 1 < g.size(); ++i) {
        const double r = norm(g.points[i]);
        CHECK(r < 1.0);
        const double q = r * static_cast<double>(rings + 1);
        CHECK(std::abs(q - std::round(q)) < 1e-12);
        CHECK(std::round(q) == static_cast<double>(g.ring_of(i)));
      }
      CHECK(build_grid(d, rings, dirs, 11) == g);
    }
  }
}

TEST_CASE("planar directions sum to zero") {
  for (std::size_t ks = 2; ks <= 40; ++ks) {
    const auto g = build_grid(2, 1, ks);
    double sx = 0.0, sy = 0.0;
    for (std::size_t s = 0; s < ks; ++s) {
      sx += g.directions[s][0];
      sy += g.directions[s][1];
    }
    CHECK(std::hypot(sx, sy) < 1e-10);
  }
  // seed is ignored in the plane
  CHECK(build_grid(2, 3, 5, 1) == build_grid(2, 3, 5, 99));
}

TEST_CASE("grid measure") {
  const auto nine = grid_measure(build_grid(2, 2, 4));
  REQUIRE(nine.size() == 9);
  for (double w : nine.weights) CHECK(w == doctest::Approx(1.0 / 9.0).epsilon(1e-15));
  const auto two = grid_measure(build_grid(2, 1, 1));
  CHECK(two.weights[0] == 0.5);
  CHECK(two.weights[1] == 0.5);
  for (std::size_t side : {3, 7, 15, 31}) {
    const auto m = grid_measure(build_grid(2, side, side));
    double s = 0.0;
    for (double w : m.weights) s += w;
    CHECK(s == 1.0);
  }
}

TEST_CASE("argument errors") {
  auto code = [](auto&& f) {
    try {
      f();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::SolverFailure;
  };
  CHECK(code([] { build_grid(0, 2, 2); }) == ErrorCode::InvalidDimension);
  CHECK(code([] { build_grid(2, 0, 2); }) == ErrorCode::InvalidCount);
  CHECK(code([] { build_grid(2, 2, 0); }) == ErrorCode::InvalidCount);
}

TEST_CASE("default side") {
  CHECK(default_grid_side() == 15);
  CHECK(default_grid_side(226) == 16);
  CHECK(default_grid_side(1) == 1);
}
