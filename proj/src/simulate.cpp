#include "vqar/simulate.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "vqar/error.hpp"

namespace vqar {

namespace dgp {

namespace {
double norm2(Vec2 x) { return std::hypot(x[0], x[1]); }
}  // namespace

Vec2 case1_drift(Vec2 x) {
  const double n2 = x[0] * x[0] + x[1] * x[1];
  return {(x[0] + x[1]) / 3.0, 0.5 * std::sqrt(n2 + 5.0)};
}

double case1_scale(Vec2 x) { return std::sin(std::numbers::pi * norm2(x) / 10.0); }

Vec2 case1_step(Vec2 x, Vec2 eps) {
  const Vec2 g = case1_drift(x);
  const double v = case1_scale(x);
  return {g[0] + v * eps[0], g[1] + v * eps[1]};
}

Vec2 case1_noise(Rng& rng) {
  const double a = rng.normal();
  const double b = rng.normal();
  return {a, b};
}

double squash(double v) { return v / (1.0 + std::abs(v)); }

Vec2 case2_drift(Vec2 x) {
  const double s = x[0] + x[1];
  return {std::tanh(0.5 * s) - 0.5, std::cos(std::numbers::pi / 10.0 * squash(s))};
}

Vec2 case2_step(Vec2 x, Vec2 eps) {
  const Vec2 g = case2_drift(x);
  const double v = 0.5 * norm2(x);
  return {g[0] + v * eps[0], g[1] + v * eps[1]};
}

Vec2 case2_noise(Rng& rng) {
  const double a = rng.uniform(-1.0, 1.0);
  const double b = rng.uniform(-1.0, 1.0);
  return {a, b};
}

Vec2 case3_drift(Vec2 x) {
  const double n = norm2(x);
  return {std::log(n + 2.0) / (n + 2.0), n / (n + std::numbers::sqrt2)};
}

Vec2 case3_step(Vec2 x, Vec2 eps, double angle) {
  const Vec2 g = case3_drift(x);
  const double v = std::sqrt(norm2(x) + 1.0);
  const double c = std::cos(angle), s = std::sin(angle);
  const Vec2 r{c * eps[0] - s * eps[1], s * eps[0] + c * eps[1]};
  return {g[0] + v * r[0], g[1] + v * r[1]};
}

Vec2 case3_noise(Rng& rng, int* component) {
  const auto idx = static_cast<int>(std::floor(4.0 * rng.uniform()));
  const double a = rng.normal();
  const double b = rng.normal();
  if (component) *component = idx;
  const Vec2& m = kCase3Means[static_cast<std::size_t>(idx)];
  return {m[0] + kCase3ComponentSd * a, m[1] + kCase3ComponentSd * b};
}

double case3_angle(std::size_t t) {
  return std::numbers::pi * static_cast<double>(t) / 5000.0;
}

Vec2 step(int case_id, Vec2 x, Vec2 eps, double angle) {
  switch (case_id) {
    case 1: return case1_step(x, eps);
    case 2: return case2_step(x, eps);
    case 3: return case3_step(x, eps, angle);
    default: throw Error(ErrorCode::InvalidArgument, "case must be 1, 2 or 3");
  }
}

Vec2 noise(int case_id, Rng& rng) {
  switch (case_id) {
    case 1: return case1_noise(rng);
    case 2: return case2_noise(rng);
    case 3: return case3_noise(rng);
    default: throw Error(ErrorCode::InvalidArgument, "case must be 1, 2 or 3");
  }
}

}  // namespace dgp

namespace {

Vec2 initial_state(int case_id, Rng& rng) {
  if (case_id == 2) return dgp::case2_noise(rng);  // Unif[-1,1]^2
  const double a = rng.normal();
  const double b = rng.normal();
  return {a, b};
}

PointSet run_chain(const SimConfig& cfg) {
  if (cfg.T < 1) throw Error(ErrorCode::InvalidCount, "series length must be >= 1");
  Rng rng(cfg.seed);
  Vec2 x = initial_state(cfg.case_id, rng);
  PointSet out(2);
  out.reserve(cfg.T);
  const std::size_t total = cfg.T0 + cfg.T;
  // x holds raw index t; the step produces raw index t + 1.
  for (std::size_t t = 0; t < total; ++t) {
    double angle = 0.0;
    if (cfg.case_id == 3 && cfg.rotation_enabled) {
      const std::size_t clock = cfg.rotation_reset ? (t >= cfg.T0 ? t - cfg.T0 : 0) : t;
      angle = dgp::case3_angle(clock);
    }
    x = dgp::step(cfg.case_id, x, dgp::noise(cfg.case_id, rng), angle);
    if (t + 1 > cfg.T0) out.push_back(x);
  }
  return out;
}

}  // namespace

PointSet simulate(const SimConfig& cfg) {
  if (cfg.case_id < 1 || cfg.case_id > 3)
    throw Error(ErrorCode::InvalidArgument, "case must be 1, 2 or 3");
  return run_chain(cfg);
}

PointSet gen_case1(const SimConfig& cfg) {
  SimConfig c = cfg;
  c.case_id = 1;
  return run_chain(c);
}

PointSet gen_case2(const SimConfig& cfg) {
  SimConfig c = cfg;
  c.case_id = 2;
  return run_chain(c);
}

PointSet gen_case3(const SimConfig& cfg) {
  SimConfig c = cfg;
  c.case_id = 3;
  return run_chain(c);
}

double contraction_estimate(int case_id, std::size_t n_pairs, std::size_t n_eps, double radius,
                            std::uint64_t seed) {
  if (case_id < 1 || case_id > 3) throw Error(ErrorCode::InvalidArgument, "case must be 1, 2 or 3");
  if (n_pairs < 1 || n_eps < 1) throw Error(ErrorCode::InvalidCount, "need pairs and draws");
  if (!(radius > 0.0)) throw Error(ErrorCode::InvalidArgument, "radius must be positive");
  Rng rng(seed);
  auto in_disc = [&] {
    const double r = radius * std::sqrt(rng.uniform());
    const double a = 2.0 * std::numbers::pi * rng.uniform();
    return Vec2{r * std::cos(a), r * std::sin(a)};
  };
  double worst = 0.0;
  std::vector<Vec2> eps(n_eps);
  for (std::size_t p = 0; p < n_pairs; ++p) {
    Vec2 x, y;
    double dxy;
    do {
      x = in_disc();
      y = in_disc();
      dxy = std::hypot(x[0] - y[0], x[1] - y[1]);
    } while (dxy < 1e-8);
    for (auto& e : eps) e = dgp::noise(case_id, rng);
    double acc = 0.0;
    for (const auto& e : eps) {
      const Vec2 gx = dgp::step(case_id, x, e, 0.0);
      const Vec2 gy = dgp::step(case_id, y, e, 0.0);
      const double a = gx[0] - gy[0], b = gx[1] - gy[1];
      acc += a * a + b * b;
    }
    worst = std::max(worst, acc / static_cast<double>(n_eps) / (dxy * dxy));
  }
  return worst;
}

double case3_noise_second_moment(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 e = dgp::case3_noise(rng);
    acc += e[0] * e[0] + e[1] * e[1];
  }
  return acc / static_cast<double>(n);
}

}  // namespace vqar
