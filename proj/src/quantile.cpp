#include "vqar/quantile.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vqar/error.hpp"
#include "vqar/parallel.hpp"

namespace vqar {

namespace {

constexpr double kRadiusMatch = 1e-9;

void require_tau(double tau) {
  if (!(tau > 0.0 && tau < 1.0))
    throw Error(ErrorCode::TauOutOfRange, "tau must lie in (0, 1)");
}

void lerp_into(std::span<double> out, std::span<const double> a, std::span<const double> b,
               double t) {
  for (std::size_t c = 0; c < out.size(); ++c) out[c] = a[c] + t * (b[c] - a[c]);
}

double cross(double ax, double ay, double bx, double by) { return ax * by - ay * bx; }

double segment_distance(std::span<const double> p, std::span<const double> a,
                        std::span<const double> b) {
  const double dx = b[0] - a[0], dy = b[1] - a[1];
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0.0 ? ((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double ex = a[0] + t * dx - p[0], ey = a[1] + t * dy - p[1];
  return std::sqrt(ex * ex + ey * ey);
}

int orientation(std::span<const double> a, std::span<const double> b, std::span<const double> c) {
  const double v = cross(b[0] - a[0], b[1] - a[1], c[0] - a[0], c[1] - a[1]);
  return (v > 0.0) - (v < 0.0);
}

bool on_segment(std::span<const double> a, std::span<const double> b, std::span<const double> p) {
  return std::min(a[0], b[0]) <= p[0] && p[0] <= std::max(a[0], b[0]) &&
         std::min(a[1], b[1]) <= p[1] && p[1] <= std::max(a[1], b[1]);
}

bool segments_intersect(std::span<const double> p1, std::span<const double> p2,
                        std::span<const double> q1, std::span<const double> q2) {
  const int o1 = orientation(p1, p2, q1), o2 = orientation(p1, p2, q2);
  const int o3 = orientation(q1, q2, p1), o4 = orientation(q1, q2, p2);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(p1, p2, q1)) return true;
  if (o2 == 0 && on_segment(p1, p2, q2)) return true;
  if (o3 == 0 && on_segment(q1, q2, p1)) return true;
  if (o4 == 0 && on_segment(q1, q2, p2)) return true;
  return false;
}

}  // namespace

PointSet ring_vertices(const QuantileMap& map, double tau) {
  require_tau(tau);
  const auto& g = map.grid;
  const std::size_t d = map.images.dim();
  PointSet out(d, g.directions_count);
  const auto med = map.images[g.origin_index()];

  const double step = 1.0 / static_cast<double>(g.rings + 1);
  const double pos = tau / step;  // fractional ring number
  auto nearest = static_cast<std::size_t>(std::llround(pos));
  if (nearest >= 1 && nearest <= g.rings && std::abs(tau - g.ring_radius(nearest)) <= kRadiusMatch) {
    for (std::size_t s = 0; s < g.directions_count; ++s) {
      const auto q = map.images[g.index(nearest, s)];
      std::copy(q.begin(), q.end(), out[s].begin());
    }
    return out;
  }
  if (pos >= static_cast<double>(g.rings)) {
    for (std::size_t s = 0; s < g.directions_count; ++s) {
      const auto q = map.images[g.index(g.rings, s)];
      std::copy(q.begin(), q.end(), out[s].begin());
    }
    return out;
  }
  const auto lower = static_cast<std::size_t>(std::floor(pos));
  const double t = (tau - g.ring_radius(lower)) / step;
  for (std::size_t s = 0; s < g.directions_count; ++s) {
    const auto a = lower == 0 ? med : map.images[g.index(lower, s)];
    const auto b = map.images[g.index(lower + 1, s)];
    lerp_into(out[s], a, b, t);
  }
  return out;
}

PointSet contour(const QuantileMap& map, double tau) {
  if (map.images.dim() != 2)
    throw Error(ErrorCode::DimensionUnsupported, "contours are polygons only for d = 2");
  return ring_vertices(map, tau);
}

Point median(const QuantileMap& map) { return to_point(map.images[map.grid.origin_index()]); }

bool region_contains(const QuantileMap& map, double tau, std::span<const double> y) {
  require_tau(tau);
  if (map.images.dim() == 2) return point_in_polygon(contour(map, tau), y);

  const auto boundary = ring_vertices(map, tau);
  const auto med = map.images[map.grid.origin_index()];
  const std::size_t d = med.size();
  Point dy(d);
  for (std::size_t c = 0; c < d; ++c) dy[c] = y[c] - med[c];
  const double ny = norm(dy);
  if (ny <= 1e-12) return true;
  double best_cos = -std::numeric_limits<double>::infinity();
  double best_radius = 0.0;
  for (std::size_t s = 0; s < boundary.size(); ++s) {
    double ip = 0.0, nb2 = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      const double b = boundary[s][c] - med[c];
      ip += b * dy[c];
      nb2 += b * b;
    }
    const double nb = std::sqrt(nb2);
    const double cosv = nb > 0.0 ? ip / (nb * ny) : -1.0;
    if (cosv > best_cos) {
      best_cos = cosv;
      best_radius = nb;
    }
  }
  return ny <= best_radius + 1e-12;
}

ContourSet contour_set(const QuantileMap& map, std::span<const double> taus) {
  ContourSet cs;
  cs.x = map.conditioning_point;
  cs.tau_levels.assign(taus.begin(), taus.end());
  for (double tau : taus) cs.contours.push_back(ring_vertices(map, tau));
  cs.median = median(map);
  cs.monotone_max_violation = check_monotone(map).max_violation;
  return cs;
}

double quantile_mse(const QuantileMap& map, const QuantileMap& reference, double r_lo,
                    double r_hi) {
  if (!(r_lo > 0.0 && r_lo < r_hi && r_hi < 1.0))
    throw Error(ErrorCode::InvalidArgument, "annulus must satisfy 0 < r_lo < r_hi < 1");
  if (map.grid.points != reference.grid.points || map.images.dim() != reference.images.dim())
    throw Error(ErrorCode::GridMismatch, "maps are defined on different grids");
  const auto& g = map.grid;
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double r = norm(g.points[i]);
    if (r < r_lo - 1e-12 || r > r_hi + 1e-12) continue;
    sum += squared_distance(map.images[i], reference.images[i]);
    ++count;
  }
  if (count == 0) throw Error(ErrorCode::InvalidArgument, "annulus contains no gridpoint");
  return sum / static_cast<double>(count);
}

FitConfig FitConfig::with_defaults(std::size_t rings, std::size_t directions, double ell) {
  FitConfig cfg;
  cfg.rings = rings;
  cfg.directions = directions;
  cfg.kernel.kind = KernelKind::GaussianTruncatedKnn;
  cfg.kernel.neighbor_count = rings * directions;
  cfg.kernel.bandwidth = BandwidthRule::multiplier(ell);
  return cfg;
}

ConditionalEstimator::ConditionalEstimator(PointSet series, const FitConfig& config)
    : series_(std::move(series)),
      grid_(build_grid(series_.dim(), config.rings, config.directions, config.grid_seed)),
      grid_measure_(grid_measure(grid_)),
      solver_(config.solver) {
  if (series_.size() < 2) throw Error(ErrorCode::EmptySupport, "series has no transitions");
  PointSet predecessors(series_.dim());
  predecessors.reserve(series_.size() - 1);
  for (std::size_t i = 0; i + 1 < series_.size(); ++i) predecessors.push_back(series_[i]);
  kernel_ = resolve_kernel(config.kernel, predecessors);
}

QuantileMap ConditionalEstimator::fit(std::span<const double> x, const NwOptions& options) const {
  auto sample = nw_weights(series_, x, kernel_, options);
  const auto plan = solve_transport(grid_measure_, sample, solver_);
  return barycentric_map(plan, sample, grid_, x);
}

QuantileMap ConditionalEstimator::fit_at(std::size_t t, bool leave_out) const {
  NwOptions options;
  if (leave_out) options.exclude = t;
  return fit(series_[t], options);
}

QuantileMap fit_measure(const WeightedSample& sample, const SphericalGrid& grid,
                        std::span<const double> x, const SolverOptions& solver) {
  const auto plan = solve_transport(grid_measure(grid), sample, solver);
  return barycentric_map(plan, sample, grid, x);
}

CoverageResult coverage_rates(const PointSet& series, std::span<const double> taus,
                              const FitConfig& config, const CoverageOptions& options) {
  for (double tau : taus) require_tau(tau);
  if (series.size() < std::max<std::size_t>(options.min_length, 3))
    throw Error(ErrorCode::InsufficientData, "series shorter than the coverage minimum");
  const ConditionalEstimator estimator(series, config);

  const std::size_t transitions = series.size() - 1;
  const std::size_t n_eval = std::min(std::max<std::size_t>(options.evaluations, 1), transitions);
  std::vector<std::vector<char>> hits(n_eval, std::vector<char>(taus.size(), 0));
  parallel_for(n_eval, options.threads, [&](std::size_t e) {
    const std::size_t t = e * transitions / n_eval;
    const auto map = estimator.fit_at(t, true);
    for (std::size_t a = 0; a < taus.size(); ++a)
      hits[e][a] = region_contains(map, taus[a], series[t + 1]) ? 1 : 0;
  });

  CoverageResult result;
  result.taus.assign(taus.begin(), taus.end());
  result.evaluations = n_eval;
  for (std::size_t a = 0; a < taus.size(); ++a) {
    std::size_t count = 0;
    for (const auto& h : hits) count += static_cast<std::size_t>(h[a]);
    result.rates.push_back(static_cast<double>(count) / static_cast<double>(n_eval));
  }
  return result;
}

double coverage_rate(const PointSet& series, double tau, const FitConfig& config,
                     const CoverageOptions& options) {
  const double taus[] = {tau};
  return coverage_rates(series, taus, config, options).rates.front();
}

double polygon_area(const PointSet& polygon) {
  const std::size_t n = polygon.size();
  double a = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto p = polygon[i];
    const auto q = polygon[(i + 1) % n];
    a += cross(p[0], p[1], q[0], q[1]);
  }
  return 0.5 * std::abs(a);
}

double convex_hull_area(const PointSet& polygon) {
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < polygon.size(); ++i) pts.emplace_back(polygon[i][0], polygon[i][1]);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return 0.0;
  std::vector<std::pair<double, double>> hull(2 * pts.size());
  std::size_t h = 0;
  auto turn = [](const auto& o, const auto& a, const auto& b) {
    return cross(a.first - o.first, a.second - o.second, b.first - o.first, b.second - o.second);
  };
  for (const auto& p : pts) {
    while (h >= 2 && turn(hull[h - 2], hull[h - 1], p) <= 0.0) --h;
    hull[h++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = h + 1; i-- > 0;) {
    while (h >= lower && turn(hull[h - 2], hull[h - 1], pts[i]) <= 0.0) --h;
    hull[h++] = pts[i];
  }
  hull.resize(h - 1);
  double a = 0.0;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const auto& p = hull[i];
    const auto& q = hull[(i + 1) % hull.size()];
    a += cross(p.first, p.second, q.first, q.second);
  }
  return 0.5 * std::abs(a);
}

bool polygon_is_simple(const PointSet& polygon) {
  const std::size_t n = polygon.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (j == i + 1 || (i == 0 && j == n - 1)) continue;
      if (segments_intersect(polygon[i], polygon[(i + 1) % n], polygon[j], polygon[(j + 1) % n]))
        return false;
    }
  }
  return true;
}

bool point_in_polygon(const PointSet& polygon, std::span<const double> y,
                      double boundary_tolerance) {
  const std::size_t n = polygon.size();
  if (n == 0) return false;
  for (std::size_t i = 0; i < n; ++i)
    if (segment_distance(y, polygon[i], polygon[(i + 1) % n]) <= boundary_tolerance) return true;
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const auto a = polygon[i];
    const auto b = polygon[j];
    if ((a[1] > y[1]) != (b[1] > y[1])) {
      const double xc = (b[0] - a[0]) * (y[1] - a[1]) / (b[1] - a[1]) + a[0];
      if (y[0] < xc) inside = !inside;
    }
  }
  return inside;
}

}  // namespace vqar
