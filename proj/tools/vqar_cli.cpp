// vqar: simulate, fit, predict, coverage, oracle, render and rerun.
//
// Every command resolves its configuration as built-in defaults, then an
// optional --config JSON file, then explicit flags. The resolved configuration
// is stored in <out>/manifest.json and `vqar rerun --manifest` replays it.

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "vqar/error.hpp"
#include "vqar/io.hpp"
#include "vqar/oracle.hpp"
#include "vqar/parallel.hpp"
#include "vqar/quantile.hpp"
#include "vqar/simulate.hpp"

namespace fs = std::filesystem;
using vqar::io::json;

namespace {

constexpr const char* kVersion = "0.1.0";

enum Exit : int { kOk = 0, kConfigError = 2, kDataError = 3, kNumericalError = 4 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int exit_code_for(vqar::ErrorCode code) {
  using vqar::ErrorCode;
  switch (code) {
    case ErrorCode::IoError:
    case ErrorCode::ParseError:
    case ErrorCode::EmptySupport:
    case ErrorCode::InsufficientPoints:
    case ErrorCode::InsufficientData:
    case ErrorCode::OddLength:
    case ErrorCode::NonfiniteInput:
    case ErrorCode::DegenerateScale:
      return kDataError;
    case ErrorCode::SolverFailure:
    case ErrorCode::DegenerateRow:
    case ErrorCode::InfeasibleMarginals:
      return kNumericalError;
    default:
      return kConfigError;
  }
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string cell;
  while (std::getline(in, cell, ',')) {
    if (cell.find_first_not_of(' ') == std::string::npos) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stod(cell, &used));
    } catch (const std::exception&) {
      throw UsageError("not a number: '" + cell + "'");
    }
  }
  return out;
}

std::string absolute(const std::string& p) { return fs::absolute(p).lexically_normal().string(); }

// ---------------------------------------------------------------------------
// configuration

json defaults(const std::string& cmd) {
  const json grid_kernel = {{"kR", 15},         {"kS", 15},        {"grid_seed", 0},
                            {"kernel", "knn"},  {"ell", 0.5},      {"h", nullptr},
                            {"neighbors", nullptr}, {"threads", 0}};
  if (cmd == "simulate")
    return {{"case", 1}, {"T", 10000}, {"T0", 10000}, {"seed", 0}, {"rotation", true},
            {"rotation_reset", false}};
  json c = grid_kernel;
  if (cmd == "fit") {
    c.update(json{{"series", nullptr}, {"x", json::array()}, {"t", json::array()},
                  {"random", 0}, {"seed", 0}, {"taus", {0.2, 0.4, 0.8}}});
  } else if (cmd == "predict") {
    c.update(json{{"series", nullptr}, {"taus", {0.2, 0.4, 0.8}}});
  } else if (cmd == "coverage") {
    c.update(json{{"series", nullptr}, {"taus", {0.2, 0.4, 0.8}}, {"eval_fraction", 0.1},
                  {"min_length", 500}});
  } else if (cmd == "oracle") {
    c = json{{"case", 1}, {"x", json::array()}, {"kR", 15}, {"kS", 15},
             {"taus", {0.2, 0.4, 0.8}}, {"N", 100000}, {"seed", 0}, {"angle", 0.0},
             {"compare", nullptr}};
  } else if (cmd == "render") {
    c = json{{"inputs", json::array()}, {"width", 640}};
  } else {
    throw UsageError("unknown command " + cmd);
  }
  return c;
}

void merge_known(json& cfg, const json& extra, const std::string& origin) {
  if (!extra.is_object()) throw UsageError(origin + " must be a JSON object");
  for (const auto& [key, value] : extra.items()) {
    if (!cfg.contains(key)) throw UsageError(origin + ": unknown key '" + key + "'");
    cfg[key] = value;
  }
}

template <class T>
T get(const json& cfg, const char* key) {
  try {
    return cfg.at(key).get<T>();
  } catch (const json::exception&) {
    throw UsageError(std::string("configuration key '") + key + "' has the wrong type");
  }
}

vqar::FitConfig fit_config(const json& cfg) {
  const auto rings = get<std::size_t>(cfg, "kR");
  const auto dirs = get<std::size_t>(cfg, "kS");
  auto fc = vqar::FitConfig::with_defaults(rings, dirs, get<double>(cfg, "ell"));
  fc.grid_seed = get<std::uint64_t>(cfg, "grid_seed");
  const auto kind = get<std::string>(cfg, "kernel");
  if (kind == "knn") {
    fc.kernel.kind = vqar::KernelKind::GaussianTruncatedKnn;
  } else if (kind == "gaussian") {
    fc.kernel.kind = vqar::KernelKind::Gaussian;
  } else if (kind == "indicator") {
    fc.kernel.kind = vqar::KernelKind::Indicator;
  } else {
    throw UsageError("kernel must be knn, gaussian or indicator");
  }
  if (!cfg.at("h").is_null()) fc.kernel.bandwidth = vqar::BandwidthRule::absolute(get<double>(cfg, "h"));
  if (!cfg.at("neighbors").is_null()) fc.kernel.neighbor_count = get<std::size_t>(cfg, "neighbors");
  return fc;
}

std::vector<double> taus_of(const json& cfg) {
  const auto taus = get<std::vector<double>>(cfg, "taus");
  for (double t : taus)
    if (!(t > 0.0 && t < 1.0)) throw UsageError("tau levels must lie in (0, 1)");
  return taus;
}

// ---------------------------------------------------------------------------
// commands

struct Outcome {
  std::vector<std::string> outputs;  // relative to the output directory
  json report = json::object();
  int code = kOk;
};

class Writer {
 public:
  Writer(fs::path dir, Outcome& outcome) : dir_(std::move(dir)), outcome_(outcome) {}
  void operator()(const std::string& name, const std::string& content) {
    vqar::io::write_atomic(dir_ / name, content);
    outcome_.outputs.push_back(name);
  }

 private:
  fs::path dir_;
  Outcome& outcome_;
};

std::string dump(const json& j) { return vqar::io::dump_json(j); }

Outcome cmd_simulate(const json& cfg, const fs::path& out) {
  vqar::SimConfig sc;
  sc.case_id = get<int>(cfg, "case");
  sc.T = get<std::size_t>(cfg, "T");
  sc.T0 = get<std::size_t>(cfg, "T0");
  sc.seed = get<std::uint64_t>(cfg, "seed");
  sc.rotation_enabled = get<bool>(cfg, "rotation");
  sc.rotation_reset = get<bool>(cfg, "rotation_reset");
  const auto series = vqar::simulate(sc);
  Outcome o;
  Writer write(out, o);
  write("series.csv", vqar::io::series_csv(series));
  write("series.json", dump(vqar::io::to_json(sc)));
  return o;
}

std::string point_stem(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "fit_%03zu", i);
  return buf;
}

Outcome cmd_fit(const json& cfg, const fs::path& out, bool predict) {
  if (cfg.at("series").is_null()) throw UsageError("--series is required");
  const auto series = vqar::io::read_series_csv(get<std::string>(cfg, "series"));
  if (series.empty()) throw vqar::Error(vqar::ErrorCode::InsufficientPoints, "empty series");
  const auto fc = fit_config(cfg);
  const auto taus = taus_of(cfg);
  const auto threads = get<std::size_t>(cfg, "threads");

  // Conditioning points: explicit x, time indices (1-based), or seeded random times.
  struct Target {
    std::optional<std::size_t> t;
    vqar::Point x;
  };
  std::vector<Target> targets;
  if (predict) {
    targets.push_back({series.size() - 1, vqar::to_point(series[series.size() - 1])});
  } else {
    for (const auto& x : get<std::vector<std::vector<double>>>(cfg, "x")) {
      if (x.size() != series.dim()) throw UsageError("--x must have the series dimension");
      targets.push_back({std::nullopt, x});
    }
    for (auto t : get<std::vector<std::size_t>>(cfg, "t")) {
      if (t < 1 || t > series.size()) throw UsageError("--t must lie in 1..T");
      targets.push_back({t - 1, vqar::to_point(series[t - 1])});
    }
    const auto n_random = get<std::size_t>(cfg, "random");
    if (n_random > series.size()) throw UsageError("--random exceeds the series length");
    vqar::Rng rng(get<std::uint64_t>(cfg, "seed"));
    std::vector<std::size_t> pool(series.size());
    for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = i;
    for (std::size_t r = 0; r < n_random; ++r) {
      std::swap(pool[r], pool[r + rng.below(pool.size() - r)]);
      targets.push_back({pool[r], vqar::to_point(series[pool[r]])});
    }
    if (targets.empty()) throw UsageError("no conditioning points: use --x, --t or --random");
  }

  const vqar::ConditionalEstimator est(series, fc);
  struct Result {
    std::optional<vqar::ContourSet> contours;
    bool clean = false;
    std::string error;
    vqar::ErrorCode code = vqar::ErrorCode::SolverFailure;
  };
  std::vector<Result> results(targets.size());
  vqar::parallel_for(targets.size(), threads, [&](std::size_t i) {
    try {
      const auto map = est.fit(targets[i].x);
      results[i].clean = vqar::check_monotone(map).clean();
      results[i].contours = vqar::contour_set(map, taus);
    } catch (const vqar::Error& e) {
      results[i].error = e.what();
      results[i].code = e.code();
    }
  });

  Outcome o;
  Writer write(out, o);
  json points = json::array();
  for (std::size_t i = 0; i < targets.size(); ++i) {
    json entry{{"x", targets[i].x}};
    if (targets[i].t) entry["t"] = *targets[i].t + 1;
    const auto& r = results[i];
    if (!r.contours) {
      entry["status"] = std::string(vqar::to_string(r.code));
      entry["error"] = r.error;
      if (r.code == vqar::ErrorCode::SolverFailure) {
        write(predict ? "solver_failure.json" : point_stem(i) + ".failure.json",
              dump(json{{"x", targets[i].x}, {"error", r.error}}));
        o.code = kNumericalError;
      } else if (o.code == kOk) {
        o.code = exit_code_for(r.code);
      }
      std::cerr << "conditioning point " << i << ": " << r.error << "\n";
      points.push_back(entry);
      continue;
    }
    json j = vqar::io::to_json(*r.contours);
    if (targets[i].t) j["t"] = *targets[i].t + 1;
    if (predict) j["label"] = "T+1";
    const std::string base = predict ? "predict" : point_stem(i);
    write(base + ".json", dump(j));
    write(base + ".csv", vqar::io::contour_csv(*r.contours));
    entry["status"] = "ok";
    entry["monotone_max_violation"] = r.contours->monotone_max_violation;
    entry["monotone_clean"] = r.clean;
    points.push_back(entry);
  }
  o.report["points"] = points;
  o.report["bandwidth"] = est.kernel().h;
  return o;
}

Outcome cmd_coverage(const json& cfg, const fs::path& out) {
  if (cfg.at("series").is_null()) throw UsageError("--series is required");
  const auto series = vqar::io::read_series_csv(get<std::string>(cfg, "series"));
  const auto taus = taus_of(cfg);
  if (taus.empty()) throw UsageError("coverage needs at least one tau");
  const double frac = get<double>(cfg, "eval_fraction");
  if (!(frac > 0.0 && frac <= 1.0)) throw UsageError("--eval-fraction must lie in (0, 1]");
  vqar::CoverageOptions opt;
  opt.threads = get<std::size_t>(cfg, "threads");
  opt.min_length = get<std::size_t>(cfg, "min_length");
  const double transitions = series.size() > 1 ? static_cast<double>(series.size() - 1) : 1.0;
  opt.evaluations = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(frac * transitions)));
  const auto res = vqar::coverage_rates(series, taus, fit_config(cfg), opt);
  std::string csv = "tau,rate,evaluations\n";
  for (std::size_t a = 0; a < res.taus.size(); ++a)
    csv += vqar::io::format_double(res.taus[a]) + ',' + vqar::io::format_double(res.rates[a]) + ',' +
           std::to_string(res.evaluations) + '\n';
  Outcome o;
  Writer write(out, o);
  write("coverage.csv", csv);
  o.report["evaluations"] = res.evaluations;
  return o;
}

// Exact Case 1 circles at the grid angles.
vqar::ContourSet case1_contours(const vqar::Point& x, const vqar::SphericalGrid& grid,
                                const std::vector<double>& taus) {
  vqar::ContourSet cs;
  cs.x = x;
  cs.tau_levels = taus;
  const auto map = vqar::case1_oracle_map(x, grid);
  cs.median = vqar::median(map);
  cs.monotone_max_violation = vqar::check_monotone(map).max_violation;
  for (double tau : taus) {
    const auto region = vqar::case1_region(x, tau);
    const double r = std::sqrt(region.radius_squared);
    vqar::PointSet c(2);
    for (std::size_t s = 0; s < grid.directions_count; ++s) {
      const auto dir = grid.directions[s];
      c.push_back(vqar::Point{region.center[0] + r * dir[0], region.center[1] + r * dir[1]});
    }
    cs.contours.push_back(std::move(c));
  }
  return cs;
}

Outcome cmd_oracle(const json& cfg, const fs::path& out) {
  const int case_id = get<int>(cfg, "case");
  const auto x = get<std::vector<double>>(cfg, "x");
  if (x.size() != 2) throw UsageError("--x must be a point in R^2");
  const auto grid = vqar::build_grid(2, get<std::size_t>(cfg, "kR"), get<std::size_t>(cfg, "kS"));
  const auto taus = taus_of(cfg);
  vqar::ContourSet cs;
  if (case_id == 1) {
    cs = case1_contours(x, grid, taus);
  } else if (case_id == 2 || case_id == 3) {
    const auto map = vqar::sim_oracle_map(case_id, x, get<std::size_t>(cfg, "N"), grid,
                                          get<std::uint64_t>(cfg, "seed"), get<double>(cfg, "angle"));
    cs = vqar::contour_set(map, taus);
  } else {
    throw UsageError("--case must be 1, 2 or 3");
  }
  Outcome o;
  Writer write(out, o);
  write("oracle.json", dump(vqar::io::to_json(cs)));
  write("oracle.csv", vqar::io::contour_csv(cs));

  if (!cfg.at("compare").is_null()) {
    const auto fitted = vqar::io::contour_set_from_json(
        json::parse(vqar::io::read_text(get<std::string>(cfg, "compare")), nullptr, false));
    if (fitted.tau_levels != cs.tau_levels)
      throw vqar::Error(vqar::ErrorCode::GridMismatch, "fitted and oracle tau levels differ");
    json rows = json::array();
    for (std::size_t a = 0; a < cs.tau_levels.size(); ++a) {
      const auto& f = fitted.contours[a];
      const auto& g = cs.contours[a];
      if (f.size() != g.size())
        throw vqar::Error(vqar::ErrorCode::GridMismatch, "contours have different vertex counts");
      double acc = 0.0;
      for (std::size_t s = 0; s < f.size(); ++s) acc += vqar::squared_distance(f[s], g[s]);
      rows.push_back({{"tau", cs.tau_levels[a]}, {"vertex_mse", acc / static_cast<double>(f.size())}});
    }
    write("comparison.json",
          dump(json{{"levels", rows},
                    {"median_squared_error", vqar::squared_distance(fitted.median, cs.median)}}));
  }
  return o;
}

// SVG ---------------------------------------------------------------------

std::string svg_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

Outcome cmd_render(const json& cfg, const fs::path& out) {
  const auto inputs = get<std::vector<std::string>>(cfg, "inputs");
  if (inputs.empty()) throw UsageError("render needs at least one contour file");
  const double width = get<double>(cfg, "width");
  std::vector<vqar::ContourSet> groups;
  for (const auto& path : inputs) {
    const auto j = json::parse(vqar::io::read_text(path), nullptr, false);
    if (j.is_discarded()) throw vqar::Error(vqar::ErrorCode::ParseError, path + " is not JSON");
    groups.push_back(vqar::io::contour_set_from_json(j));
    if (groups.back().median.size() != 2)
      throw vqar::Error(vqar::ErrorCode::DimensionUnsupported, "only planar contours render");
  }

  double lo_x = 1e300, lo_y = 1e300, hi_x = -1e300, hi_y = -1e300;
  auto extend = [&](std::span<const double> p) {
    lo_x = std::min(lo_x, p[0]);
    hi_x = std::max(hi_x, p[0]);
    lo_y = std::min(lo_y, p[1]);
    hi_y = std::max(hi_y, p[1]);
  };
  std::set<double> levels;
  for (const auto& g : groups) {
    extend(g.median);
    for (const auto& c : g.contours)
      for (std::size_t s = 0; s < c.size(); ++s) extend(c[s]);
    levels.insert(g.tau_levels.begin(), g.tau_levels.end());
  }
  const double span = std::max({hi_x - lo_x, hi_y - lo_y, 1e-9});
  const double margin = 40.0, legend_h = 20.0 * static_cast<double>(levels.size() + groups.size()) + 20.0;
  const double plot = width - 2.0 * margin;
  const double height = width + legend_h;
  auto sx = [&](double v) { return margin + (v - lo_x) / span * plot; };
  auto sy = [&](double v) { return margin + (hi_y - v) / span * plot; };

  static const char* palette[] = {"#1b7837", "#2166ac", "#b2182b", "#762a83", "#e08214", "#01665e"};
  static const char* dashes[] = {"none", "6 4", "2 3", "10 3 2 3"};
  std::map<double, std::string> color;
  std::size_t n = 0;
  for (double t : levels) color[t] = palette[n++ % std::size(palette)];

  std::string s = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + svg_num(width) +
       "\" height=\"" + svg_num(height) + "\" viewBox=\"0 0 " + svg_num(width) + " " +
       svg_num(height) + "\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    const auto& g = groups[gi];
    const std::string dash = dashes[gi % std::size(dashes)];
    s += "<g class=\"group\" id=\"group-" + std::to_string(gi) + "\" fill=\"none\" stroke-width=\"1.5\"";
    if (dash != "none") s += " stroke-dasharray=\"" + dash + "\"";
    s += ">\n";
    for (std::size_t a = 0; a < g.contours.size(); ++a) {
      const auto& c = g.contours[a];
      if (c.empty()) continue;
      std::string d;
      for (std::size_t v = 0; v < c.size(); ++v)
        d += (v == 0 ? "M " : " L ") + svg_num(sx(c[v][0])) + " " + svg_num(sy(c[v][1]));
      s += "<path class=\"contour\" data-tau=\"" + vqar::io::format_double(g.tau_levels[a]) +
           "\" stroke=\"" + color[g.tau_levels[a]] + "\" d=\"" + d + " Z\"/>\n";
    }
    const double mx = sx(g.median[0]), my = sy(g.median[1]);
    s += "<path class=\"median\" fill=\"black\" stroke=\"none\" d=\"M " + svg_num(mx) + " " +
         svg_num(my - 4) + " L " + svg_num(mx + 4) + " " + svg_num(my) + " L " + svg_num(mx) + " " +
         svg_num(my + 4) + " L " + svg_num(mx - 4) + " " + svg_num(my) + " Z\"/>\n";
    s += "</g>\n";
  }
  s += "<g id=\"legend\" font-family=\"sans-serif\" font-size=\"12\">\n";
  double y = width + 10.0;
  for (const auto& [t, c] : color) {
    s += "<line x1=\"" + svg_num(margin) + "\" y1=\"" + svg_num(y) + "\" x2=\"" + svg_num(margin + 24) +
         "\" y2=\"" + svg_num(y) + "\" stroke=\"" + c + "\" stroke-width=\"2\"/>";
    s += "<text x=\"" + svg_num(margin + 30) + "\" y=\"" + svg_num(y + 4) + "\">tau = " +
         vqar::io::format_double(t) + "</text>\n";
    y += 20.0;
  }
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    const std::string dash = dashes[gi % std::size(dashes)];
    s += "<line x1=\"" + svg_num(margin) + "\" y1=\"" + svg_num(y) + "\" x2=\"" + svg_num(margin + 24) +
         "\" y2=\"" + svg_num(y) + "\" stroke=\"black\" stroke-width=\"1.5\"";
    if (dash != "none") s += " stroke-dasharray=\"" + dash + "\"";
    s += "/><text x=\"" + svg_num(margin + 30) + "\" y=\"" + svg_num(y + 4) + "\">" +
         fs::path(inputs[gi]).filename().string() + "</text>\n";
    y += 20.0;
  }
  s += "</g>\n</svg>\n";

  Outcome o;
  Writer write(out, o);
  write("figure.svg", s);
  return o;
}

Outcome dispatch(const std::string& cmd, const json& cfg, const fs::path& out) {
  if (cmd == "simulate") return cmd_simulate(cfg, out);
  if (cmd == "fit") return cmd_fit(cfg, out, false);
  if (cmd == "predict") return cmd_fit(cfg, out, true);
  if (cmd == "coverage") return cmd_coverage(cfg, out);
  if (cmd == "oracle") return cmd_oracle(cfg, out);
  if (cmd == "render") return cmd_render(cfg, out);
  throw UsageError("unknown command " + cmd);
}

int execute(const std::string& cmd, const json& cfg, const fs::path& out,
            const std::optional<std::string>& rerun_of) {
  const auto start = std::chrono::steady_clock::now();
  fs::create_directories(out);
  auto write_manifest = [&](const Outcome& o, const std::string& error) {
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    json manifest{{"command", cmd},       {"version", kVersion},   {"config", cfg},
                  {"out", absolute(out.string())}, {"outputs", o.outputs}, {"report", o.report},
                  {"exit_code", o.code},  {"duration_seconds", seconds}};
    if (!error.empty()) manifest["error"] = error;
    if (rerun_of) manifest["rerun_of"] = *rerun_of;
    vqar::io::write_atomic(out / "manifest.json", dump(manifest));
  };
  Outcome o;
  try {
    o = dispatch(cmd, cfg, out);
  } catch (const vqar::Error& e) {
    o.code = exit_code_for(e.code());
    write_manifest(o, e.what());
    throw;
  } catch (const UsageError& e) {
    o.code = kConfigError;
    write_manifest(o, e.what());
    throw;
  }
  write_manifest(o, "");
  return o.code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonparametric vector quantile autoregression"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  app.set_help_flag("--help", "Print this help message");  // --h is the bandwidth

  // Flag values land in `flags` only when given on the command line.
  std::map<CLI::App*, std::vector<std::function<void(json&)>>> setters;
  std::map<CLI::App*, std::string> config_files, out_dirs;

  auto common = [&](CLI::App* sub) {
    out_dirs[sub] = ".";
    sub->add_option("--out", out_dirs[sub], "Output directory")->capture_default_str();
    sub->add_option("--config", config_files[sub], "JSON configuration file");
  };
  auto value = [&](CLI::App* sub, const std::string& flag, const std::string& key, auto proto,
                   const std::string& help) {
    auto store = std::make_shared<decltype(proto)>(proto);
    auto* opt = sub->add_option(flag, *store, help);
    setters[sub].push_back([opt, store, key](json& cfg) {
      if (opt->count() > 0) cfg[key] = *store;
    });
  };
  auto list = [&](CLI::App* sub, const std::string& flag, const std::string& key,
                  const std::string& help) {
    auto store = std::make_shared<std::string>();
    auto* opt = sub->add_option(flag, *store, help);
    setters[sub].push_back([opt, store, key](json& cfg) {
      if (opt->count() > 0) cfg[key] = parse_list(*store);
    });
  };
  auto path = [&](CLI::App* sub, const std::string& flag, const std::string& key,
                  const std::string& help) {
    auto store = std::make_shared<std::string>();
    auto* opt = sub->add_option(flag, *store, help);
    setters[sub].push_back([opt, store, key](json& cfg) {
      if (opt->count() > 0) cfg[key] = absolute(*store);
    });
  };
  auto grid_kernel = [&](CLI::App* sub) {
    value(sub, "--kR", "kR", std::size_t{}, "Number of rings");
    value(sub, "--kS", "kS", std::size_t{}, "Number of directions");
    value(sub, "--grid-seed", "grid_seed", std::uint64_t{}, "Direction seed for d >= 3");
    value(sub, "--kernel", "kernel", std::string{}, "knn | gaussian | indicator");
    value(sub, "--ell", "ell", double{}, "Bandwidth multiplier of the average pairwise distance");
    value(sub, "--h", "h", double{}, "Absolute bandwidth (overrides --ell)");
    value(sub, "--neighbors", "neighbors", std::size_t{}, "Nearest neighbors of the knn kernel");
    value(sub, "--threads", "threads", std::size_t{}, "Worker threads (0: all cores)");
    list(sub, "--tau", "taus", "Comma-separated tau levels (empty: median only)");
  };

  auto* sim = app.add_subcommand("simulate", "Simulate a Case 1-3 series");
  common(sim);
  value(sim, "--case", "case", int{}, "Data-generating process 1, 2 or 3");
  value(sim, "--T", "T", std::size_t{}, "Series length");
  value(sim, "--T0", "T0", std::size_t{}, "Warm-up length");
  value(sim, "--seed", "seed", std::uint64_t{}, "Seed");
  value(sim, "--rotation", "rotation", bool{}, "Case 3 noise rotation (true/false)");
  value(sim, "--rotation-reset", "rotation_reset", bool{}, "Restart the rotation clock after warm-up");

  auto* fit = app.add_subcommand("fit", "Fit conditional quantile contours");
  common(fit);
  path(fit, "--series", "series", "Series CSV");
  grid_kernel(fit);
  {
    auto xs = std::make_shared<std::vector<std::string>>();
    auto* opt = fit->add_option("--x", *xs, "Conditioning point 'a,b' (repeatable)");
    setters[fit].push_back([opt, xs](json& cfg) {
      if (opt->count() == 0) return;
      json arr = json::array();
      for (const auto& x : *xs) arr.push_back(parse_list(x));
      cfg["x"] = arr;
    });
  }
  value(fit, "--t", "t", std::vector<std::size_t>{}, "Conditioning time indices, 1-based (repeatable)");
  value(fit, "--random", "random", std::size_t{}, "Number of random conditioning times");
  value(fit, "--seed", "seed", std::uint64_t{}, "Seed for --random");

  auto* pred = app.add_subcommand("predict", "Predictive contours at the last observation");
  common(pred);
  path(pred, "--series", "series", "Series CSV");
  grid_kernel(pred);

  auto* cov = app.add_subcommand("coverage", "Leave-one-out coverage rates");
  common(cov);
  path(cov, "--series", "series", "Series CSV");
  grid_kernel(cov);
  value(cov, "--eval-fraction", "eval_fraction", double{}, "Fraction of transitions evaluated");
  value(cov, "--min-length", "min_length", std::size_t{}, "Minimum series length");

  auto* orc = app.add_subcommand("oracle", "Ground-truth contours");
  common(orc);
  value(orc, "--case", "case", int{}, "Data-generating process 1, 2 or 3");
  list(orc, "--x", "x", "Conditioning point 'a,b'");
  value(orc, "--kR", "kR", std::size_t{}, "Number of rings");
  value(orc, "--kS", "kS", std::size_t{}, "Number of directions");
  list(orc, "--tau", "taus", "Comma-separated tau levels");
  value(orc, "--N", "N", std::size_t{}, "Simulated transitions (Cases 2 and 3)");
  value(orc, "--seed", "seed", std::uint64_t{}, "Seed");
  value(orc, "--angle", "angle", double{}, "Case 3 noise rotation angle");
  path(orc, "--compare", "compare", "Fitted contour JSON to compare against");

  auto* ren = app.add_subcommand("render", "SVG overlay of contour files");
  common(ren);
  {
    auto files = std::make_shared<std::vector<std::string>>();
    auto* opt = ren->add_option("inputs", *files, "Contour JSON files");
    setters[ren].push_back([opt, files](json& cfg) {
      if (opt->count() == 0) return;
      json arr = json::array();
      for (const auto& f : *files) arr.push_back(absolute(f));
      cfg["inputs"] = arr;
    });
  }
  value(ren, "--width", "width", double{}, "Figure width in pixels");

  auto* rerun = app.add_subcommand("rerun", "Replay a run from its manifest");
  std::string manifest_path, rerun_out;
  rerun->add_option("--manifest", manifest_path, "manifest.json of a previous run")->required();
  rerun->add_option("--out", rerun_out, "Output directory (default: the original one)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (rerun->parsed()) {
      const auto m = json::parse(vqar::io::read_text(manifest_path), nullptr, false);
      if (m.is_discarded() || !m.contains("command") || !m.contains("config"))
        throw vqar::Error(vqar::ErrorCode::ParseError, "not a manifest: " + manifest_path);
      const auto cmd = m.at("command").get<std::string>();
      json cfg = defaults(cmd);
      merge_known(cfg, m.at("config"), "manifest");
      const fs::path out = rerun_out.empty() ? fs::path(m.at("out").get<std::string>()) : fs::path(rerun_out);
      return execute(cmd, cfg, out, absolute(manifest_path));
    }
    for (auto* sub : app.get_subcommands()) {
      const std::string cmd = sub->get_name();
      json cfg = defaults(cmd);
      if (!config_files[sub].empty()) {
        const auto file = json::parse(vqar::io::read_text(config_files[sub]), nullptr, false);
        if (file.is_discarded()) throw UsageError(config_files[sub] + " is not valid JSON");
        merge_known(cfg, file, config_files[sub]);
      }
      for (auto& set : setters[sub]) set(cfg);
      return execute(cmd, cfg, out_dirs[sub], std::nullopt);
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const vqar::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDataError;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  }
  return kConfigError;
}
