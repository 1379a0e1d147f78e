#include "vqar/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "vqar/error.hpp"

namespace vqar::io {

namespace fs = std::filesystem;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::string trim(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
  std::size_t b = 0;
  while (b < s.size() && s[b] == ' ') ++b;
  return s.substr(b);
}

json points_json(const PointSet& ps) {
  json arr = json::array();
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const auto p = ps[i];
    arr.push_back(std::vector<double>(p.begin(), p.end()));
  }
  return arr;
}

}  // namespace

PointSet read_series_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::ParseError, "empty file " + path.string());
  const auto header = split(trim(line), ',');
  if (header.size() < 2 || trim(header[0]) != "t")
    throw Error(ErrorCode::ParseError, "header must be t,x1,...,xd");
  for (std::size_t c = 1; c < header.size(); ++c)
    if (trim(header[c]) != "x" + std::to_string(c))
      throw Error(ErrorCode::ParseError, "unexpected column " + header[c]);
  const std::size_t d = header.size() - 1;
  PointSet series(d);
  Point p(d);
  std::size_t row = 1;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != d + 1)
      throw Error(ErrorCode::ParseError, "row " + std::to_string(row) + " has wrong width");
    for (std::size_t c = 0; c < d; ++c) {
      const std::string cell = trim(cells[c + 1]);
      const char* end = cell.data() + cell.size();
      const auto [ptr, ec] = std::from_chars(cell.data(), end, p[c]);
      if (cell.empty() || ptr != end || (ec != std::errc{} && ec != std::errc::result_out_of_range))
        throw Error(ErrorCode::ParseError, "row " + std::to_string(row) + " is not numeric");
    }
    series.push_back(p);
    ++row;
  }
  return series;
}

namespace {

void dump_into(std::string& out, const json& j, int indent, int depth) {
  const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
  const std::string close(static_cast<std::size_t>(indent * depth), ' ');
  if (j.is_number_float()) {
    const double v = j.get<double>();
    out += std::isfinite(v) ? format_double(v) : "null";
  } else if (j.is_array()) {
    if (j.empty()) {
      out += "[]";
      return;
    }
    out += "[\n";
    for (std::size_t i = 0; i < j.size(); ++i) {
      out += pad;
      dump_into(out, j[i], indent, depth + 1);
      out += i + 1 < j.size() ? ",\n" : "\n";
    }
    out += close + "]";
  } else if (j.is_object()) {
    if (j.empty()) {
      out += "{}";
      return;
    }
    out += "{\n";
    std::size_t i = 0;
    for (const auto& [key, value] : j.items()) {
      out += pad + json(key).dump() + ": ";
      dump_into(out, value, indent, depth + 1);
      out += ++i < j.size() ? ",\n" : "\n";
    }
    out += close + "}";
  } else {
    out += j.dump();
  }
}

}  // namespace

std::string dump_json(const json& j, int indent) {
  std::string out;
  dump_into(out, j, indent, 0);
  out += '\n';
  return out;
}

std::string series_csv(const PointSet& series) {
  std::string out = "t";
  for (std::size_t c = 0; c < series.dim(); ++c) out += ",x" + std::to_string(c + 1);
  out += '\n';
  for (std::size_t i = 0; i < series.size(); ++i) {
    out += std::to_string(i + 1);
    for (double v : series[i]) {
      out += ',';
      out += format_double(v);
    }
    out += '\n';
  }
  return out;
}

json to_json(const SphericalGrid& grid) {
  return json{{"d", grid.dim},
              {"k_R", grid.rings},
              {"k_S", grid.directions_count},
              {"seed", grid.seed},
              {"points", points_json(grid.points)}};
}

json to_json(const TransportPlan& plan) {
  json entries = json::array();
  for (const auto& e : plan.entries) entries.push_back(json::array({e.row, e.col, e.mass}));
  return json{{"entries", entries},
              {"row_marginals", plan.row_marginals},
              {"col_marginals", plan.col_marginals},
              {"cost", plan.cost}};
}

json to_json(const ContourSet& cs) {
  json contours = json::array();
  for (const auto& c : cs.contours) contours.push_back(points_json(c));
  return json{{"x", cs.x},
              {"taus", cs.tau_levels},
              {"contours", contours},
              {"median", cs.median},
              {"monotone_max_violation", cs.monotone_max_violation}};
}

json to_json(const SimConfig& cfg) {
  return json{{"case", cfg.case_id},       {"T", cfg.T},
              {"T0", cfg.T0},              {"seed", cfg.seed},
              {"rotation_enabled", cfg.rotation_enabled},
              {"rotation_reset", cfg.rotation_reset}};
}

ContourSet contour_set_from_json(const json& j) {
  ContourSet cs;
  try {
    cs.x = j.at("x").get<std::vector<double>>();
    cs.tau_levels = j.at("taus").get<std::vector<double>>();
    cs.median = j.at("median").get<std::vector<double>>();
    if (j.contains("monotone_max_violation"))
      cs.monotone_max_violation = j.at("monotone_max_violation").get<double>();
    for (const auto& c : j.at("contours")) {
      PointSet ps(cs.median.size());
      for (const auto& p : c) ps.push_back(p.get<std::vector<double>>());
      cs.contours.push_back(std::move(ps));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("contour json: ") + e.what());
  }
  if (cs.contours.size() != cs.tau_levels.size())
    throw Error(ErrorCode::ParseError, "contour json: taus and contours differ in length");
  return cs;
}

std::string contour_csv(const ContourSet& cs) {
  std::string out = "tau,angle_index,y1,y2\n";
  for (std::size_t a = 0; a < cs.tau_levels.size(); ++a) {
    const auto& c = cs.contours[a];
    for (std::size_t s = 0; s < c.size(); ++s) {
      out += format_double(cs.tau_levels[a]) + ',' + std::to_string(s);
      for (std::size_t d = 0; d < std::min<std::size_t>(2, c.dim()); ++d)
        out += ',' + format_double(c[s][d]);
      out += '\n';
    }
  }
  return out;
}

void write_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
    out << content;
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::IoError, "rename to " + path.string() + ": " + ec.message());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace vqar::io
