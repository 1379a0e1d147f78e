#pragma once

#include <filesystem>
#include <string>

#include "vqar/grid.hpp"
#include "vqar/points.hpp"
#include "vqar/quantile.hpp"
#include "vqar/simulate.hpp"
#include "vqar/transport.hpp"

#include <json.hpp>

namespace vqar::io {

using nlohmann::json;

/// %.17g rendering used by every text output.
std::string format_double(double v);

/// Indented JSON text with every floating-point number in %.17g form.
std::string dump_json(const json& j, int indent = 2);

/// Series CSV: header `t,x1,...,xd`, one row per observation, t from 1.
PointSet read_series_csv(const std::filesystem::path& path);
std::string series_csv(const PointSet& series);

json to_json(const SphericalGrid& grid);
json to_json(const TransportPlan& plan);
json to_json(const ContourSet& contours);
json to_json(const SimConfig& cfg);
ContourSet contour_set_from_json(const json& j);

/// One row per vertex: tau, angle_index, y1, y2.
std::string contour_csv(const ContourSet& contours);

/// Writes through a temporary file in the same directory and renames it.
void write_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_text(const std::filesystem::path& path);

}  // namespace vqar::io
