#pragma once

// Serialization: 17-significant-digit decimals, tagged state JSON, CSV tables
// with '#' footers, and atomic (write-then-rename) file output.

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "spheretop/charts.hpp"
#include "spheretop/dynamics.hpp"
#include "spheretop/geometry.hpp"
#include "spheretop/reference_gc.hpp"

namespace spheretop::io {

using Json = nlohmann::ordered_json;

/// Decimal with 17 significant digits; "nan", "inf", "-inf" for non-finite values.
std::string format_double(double v);
/// Inverse of format_double; throws std::invalid_argument on malformed input.
double parse_double(const std::string& s);

using AnyState = std::variant<SphericalState, PoleChartState, GlobalState>;

/// {"chart": "spherical" | "pole" | "global", <fields as decimal strings>}.
Json state_to_json(const AnyState& s);
/// Accepts decimal strings or JSON numbers; throws ConfigError on a bad tag or field.
AnyState state_from_json(const Json& j);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> footer;  ///< comment lines, written with a leading "# "

  void add_row(const std::vector<double>& values);
};

std::string write_csv(const CsvTable& t);
/// Throws std::invalid_argument on ragged rows.
CsvTable read_csv(const std::string& text);

/// Write to a temporary sibling and rename over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

// Domain exports.

/// Columns t, x, y, z, Lx, Ly, Lz, H, F, rel_H, rel_F; drift summary in the footer.
CsvTable trajectory_csv(const Trajectory& tr);
Json trajectory_summary_json(const Trajectory& tr);
Json drift_json(const DriftSummary& d);

/// Columns seed, crossing, t, theta, p_theta, energy_residual; per-seed status in the footer.
CsvTable section_csv(const std::vector<SectionResult>& results);
Json section_json(const std::vector<SectionResult>& results);

Json positivity_json(const PositivityReport& r);
Json sign_resolution_json(const SignResolution& r);
Json maupertuis_json(const MaupertuisSystem& m);
Json gc_geodesic_json(const GCGeodesicSystem& g);
Json geodesic_report_json(const GeodesicReport& r);
Json curvature_comparison_summary_json(const CurvatureComparison& c);
Json params_json(const Params& p);

}  // namespace spheretop::io
