#include "spheretop/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

#include <unistd.h>

namespace spheretop::io {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, r.ptr);
}

double parse_double(const std::string& s) {
  if (s == "nan") return std::nan("");
  if (s == "inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  const auto r = std::from_chars(first, last, v);
  if (r.ec != std::errc() || r.ptr != last || first == last)
    throw std::invalid_argument("not a decimal number: '" + s + "'");
  return v;
}

namespace {

double field(const Json& j, const char* name) {
  if (!j.contains(name)) throw ConfigError(std::string("state: missing field '") + name + "'");
  const Json& v = j.at(name);
  try {
    if (v.is_string()) return parse_double(v.get<std::string>());
    if (v.is_number()) return v.get<double>();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("state: field '") + name + "': " + e.what());
  }
  throw ConfigError(std::string("state: field '") + name + "' must be a number or decimal string");
}

void reject_unknown(const Json& j, std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError("state: unknown key '" + key + "'");
  }
}

}  // namespace

Json state_to_json(const AnyState& s) {
  Json j;
  if (const auto* sph = std::get_if<SphericalState>(&s)) {
    j["chart"] = "spherical";
    j["theta"] = format_double(sph->theta);
    j["phi"] = format_double(sph->phi);
    j["p_theta"] = format_double(sph->p_theta);
    j["p_phi"] = format_double(sph->p_phi);
  } else if (const auto* pole = std::get_if<PoleChartState>(&s)) {
    j["chart"] = "pole";
    j["hemisphere"] = pole->hemisphere == Hemisphere::north ? "north" : "south";
    j["x"] = format_double(pole->x);
    j["y"] = format_double(pole->y);
    j["p_x"] = format_double(pole->p_x);
    j["p_y"] = format_double(pole->p_y);
  } else {
    const auto& g = std::get<GlobalState>(s);
    j["chart"] = "global";
    j["x"] = format_double(g.x);
    j["y"] = format_double(g.y);
    j["z"] = format_double(g.z);
    j["Lx"] = format_double(g.Lx);
    j["Ly"] = format_double(g.Ly);
    j["Lz"] = format_double(g.Lz);
  }
  return j;
}

AnyState state_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("chart") || !j.at("chart").is_string())
    throw ConfigError("state: expected an object with a string 'chart' tag");
  const std::string chart = j.at("chart").get<std::string>();
  if (chart == "spherical") {
    reject_unknown(j, {"chart", "theta", "phi", "p_theta", "p_phi"});
    return SphericalState{field(j, "theta"), field(j, "phi"), field(j, "p_theta"), field(j, "p_phi")};
  }
  if (chart == "pole") {
    reject_unknown(j, {"chart", "hemisphere", "x", "y", "p_x", "p_y"});
    if (!j.contains("hemisphere") || !j.at("hemisphere").is_string())
      throw ConfigError("state: pole chart needs 'hemisphere'");
    const std::string h = j.at("hemisphere").get<std::string>();
    if (h != "north" && h != "south") throw ConfigError("state: hemisphere must be 'north' or 'south'");
    return PoleChartState{h == "north" ? Hemisphere::north : Hemisphere::south, field(j, "x"), field(j, "y"),
                          field(j, "p_x"), field(j, "p_y")};
  }
  if (chart == "global") {
    reject_unknown(j, {"chart", "x", "y", "z", "Lx", "Ly", "Lz"});
    return GlobalState{field(j, "x"), field(j, "y"), field(j, "z"), field(j, "Lx"), field(j, "Ly"), field(j, "Lz")};
  }
  throw ConfigError("state: unknown chart '" + chart + "'");
}

void CsvTable::add_row(const std::vector<double>& values) {
  std::vector<std::string> row;
  row.reserve(values.size());
  for (double v : values) row.push_back(format_double(v));
  rows.push_back(std::move(row));
}

std::string write_csv(const CsvTable& t) {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(t.header);
  for (const auto& r : t.rows) line(r);
  for (const auto& f : t.footer) out += "# " + f + "\n";
  return out;
}

CsvTable read_csv(const std::string& text) {
  CsvTable t;
  std::istringstream in(text);
  std::string l;
  bool have_header = false;
  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = s.find(',', start);
      cells.push_back(s.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    return cells;
  };
  while (std::getline(in, l)) {
    if (l.rfind("# ", 0) == 0) {
      t.footer.push_back(l.substr(2));
    } else if (!l.empty() && l[0] == '#') {
      t.footer.push_back(l.substr(1));
    } else if (!have_header) {
      t.header = split(l);
      have_header = true;
    } else {
      auto cells = split(l);
      if (cells.size() != t.header.size()) throw std::invalid_argument("csv: ragged row");
      t.rows.push_back(std::move(cells));
    }
  }
  return t;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json drift_json(const DriftSummary& d) {
  auto slope = [](const SlopeFit& f) {
    return Json{{"slope", f.slope}, {"standard_error", f.standard_error}, {"secular", f.secular}};
  };
  return Json{{"max_relative_H", d.max_relative_H},
              {"max_relative_F", d.max_relative_F},
              {"H_slope", slope(d.H_slope)},
              {"F_slope", slope(d.F_slope)}};
}

CsvTable trajectory_csv(const Trajectory& tr) {
  CsvTable t;
  t.header = {"t", "x", "y", "z", "Lx", "Ly", "Lz", "H", "F", "rel_H", "rel_F"};
  const double h0 = tr.samples.empty() ? 0.0 : tr.samples.front().H;
  const double f0 = tr.samples.empty() ? 0.0 : tr.samples.front().F;
  const double hs = std::max(std::abs(h0), 1.0), fs = std::max(std::abs(f0), 1.0);
  for (const Sample& s : tr.samples) {
    t.add_row({s.t, s.state.x, s.state.y, s.state.z, s.state.Lx, s.state.Ly, s.state.Lz, s.H, s.F, (s.H - h0) / hs,
               (s.F - f0) / fs});
  }
  const DriftSummary& d = tr.drift;
  t.footer.push_back("max_relative_H=" + format_double(d.max_relative_H));
  t.footer.push_back("max_relative_F=" + format_double(d.max_relative_F));
  t.footer.push_back("H_slope=" + format_double(d.H_slope.slope) + " se=" + format_double(d.H_slope.standard_error) +
                     " secular=" + (d.H_slope.secular ? "true" : "false"));
  t.footer.push_back("F_slope=" + format_double(d.F_slope.slope) + " se=" + format_double(d.F_slope.standard_error) +
                     " secular=" + (d.F_slope.secular ? "true" : "false"));
  t.footer.push_back("max_casimir_residual=" + format_double(tr.max_casimir_residual));
  t.footer.push_back("chart_switches=" + std::to_string(tr.chart_switches));
  return t;
}

Json trajectory_summary_json(const Trajectory& tr) {
  Json j;
  j["samples"] = tr.samples.size();
  if (!tr.samples.empty()) {
    j["t_end"] = tr.samples.back().t;
    j["initial"] = state_to_json(tr.samples.front().state);
    j["final"] = state_to_json(tr.samples.back().state);
    j["H0"] = format_double(tr.samples.front().H);
    j["F0"] = format_double(tr.samples.front().F);
  }
  j["drift"] = drift_json(tr.drift);
  j["max_casimir_residual"] = tr.max_casimir_residual;
  j["chart_switches"] = tr.chart_switches;
  j["max_switch_discontinuity"] = tr.max_switch_discontinuity;
  j["max_fixed_point_iterations"] = tr.max_fixed_point_iterations;
  return j;
}

CsvTable section_csv(const std::vector<SectionResult>& results) {
  CsvTable t;
  t.header = {"seed", "crossing", "t", "theta", "p_theta", "energy_residual"};
  for (std::size_t s = 0; s < results.size(); ++s) {
    for (const SectionPoint& p : results[s].points) {
      t.rows.push_back({std::to_string(s), std::to_string(p.index), format_double(p.t), format_double(p.theta),
                        format_double(p.p_theta), format_double(p.energy_residual)});
    }
    std::string note = "seed " + std::to_string(s) + " status=" + to_string(results[s].status);
    if (!results[s].message.empty()) note += " message=" + results[s].message;
    t.footer.push_back(note);
  }
  return t;
}

Json section_json(const std::vector<SectionResult>& results) {
  Json arr = Json::array();
  for (const SectionResult& r : results) {
    Json pts = Json::array();
    for (const SectionPoint& p : r.points)
      pts.push_back(Json{{"crossing", p.index},
                         {"t", format_double(p.t)},
                         {"theta", format_double(p.theta)},
                         {"p_theta", format_double(p.p_theta)},
                         {"energy_residual", format_double(p.energy_residual)}});
    arr.push_back(Json{{"status", to_string(r.status)}, {"message", r.message}, {"points", pts}});
  }
  return arr;
}

Json positivity_json(const PositivityReport& r) {
  return Json{{"s", r.s},
              {"grid_points", r.grid_points},
              {"min_R", r.min_R},
              {"min_R_z", r.min_R_z},
              {"min_C_form", r.min_C_form},
              {"max_identity_residual", r.max_identity_residual},
              {"min_eigenvalue", r.min_eigenvalue},
              {"R_at_minus_one", r.R_at_minus_one},
              {"R_endpoint_error", r.R_endpoint_error},
              {"monotone", r.monotone},
              {"positive", r.positive()}};
}

Json sign_resolution_json(const SignResolution& r) {
  Json table = Json::array();
  for (const auto& row : r.table)
    table.push_back(Json{{"variant", row.variant.label()},
                         {"max_scaled_residual", row.max_scaled_residual},
                         {"commutes", row.commutes}});
  Json j{{"states", r.states}, {"tolerance", r.tolerance}, {"commuting", r.commuting}, {"rule", r.rule},
         {"table", table}};
  j["selected"] = r.selected ? Json(r.selected->label()) : Json(nullptr);
  return j;
}

Json params_json(const Params& p) { return Json{{"A", p.A}, {"c", p.c}, {"s", p.s}}; }

Json maupertuis_json(const MaupertuisSystem& m) {
  return Json{{"params", params_json(m.params)},
              {"h", m.h},
              {"max_potential", m.max_potential},
              {"variant", m.variant.label()},
              {"resolution", sign_resolution_json(m.resolution)},
              {"metric", to_string(m.metric().kind)}};
}

Json gc_geodesic_json(const GCGeodesicSystem& g) {
  return Json{{"A1", g.gc.A1},
              {"h1", g.gc.h1},
              {"variant", g.variant.label()},
              {"resolution", sign_resolution_json(g.resolution)},
              {"metric", to_string(g.metric().kind)}};
}

Json geodesic_report_json(const GeodesicReport& r) {
  return Json{{"samples", r.samples},
              {"tau_end", r.tau_end},
              {"max_geodesic_residual", r.max_geodesic_residual},
              {"max_relative_F_drift", r.max_relative_F_drift},
              {"max_energy_residual", r.max_energy_residual},
              {"max_geodesic_speed_error", r.max_geodesic_speed_error}};
}

Json curvature_comparison_summary_json(const CurvatureComparison& c) {
  return Json{{"grid_points", c.thetas.size()},
              {"kappa_new_spread", c.kappa_new_spread},
              {"kappa_gc_spread", c.kappa_gc_spread},
              {"c_new_spread", c.c_new_spread},
              {"correction_spread", c.correction_spread},
              {"difference_spread", c.difference_spread},
              {"best_alpha", c.best_alpha},
              {"proportionality_margin", c.proportionality_margin}};
}

}  // namespace spheretop::io
