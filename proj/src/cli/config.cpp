#include "cli/config.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <set>
#include <thread>

#include "spheretop/errors.hpp"

namespace spheretop::cli {

using io::Json;

std::string to_string(Command c) {
  switch (c) {
    case Command::verify: return "verify";
    case Command::simulate: return "simulate";
    case Command::section: return "section";
    case Command::curvature: return "curvature";
    case Command::geodesic: return "geodesic";
  }
  return "verify";
}

Command parse_command(const std::string& name) {
  for (Command c : {Command::verify, Command::simulate, Command::section, Command::curvature, Command::geodesic})
    if (to_string(c) == name) return c;
  throw ConfigError("unknown command '" + name + "'");
}

namespace {

/// Object view that rejects keys outside the declared set.
class Block {
 public:
  Block(const Json& j, std::string path, std::set<std::string> allowed) : j_(j), path_(std::move(path)) {
    if (!j.is_object()) throw ConfigError(where() + " must be an object");
    for (const auto& [key, value] : j.items())
      if (!allowed.count(key)) throw ConfigError("unknown key '" + qualified(key) + "'");
  }

  bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }
  const Json& at(const std::string& key) const { return j_.at(key); }
  std::string qualified(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void number(const std::string& key, double& out) const {
    if (has(key)) out = to_double(key);
  }
  void number(const std::string& key, std::optional<double>& out) const {
    if (has(key)) out = to_double(key);
  }
  void count(const std::string& key, std::size_t& out) const {
    if (!has(key)) return;
    const Json& v = j_.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0)
      throw ConfigError("'" + qualified(key) + "' must be a non-negative integer");
    out = v.get<std::size_t>();
  }
  void integer(const std::string& key, int& out) const {
    if (!has(key)) return;
    const Json& v = j_.at(key);
    if (!v.is_number_integer()) throw ConfigError("'" + qualified(key) + "' must be an integer");
    out = v.get<int>();
  }
  void text(const std::string& key, std::string& out) const {
    if (!has(key)) return;
    if (!j_.at(key).is_string()) throw ConfigError("'" + qualified(key) + "' must be a string");
    out = j_.at(key).get<std::string>();
  }

 private:
  std::string where() const { return path_.empty() ? "config" : "'" + path_ + "'"; }
  double to_double(const std::string& key) const {
    const Json& v = j_.at(key);
    double d = 0.0;
    if (v.is_number()) {
      d = v.get<double>();
    } else if (v.is_string()) {
      try {
        d = io::parse_double(v.get<std::string>());
      } catch (const std::invalid_argument&) {
        throw ConfigError("'" + qualified(key) + "' is not a number");
      }
    } else {
      throw ConfigError("'" + qualified(key) + "' must be a number");
    }
    if (!std::isfinite(d)) throw ConfigError("'" + qualified(key) + "' must be finite");
    return d;
  }

  const Json& j_;
  std::string path_;
};

MetricKind parse_metric(const std::string& name) {
  for (MetricKind k : {MetricKind::round, MetricKind::new_system, MetricKind::goryachev_chaplygin,
                       MetricKind::geodesic_maupertuis, MetricKind::gc_geodesic})
    if (to_string(k) == name) return k;
  throw ConfigError("unknown metric '" + name + "'");
}

void validate(RunConfig& c, double A, double cc, double s) {
  if (!(s > 1.0)) throw ConfigError("params.s = " + io::format_double(s) + " violates the constraint s > 1");
  c.params = Params(A, cc, s);
  c.integrator.validate();
  if (c.h && !(*c.h > 0.0)) throw ConfigError("h must be positive");
  if (!(c.gc.h1 > std::abs(c.gc.A1))) throw ConfigError("gc.h1 must exceed |gc.A1|");
  if (!(c.section.tolerance > 0.0) || !(c.section.energy_tolerance > 0.0))
    throw ConfigError("section tolerances must be positive");
  for (const SeedSpec& seed : c.seeds)
    if (!(seed.theta > 0.0 && seed.theta < std::numbers::pi)) throw ConfigError("section seed theta must lie in (0, pi)");
  if (!(c.geodesic.theta > 0.0 && c.geodesic.theta < std::numbers::pi)) throw ConfigError("geodesic.theta must lie in (0, pi)");
  if (c.grids.curvature_points == 0) throw ConfigError("grids.curvature_points must be positive");
  if (c.grids.positivity_points == 0) throw ConfigError("grids.positivity_points must be positive");
}

}  // namespace

RunConfig default_config(Command command) {
  RunConfig c;
  c.command = command;
  switch (command) {
    case Command::simulate:
      c.integrator.dt = 1e-3;
      c.integrator.t_end = 100.0;
      c.integrator.stride = 10;
      break;
    case Command::section:
      c.integrator.dt = 5e-5;
      c.integrator.t_end = 40.0;
      c.section.energy = 2.0;
      c.seeds = {SeedSpec{1.2, std::nullopt, 0.3, std::nullopt}, SeedSpec{2.0, std::nullopt, -0.5, std::nullopt}};
      break;
    case Command::geodesic:
      c.integrator.dt = 1e-4;
      c.integrator.t_end = 10.0;
      c.integrator.stride = 10;
      break;
    default: break;
  }
  return c;
}

RunConfig parse_config(Command command, const Json& document, const Overrides& overrides) {
  RunConfig c = default_config(command);
  double A = c.params.A, cc = c.params.c, s = c.params.s;
  const Json empty = Json::object();
  const Json& doc = document.is_null() ? empty : document;
  const Block top(doc, "",
                  {"seed", "params", "gc", "h", "integrator", "initial", "section", "grids", "geodesic", "metrics",
                   "output"});

  if (top.has("seed")) {
    const Json& v = top.at("seed");
    if (!v.is_number_unsigned()) throw ConfigError("'seed' must be an unsigned integer");
    c.seed = v.get<std::uint64_t>();
  }
  if (top.has("params")) {
    const Block b(top.at("params"), "params", {"A", "c", "s"});
    b.number("A", A);
    b.number("c", cc);
    b.number("s", s);
  }
  if (top.has("gc")) {
    const Block b(top.at("gc"), "gc", {"A1", "h1"});
    double a1 = c.gc.A1, h1 = c.gc.h1;
    b.number("A1", a1);
    b.number("h1", h1);
    c.gc = GCParams(a1, h1);
  }
  top.number("h", c.h);
  if (top.has("integrator")) {
    const Block b(top.at("integrator"), "integrator",
                  {"dt", "t_end", "tolerance", "max_iterations", "switch_low", "switch_high", "stride"});
    b.number("dt", c.integrator.dt);
    b.number("t_end", c.integrator.t_end);
    b.number("tolerance", c.integrator.tolerance);
    b.integer("max_iterations", c.integrator.max_iterations);
    b.number("switch_low", c.integrator.switch_low);
    b.number("switch_high", c.integrator.switch_high);
    b.count("stride", c.integrator.stride);
  }
  if (top.has("initial")) c.initial = io::state_from_json(top.at("initial"));
  if (top.has("section")) {
    const Block b(top.at("section"), "section", {"phi_star", "energy", "tolerance", "energy_tolerance", "seeds"});
    b.number("phi_star", c.section.phi_star);
    b.number("energy", c.section.energy);
    b.number("tolerance", c.section.tolerance);
    b.number("energy_tolerance", c.section.energy_tolerance);
    if (b.has("seeds")) {
      if (!b.at("seeds").is_array()) throw ConfigError("'section.seeds' must be an array");
      c.seeds.clear();
      std::size_t i = 0;
      for (const Json& js : b.at("seeds")) {
        const Block sb(js, "section.seeds[" + std::to_string(i++) + "]", {"theta", "phi", "p_theta", "p_phi"});
        if (!sb.has("theta") || !sb.has("p_theta")) throw ConfigError("section seeds need 'theta' and 'p_theta'");
        SeedSpec seed;
        sb.number("theta", seed.theta);
        sb.number("phi", seed.phi);
        sb.number("p_theta", seed.p_theta);
        sb.number("p_phi", seed.p_phi);
        c.seeds.push_back(seed);
      }
    }
  }
  if (top.has("grids")) {
    const Block b(top.at("grids"), "grids",
                  {"identity_samples", "bracket_states", "degree_basepoints", "chart_points", "positivity_points",
                   "eigen_grid", "curvature_points", "sign_states"});
    b.count("identity_samples", c.grids.identity_samples);
    b.count("bracket_states", c.grids.bracket_states);
    b.count("degree_basepoints", c.grids.degree_basepoints);
    b.count("chart_points", c.grids.chart_points);
    b.count("positivity_points", c.grids.positivity_points);
    b.count("eigen_grid", c.grids.eigen_grid);
    b.count("curvature_points", c.grids.curvature_points);
    b.count("sign_states", c.grids.sign_states);
  }
  if (top.has("geodesic")) {
    const Block b(top.at("geodesic"), "geodesic", {"theta", "phi", "p_theta"});
    b.number("theta", c.geodesic.theta);
    b.number("phi", c.geodesic.phi);
    b.number("p_theta", c.geodesic.p_theta);
  }
  if (top.has("metrics")) {
    if (!top.at("metrics").is_array()) throw ConfigError("'metrics' must be an array of metric names");
    c.metrics.clear();
    for (const Json& m : top.at("metrics")) {
      if (!m.is_string()) throw ConfigError("'metrics' entries must be strings");
      c.metrics.push_back(parse_metric(m.get<std::string>()));
    }
  }
  if (top.has("output")) {
    const Block b(top.at("output"), "output", {"dir", "format"});
    std::string dir = c.output.dir.string(), format = "both";
    b.text("dir", dir);
    b.text("format", format);
    c.output.dir = dir;
    if (format == "csv") c.output.format = OutputFormat::csv;
    else if (format == "json") c.output.format = OutputFormat::json;
    else if (format == "both") c.output.format = OutputFormat::both;
    else throw ConfigError("'output.format' must be one of csv, json, both");
  }

  if (overrides.seed) c.seed = *overrides.seed;
  if (overrides.dt) c.integrator.dt = *overrides.dt;
  if (overrides.t_end) c.integrator.t_end = *overrides.t_end;
  if (overrides.s) s = *overrides.s;
  if (overrides.A) A = *overrides.A;
  if (overrides.c) cc = *overrides.c;
  if (overrides.h) c.h = *overrides.h;
  if (overrides.out) c.output.dir = *overrides.out;

  validate(c, A, cc, s);
  return c;
}

RunConfig load_config(Command command, const std::optional<std::filesystem::path>& path,
                      const Overrides& overrides) {
  Json doc;
  if (path) {
    std::string text;
    try {
      text = io::read_file(*path);
    } catch (const std::exception& e) {
      throw ConfigError(e.what());
    }
    try {
      doc = Json::parse(text);
    } catch (const Json::parse_error& e) {
      throw ConfigError("config is not valid JSON: " + std::string(e.what()));
    }
  }
  return parse_config(command, doc, overrides);
}

unsigned thread_cap() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("SPHERETOP_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(std::min<long>(v, hw));
  }
  return hw;
}

}  // namespace spheretop::cli
