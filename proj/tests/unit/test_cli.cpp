#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "cli/commands.hpp"
#include "cli/config.hpp"
#include "doctest.h"
#include "spheretop/errors.hpp"
#include "spheretop/io.hpp"

using namespace spheretop;
using namespace spheretop::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("spheretop_test_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

struct Run {
  int exit_code = -1;
  std::string out;
  std::string err;
};

/// Run the CLI binary named by SPHERETOP_CLI with the given arguments inside `dir`.
Run run_cli(const fs::path& dir, const std::string& args) {
  const char* bin = std::getenv("SPHERETOP_CLI");
  REQUIRE_MESSAGE(bin != nullptr, "SPHERETOP_CLI must name the CLI binary");
  const std::string cmd = "cd '" + dir.string() + "' && '" + bin + "' " + args + " > stdout.txt 2> stderr.txt";
  const int status = std::system(cmd.c_str());
  Run r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = io::read_file(dir / "stdout.txt");
  r.err = io::read_file(dir / "stderr.txt");
  return r;
}

void write(const fs::path& path, const std::string& text) { std::ofstream(path) << text; }

std::vector<double> column(const io::CsvTable& t, const std::string& name) {
  std::size_t k = 0;
  while (k < t.header.size() && t.header[k] != name) ++k;
  REQUIRE(k < t.header.size());
  std::vector<double> v;
  for (const auto& row : t.rows) v.push_back(io::parse_double(row[k]));
  return v;
}

}  // namespace

TEST_CASE("config defaults per command") {
  const RunConfig sim = default_config(Command::simulate);
  CHECK(sim.integrator.dt == 1e-3);
  CHECK(sim.integrator.t_end == 100.0);
  CHECK(sim.params.s == 2.0);
  CHECK(sim.params.A == 1.0);
  CHECK(sim.params.c == 0.0);
  CHECK(sim.seed == 42);
  const RunConfig sec = default_config(Command::section);
  CHECK(sec.integrator.dt == 5e-5);
  CHECK(sec.seeds.size() == 2);
  CHECK(default_config(Command::geodesic).integrator.dt == 1e-4);
  CHECK(parse_command("curvature") == Command::curvature);
  CHECK_THROWS_AS(parse_command("plot"), ConfigError);
}

TEST_CASE("config parsing, validation and overrides") {
  const io::Json doc = io::Json::parse(R"({
    "seed": 7,
    "params": {"A": 0.5, "c": "0.25", "s": 3},
    "gc": {"A1": 0.5, "h1": 1.5},
    "h": 4,
    "integrator": {"dt": 0.002, "t_end": 3, "stride": 5, "max_iterations": 30},
    "initial": {"chart": "global", "x": 0, "y": 0, "z": 1, "Lx": 0.5, "Ly": 0, "Lz": 0},
    "section": {"phi_star": 0.1, "energy": 1.5, "seeds": [{"theta": 1.0, "p_theta": 0.2}, {"theta": 2.0, "phi": 0.3, "p_theta": 0, "p_phi": 1}]},
    "grids": {"bracket_states": 10, "curvature_points": 11},
    "geodesic": {"theta": 1.0, "phi": 0.0, "p_theta": 0.1},
    "metrics": ["round", "gc-geodesic"],
    "output": {"dir": "results", "format": "csv"}
  })");
  const RunConfig c = parse_config(Command::simulate, doc);
  CHECK(c.seed == 7);
  CHECK(c.params.A == 0.5);
  CHECK(c.params.c == 0.25);
  CHECK(c.params.s == 3.0);
  CHECK(c.gc.h1 == 1.5);
  CHECK(*c.h == 4.0);
  CHECK(c.integrator.dt == 0.002);
  CHECK(c.integrator.stride == 5);
  CHECK(c.integrator.max_iterations == 30);
  CHECK(std::get<GlobalState>(c.initial).Lx == 0.5);
  REQUIRE(c.seeds.size() == 2);
  CHECK_FALSE(c.seeds[0].p_phi.has_value());
  CHECK(*c.seeds[1].phi == 0.3);
  CHECK(c.grids.bracket_states == 10);
  CHECK(c.metrics == std::vector<MetricKind>{MetricKind::round, MetricKind::gc_geodesic});
  CHECK(c.output.dir == "results");
  CHECK(c.output.csv());
  CHECK_FALSE(c.output.json());

  Overrides ov;
  ov.s = 1.5;
  ov.dt = 0.01;
  ov.seed = 9;
  ov.out = "elsewhere";
  const RunConfig o = parse_config(Command::simulate, doc, ov);
  CHECK(o.params.s == 1.5);
  CHECK(o.params.A == 0.5);
  CHECK(o.integrator.dt == 0.01);
  CHECK(o.seed == 9);
  CHECK(o.output.dir == "elsewhere");
}

TEST_CASE("config errors") {
  auto fails = [](const std::string& text, const std::string& needle) {
    try {
      parse_config(Command::verify, io::Json::parse(text));
    } catch (const ConfigError& e) {
      INFO(e.what());
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
      return;
    }
    FAIL("expected ConfigError for " << text);
  };
  fails(R"({"params": {"s": 0.5}})", "s > 1");
  fails(R"({"params": {"s": 1}})", "s > 1");
  fails(R"({"bogus": 1})", "unknown key 'bogus'");
  fails(R"({"params": {"B": 1}})", "unknown key 'params.B'");
  fails(R"({"section": {"seeds": [{"theta": 1, "p_theta": 0, "q": 1}]}})", "section.seeds[0].q");
  fails(R"({"section": {"seeds": [{"theta": 1}]}})", "p_theta");
  fails(R"({"integrator": {"dt": -1}})", "dt");
  fails(R"({"params": {"A": "x"}})", "params.A");
  fails(R"({"seed": -3})", "seed");
  fails(R"({"metrics": ["flat"]})", "flat");
  fails(R"({"output": {"format": "xml"}})", "output.format");
  fails(R"({"gc": {"A1": 2, "h1": 1}})", "h1");
  fails(R"([1, 2])", "object");
  Overrides ov;
  ov.s = 0.5;
  CHECK_THROWS_AS(parse_config(Command::verify, io::Json::object(), ov), ConfigError);
  CHECK_THROWS_AS(load_config(Command::verify, fs::path("/nonexistent/config.json")), ConfigError);
}

TEST_CASE("thread cap honours SPHERETOP_THREADS") {
  ::setenv("SPHERETOP_THREADS", "1", 1);
  CHECK(thread_cap() == 1);
  ::setenv("SPHERETOP_THREADS", "zero", 1);
  CHECK(thread_cap() >= 1);
  ::unsetenv("SPHERETOP_THREADS");
  CHECK(thread_cap() >= 1);
}

TEST_CASE("verify exit status is the conjunction of the checks") {
  RunConfig c = default_config(Command::verify);
  c.grids.identity_samples = 500;
  c.grids.bracket_states = 100;
  c.grids.degree_basepoints = 10;
  c.grids.sign_states = 200;
  c.output.format = OutputFormat::csv;
  const auto checks = verification_checks(c);
  bool all = true;
  for (const auto& k : checks) all = all && (k.informational || k.passed);
  CHECK(all);
  const io::Json r = verification_report(checks, c);
  CHECK(r["passed"] == all);
  const CommandOutcome o = cmd_verify(c);
  CHECK(o.exit_code == (all ? kExitOk : kExitVerificationFailure));
  CHECK(o.files.empty());

  // a failing hard check flips the verdict and is named first
  auto broken = checks;
  broken[2].passed = false;
  const io::Json rb = verification_report(broken, c);
  CHECK(rb["passed"] == false);
  CHECK(rb["first_failure"] == broken[2].name);
  // informational checks never fail the run
  auto info = checks;
  info.push_back({"extra", false, 1.0, 0.0, true, ""});
  CHECK(verification_report(info, c)["passed"] == true);
}

TEST_CASE("CLI verify") {
  const fs::path dir = scratch("verify");
  const Run r = run_cli(dir, "verify --out out");
  CHECK(r.exit_code == 0);
  const io::Json report = io::Json::parse(io::read_file(dir / "out" / "verify.json"));
  CHECK(report["passed"] == true);
  CHECK(report["degree_decomposition_trivially_zero"] == false);
  CHECK(io::Json::parse(r.out) == report);

  const Run bad = run_cli(dir, "verify --s 0.5");
  CHECK(bad.exit_code == 2);
  CHECK(bad.err.find("s > 1") != std::string::npos);

  const Run zero = run_cli(dir, "verify --A 0 --out zero");
  CHECK(zero.exit_code == 0);
  const io::Json z = io::Json::parse(io::read_file(dir / "zero" / "verify.json"));
  CHECK(z["degree_decomposition_trivially_zero"] == true);
  for (const auto& check : z["checks"])
    if (check["name"] == "degree_decomposition") CHECK(check["note"].get<std::string>().find("trivially zero") == 0);

  CHECK(run_cli(dir, "plot").exit_code == 2);
  CHECK(run_cli(dir, "").exit_code == 2);
  write(dir / "bad.json", R"({"params": {"s": 2, "shape": 3}})");
  const Run unknown = run_cli(dir, "verify --config bad.json");
  CHECK(unknown.exit_code == 2);
  CHECK(unknown.err.find("params.shape") != std::string::npos);
  write(dir / "broken.json", "{");
  CHECK(run_cli(dir, "verify --config broken.json").exit_code == 2);
  fs::remove_all(dir);
}

TEST_CASE("CLI simulate is deterministic and round-trippable") {
  const fs::path dir = scratch("simulate");
  write(dir / "short.json", R"({"integrator": {"dt": 0.001, "t_end": 5, "stride": 10}})");
  REQUIRE(run_cli(dir, "simulate --config short.json --out a").exit_code == 0);
  REQUIRE(run_cli(dir, "simulate --config short.json --out b").exit_code == 0);
  const std::string a = io::read_file(dir / "a" / "trajectory.csv");
  CHECK(a == io::read_file(dir / "b" / "trajectory.csv"));
  CHECK(io::read_file(dir / "a" / "trajectory.json") == io::read_file(dir / "b" / "trajectory.json"));
  const io::CsvTable t = io::read_csv(a);
  CHECK(io::write_csv(t) == a);
  CHECK(t.rows.size() == 501);
  CHECK(t.footer.front().rfind("max_relative_H=", 0) == 0);
  CHECK(t.footer.back() == "status=ok");
  const auto times = column(t, "t");
  CHECK(times.back() == doctest::Approx(5.0));

  // flags override the config
  REQUIRE(run_cli(dir, "simulate --config short.json --t-end 1 --out c").exit_code == 0);
  CHECK(io::read_csv(io::read_file(dir / "c" / "trajectory.csv")).rows.size() == 101);
  fs::remove_all(dir);
}

TEST_CASE("CLI simulate of an equilibrium gives constant columns") {
  const fs::path dir = scratch("equilibrium");
  write(dir / "eq.json", R"({"params": {"A": 0, "c": 0, "s": 2},
                             "initial": {"chart": "spherical", "theta": 1, "phi": 0.5, "p_theta": 0, "p_phi": 0},
                             "integrator": {"dt": 0.01, "t_end": 2}})");
  REQUIRE(run_cli(dir, "simulate --config eq.json --out out").exit_code == 0);
  const io::CsvTable t = io::read_csv(io::read_file(dir / "out" / "trajectory.csv"));
  for (const char* name : {"x", "y", "z", "Lx", "Ly", "Lz", "H", "F", "rel_H", "rel_F"}) {
    const auto v = column(t, name);
    for (double x : v) CHECK(x == v.front());
  }
  fs::remove_all(dir);
}

TEST_CASE("CLI simulate keeps partial output on integrator failure") {
  const fs::path dir = scratch("failure");
  write(dir / "fail.json", R"({"integrator": {"dt": 0.5, "t_end": 50, "max_iterations": 2}})");
  const Run r = run_cli(dir, "simulate --config fail.json --out out");
  CHECK(r.exit_code == 3);
  const io::CsvTable t = io::read_csv(io::read_file(dir / "out" / "trajectory.csv"));
  CHECK(t.footer.back() == "status=failed");
  CHECK_FALSE(t.rows.empty());
  CHECK(r.err.find("integration failed") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("CLI section") {
  const fs::path dir = scratch("section");
  SUBCASE("empty seed list") {
    write(dir / "empty.json", R"({"section": {"seeds": []}})");
    const Run r = run_cli(dir, "section --config empty.json --out out");
    CHECK(r.exit_code == 0);
    std::size_t csvs = 0;
    for (const auto& e : fs::directory_iterator(dir / "out")) csvs += e.path().extension() == ".csv";
    CHECK(csvs == 0);
    CHECK(io::Json::parse(r.out)["seeds"].empty());
  }
  SUBCASE("integrable limit: points on curves, energy residuals within 1e-8") {
    write(dir / "a0.json", R"({"params": {"A": 0, "c": 0.7, "s": 2},
                               "section": {"energy": 1.5, "seeds": [{"theta": 1.3, "p_theta": 0.2},
                                                                   {"theta": 0.05, "p_theta": 0.0, "p_phi": 0.0}]}})");
    const Run r = run_cli(dir, "section --config a0.json --out out");
    CHECK(r.exit_code == 0);
    const io::Json report = io::Json::parse(r.out);
    CHECK(report["seeds"][0]["status"] == "ok");
    CHECK(report["seeds"][0]["p_phi_completed"] == true);
    CHECK(report["seeds"][0]["curve_fit_residual"].get<double>() <= 1e-6);
    CHECK(report["seeds"][1]["status"] == "infeasible");
    const std::string text = io::read_file(dir / "out" / "section_seed0.csv");
    const io::CsvTable t = io::read_csv(text);
    CHECK(io::write_csv(t) == text);
    CHECK(t.header == std::vector<std::string>{"seed", "crossing", "t", "theta", "p_theta", "energy_residual"});
    CHECK(t.rows.size() >= 5);
    for (double e : column(t, "energy_residual")) CHECK(e <= 1e-8);
    CHECK(io::read_csv(io::read_file(dir / "out" / "section_seed1.csv")).rows.empty());
  }
  fs::remove_all(dir);
}

TEST_CASE("CLI curvature") {
  const fs::path dir = scratch("curvature");
  REQUIRE(run_cli(dir, "curvature --out out").exit_code == 0);
  const std::string text = io::read_file(dir / "out" / "curvature.csv");
  const io::CsvTable t = io::read_csv(text);
  CHECK(io::write_csv(t) == text);
  for (double k : column(t, "kappa_round")) CHECK(std::abs(k - 1.0) <= 1e-8);
  const auto kn = column(t, "kappa_new");
  CHECK(*std::max_element(kn.begin(), kn.end()) - *std::min_element(kn.begin(), kn.end()) > 0.0);
  const auto thetas = column(t, "theta");
  const auto kg = column(t, "kappa_gc");
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    const double s2 = std::sin(thetas[i]) * std::sin(thetas[i]);
    CHECK(std::abs(kg[i] - (10.0 - 6.0 * s2) / ((1.0 + 3.0 * s2) * (1.0 + 3.0 * s2))) <= 1e-6);
  }
  for (double r : column(t, "R")) CHECK(r > 0.0);
  const io::Json j = io::Json::parse(io::read_file(dir / "out" / "curvature.json"));
  CHECK(j["positivity"]["positive"] == true);
  CHECK(j["comparison"]["proportionality_margin"].get<double>() > 0.01);
  fs::remove_all(dir);
}

TEST_CASE("CLI geodesic") {
  const fs::path dir = scratch("geodesic");
  const Run r = run_cli(dir, "geodesic --t-end 3 --out out");
  CHECK(r.exit_code == 0);
  const io::Json j = io::Json::parse(io::read_file(dir / "out" / "geodesic.json"));
  CHECK(j["passed"] == true);
  CHECK(j["check"]["max_geodesic_residual"].get<double>() <= 1e-6);
  CHECK(j["system"]["resolution"]["commuting"] == 1);
  CHECK(run_cli(dir, "geodesic --h 0.5").exit_code == 2);
  fs::remove_all(dir);
}
