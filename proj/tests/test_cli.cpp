#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include "hypercat/commands.hpp"
#include "hypercat/plan_json.hpp"
#include "hypercat/scenario.hpp"

using namespace hypercat;
using namespace hypercat::cli;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("hypercat_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

json read_json(const fs::path& p) {
  std::ifstream f(p);
  return json::parse(f);
}

std::size_t count_csvs(const fs::path& dir) {
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(dir))
    n += e.path().filename().string().starts_with("counts_") && e.path().extension() == ".csv";
  return n;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(HYPERCAT_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("plan JSON round trip") {
  circuit::NoiseSpec noise;
  noise.tau = 0.2;
  noise.xi = {0.1, 0.05};
  noise.efficiency = 0.3;
  noise.analyzer_visibility = 0.95;
  for (auto v : {circuit::CatVariant::Cat6, circuit::CatVariant::Cat10}) {
    const auto plan = circuit::build_cat_setup(v, noise);
    const auto j = io::to_json(plan);
    const auto back = io::plan_from_json(json::parse(j.dump()));
    CHECK(io::to_json(back) == j);
    const auto a = detection::simulate(plan), b = detection::simulate(back);
    CHECK((a.rho - b.rho).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(a.success_prob == b.success_prob);
  }
  SUBCASE("element schema") {
    for (const auto& e : {fock::pbs(1, 2, 3, 4), fock::pbs_split(1, 5, 6), fock::nbs(1, 2, 3, 4), fock::hwp(3, 0.3),
                          fock::qwp(2, 0.1), fock::phase({fock::V(4)}, 1.2)}) {
      const auto j = io::to_json(e);
      const auto back = io::element_from_json(j);
      CHECK(back.kind == e.kind);
      CHECK((back.matrix - e.matrix).cwiseAbs().maxCoeff() == 0.0);
    }
    CHECK_THROWS_AS(io::element_from_json(json{{"kind", "MIRROR"}}), std::invalid_argument);
    CHECK_THROWS_AS(io::element_from_json(json{{"kind", "PBS"}, {"in", {1, 2}}, {"out", {3}}}), std::invalid_argument);
    CHECK_THROWS_AS(io::element_from_json(json{{"kind", "HWP"}, {"path", "x"}, {"angle", 0}}), std::invalid_argument);
  }
  SUBCASE("noise schema") {
    const auto n = io::noise_from_json(io::to_json(noise), {});
    CHECK(n.xi == noise.xi);
    CHECK(io::noise_from_json(json{{"xi", 0.2}}, {}).xi == std::array<double, 2>{0.2, 0.2});
    CHECK_THROWS_AS(io::noise_from_json(json{{"xi", {0.1, 0.2, 0.3}}}, {}), std::invalid_argument);
    CHECK_THROWS_AS(io::noise_from_json(json{{"efficiency", 1.5}}, {}), std::invalid_argument);
  }
}

TEST_CASE("config parsing") {
  SUBCASE("defaults for a variant") {
    const auto c = parse_config(json{{"setup", "cat10"}});
    CHECK(c.id == "cat10");
    CHECK(c.calibrated);
    CHECK(c.settings.size() == 11);
    CHECK(c.settings.front().is_all_z());
    CHECK(*c.rate_hz == doctest::Approx(0.021));
    CHECK(c.z_duration_s == 21600.0);
    CHECK(c.theta_duration_s == 5400.0);
  }
  SUBCASE("ideal preset with overrides and explicit settings") {
    const auto c = parse_config(json{{"setup", "cat6"},
                                     {"noise", {{"preset", "ideal"}, {"tau", 0.05}}},
                                     {"acquisition", {{"rate_hz", "derive"}, {"z_duration_s", 2}, {"theta_duration_s", 3}}},
                                     {"settings", {"Z", 0.5, "0.1;0.2;0.3;0.4;0.5;Z"}},
                                     {"seed", 9}});
    CHECK_FALSE(c.calibrated);
    CHECK(c.noise->tau == 0.05);
    CHECK_FALSE(c.rate_hz);
    CHECK(c.settings.size() == 3);
    CHECK(c.settings[1].is_uniform_equatorial());
    CHECK(c.seed == 9);
  }
  SUBCASE("grid start and extra angles") {
    const auto c = parse_config(json{{"setup", "cat8"}, {"settings", {{"grid_start", 1}, {"extra_thetas", {0.05}}}}});
    CHECK(c.settings.size() == 10);
    CHECK(c.settings[8].bases[0].theta == doctest::Approx(M_PI));
  }
  SUBCASE("errors") {
    const json bad[] = {
        json::array(),
        json{{"id", "x"}},
        json{{"setup", "cat12"}},
        json{{"setup", 3}},
        json{{"setup", "cat6"}, {"noise", {{"preset", "dirty"}}}},
        json{{"setup", "cat6"}, {"noise", {{"efficiency", 0.0}}}},
        json{{"setup", "cat6"}, {"noise", {{"xi", "big"}}}},
        json{{"setup", "cat6"}, {"acquisition", {{"z_duration_s", -1}}}},
        json{{"setup", "cat6"}, {"acquisition", {{"rate_hz", "fast"}}}},
        json{{"setup", "cat6"}, {"settings", json::array()}},
        json{{"setup", "cat6"}, {"settings", {"0.1;0.2"}}},
        json{{"setup", "cat6"}, {"settings", {"Q"}}},
        json{{"setup", "cat6"}, {"settings", {{"grid_start", 2}}}},
        json{{"setup", "cat6"}, {"id", "a/b"}},
        json{{"setup", {{"sources", json::array()}}}},
    };
    for (const auto& j : bad) {
      CAPTURE(j.dump());
      CHECK_THROWS_AS(parse_config(j), ConfigError);
    }
    CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
  }
}

TEST_CASE("simulate and analyze") {
  SUBCASE("ideal cat8 in exact mode") {
    const auto dir = scratch("exact8");
    const auto c = parse_config(json{{"setup", "cat8"}, {"noise", {{"preset", "ideal"}}}});
    SimulateOptions o;
    o.exact = true;
    o.out = dir;
    cmd_simulate(c, o);
    const auto manifest = read_json(dir / "manifest.json");
    CHECK(manifest["exact"] == true);
    CHECK(manifest["exact_fidelity"].get<double>() == doctest::Approx(1.0));
    const auto r = cmd_analyze(dir);
    CHECK(r.exact);
    CHECK(std::abs(r.fidelity.value - 1.0) < 1e-6);
    CHECK(r.fidelity.sigma == 0.0);
    const auto rep = read_json(dir / "report.json");
    CHECK(rep["witness"]["significance"] == "inf");
    CHECK(fs::exists(dir / "fringe.csv"));
    fs::remove_all(dir);
  }
  SUBCASE("cat10 defaults write eleven settings") {
    const auto dir = scratch("cat10");
    SimulateOptions o;
    o.out = dir;
    o.time_scale = 0.01;
    cmd_simulate(parse_config(json{{"setup", "cat10"}}), o);
    CHECK(count_csvs(dir) == 11);
    const auto manifest = read_json(dir / "manifest.json");
    CHECK(manifest["settings"].size() == 11);
    CHECK(manifest["dropped_weight"].get<double>() >= 0.0);
    CHECK(manifest["success_prob"].get<double>() > 0.0);
    fs::remove_all(dir);
  }
  SUBCASE("same seed, same bytes") {
    const auto a = scratch("det_a"), b = scratch("det_b");
    const auto c = parse_config(json{{"setup", "cat6"}, {"seed", 77}});
    SimulateOptions o;
    o.time_scale = 0.1;
    o.out = a;
    cmd_simulate(c, o);
    o.out = b;
    cmd_simulate(c, o);
    for (const auto& e : fs::directory_iterator(a)) {
      if (e.path().extension() != ".csv") continue;
      CHECK(slurp(e.path()) == slurp(b / e.path().filename()));
    }
    o.seed = 78;
    const auto d = scratch("det_c");
    o.out = d;
    cmd_simulate(c, o);
    CHECK(slurp(a / "counts_s00.csv") != slurp(d / "counts_s00.csv"));
    for (const auto& p : {a, b, d}) fs::remove_all(p);
  }
  SUBCASE("sampled cat10 lands near the exact fidelity") {
    const auto dir = scratch("cat10_sampled");
    SimulateOptions o;
    o.out = dir;
    o.seed = 3;
    cmd_simulate(parse_config(json{{"setup", "cat10"}}), o);
    const auto r = cmd_analyze(dir);
    const double exact = read_json(dir / "manifest.json")["exact_fidelity"].get<double>();
    CHECK(std::abs(r.fidelity.value - exact) < 3 * r.fidelity.sigma);
    fs::remove_all(dir);
  }
  SUBCASE("filter never loses on noisy data") {
    const auto dir = scratch("filter");
    SimulateOptions o;
    o.out = dir;
    o.time_scale = 0.2;
    cmd_simulate(parse_config(json{{"setup", "cat6"}, {"noise", {{"analyzer_visibility", 0.9}}}}), o);
    for (auto mode : {analysis::FilterMode::PerQubit, analysis::FilterMode::Uniform}) {
      AnalyzeOptions ao;
      ao.filter = mode;
      const auto r = cmd_analyze(dir, ao);
      REQUIRE(r.filter);
      CHECK(r.filter->fidelity.objective.value >= r.fidelity.value);
      CHECK(r.filter->witness.objective.value <= r.witness.value);
    }
    CHECK(read_json(dir / "report.json")["filter"]["mode"] == "uniform");
    fs::remove_all(dir);
  }
  SUBCASE("custom plan") {
    const auto dir = scratch("custom");
    const auto plan = circuit::build_cat_setup(circuit::CatVariant::Cat6, circuit::NoiseSpec::ideal());
    json cfg{{"setup", io::to_json(plan)},
             {"id", "mine"},
             {"acquisition", {{"rate_hz", 50}, {"z_duration_s", 10}, {"theta_duration_s", 10}}}};
    SimulateOptions o;
    o.out = dir;
    cmd_simulate(parse_config(cfg), o);
    CHECK(count_csvs(dir) == 7);
    CHECK(cmd_analyze(dir).fidelity.value > 0.9);
    cfg["acquisition"].erase("theta_duration_s");
    CHECK_THROWS_AS(parse_config(cfg), ConfigError);
    fs::remove_all(dir);
  }
}

TEST_CASE("analyze data errors") {
  CHECK_THROWS_AS(cmd_analyze("/nonexistent/dir"), DataError);
  const auto dir = scratch("bad_data");
  CHECK_THROWS_AS(cmd_analyze(dir), DataError);
  SimulateOptions o;
  o.out = dir;
  o.exact = true;
  cmd_simulate(parse_config(json{{"setup", "cat6"}}), o);
  fs::remove(dir / "counts_s03.csv");
  CHECK_THROWS_AS(cmd_analyze(dir), DataError);
  {
    std::ofstream f(dir / "counts_s03.csv");
    f << "setting_id,qubit_bases,outcome_bitstring,count\ns03,Z,0,x\n";
  }
  CHECK_THROWS_AS(cmd_analyze(dir), DataError);
  fs::remove_all(dir);
}

TEST_CASE("reproduce figures") {
  SUBCASE("figA2") {
    const auto dir = scratch("figA2");
    cmd_reproduce(Figure::FigA2, dir);
    std::ifstream f(dir / "figA2_curves.csv");
    std::string line;
    std::getline(f, line);
    CHECK(line == "theta,plus_plus,plus_minus,r_plus,r_minus");
    double worst = 0.0;
    int rows = 0;
    while (std::getline(f, line)) {
      std::stringstream ss(line);
      std::vector<double> v;
      for (std::string cell; std::getline(ss, cell, ',');) v.push_back(std::stod(cell));
      const double t = v[0];
      worst = std::max({worst, std::abs(v[1] - (1 + std::cos(t)) / 2), std::abs(v[2] - (1 - std::cos(t)) / 2),
                        std::abs(v[3] - (1 - std::sin(t)) / 2), std::abs(v[4] - (1 + std::sin(t)) / 2)});
      ++rows;
    }
    CHECK(rows == 73);
    CHECK(worst < 1e-9);
    fs::remove_all(dir);
  }
  SUBCASE("fig2 fringes oscillate n times") {
    const auto dir = scratch("fig2");
    const auto line = cmd_reproduce(Figure::Fig2, dir, {1, 0.5});
    CHECK(line.find("cat6") != std::string::npos);
    const auto s = read_json(dir / "fig2_summary.json");
    const double v6 = s["cat6"]["visibility_fit"]["visibility"]["value"].get<double>();
    CHECK(v6 > 0.3);
    CHECK(v6 < 0.9);
    for (const char* f : {"fig2a_cat6_zbasis.csv", "fig2b_cat6_fringe.csv", "fig2c_cat8_zbasis.csv", "fig2d_cat8_fringe.csv"})
      CHECK(fs::exists(dir / f));
    fs::remove_all(dir);
  }
  SUBCASE("fig3") {
    const auto dir = scratch("fig3");
    cmd_reproduce(Figure::Fig3, dir);
    std::ifstream f(dir / "fig3b_expectations.csv");
    std::string line;
    int rows = -1;
    while (std::getline(f, line)) ++rows;
    CHECK(rows == 10);
    const auto s = read_json(dir / "fig3_summary.json");
    CHECK(s.contains("fidelity"));
    CHECK(s.contains("mean_abs_expectation"));
    fs::remove_all(dir);
  }
  CHECK_THROWS_AS(figure_from_string("fig9"), ConfigError);
}

TEST_CASE("exit codes") {
  const auto dir = scratch("exit");
  {
    std::ofstream f(dir / "ok.json");
    f << R"({"setup": "cat6", "noise": {"preset": "ideal"}})";
  }
  {
    std::ofstream f(dir / "bad.json");
    f << R"({"setup": "cat7"})";
  }
  {
    std::ofstream f(dir / "broken.json");
    f << "{";
  }
  CHECK(run_cli("simulate --config " + (dir / "ok.json").string() + " --exact --out " + (dir / "run").string()) == 0);
  CHECK(run_cli("analyze --in " + (dir / "run").string()) == 0);
  CHECK(run_cli("simulate --config " + (dir / "bad.json").string()) == kExitConfig);
  CHECK(run_cli("simulate --config " + (dir / "broken.json").string()) == kExitConfig);
  CHECK(run_cli("simulate --config " + (dir / "missing.json").string()) == kExitConfig);
  CHECK(run_cli("frobnicate") == kExitConfig);
  CHECK(run_cli("analyze --in " + (dir / "run").string() + " --filter sideways") == kExitConfig);
  CHECK(run_cli("analyze --in " + (dir / "nothing").string()) == kExitData);
  CHECK(run_cli("reproduce fig9 --out " + (dir / "fig").string()) == kExitConfig);
  fs::remove_all(dir);
}
