#include "hypercat/commands.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <future>
#include <numbers>
#include <random>
#include <sstream>

#include "hypercat/plan_json.hpp"
#include "hypercat/scenario.hpp"

namespace hypercat::cli {

namespace fs = std::filesystem;
using circuit::CatVariant;
using detection::MeasurementSetting;
using nlohmann::json;

namespace {

std::string fmt(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return ec == std::errc{} ? std::string(buf, ptr) : std::string("nan");
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << j.dump(2) << '\n';
}

std::string setting_id(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "s%02zu", i);
  return buf;
}

MeasurementSetting setting_from_json(const json& j, int n) {
  MeasurementSetting m;
  if (j.is_number()) {
    m = MeasurementSetting::all_equatorial(n, j.get<double>());
  } else if (j.is_string()) {
    const auto s = j.get<std::string>();
    m = s == "Z" ? MeasurementSetting::all_z(n) : MeasurementSetting::parse(s);
    if (m.size() == 1 && n > 1) m = MeasurementSetting{std::vector(n, m.bases[0])};
  } else {
    throw ConfigError("settings entries must be \"Z\", an angle or a per-qubit basis string");
  }
  if (m.size() != n) throw ConfigError("setting '" + m.to_string() + "' does not match " + std::to_string(n) + " qubits");
  return m;
}

double positive(const json& j, const char* key, double fallback) {
  const double v = j.value(key, fallback);
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(key) + " must be positive");
  return v;
}

}  // namespace

std::uint64_t setting_seed(std::uint64_t seed, std::size_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index)};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

fs::path default_output_root() {
  if (const char* env = std::getenv(kOutputRootEnv); env && *env) return env;
  return fs::current_path();
}

ExperimentConfig parse_config(const json& j, const fs::path& base_dir) {
  ExperimentConfig c;
  try {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    c.echo = j;
    if (!j.contains("setup")) throw ConfigError("config needs a \"setup\"");
    const auto& setup = j.at("setup");

    if (setup.is_string()) {
      try {
        c.variant = circuit::cat_variant_from_string(setup.get<std::string>());
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
      const json noise = j.value("noise", json::object());
      if (!noise.is_object()) throw ConfigError("noise must be an object");
      const auto preset = noise.value("preset", std::string("calibrated"));
      circuit::NoiseSpec base;
      if (preset == "calibrated") {
        scenario::Calibration cal;
        if (noise.contains("calibration")) {
          const auto& jc = noise.at("calibration");
          cal.efficiency = jc.value("efficiency", cal.efficiency);
          cal.pair_visibility_hv = jc.value("pair_visibility_hv", cal.pair_visibility_hv);
          cal.pair_visibility_diag = jc.value("pair_visibility_diag", cal.pair_visibility_diag);
          cal.cat8_fidelity = jc.value("cat8_fidelity", cal.cat8_fidelity);
          cal.cat6_fidelity = jc.value("cat6_fidelity", cal.cat6_fidelity);
          base = scenario::calibrate_noise(cal).noise;
        } else {
          base = scenario::default_calibration().noise;
        }
        c.calibrated = true;
      } else if (preset != "ideal") {
        throw ConfigError("noise preset must be \"calibrated\" or \"ideal\"");
      }
      json overrides = noise;
      overrides.erase("preset");
      overrides.erase("calibration");
      c.noise = io::noise_from_json(overrides, base);
      c.plan = circuit::build_cat_setup(*c.variant, *c.noise);
      c.id = j.value("id", circuit::to_string(*c.variant));
    } else if (setup.is_object()) {
      c.plan = io::plan_from_json(setup);
      c.id = j.value("id", c.plan.name);
    } else {
      throw ConfigError("setup must be a variant name or a plan object");
    }
    if (c.id.empty() || c.id.find_first_of("/\\") != std::string::npos)
      throw ConfigError("id must be a non-empty name without path separators");

    const json acq = j.value("acquisition", json::object());
    const auto paper = c.variant ? scenario::paper_acquisition(*c.variant) : scenario::Acquisition{};
    if (acq.contains("rate_hz")) {
      const auto& r = acq.at("rate_hz");
      if (r.is_string() && r.get<std::string>() == "derive")
        c.rate_hz.reset();
      else
        c.rate_hz = positive(acq, "rate_hz", 0.0);
    } else if (c.variant) {
      c.rate_hz = paper.rate_hz;
    }
    c.pulse_rate_hz = positive(acq, "pulse_rate_hz", scenario::kPulseRateHz);
    if (!c.variant && (!acq.contains("z_duration_s") || !acq.contains("theta_duration_s")))
      throw ConfigError("custom setups need acquisition.z_duration_s and acquisition.theta_duration_s");
    c.z_duration_s = positive(acq, "z_duration_s", paper.z_duration_s);
    c.theta_duration_s = positive(acq, "theta_duration_s", paper.theta_duration_s);

    const int n = c.plan.num_qubits();
    const json settings = j.value("settings", json::object());
    if (settings.is_array()) {
      for (const auto& s : settings) c.settings.push_back(setting_from_json(s, n));
      if (c.settings.empty()) throw ConfigError("settings list is empty");
    } else if (settings.is_object()) {
      const int k0 = settings.value("grid_start", 0);
      if (k0 != 0 && k0 != 1) throw ConfigError("grid_start must be 0 or 1");
      c.settings = scenario::fidelity_settings(n, k0);
      for (const auto& t : settings.value("extra_thetas", json::array()))
        c.settings.push_back(setting_from_json(t, n));
    } else {
      throw ConfigError("settings must be a list or an object");
    }

    c.seed = j.value("seed", std::uint64_t{1});
    if (j.contains("output")) {
      fs::path out = j.at("output").get<std::string>();
      c.output = out.is_relative() && !base_dir.empty() ? base_dir / out : out;
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const std::domain_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const std::runtime_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config " + path.string());
  json j;
  try {
    j = json::parse(f);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_config(j, path.parent_path());
}

fs::path cmd_simulate(const ExperimentConfig& config, const SimulateOptions& options) {
  if (!(options.time_scale > 0.0) || !std::isfinite(options.time_scale))
    throw ConfigError("time scale must be positive");
  const fs::path out = options.out ? *options.out : config.output ? *config.output : default_output_root() / config.id;
  const std::uint64_t seed = options.seed.value_or(config.seed);

  const auto run = circuit::run_plan(config.plan);
  const auto ensemble = detection::postselect(run, config.plan);
  if (ensemble.empty()) throw DataError("post-selection kept no events; nothing to sample");
  const double rate = config.rate_hz.value_or(ensemble.success_prob * config.pulse_rate_hz);

  fs::create_directories(out);
  struct Written {
    std::string id, file;
    double rate, duration;
    std::uint64_t seed, total;
  };
  std::vector<std::future<Written>> jobs;
  for (std::size_t i = 0; i < config.settings.size(); ++i) {
    jobs.push_back(std::async(std::launch::async, [&, i] {
      const auto& s = config.settings[i];
      const auto id = setting_id(i);
      const auto dist = detection::outcome_distribution(ensemble, s);
      const double duration = (s.is_all_z() ? config.z_duration_s : config.theta_duration_s) * options.time_scale;
      const auto sseed = setting_seed(seed, i);
      const auto rec = options.exact ? detection::exact_counts(dist, s)
                                     : detection::sample_counts(dist, s, rate, duration, sseed);
      const std::string file = "counts_" + id + ".csv";
      detection::write_counts_csv(out / file, id, rec);
      return Written{id, file, options.exact ? 0.0 : rate, options.exact ? 0.0 : duration,
                     options.exact ? 0 : sseed, rec.total()};
    }));
  }
  json settings = json::array();
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const auto w = jobs[i].get();
    settings.push_back({{"id", w.id},
                        {"qubit_bases", config.settings[i].to_string()},
                        {"file", w.file},
                        {"rate_hz", w.rate},
                        {"duration_s", w.duration},
                        {"seed", w.seed},
                        {"total", w.total}});
  }

  json manifest{{"config", config.echo},
                {"id", config.id},
                {"setup", config.plan.name},
                {"n", config.plan.num_qubits()},
                {"plan", io::to_json(config.plan)},
                {"noise", config.noise ? io::to_json(*config.noise) : json(nullptr)},
                {"calibrated", config.calibrated},
                {"success_prob", ensemble.success_prob},
                {"dropped_weight", run.dropped_weight},
                {"exact", options.exact},
                {"exact_scale", options.exact ? 1e9 : 0.0},
                {"exact_fidelity", scenario::cat_fidelity(ensemble)},
                {"seed", seed},
                {"time_scale", options.time_scale},
                {"rate_hz", rate},
                {"settings", settings}};
  write_json(out / "manifest.json", manifest);
  return out;
}

report::AnalysisReport cmd_analyze(const fs::path& dir, const AnalyzeOptions& options) {
  if (!fs::is_directory(dir)) throw DataError("not a directory: " + dir.string());
  bool exact = false;
  if (fs::exists(dir / "manifest.json")) {
    std::ifstream f(dir / "manifest.json");
    try {
      exact = json::parse(f).value("exact", false);
    } catch (const json::exception& e) {
      throw DataError("manifest.json: " + std::string(e.what()));
    }
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (entry.is_regular_file() && name.starts_with("counts_") && name.ends_with(".csv")) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw DataError("no counts_*.csv files in " + dir.string());

  std::vector<report::NamedData> records;
  try {
    for (const auto& p : files) {
      auto csv = detection::read_counts_csv(p);
      auto data = analysis::SettingData::from_counts(csv.record);
      data.exact = exact;
      records.push_back({csv.setting_id, std::move(data)});
    }
  } catch (const std::runtime_error& e) {
    throw DataError(e.what());
  }

  report::AnalysisReport r;
  try {
    r = report::analyze(records, options.filter);
  } catch (const std::invalid_argument& e) {
    throw DataError(e.what());
  } catch (const std::domain_error& e) {
    throw DataError(e.what());
  }
  const fs::path out = options.out.value_or(dir);
  fs::create_directories(out);
  write_json(out / "report.json", report::to_json(r));
  report::write_fringe_csv(out / "fringe.csv", r.fringe);
  return r;
}

Figure figure_from_string(const std::string& s) {
  if (s == "fig2") return Figure::Fig2;
  if (s == "fig3") return Figure::Fig3;
  if (s == "figA2") return Figure::FigA2;
  throw ConfigError("unknown figure '" + s + "' (expected fig2, fig3 or figA2)");
}

namespace {

void write_z_csv(const fs::path& path, const detection::CountRecord& rec, int photons) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  const std::size_t mask = (std::size_t{1} << photons) - 1;
  const double total = static_cast<double>(rec.total());
  f << "outcome_bitstring,polarization_index,spatial_index,count,frequency\n";
  for (std::size_t x = 0; x < rec.counts.size(); ++x)
    f << detection::bitstring(x, rec.n()) << ',' << (x >> photons) << ',' << (x & mask) << ',' << rec.counts[x] << ','
      << fmt(total > 0 ? rec.counts[x] / total : 0.0) << '\n';
}

json estimate_json(const analysis::Estimate& e) { return {{"value", e.value}, {"sigma", e.sigma}}; }

struct SampledCat {
  detection::CountRecord z;
  std::vector<analysis::SettingData> data;
  std::vector<analysis::FringePoint> points;
  detection::QubitEnsemble ensemble;
};

SampledCat sample_cat(CatVariant v, const std::vector<double>& thetas, const ReproduceOptions& o) {
  SampledCat s;
  s.ensemble = detection::simulate(circuit::build_cat_setup(v, scenario::default_calibration().noise));
  const int n = s.ensemble.n;
  const auto acq = scenario::paper_acquisition(v);
  const auto zs = MeasurementSetting::all_z(n);
  s.z = detection::sample_counts(detection::outcome_distribution(s.ensemble, zs), zs, acq.rate_hz,
                                 acq.z_duration_s * o.time_scale, setting_seed(o.seed, 0));
  s.data.push_back(analysis::SettingData::from_counts(s.z));
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    const auto m = MeasurementSetting::all_equatorial(n, thetas[i]);
    const auto rec = detection::sample_counts(detection::outcome_distribution(s.ensemble, m), m, acq.rate_hz,
                                              acq.theta_duration_s * o.time_scale, setting_seed(o.seed, i + 1));
    const auto d = analysis::SettingData::from_counts(rec);
    if (d.total() > 0) s.points.push_back({thetas[i], analysis::expectation_M(d)});
    s.data.push_back(d);
  }
  return s;
}

json cat_summary(const SampledCat& s, std::optional<analysis::FringeFit>* fit_out = nullptr) {
  const int n = s.ensemble.n;
  json j{{"n", n}, {"exact_fidelity", scenario::cat_fidelity(s.ensemble)}, {"success_prob", s.ensemble.success_prob}};
  try {
    const auto input = scenario::make_input(n, s.data);
    const auto f = analysis::fidelity_cat(input);
    const auto w = analysis::witness_value(f);
    j["fidelity"] = estimate_json(f);
    j["witness"] = {{"value", w.value}, {"sigma", w.sigma}, {"significance", std::isfinite(w.significance) ? json(w.significance) : json("inf")}};
    const auto snr = analysis::signal_to_noise(input.z);
    j["signal_to_noise"] = {{"ratio", snr.ratio}, {"floored", snr.floored}};
  } catch (const std::exception& e) {
    j["error"] = e.what();
  }
  j["visibility_fit"] = nullptr;
  if (s.points.size() >= 4) {
    // the kπ/n grid alone leaves the phase unidentifiable
    try {
      const auto fit = analysis::fringe_fit(s.points, n);
      j["visibility_fit"] = {{"visibility", estimate_json(fit.visibility)}, {"phase", estimate_json(fit.phase)}};
      if (fit_out) *fit_out = fit;
    } catch (const std::domain_error&) {
    }
  }
  return j;
}

std::string reproduce_fig2(const fs::path& out, const ReproduceOptions& o) {
  // θ = kπ/48 over [0, 2π) contains the kπ/6 and kπ/8 fidelity grids
  std::vector<double> thetas;
  for (int k = 0; k < 96; ++k) thetas.push_back(k * std::numbers::pi / 48);
  json summary;
  std::ostringstream line;
  const std::pair<CatVariant, std::pair<const char*, const char*>> panels[] = {
      {CatVariant::Cat6, {"fig2a_cat6_zbasis.csv", "fig2b_cat6_fringe.csv"}},
      {CatVariant::Cat8, {"fig2c_cat8_zbasis.csv", "fig2d_cat8_fringe.csv"}}};
  for (const auto& [v, files] : panels) {
    const auto s = sample_cat(v, thetas, o);
    std::optional<analysis::FringeFit> fit;
    auto js = cat_summary(s, &fit);
    write_z_csv(out / files.first, s.z, circuit::photon_count(v));
    std::ofstream f(out / files.second, std::ios::binary);
    f << "theta,expectation,sigma,fit\n";
    for (const auto& p : s.points) {
      const double model = fit ? fit->visibility.value * std::cos(s.ensemble.n * p.theta + fit->phase.value) : 0.0;
      f << fmt(p.theta) << ',' << fmt(p.e.value) << ',' << fmt(p.e.sigma) << ',' << fmt(model) << '\n';
    }
    line << circuit::to_string(v);
    if (js.contains("fidelity"))
      line << ": F = " << fmt(js["fidelity"]["value"].get<double>()) << " +- "
           << fmt(js["fidelity"]["sigma"].get<double>());
    summary[circuit::to_string(v)] = js;
    if (fit) line << ", V = " << fmt(fit->visibility.value);
    line << "; ";
  }
  write_json(out / "fig2_summary.json", summary);
  return line.str();
}

std::string reproduce_fig3(const fs::path& out, const ReproduceOptions& o) {
  std::vector<double> thetas;
  for (int k = 0; k < 10; ++k) thetas.push_back(k * std::numbers::pi / 10);
  const auto s = sample_cat(CatVariant::Cat10, thetas, o);
  auto js = cat_summary(s);
  write_z_csv(out / "fig3a_zbasis.csv", s.z, 5);

  std::ofstream f(out / "fig3b_expectations.csv", std::ios::binary);
  f << "k,theta,expectation,sigma,exact\n";
  double mean_abs = 0.0;
  for (std::size_t i = 0; i < s.points.size(); ++i) {
    const auto& p = s.points[i];
    const auto m = MeasurementSetting::all_equatorial(10, p.theta);
    const double exact = analysis::expectation_M(
                             analysis::SettingData::from_distribution(m, detection::outcome_distribution(s.ensemble, m)))
                             .value;
    f << i << ',' << fmt(p.theta) << ',' << fmt(p.e.value) << ',' << fmt(p.e.sigma) << ',' << fmt(exact) << '\n';
    mean_abs += std::abs(p.e.value);
  }
  mean_abs /= std::max<std::size_t>(1, s.points.size());
  js["mean_abs_expectation"] = mean_abs;
  try {
    const auto input = scenario::make_input(10, s.data);
    for (auto mode : {analysis::FilterMode::PerQubit, analysis::FilterMode::Uniform}) {
      analysis::FilterSearchOptions opt;
      opt.mode = mode;
      const auto w = analysis::optimize_filter(input, analysis::FilterObjective::MinWitness, opt);
      const auto fi = analysis::optimize_filter(input, analysis::FilterObjective::MaxFidelity, opt);
      js["filter"][analysis::to_string(mode)] = {
          {"min_witness", {{"lambdas", w.lambda.lambdas}, {"value", w.objective.value}, {"sigma", w.objective.sigma}}},
          {"max_fidelity", {{"lambdas", fi.lambda.lambdas}, {"value", fi.objective.value}, {"sigma", fi.objective.sigma}}}};
    }
  } catch (const std::exception& e) {
    js["filter_error"] = e.what();
  }
  write_json(out / "fig3_summary.json", js);
  std::ostringstream line;
  if (js.contains("fidelity"))
    line << "cat10: F = " << fmt(js["fidelity"]["value"].get<double>()) << " +- "
         << fmt(js["fidelity"]["sigma"].get<double>()) << ", W = " << fmt(js["witness"]["value"].get<double>())
         << ", mean |E| = " << fmt(mean_abs);
  else
    line << "cat10: " << js.value("error", std::string("no fidelity"));
  return line.str();
}

std::string reproduce_figA2(const fs::path& out) {
  std::vector<double> thetas;
  for (int k = 0; k <= 72; ++k) thetas.push_back(k * 2.0 * std::numbers::pi / 72);
  const auto c = detection::analyzer_scenario_single_photon(thetas);
  std::ofstream f(out / "figA2_curves.csv", std::ios::binary);
  f << "theta,plus_plus,plus_minus,r_plus,r_minus\n";
  for (std::size_t i = 0; i < thetas.size(); ++i)
    f << fmt(thetas[i]) << ',' << fmt(c.plus_plus[i]) << ',' << fmt(c.plus_minus[i]) << ',' << fmt(c.r_plus[i]) << ','
      << fmt(c.r_minus[i]) << '\n';
  const double v = (c.plus_plus.front() - c.plus_minus.front()) / (c.plus_plus.front() + c.plus_minus.front());
  write_json(out / "figA2_summary.json", {{"visibility", v},
                                          {"plus_plus_visibility", detection::curve_visibility(c.plus_plus)},
                                          {"r_plus_visibility", detection::curve_visibility(c.r_plus)}});
  return "figA2: visibility " + fmt(v);
}

}  // namespace

std::string cmd_reproduce(Figure fig, const fs::path& out, const ReproduceOptions& options) {
  if (!(options.time_scale > 0.0) || !std::isfinite(options.time_scale))
    throw ConfigError("time scale must be positive");
  fs::create_directories(out);
  switch (fig) {
    case Figure::Fig2: return reproduce_fig2(out, options);
    case Figure::Fig3: return reproduce_fig3(out, options);
    case Figure::FigA2: return reproduce_figA2(out);
  }
  return {};
}

}  // namespace hypercat::cli
