#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "hypercat/commands.hpp"

using namespace hypercat;

int main(int argc, char** argv) {
  CLI::App app{"Hyper-entangled cat state simulator and analysis toolkit"};
  app.require_subcommand(1);

  auto* sim = app.add_subcommand("simulate", "simulate an experiment and write counts CSVs");
  std::string config_path;
  std::uint64_t seed = 0;
  double time_scale = 1.0;
  bool exact = false;
  std::string sim_out;
  sim->add_option("--config", config_path, "experiment config (JSON)")->required();
  auto* seed_opt = sim->add_option("--seed", seed, "override the config seed");
  sim->add_option("--time-scale", time_scale, "multiply every acquisition time");
  sim->add_flag("--exact", exact, "write exact probabilities x 1e9 instead of sampled counts");
  sim->add_option("--out", sim_out, "output directory");

  auto* ana = app.add_subcommand("analyze", "analyze a directory of counts CSVs");
  std::string in_dir, filter, ana_out;
  ana->add_option("--in", in_dir, "directory written by simulate")->required();
  ana->add_option("--filter", filter, "optimize local filters")->check(CLI::IsMember({"uniform", "per-qubit"}));
  ana->add_option("--out", ana_out, "report directory (default: --in)");

  auto* rep = app.add_subcommand("reproduce", "regenerate the data behind a figure");
  std::string figure, rep_out;
  std::uint64_t rep_seed = 1;
  double rep_scale = 1.0;
  rep->add_option("figure", figure, "fig2, fig3 or figA2")->required();
  rep->add_option("--out", rep_out, "output directory");
  rep->add_option("--seed", rep_seed, "sampling seed");
  rep->add_option("--time-scale", rep_scale, "multiply every acquisition time");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kExitConfig;
  }

  try {
    if (*sim) {
      const auto config = cli::load_config(config_path);
      cli::SimulateOptions o;
      if (*seed_opt) o.seed = seed;
      o.time_scale = time_scale;
      o.exact = exact;
      if (!sim_out.empty()) o.out = sim_out;
      std::cout << cli::cmd_simulate(config, o).string() << '\n';
    } else if (*ana) {
      cli::AnalyzeOptions o;
      if (filter == "uniform") o.filter = analysis::FilterMode::Uniform;
      if (filter == "per-qubit") o.filter = analysis::FilterMode::PerQubit;
      if (!ana_out.empty()) o.out = ana_out;
      const auto r = cli::cmd_analyze(in_dir, o);
      std::printf("n = %d  F = %.4f +- %.4f  W = %.4f  (%.1f sigma)\n", r.n, r.fidelity.value, r.fidelity.sigma,
                  r.witness.value, r.witness.significance);
      if (r.filter)
        std::printf("filtered: W_F = %.4f +- %.4f  F = %.4f +- %.4f\n", r.filter->witness.objective.value,
                    r.filter->witness.objective.sigma, r.filter->fidelity.objective.value,
                    r.filter->fidelity.objective.sigma);
    } else if (*rep) {
      const auto fig = cli::figure_from_string(figure);
      const std::filesystem::path out = rep_out.empty() ? cli::default_output_root() / figure : std::filesystem::path(rep_out);
      std::cout << cli::cmd_reproduce(fig, out, {rep_seed, rep_scale}) << '\n';
    }
  } catch (const cli::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return cli::kExitConfig;
  } catch (const cli::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return cli::kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
