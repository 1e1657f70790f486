#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "hypercat/analysis.hpp"
#include "hypercat/circuit.hpp"
#include "hypercat/report.hpp"

namespace hypercat::cli {

/// Bad configuration or arguments (exit code 2).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Unreadable or inconsistent data (exit code 3).
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;

/// Environment variable naming the default output root.
inline constexpr const char* kOutputRootEnv = "HYPERCAT_OUTPUT_ROOT";

struct ExperimentConfig {
  std::string id;
  std::optional<circuit::CatVariant> variant;
  circuit::CircuitPlan plan;
  std::optional<circuit::NoiseSpec> noise;
  bool calibrated = false;
  /// Coincidence rate per setting; derived from the success probability when unset.
  std::optional<double> rate_hz;
  double pulse_rate_hz = 76e6;
  double z_duration_s = 0.0;
  double theta_duration_s = 0.0;
  std::vector<detection::MeasurementSetting> settings;
  std::uint64_t seed = 1;
  std::optional<std::filesystem::path> output;
  nlohmann::json echo;
};

/// Throws ConfigError. Relative output paths resolve against `base_dir`.
ExperimentConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

std::filesystem::path default_output_root();

struct SimulateOptions {
  std::optional<std::uint64_t> seed;
  double time_scale = 1.0;
  bool exact = false;
  std::optional<std::filesystem::path> out;
};

/// Writes counts_<id>.csv per setting and manifest.json (last). Returns the
/// output directory.
std::filesystem::path cmd_simulate(const ExperimentConfig& config, const SimulateOptions& options = {});

struct AnalyzeOptions {
  std::optional<analysis::FilterMode> filter;
  std::optional<std::filesystem::path> out;
};

/// Reads the counts CSVs (and manifest.json when present) from `dir`, writes
/// report.json and fringe.csv. Throws DataError.
report::AnalysisReport cmd_analyze(const std::filesystem::path& dir, const AnalyzeOptions& options = {});

enum class Figure { Fig2, Fig3, FigA2 };
Figure figure_from_string(const std::string& s);

struct ReproduceOptions {
  std::uint64_t seed = 1;
  double time_scale = 1.0;
};

/// Writes plot-ready CSVs and a summary JSON; returns a one-line summary.
std::string cmd_reproduce(Figure fig, const std::filesystem::path& out, const ReproduceOptions& options = {});

/// Seed of setting `index` derived from the run seed.
std::uint64_t setting_seed(std::uint64_t seed, std::size_t index);

}  // namespace hypercat::cli
