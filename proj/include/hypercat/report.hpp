#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hypercat/analysis.hpp"

namespace hypercat::report {

struct SettingSummary {
  std::string id;
  detection::MeasurementSetting setting;
  double total = 0.0;
  /// Parity expectation, for uniform equatorial settings only.
  std::optional<analysis::Estimate> expectation;
};

struct FilterSummary {
  analysis::FilterMode mode = analysis::FilterMode::PerQubit;
  analysis::FilterResult witness;
  analysis::FilterResult fidelity;
};

struct AnalysisReport {
  int n = 0;
  bool exact = false;
  analysis::Estimate fidelity;
  analysis::WitnessEstimate witness;
  analysis::SignalToNoise signal_to_noise;
  std::vector<SettingSummary> settings;
  std::vector<analysis::FringePoint> fringe;
  /// Present when at least four distinct angles were measured.
  std::optional<analysis::FringeFit> fringe_fit;
  std::optional<FilterSummary> filter;
};

struct NamedData {
  std::string id;
  analysis::SettingData data;
};

/// Full cat analysis of one experiment. Every uniform equatorial setting
/// enters the fringe; the kπ/n subset feeds the fidelity.
AnalysisReport analyze(const std::vector<NamedData>& records,
                       std::optional<analysis::FilterMode> filter = std::nullopt);

nlohmann::json to_json(const AnalysisReport& r);

/// Columns: theta,expectation,sigma; sorted by θ.
void write_fringe_csv(const std::filesystem::path& path, const std::vector<analysis::FringePoint>& points);

}  // namespace hypercat::report
