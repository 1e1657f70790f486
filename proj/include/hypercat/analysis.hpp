#pragma once

#include <string>
#include <utility>
#include <vector>

#include "hypercat/detection.hpp"

namespace hypercat::analysis {

using detection::CountRecord;
using detection::MeasurementSetting;

struct Estimate {
  double value = 0.0;
  double sigma = 0.0;
};

/// Local filter parameters λ_i, one per qubit, for
/// F_i = (1 + λ_i)|0><0| + (1 - λ_i)|1><1|.
struct FilterParams {
  std::vector<double> lambdas;

  static constexpr double kMargin = 1e-6;
  static FilterParams identity(int n) { return {std::vector<double>(n, 0.0)}; }
  static FilterParams uniform(int n, double lambda) { return {std::vector<double>(n, lambda)}; }
  bool is_identity() const;
  /// Throws std::invalid_argument if any |λ_i| > 1 - kMargin or is non-finite.
  void validate(int n) const;
};

/// Outcome weights of one setting. Counts carry Poisson errors; exact
/// probabilities (`exact = true`) carry none.
struct SettingData {
  MeasurementSetting setting;
  std::vector<double> weights;
  bool exact = false;

  static SettingData from_counts(const CountRecord& rec);
  static SettingData from_distribution(MeasurementSetting setting, std::vector<double> probs);
  int n() const { return setting.size(); }
  double total() const;
};

/// One all-Z setting plus equatorial settings on the θ = kπ/n grid, either
/// k = 1..n or k = 0..n-1 (angles differing by π carry the same data with
/// parity sign (-1)^n).
struct CatAnalysisInput {
  int n = 0;
  SettingData z;
  std::vector<SettingData> thetas;

  void validate() const;
  /// ⟨M_{kπ/n}^⊗n⟩ for k = 1..n, remapped from whatever grid was supplied.
  std::vector<Estimate> grid_expectations() const;
};

/// Parity estimate Σ(-1)^{|x|} N_x / N with σ² = (1 - E²)/N for counts.
Estimate expectation_M(const SettingData& data);
Estimate expectation_M(const CountRecord& rec);

/// ½(P_{0ⁿ} + P_{1ⁿ}) + (1/2n) Σ_k (-1)^k ⟨M_{kπ/n}^⊗n⟩.
Estimate fidelity_cat(const CatAnalysisInput& input);

struct WitnessEstimate {
  double value = 0.0;
  double sigma = 0.0;
  /// (F - 1/2)/σ; infinite when σ = 0 and F ≠ 1/2.
  double significance = 0.0;
};

WitnessEstimate witness_value(const Estimate& fidelity);

struct FringePoint {
  double theta = 0.0;
  Estimate e;
};

struct FringeFit {
  Estimate visibility;
  Estimate phase;
};

/// Weighted least squares of E(θ) = V cos(nθ + φ). Points with zero sigma
/// switch the fit to unit weights with residual-scaled covariance.
FringeFit fringe_fit(const std::vector<FringePoint>& points, int n);

struct SignalToNoise {
  double ratio = 0.0;
  /// True when no undesired counts were seen and a one-count floor was used.
  bool floored = false;
};

SignalToNoise signal_to_noise(const SettingData& z);
SignalToNoise signal_to_noise(const CountRecord& z);

/// ⟨W_F⟩ for W_F = N' F W F with Tr(W_F) = Tr(W), W = 1/2 - |Cat><Cat|.
Estimate filtered_witness(const CatAnalysisInput& input, const FilterParams& lambda);

/// Fidelity of N F ρ F with the cat state.
Estimate filtered_fidelity(const CatAnalysisInput& input, const FilterParams& lambda);

/// Tr(F W F) for diagonal local filters.
double filtered_witness_trace(const FilterParams& lambda);

enum class FilterObjective { MinWitness, MaxFidelity };
enum class FilterMode { PerQubit, Uniform };

std::string to_string(FilterObjective o);
std::string to_string(FilterMode m);

struct FilterSearchOptions {
  FilterMode mode = FilterMode::PerQubit;
  int max_sweeps = 30;
  /// Golden-section interval tolerance on λ.
  double line_tolerance = 1e-7;
  /// Stop when a sweep improves the objective by less than this.
  double sweep_tolerance = 1e-12;
};

struct FilterResult {
  FilterParams lambda;
  Estimate objective;
  /// Objective value at λ = 0.
  double unfiltered = 0.0;
};

/// Coordinate descent with golden-section line searches over
/// [-1 + margin, 1 - margin]; each coordinate search starts from three
/// sub-intervals. The λ = 0 start is kept unless strictly beaten.
FilterResult optimize_filter(const CatAnalysisInput& input, FilterObjective objective,
                             const FilterSearchOptions& options = {});

}  // namespace hypercat::analysis
