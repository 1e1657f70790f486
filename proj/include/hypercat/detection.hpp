#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hypercat/circuit.hpp"

namespace hypercat::detection {

/// Post-selected logical register. An ensemble with no surviving events is
/// returned as `empty()` instead of a NaN-filled matrix.
struct QubitEnsemble {
  Eigen::MatrixXcd rho;
  int n = 0;
  double success_prob = 0.0;

  bool empty() const { return success_prob <= 0.0 || rho.size() == 0; }
  /// Throws std::domain_error when empty.
  void require_nonempty() const;
  /// Checks unit trace, Hermiticity and positivity to `tol`.
  bool is_valid(double tol = 1e-10) const;

  static QubitEnsemble from_pure(const Eigen::VectorXcd& psi);
  static QubitEnsemble from_density(Eigen::MatrixXcd rho);
};

struct QubitBasis {
  enum class Kind { Z, Equatorial };
  Kind kind = Kind::Z;
  double theta = 0.0;

  static QubitBasis z() { return {}; }
  static QubitBasis equatorial(double theta) { return {Kind::Equatorial, theta}; }
  bool operator==(const QubitBasis&) const = default;
};

struct MeasurementSetting {
  std::vector<QubitBasis> bases;

  int size() const { return static_cast<int>(bases.size()); }
  static MeasurementSetting all_z(int n);
  static MeasurementSetting all_equatorial(int n, double theta);
  bool is_all_z() const;
  /// True when every qubit is measured at the same equatorial angle.
  bool is_uniform_equatorial() const;
  /// "Z" or the angle in radians per qubit, joined by ';'.
  std::string to_string() const;
  static MeasurementSetting parse(const std::string& s);
};

/// Coincidence counts of one setting, indexed by outcome with qubit 0 as the
/// most significant bit.
struct CountRecord {
  MeasurementSetting setting;
  std::vector<std::uint64_t> counts;
  double rate_hz = 0.0;
  double duration_s = 0.0;
  std::uint64_t seed = 0;

  int n() const { return setting.size(); }
  std::uint64_t total() const;
};

std::string bitstring(std::size_t index, int n);
std::size_t parse_bitstring(const std::string& s);

// --- operations ---------------------------------------------------------------

/// Projects the branches onto one detected photon per detector group, with
/// per-photon efficiency `plan.efficiency`, and maps the survivors to the
/// logical register. Lost photons and distinguishability labels are traced
/// out. Analyzer visibilities damp spatial-qubit coherences and plan local
/// unitaries are applied last.
QubitEnsemble postselect(const circuit::RunResult& run, const circuit::CircuitPlan& plan);
QubitEnsemble postselect(const fock::OpticalState& s, const circuit::CircuitPlan& plan);

/// Convenience: run_plan followed by postselect.
QubitEnsemble simulate(const circuit::CircuitPlan& plan);

/// Scales the coherences of `qubit` by `factor`.
void dephase_qubit(QubitEnsemble& e, int qubit, double factor);
void apply_local_unitary(QubitEnsemble& e, int qubit, const Eigen::Matrix2cd& u);

/// Outcome probabilities. For an equatorial basis at angle θ, outcome 0 is
/// (|0> + e^{iθ}|1>)/√2 and outcome 1 is (|0> - e^{iθ}|1>)/√2.
std::vector<double> outcome_distribution(const QubitEnsemble& e, const MeasurementSetting& m);

/// Independent Poisson counts per bin with mean rate·duration·dist[i].
CountRecord sample_counts(const std::vector<double>& dist, const MeasurementSetting& setting,
                          double rate_hz, double duration_s, std::uint64_t seed);

/// Exact probabilities scaled by `scale` and rounded, for "infinite statistics" runs.
CountRecord exact_counts(const std::vector<double>& dist, const MeasurementSetting& setting,
                         double scale = 1e9);

struct AnalyzerCurves {
  std::vector<double> theta;
  /// polarization projected on |+>, spatial qubit on (|H'> ± e^{iθ}|V'>)/√2
  std::vector<double> plus_plus, plus_minus;
  /// polarization projected on |R> = (|H> + i|V>)/√2
  std::vector<double> r_plus, r_minus;
};

/// Single photon in |+> sent through a hyper-encoding PBS, a phase-shifted
/// NBS interferometer and a waveplate/PBS polarization analyzer. Spatial
/// outcome probabilities are conditioned on the polarization projection.
AnalyzerCurves analyzer_scenario_single_photon(const std::vector<double>& theta_grid,
                                               double interferometer_visibility = 1.0);

/// (max - min) / (max + min) over a sampled curve.
double curve_visibility(const std::vector<double>& curve);

// --- CSV ----------------------------------------------------------------------

/// Columns: setting_id,qubit_bases,outcome_bitstring,count; one row per outcome.
void write_counts_csv(const std::filesystem::path& path, const std::string& setting_id, const CountRecord& rec);
struct CsvRecord {
  std::string setting_id;
  CountRecord record;
};
/// Throws std::runtime_error on schema violations.
CsvRecord read_counts_csv(const std::filesystem::path& path);

}  // namespace hypercat::detection
