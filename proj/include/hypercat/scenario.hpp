#pragma once

#include <vector>

#include "hypercat/analysis.hpp"
#include "hypercat/circuit.hpp"
#include "hypercat/detection.hpp"

/// Named experiments: noise calibration, acquisition defaults and the
/// settings used for fidelity estimation.
namespace hypercat::scenario {

/// <Cat|ρ|Cat> read directly off the density matrix.
double cat_fidelity(const detection::QubitEnsemble& e);

/// Anchors for the default noise model. The pair amplitude follows from the
/// pair visibility, ξ (shared by both PBSs) is fit so that the exact eight-qubit
/// fidelity hits `cat8_fidelity`, and the weak coherent mean photon number is
/// fit so that the six-qubit fidelity hits `cat6_fidelity`.
struct Calibration {
  double efficiency = 0.2;
  double pair_visibility_hv = 0.92;
  double pair_visibility_diag = 0.90;
  double cat8_fidelity = 0.776;
  double cat6_fidelity = 0.6308;
};

struct CalibratedNoise {
  circuit::NoiseSpec noise;
  double cat6 = 0.0, cat8 = 0.0, cat10 = 0.0;
};

CalibratedNoise calibrate_noise(const Calibration& c = {});

/// calibrate_noise() with default anchors, computed once.
const CalibratedNoise& default_calibration();

double exact_fidelity(circuit::CatVariant v, const circuit::NoiseSpec& noise);

struct Acquisition {
  /// Coincidence rate per setting.
  double rate_hz = 0.0;
  double z_duration_s = 0.0;
  double theta_duration_s = 0.0;
};

/// Rates and integration times of the reported runs.
Acquisition paper_acquisition(circuit::CatVariant v);

constexpr double kPulseRateHz = 76e6;

/// All-Z plus n uniform equatorial settings at θ = kπ/n, k = k0 .. k0+n-1.
std::vector<detection::MeasurementSetting> fidelity_settings(int n, int k0 = 0);

/// Assembles the analysis input from one all-Z record and records on the kπ/n
/// grid. Off-grid records are ignored; the first record for each k wins.
analysis::CatAnalysisInput make_input(int n, const std::vector<analysis::SettingData>& data);

/// Exact analysis input of an ensemble, on the k = 1..n grid.
analysis::CatAnalysisInput exact_input(const detection::QubitEnsemble& e);

/// Share of the non-cat Z-basis weight sitting on outcomes whose polarization
/// bits equal their spatial bits (the diagonal of the polarization x spatial
/// grid). Assumes `photons` polarization qubits followed by `photons` spatial
/// qubits.
double diagonal_noise_fraction(const std::vector<double>& z_weights, int photons);

}  // namespace hypercat::scenario
