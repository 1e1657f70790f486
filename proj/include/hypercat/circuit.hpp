#pragma once

#include <array>
#include <string>
#include <vector>

#include "hypercat/fock.hpp"

namespace hypercat::circuit {

using fock::OpticalState;

enum class SourceKind { SPDC_PAIR, WEAK_COHERENT, INJECTED };

std::string to_string(SourceKind k);
SourceKind source_kind_from_string(const std::string& s);

/// Photon source parameters.
///
/// SPDC_PAIR emits (|HH> + |VV>)/√2 pairs with pair amplitude `tau`, expanded
/// to `max_pairs` pairs. A pair coherence below one (visibility_diag smaller
/// than visibility_hv) is realized as an incoherent sign flip of the |VV> term.
/// WEAK_COHERENT is an attenuated laser with mean photon number `p` in
/// polarization `pol_state`, expanded up to two photons.
/// INJECTED places the logical polarization state `amplitudes` (2^k entries,
/// first photon is the most significant bit, 0 = H) on k paths, one photon each.
struct SourceSpec {
  SourceKind kind = SourceKind::SPDC_PAIR;
  double tau = 0.1;
  int max_pairs = 2;
  double p = 0.03;
  std::array<Complex, 2> pol_state{Complex{M_SQRT1_2}, Complex{M_SQRT1_2}};
  double visibility_hv = 1.0;
  double visibility_diag = 1.0;
  std::vector<Complex> amplitudes;

  void validate() const;
  /// Fraction of pair emissions that keep the |HH>+|VV> sign; 1 when coherent.
  double coherent_weight() const;
};

struct SourcePlacement {
  SourceSpec spec;
  std::vector<int> paths;
};

/// An element in a plan; `distinguishability` is the probability that the
/// photons meeting at this element are mutually distinguishable.
struct PlannedElement {
  fock::ElementUnitary element;
  double distinguishability = 0.0;
  std::string label;
};

/// One photon's detector: a single path (polarization readout only) or a
/// pair of paths (h, v) carrying the spatial qubit of a hyper-encoded photon.
struct DetectorGroup {
  std::vector<int> paths;
};

enum class QubitKind { Polarization, Spatial };

struct LogicalQubit {
  QubitKind kind = QubitKind::Polarization;
  int detector = 0;
};

struct LocalUnitary {
  int qubit = 0;
  Eigen::Matrix2cd matrix = Eigen::Matrix2cd::Identity();
};

struct CircuitPlan {
  std::string name;
  std::vector<SourcePlacement> sources;
  std::vector<PlannedElement> elements;
  std::vector<DetectorGroup> detectors;
  std::vector<LogicalQubit> qubit_map;
  /// Per-photon detection efficiency.
  double efficiency = 1.0;
  int photon_cap = fock::kDefaultPhotonCap;
  /// Coherence of each spatial-qubit analyzer, one entry per detector group.
  std::vector<double> analyzer_visibility;
  /// Logical single-qubit gates applied after post-selection.
  std::vector<LocalUnitary> local_unitaries;

  int num_qubits() const { return static_cast<int>(qubit_map.size()); }
  void validate() const;
};

struct NoiseSpec {
  double tau = 0.1;
  int max_pairs = 2;
  double p = 0.03;
  double pair_visibility_hv = 1.0;
  double pair_visibility_diag = 1.0;
  /// Distinguishability at PBS1 and PBS2.
  std::array<double, 2> xi{0.0, 0.0};
  double efficiency = 1.0;
  double analyzer_visibility = 1.0;
  /// Relative phase of |V> in the weak coherent polarization state.
  double wcs_phase = 0.0;

  static NoiseSpec ideal() { return {}; }
  void validate() const;
};

/// Pair amplitude for which double-pair emission alone reduces the H/V
/// two-photon visibility of a source to `visibility_hv` at detection
/// efficiency `efficiency`. Visibility 1 maps to tau 0.
double tau_for_pair_visibility(double visibility_hv, double efficiency);

/// Two-photon H/V visibility of a single pair source under the same model.
double pair_visibility_for_tau(double tau, double efficiency);

// --- sources and stages -----------------------------------------------------

/// Two-mode squeezed pair source on paths (a, b), expanded to spec.max_pairs
/// pairs and scaled by the vacuum prefactor (1 - tau²/2), so the norm is the
/// retained probability. `sign` = -1 emits the |HH> - |VV> branch.
OpticalState spdc_pair_state(const SourceSpec& spec, int a, int b, int sign = 1,
                             int cap = fock::kDefaultPhotonCap);

OpticalState weak_coherent_state(const SourceSpec& spec, int path,
                                 int cap = fock::kDefaultPhotonCap);

OpticalState injected_state(const SourceSpec& spec, const std::vector<int>& paths,
                            int cap = fock::kDefaultPhotonCap);

OpticalState fuse_on_pbs(const OpticalState& s, int a, int b, int c, int d);

/// Splits `path` on a PBS into spatial paths h (for H) and v (for V).
OpticalState hyper_encode(const OpticalState& s, int path, int h, int v);

/// Spatial path labels used when hyper-encoding detector path `p`.
int encoded_h_path(int p);
int encoded_v_path(int p);

enum class CatVariant { Cat6, Cat8, Cat10 };
std::string to_string(CatVariant v);
CatVariant cat_variant_from_string(const std::string& s);
int photon_count(CatVariant v);

CircuitPlan build_cat_setup(CatVariant variant, const NoiseSpec& noise);

/// `initial` holds 2^k amplitudes of a k-photon polarization state.
CircuitPlan build_graph_setup(const std::vector<Complex>& initial, const std::vector<int>& encode_set,
                              const std::vector<LocalUnitary>& local_unitaries = {});

// --- running a plan -----------------------------------------------------------

/// One term of the convex mixture produced by incoherent noise.
struct Branch {
  double weight = 1.0;
  OpticalState state;
};

struct RunResult {
  std::vector<Branch> branches;
  /// Probability mass removed by the photon-number cap, weighted over branches.
  double dropped_weight = 0.0;
};

RunResult run_plan(const CircuitPlan& plan);

}  // namespace hypercat::circuit
