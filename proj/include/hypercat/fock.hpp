#pragma once

#include <compare>
#include <complex>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace hypercat {

using Complex = std::complex<double>;

namespace fock {

enum class Pol { H = 0, V = 1 };

/// One bosonic mode: a spatial path, a polarization and a distinguishability
/// tag. Photons carrying different tags never interfere; optical elements act
/// on (path, pol) and leave the tag untouched.
struct Mode {
  int path = 0;
  Pol pol = Pol::H;
  int tag = 0;

  auto operator<=>(const Mode&) const = default;
  bool same_port(const Mode& o) const { return path == o.path && pol == o.pol; }
};

inline Mode H(int path) { return {path, Pol::H, 0}; }
inline Mode V(int path) { return {path, Pol::V, 0}; }

std::string to_string(const Mode& m);

/// Occupation numbers in canonical form: sorted by mode, no zero entries.
class FockConfiguration {
 public:
  FockConfiguration() = default;
  explicit FockConfiguration(std::vector<std::pair<Mode, int>> occupations);

  int total() const;
  int count(const Mode& m) const;
  const std::vector<std::pair<Mode, int>>& occupations() const { return occ_; }

  FockConfiguration with_added(const Mode& m, int n) const;
  FockConfiguration merged(const FockConfiguration& other) const;

  auto operator<=>(const FockConfiguration&) const = default;

 private:
  std::vector<std::pair<Mode, int>> occ_;
};

inline constexpr int kDefaultPhotonCap = 6;
inline constexpr double kDefaultPruneThreshold = 1e-24;

/// Sparse superposition of Fock configurations over a registry of
/// (path, pol) ports. The registry lists ports with tag 0; configurations may
/// carry any tag on a registered port.
class OpticalState {
 public:
  using Terms = std::map<FockConfiguration, Complex>;

  OpticalState() = default;
  OpticalState(std::vector<Mode> registry, int n_max);

  static OpticalState vacuum(std::vector<Mode> registry, int n_max = kDefaultPhotonCap);

  const Terms& terms() const { return terms_; }
  const std::vector<Mode>& registry() const { return registry_; }
  int n_max() const { return n_max_; }

  bool has_port(const Mode& m) const;
  double norm_squared() const;
  Complex amplitude(const FockConfiguration& c) const;

  /// Adds `amp` to the amplitude of `c`. Throws if `c` uses an unregistered
  /// port or exceeds n_max.
  void add(const FockConfiguration& c, Complex amp);
  void scale(Complex factor);
  void prune(double threshold = kDefaultPruneThreshold);

  /// Applies the creation operator a†(m).
  OpticalState create(const Mode& m) const;

  void set_n_max(int n) { n_max_ = n; }
  void set_registry(std::vector<Mode> registry);
  /// Moves every photon on `from` ports to the same port with the tag
  /// transformed by `retag`. Used to model distinguishable photons.
  OpticalState retagged(int path, int tag_bits) const;

 private:
  std::vector<Mode> registry_;
  Terms terms_;
  int n_max_ = kDefaultPhotonCap;
};

enum class ElementKind { PBS, NBS, HWP, QWP, PHASE };

std::string to_string(ElementKind k);
ElementKind element_kind_from_string(const std::string& s);

/// A passive linear-optical element given by its single-photon transfer
/// matrix: a†(inputs[j]) -> sum_i matrix(i, j) a†(outputs[i]).
/// Inputs and outputs are ports (tag ignored); outputs may coincide with
/// inputs for in-place elements such as waveplates.
struct ElementUnitary {
  ElementKind kind = ElementKind::PHASE;
  std::vector<double> params;
  std::vector<Mode> inputs;
  std::vector<Mode> outputs;
  Eigen::MatrixXcd matrix;

  ElementUnitary inverse() const;
  bool is_unitary(double tol = 1e-12) const;
};

/// Polarizing beam splitter: H goes a->c, b->d; V goes a->d, b->c.
ElementUnitary pbs(int a, int b, int c, int d);
/// PBS with a single occupied input: H on `in` goes to `h_out`, V to `v_out`.
ElementUnitary pbs_split(int in, int h_out, int v_out);
/// 50:50 non-polarizing beam splitter, symmetric convention:
/// a† -> (c† + i d†)/√2, b† -> (i c† + d†)/√2 for both polarizations.
ElementUnitary nbs(int a, int b, int c, int d);
/// Half-wave plate with fast axis at `angle` (radians) from H.
ElementUnitary hwp(int path, double angle);
/// Quarter-wave plate with fast axis at `angle` (radians) from H.
ElementUnitary qwp(int path, double angle);
/// Phase e^{i phi} on each listed port.
ElementUnitary phase(std::vector<Mode> ports, double phi);

OpticalState tensor(const OpticalState& a, const OpticalState& b, int cap = kDefaultPhotonCap);

OpticalState apply_element(const OpticalState& s, const ElementUnitary& u,
                           double prune_threshold = kDefaultPruneThreshold);

/// Removes configurations above n_max. Amplitudes are not renormalized.
std::pair<OpticalState, double> truncate(const OpticalState& s, int n_max);

}  // namespace fock
}  // namespace hypercat
