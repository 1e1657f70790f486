#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "hypercat/analysis.hpp"
#include "hypercat/detection.hpp"

/// Dense reference implementations. Everything here works on explicit
/// 2^n-dimensional vectors and matrices (qubit 0 is the most significant bit
/// of the basis index) and shares no code path with the estimators.
namespace hypercat::oracle {

class DenseState {
 public:
  /// Throws unless `amps` has 2^n entries (1 <= n <= 12) and unit norm.
  explicit DenseState(Eigen::VectorXcd amps);

  int n() const { return n_; }
  const Eigen::VectorXcd& amplitudes() const { return amps_; }
  Eigen::MatrixXcd density() const { return amps_ * amps_.adjoint(); }

 private:
  Eigen::VectorXcd amps_;
  int n_ = 0;
};

DenseState dense_cat(int n);

/// Linear cluster state on n qubits: CZ on neighbours applied to |+>^n.
DenseState dense_linear_cluster(int n);

/// Copies each listed qubit into a fresh qubit appended at the end
/// (|0> -> |00>, |1> -> |11>), in the order given.
DenseState redundant_encode(const DenseState& s, const std::vector<int>& qubits);

/// Builds ⊗_i O_i with O_i = σ_z or M_θ.
Eigen::MatrixXcd observable(const detection::MeasurementSetting& setting);

/// Tr(ρ ⊗_i O_i). Throws on non-Hermitian input.
double direct_expectation(const Eigen::MatrixXcd& rho, const detection::MeasurementSetting& setting);

double direct_fidelity(const Eigen::MatrixXcd& rho, const DenseState& target);

struct FilteredValues {
  double witness = 0.0;
  double fidelity = 0.0;
};

/// Tr(N' F W F ρ) and <Cat|FρF|Cat>/Tr(FρF) with explicit matrices.
FilteredValues direct_filtered(const Eigen::MatrixXcd& rho, const analysis::FilterParams& lambda);

/// Diagonal filter matrix ⊗_i F_i.
Eigen::MatrixXcd filter_matrix(const analysis::FilterParams& lambda);

/// True iff g|ψ> = |ψ> to 1e-9 for every generator. Generators are strings
/// over {I, X, Y, Z} with an optional leading '+' or '-'.
bool stabilizer_check(const DenseState& state, const std::vector<std::string>& generators);

/// Applies a signed Pauli string to a state vector.
Eigen::VectorXcd apply_pauli(const Eigen::VectorXcd& psi, const std::string& pauli);

/// Random density matrix of rank `rank` from Gaussian Ginibre factors.
Eigen::MatrixXcd random_density(int n, int rank, unsigned seed);

}  // namespace hypercat::oracle
