#include "hypercat/oracle.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace hypercat::oracle {

namespace {

Eigen::Matrix2cd single_qubit_observable(const detection::QubitBasis& b) {
  Eigen::Matrix2cd o;
  if (b.kind == detection::QubitBasis::Kind::Z) {
    o << 1.0, 0.0, 0.0, -1.0;
  } else {
    // cos θ σx + sin θ σy
    o << 0.0, std::polar(1.0, -b.theta), std::polar(1.0, b.theta), 0.0;
  }
  return o;
}

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

void require_square_pow2(const Eigen::MatrixXcd& rho) {
  const auto d = rho.rows();
  if (d != rho.cols() || d < 2 || (d & (d - 1)) != 0) throw std::invalid_argument("matrix must be 2^n x 2^n");
}

}  // namespace

DenseState::DenseState(Eigen::VectorXcd amps) : amps_(std::move(amps)) {
  const auto d = amps_.size();
  while ((Eigen::Index{1} << n_) < d) ++n_;
  if (d < 2 || (Eigen::Index{1} << n_) != d || n_ > 12) throw std::invalid_argument("dense state needs 2^n entries, 1 <= n <= 12");
  if (std::abs(amps_.squaredNorm() - 1.0) > 1e-12) throw std::invalid_argument("dense state must have unit norm");
}

DenseState dense_cat(int n) {
  if (n < 1 || n > 12) throw std::invalid_argument("dense_cat: n must lie in 1..12");
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(Eigen::Index{1} << n);
  v(0) = M_SQRT1_2;
  v(v.size() - 1) = M_SQRT1_2;
  return DenseState(v);
}

DenseState dense_linear_cluster(int n) {
  if (n < 1 || n > 12) throw std::invalid_argument("dense_linear_cluster: n must lie in 1..12");
  const Eigen::Index dim = Eigen::Index{1} << n;
  Eigen::VectorXcd v(dim);
  const double amp = std::pow(2.0, -0.5 * n);
  for (Eigen::Index x = 0; x < dim; ++x) {
    int sign = 1;
    for (int q = 0; q + 1 < n; ++q) {
      const bool a = (x >> (n - 1 - q)) & 1, b = (x >> (n - 2 - q)) & 1;
      if (a && b) sign = -sign;
    }
    v(x) = sign * amp;
  }
  return DenseState(v);
}

DenseState redundant_encode(const DenseState& s, const std::vector<int>& qubits) {
  const int n = s.n();
  const int m = n + static_cast<int>(qubits.size());
  for (int q : qubits)
    if (q < 0 || q >= n) throw std::invalid_argument("redundant_encode: qubit out of range");
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(Eigen::Index{1} << m);
  for (Eigen::Index x = 0; x < s.amplitudes().size(); ++x) {
    Eigen::Index y = x;
    for (int q : qubits) y = (y << 1) | ((x >> (n - 1 - q)) & 1);
    v(y) = s.amplitudes()(x);
  }
  return DenseState(v);
}

Eigen::MatrixXcd observable(const detection::MeasurementSetting& setting) {
  if (setting.bases.empty()) throw std::invalid_argument("empty setting");
  Eigen::MatrixXcd o = single_qubit_observable(setting.bases[0]);
  for (std::size_t q = 1; q < setting.bases.size(); ++q) o = kron(o, single_qubit_observable(setting.bases[q]));
  return o;
}

double direct_expectation(const Eigen::MatrixXcd& rho, const detection::MeasurementSetting& setting) {
  require_square_pow2(rho);
  if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-10) throw std::invalid_argument("density matrix is not Hermitian");
  const Eigen::MatrixXcd o = observable(setting);
  if (o.rows() != rho.rows()) throw std::invalid_argument("setting does not match matrix size");
  // Tr(ρ O) = Σ_ij ρ_ij O_ji
  const Complex t = (rho.array() * o.transpose().array()).sum();
  return t.real();
}

double direct_fidelity(const Eigen::MatrixXcd& rho, const DenseState& target) {
  require_square_pow2(rho);
  const auto& psi = target.amplitudes();
  if (psi.size() != rho.rows()) throw std::invalid_argument("state does not match matrix size");
  return (psi.adjoint() * rho * psi)(0, 0).real();
}

Eigen::MatrixXcd filter_matrix(const analysis::FilterParams& lambda) {
  Eigen::MatrixXcd f = Eigen::MatrixXcd::Ones(1, 1);
  for (double l : lambda.lambdas) {
    Eigen::Matrix2cd fi = Eigen::Matrix2cd::Zero();
    fi(0, 0) = 1.0 + l;
    fi(1, 1) = 1.0 - l;
    f = kron(f, fi);
  }
  return f;
}

FilteredValues direct_filtered(const Eigen::MatrixXcd& rho, const analysis::FilterParams& lambda) {
  require_square_pow2(rho);
  const int n = static_cast<int>(lambda.lambdas.size());
  const Eigen::Index dim = rho.rows();
  if ((Eigen::Index{1} << n) != dim) throw std::invalid_argument("filter does not match matrix size");
  // diagonal of ⊗F_i, qubit 0 as the most significant bit
  Eigen::VectorXd f = Eigen::VectorXd::Ones(1);
  for (double l : lambda.lambdas) {
    Eigen::VectorXd next(f.size() * 2);
    for (Eigen::Index i = 0; i < f.size(); ++i) {
      next(2 * i) = f(i) * (1.0 + l);
      next(2 * i + 1) = f(i) * (1.0 - l);
    }
    f = next;
  }
  const Eigen::VectorXcd cat = dense_cat(n).amplitudes();

  // F|Cat>, then <Cat|FρF|Cat> as a dense quadratic form
  const Eigen::VectorXcd fcat = f.cast<Complex>().cwiseProduct(cat);
  const double num = (fcat.adjoint() * rho * fcat)(0, 0).real();
  double tr_frf = 0.0, tr_f2 = 0.0;
  for (Eigen::Index r = 0; r < dim; ++r) {
    tr_frf += f(r) * f(r) * rho(r, r).real();
    tr_f2 += f(r) * f(r);
  }
  // W = 1/2 - |Cat><Cat|: Tr(FWF) and Tr(FWFρ) by linearity
  const double tr_w = 0.5 * static_cast<double>(dim) - 1.0;
  const double tr_fwf = 0.5 * tr_f2 - fcat.squaredNorm();
  if (std::abs(tr_fwf) < 1e-300) throw std::domain_error("singular witness normalization");
  if (!(tr_frf > 0.0)) throw std::domain_error("filtered state has zero trace");
  return {tr_w / tr_fwf * (0.5 * tr_frf - num), num / tr_frf};
}

Eigen::VectorXcd apply_pauli(const Eigen::VectorXcd& psi, const std::string& pauli) {
  using namespace std::complex_literals;
  std::string ops = pauli;
  Complex sign = 1.0;
  if (!ops.empty() && (ops[0] == '+' || ops[0] == '-')) {
    if (ops[0] == '-') sign = -1.0;
    ops.erase(0, 1);
  }
  const int n = static_cast<int>(ops.size());
  if ((Eigen::Index{1} << n) != psi.size()) throw std::invalid_argument("Pauli string length does not match state");
  Eigen::VectorXcd out = psi;
  for (int q = 0; q < n; ++q) {
    const Eigen::Index bit = Eigen::Index{1} << (n - 1 - q);
    const char c = ops[q];
    if (c == 'I') continue;
    if (c != 'X' && c != 'Y' && c != 'Z') throw std::invalid_argument("malformed Pauli string '" + pauli + "'");
    Eigen::VectorXcd next(out.size());
    for (Eigen::Index x = 0; x < out.size(); ++x) {
      const bool one = x & bit;
      switch (c) {
        case 'X': next(x ^ bit) = out(x); break;
        case 'Y': next(x ^ bit) = (one ? -1i : 1i) * out(x); break;
        case 'Z': next(x) = one ? -out(x) : out(x); break;
      }
    }
    out = std::move(next);
  }
  return sign * out;
}

bool stabilizer_check(const DenseState& state, const std::vector<std::string>& generators) {
  for (const auto& g : generators) {
    const auto gpsi = apply_pauli(state.amplitudes(), g);
    if ((gpsi - state.amplitudes()).cwiseAbs().maxCoeff() > 1e-9) return false;
  }
  return true;
}

Eigen::MatrixXcd random_density(int n, int rank, unsigned seed) {
  if (n < 1 || n > 12 || rank < 1) throw std::invalid_argument("random_density: bad size");
  const Eigen::Index dim = Eigen::Index{1} << n;
  std::mt19937 rng(seed);
  std::normal_distribution<double> g;
  Eigen::MatrixXcd a(dim, rank);
  for (Eigen::Index i = 0; i < dim; ++i)
    for (int j = 0; j < rank; ++j) a(i, j) = Complex(g(rng), g(rng));
  Eigen::MatrixXcd rho = a * a.adjoint();
  return rho / rho.trace().real();
}

}  // namespace hypercat::oracle
