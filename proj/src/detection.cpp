#include "hypercat/detection.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

namespace hypercat::detection {

using fock::FockConfiguration;
using fock::Mode;
using fock::Pol;

namespace {

std::string format_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  if (ec != std::errc{}) throw std::runtime_error("cannot format number");
  return {buf, ptr};
}

double parse_double(const std::string& s) {
  double x = 0.0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, x);
  if (ec != std::errc{} || ptr != end) throw std::runtime_error("malformed number '" + s + "'");
  return x;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Applies u (rows) and u† (columns) for one qubit; qubit 0 is the MSB.
void conjugate_qubit(Eigen::MatrixXcd& rho, int n, int qubit, const Eigen::Matrix2cd& u) {
  const Eigen::Index dim = rho.rows();
  const Eigen::Index bit = Eigen::Index{1} << (n - 1 - qubit);
  for (Eigen::Index i = 0; i < dim; ++i) {
    if (i & bit) continue;
    const Eigen::Index j = i | bit;
    for (Eigen::Index c = 0; c < dim; ++c) {
      const Complex a = rho(i, c), b = rho(j, c);
      rho(i, c) = u(0, 0) * a + u(0, 1) * b;
      rho(j, c) = u(1, 0) * a + u(1, 1) * b;
    }
  }
  const Eigen::Matrix2cd ud = u.adjoint();
  for (Eigen::Index r = 0; r < dim; ++r) {
    for (Eigen::Index i = 0; i < dim; ++i) {
      if (i & bit) continue;
      const Eigen::Index j = i | bit;
      const Complex a = rho(r, i), b = rho(r, j);
      rho(r, i) = a * ud(0, 0) + b * ud(1, 0);
      rho(r, j) = a * ud(0, 1) + b * ud(1, 1);
    }
  }
}

Eigen::Matrix2cd basis_change(const QubitBasis& b) {
  if (b.kind == QubitBasis::Kind::Z) return Eigen::Matrix2cd::Identity();
  // rows are <R| and <L| with |R/L> = (|0> ± e^{iθ}|1>)/√2
  const Complex e = std::polar(1.0, -b.theta);
  Eigen::Matrix2cd u;
  u << 1.0, e, 1.0, -e;
  return u * M_SQRT1_2;
}

}  // namespace

void QubitEnsemble::require_nonempty() const {
  if (empty()) throw std::domain_error("post-selection left no events (empty ensemble)");
}

bool QubitEnsemble::is_valid(double tol) const {
  if (empty()) return false;
  if (std::abs(rho.trace() - Complex{1.0}) > tol) return false;
  if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > tol) return false;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() >= -tol;
}

QubitEnsemble QubitEnsemble::from_pure(const Eigen::VectorXcd& psi) {
  return from_density(psi * psi.adjoint());
}

QubitEnsemble QubitEnsemble::from_density(Eigen::MatrixXcd rho) {
  const auto dim = rho.rows();
  if (dim != rho.cols() || dim < 2 || (dim & (dim - 1)) != 0)
    throw std::invalid_argument("density matrix must be 2^n x 2^n");
  QubitEnsemble e;
  e.n = 0;
  while ((Eigen::Index{1} << e.n) < dim) ++e.n;
  e.rho = std::move(rho);
  e.success_prob = 1.0;
  return e;
}

MeasurementSetting MeasurementSetting::all_z(int n) { return {std::vector<QubitBasis>(n, QubitBasis::z())}; }

MeasurementSetting MeasurementSetting::all_equatorial(int n, double theta) {
  return {std::vector<QubitBasis>(n, QubitBasis::equatorial(theta))};
}

bool MeasurementSetting::is_all_z() const {
  return !bases.empty() &&
         std::all_of(bases.begin(), bases.end(), [](const auto& b) { return b.kind == QubitBasis::Kind::Z; });
}

bool MeasurementSetting::is_uniform_equatorial() const {
  if (bases.empty() || bases[0].kind != QubitBasis::Kind::Equatorial) return false;
  return std::all_of(bases.begin(), bases.end(), [&](const auto& b) { return b == bases[0]; });
}

std::string MeasurementSetting::to_string() const {
  std::string s;
  for (std::size_t i = 0; i < bases.size(); ++i) {
    if (i) s += ';';
    s += bases[i].kind == QubitBasis::Kind::Z ? std::string("Z") : format_double(bases[i].theta);
  }
  return s;
}

MeasurementSetting MeasurementSetting::parse(const std::string& s) {
  MeasurementSetting m;
  for (const auto& tok : split(s, ';')) {
    if (tok == "Z")
      m.bases.push_back(QubitBasis::z());
    else
      m.bases.push_back(QubitBasis::equatorial(parse_double(tok)));
  }
  return m;
}

std::uint64_t CountRecord::total() const {
  std::uint64_t t = 0;
  for (auto c : counts) t += c;
  return t;
}

std::string bitstring(std::size_t index, int n) {
  std::string s(n, '0');
  for (int q = 0; q < n; ++q)
    if ((index >> (n - 1 - q)) & 1U) s[q] = '1';
  return s;
}

std::size_t parse_bitstring(const std::string& s) {
  std::size_t x = 0;
  for (char c : s) {
    if (c != '0' && c != '1') throw std::runtime_error("malformed bitstring '" + s + "'");
    x = (x << 1) | static_cast<std::size_t>(c == '1');
  }
  return x;
}

QubitEnsemble postselect(const circuit::RunResult& run, const circuit::CircuitPlan& plan) {
  plan.validate();
  const int n = plan.num_qubits();
  const double eta = plan.efficiency;

  // path -> (detector group, position in group)
  std::map<int, std::pair<int, int>> path_group;
  for (std::size_t g = 0; g < plan.detectors.size(); ++g)
    for (std::size_t k = 0; k < plan.detectors[g].paths.size(); ++k)
      path_group[plan.detectors[g].paths[k]] = {static_cast<int>(g), static_cast<int>(k)};
  const auto n_groups = plan.detectors.size();

  const Eigen::Index dim = Eigen::Index{1} << n;
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(dim, dim);
  double weight_sum = 0.0;

  for (const auto& branch : run.branches) {
    // Traced-out record (lost photons plus labels of detected ones) -> qubit vector.
    std::map<FockConfiguration, std::map<std::size_t, Complex>> by_env;

    for (const auto& [config, amp] : branch.state.terms()) {
      const auto& occ = config.occupations();
      std::vector<int> kept(occ.size(), 0);
      auto recurse = [&](auto&& self, std::size_t i, double factor) -> void {
        if (i == occ.size()) {
          std::vector<const Mode*> hit(n_groups, nullptr);
          std::vector<std::pair<Mode, int>> env;
          for (std::size_t j = 0; j < occ.size(); ++j) {
            const auto& [mode, cnt] = occ[j];
            if (cnt - kept[j] > 0) env.emplace_back(mode, cnt - kept[j]);
            if (kept[j] == 0) continue;
            const int g = path_group.at(mode.path).first;
            if (kept[j] > 1 || hit[g] != nullptr) return;
            hit[g] = &mode;
          }
          for (std::size_t g = 0; g < n_groups; ++g) {
            if (hit[g] == nullptr) return;
            env.emplace_back(Mode{-1 - static_cast<int>(g), Pol::H, hit[g]->tag}, 1);
          }
          std::size_t index = 0;
          for (const auto& q : plan.qubit_map) {
            const Mode& m = *hit[q.detector];
            const bool one = q.kind == circuit::QubitKind::Polarization
                                 ? m.pol == Pol::V
                                 : path_group.at(m.path).second == 1;
            index = (index << 1) | static_cast<std::size_t>(one);
          }
          by_env[FockConfiguration(std::move(env))][index] += amp * factor;
          return;
        }
        const auto& [mode, cnt] = occ[i];
        if (!path_group.count(mode.path)) {
          kept[i] = 0;  // never detected
          self(self, i + 1, factor);
          return;
        }
        const int lo = eta >= 1.0 ? cnt : 0;
        for (int k = lo; k <= std::min(cnt, 1); ++k) {
          kept[i] = k;
          const double w = binomial(cnt, k) * std::pow(eta, k) * std::pow(1.0 - eta, cnt - k);
          self(self, i + 1, factor * std::sqrt(w));
        }
      };
      recurse(recurse, 0, 1.0);
    }

    for (const auto& [env, vec] : by_env) {
      for (const auto& [i, ai] : vec)
        for (const auto& [j, aj] : vec) rho(i, j) += branch.weight * ai * std::conj(aj);
    }
  }
  weight_sum = rho.trace().real();

  QubitEnsemble e;
  e.n = n;
  e.success_prob = weight_sum;
  if (!(weight_sum > 0.0)) {
    e.success_prob = 0.0;
    e.rho.resize(0, 0);
    return e;
  }
  e.rho = rho / weight_sum;

  if (!plan.analyzer_visibility.empty())
    for (int q = 0; q < n; ++q)
      if (plan.qubit_map[q].kind == circuit::QubitKind::Spatial)
        dephase_qubit(e, q, plan.analyzer_visibility[plan.qubit_map[q].detector]);
  for (const auto& lu : plan.local_unitaries) apply_local_unitary(e, lu.qubit, lu.matrix);
  return e;
}

QubitEnsemble postselect(const fock::OpticalState& s, const circuit::CircuitPlan& plan) {
  circuit::RunResult r;
  r.branches.push_back({1.0, s});
  return postselect(r, plan);
}

QubitEnsemble simulate(const circuit::CircuitPlan& plan) { return postselect(circuit::run_plan(plan), plan); }

void dephase_qubit(QubitEnsemble& e, int qubit, double factor) {
  e.require_nonempty();
  if (qubit < 0 || qubit >= e.n) throw std::invalid_argument("dephase_qubit: qubit out of range");
  if (factor == 1.0) return;
  const Eigen::Index bit = Eigen::Index{1} << (e.n - 1 - qubit);
  for (Eigen::Index i = 0; i < e.rho.rows(); ++i)
    for (Eigen::Index j = 0; j < e.rho.cols(); ++j)
      if ((i ^ j) & bit) e.rho(i, j) *= factor;
}

void apply_local_unitary(QubitEnsemble& e, int qubit, const Eigen::Matrix2cd& u) {
  e.require_nonempty();
  if (qubit < 0 || qubit >= e.n) throw std::invalid_argument("apply_local_unitary: qubit out of range");
  conjugate_qubit(e.rho, e.n, qubit, u);
}

std::vector<double> outcome_distribution(const QubitEnsemble& e, const MeasurementSetting& m) {
  e.require_nonempty();
  if (m.size() != e.n) throw std::invalid_argument("measurement setting length does not match qubit count");
  Eigen::MatrixXcd r = e.rho;
  for (int q = 0; q < e.n; ++q)
    if (m.bases[q].kind != QubitBasis::Kind::Z) conjugate_qubit(r, e.n, q, basis_change(m.bases[q]));
  std::vector<double> p(r.rows());
  for (Eigen::Index i = 0; i < r.rows(); ++i) p[i] = std::max(0.0, r(i, i).real());
  return p;
}

CountRecord sample_counts(const std::vector<double>& dist, const MeasurementSetting& setting, double rate_hz,
                          double duration_s, std::uint64_t seed) {
  if (rate_hz < 0.0 || duration_s < 0.0) throw std::invalid_argument("rate and duration must be non-negative");
  if (dist.size() != (std::size_t{1} << setting.size()))
    throw std::invalid_argument("distribution size does not match setting");
  CountRecord rec;
  rec.setting = setting;
  rec.rate_hz = rate_hz;
  rec.duration_s = duration_s;
  rec.seed = seed;
  rec.counts.assign(dist.size(), 0);
  std::mt19937_64 rng(seed);
  const double total = rate_hz * duration_s;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    const double mean = total * std::max(0.0, dist[i]);
    if (mean <= 0.0) continue;
    std::poisson_distribution<std::uint64_t> pois(mean);
    rec.counts[i] = pois(rng);
  }
  return rec;
}

CountRecord exact_counts(const std::vector<double>& dist, const MeasurementSetting& setting, double scale) {
  if (dist.size() != (std::size_t{1} << setting.size()))
    throw std::invalid_argument("distribution size does not match setting");
  CountRecord rec;
  rec.setting = setting;
  rec.counts.resize(dist.size());
  for (std::size_t i = 0; i < dist.size(); ++i)
    rec.counts[i] = static_cast<std::uint64_t>(std::llround(std::max(0.0, dist[i]) * scale));
  return rec;
}

AnalyzerCurves analyzer_scenario_single_photon(const std::vector<double>& theta_grid,
                                               double interferometer_visibility) {
  if (interferometer_visibility < 0.0 || interferometer_visibility > 1.0)
    throw std::invalid_argument("interferometer visibility must lie in [0, 1]");
  constexpr int in = 0, h = 1, v = 2, plus_port = 3, minus_port = 4;
  using fock::apply_element;

  fock::OpticalState photon = fock::OpticalState::vacuum({fock::H(in), fock::V(in)}, 1);
  {
    auto hs = photon.create(fock::H(in));
    auto vs = photon.create(fock::V(in));
    fock::OpticalState plus({fock::H(in), fock::V(in)}, 1);
    for (const auto& [c, a] : hs.terms()) plus.add(c, a * M_SQRT1_2);
    for (const auto& [c, a] : vs.terms()) plus.add(c, a * M_SQRT1_2);
    photon = plus;
  }
  auto encoded = circuit::hyper_encode(photon, in, h, v);
  // the interferometer mixes both polarizations of both arms
  encoded.set_registry({fock::H(h), fock::V(h), fock::H(v), fock::V(v)});

  // probability that the photon leaves `port` with H polarization after the
  // polarization analyzer, for the coherent and the path-distinguishable case
  auto detect = [&](double theta, bool circular) {
    std::array<double, 2> p{0.0, 0.0};
    for (int branch = 0; branch < 2; ++branch) {
      const double w = branch == 0 ? interferometer_visibility : 1.0 - interferometer_visibility;
      if (w == 0.0) continue;
      auto s = branch == 0 ? encoded : encoded.retagged(v, 1);
      s = apply_element(s, fock::phase({fock::H(v), fock::V(v)}, -theta - std::numbers::pi / 2));
      s = apply_element(s, fock::nbs(h, v, plus_port, minus_port));
      for (int port : {plus_port, minus_port})
        s = apply_element(s, circular ? fock::qwp(port, std::numbers::pi / 4) : fock::hwp(port, std::numbers::pi / 8));
      for (const auto& [c, a] : s.terms())
        for (const auto& [m, cnt] : c.occupations())
          if (m.pol == Pol::H) p[m.path == plus_port ? 0 : 1] += w * std::norm(a);
    }
    const double tot = p[0] + p[1];
    return std::array<double, 2>{p[0] / tot, p[1] / tot};
  };

  AnalyzerCurves out;
  out.theta = theta_grid;
  for (double t : theta_grid) {
    const auto lin = detect(t, false);
    const auto circ = detect(t, true);
    out.plus_plus.push_back(lin[0]);
    out.plus_minus.push_back(lin[1]);
    out.r_plus.push_back(circ[0]);
    out.r_minus.push_back(circ[1]);
  }
  return out;
}

double curve_visibility(const std::vector<double>& curve) {
  if (curve.empty()) throw std::invalid_argument("empty curve");
  const auto [lo, hi] = std::minmax_element(curve.begin(), curve.end());
  if (*hi + *lo <= 0.0) return 0.0;
  return (*hi - *lo) / (*hi + *lo);
}

void write_counts_csv(const std::filesystem::path& path, const std::string& setting_id, const CountRecord& rec) {
  if (rec.counts.size() != (std::size_t{1} << rec.n()))
    throw std::invalid_argument("count vector does not match setting");
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  const std::string bases = rec.setting.to_string();
  f << "setting_id,qubit_bases,outcome_bitstring,count\n";
  for (std::size_t i = 0; i < rec.counts.size(); ++i)
    f << setting_id << ',' << bases << ',' << bitstring(i, rec.n()) << ',' << rec.counts[i] << '\n';
}

CsvRecord read_counts_csv(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read " + path.string());
  std::string line;
  if (!std::getline(f, line) || line != "setting_id,qubit_bases,outcome_bitstring,count")
    throw std::runtime_error(path.string() + ": unexpected header");
  CsvRecord out;
  bool first = true;
  std::string bases;
  std::vector<bool> seen;
  int lineno = 1;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    const auto where = path.string() + ":" + std::to_string(lineno);
    if (fields.size() != 4) throw std::runtime_error(where + ": expected 4 columns");
    if (first) {
      out.setting_id = fields[0];
      bases = fields[1];
      try {
        out.record.setting = MeasurementSetting::parse(bases);
      } catch (const std::exception& e) {
        throw std::runtime_error(where + ": " + e.what());
      }
      const int n = out.record.setting.size();
      if (n < 1 || n > 14) throw std::runtime_error(where + ": unsupported qubit count");
      out.record.counts.assign(std::size_t{1} << n, 0);
      seen.assign(out.record.counts.size(), false);
      first = false;
    } else if (fields[0] != out.setting_id || fields[1] != bases) {
      throw std::runtime_error(where + ": setting changes within one file");
    }
    if (static_cast<int>(fields[2].size()) != out.record.n())
      throw std::runtime_error(where + ": bitstring length does not match setting");
    std::size_t idx = 0;
    std::uint64_t count = 0;
    try {
      idx = parse_bitstring(fields[2]);
    } catch (const std::exception& e) {
      throw std::runtime_error(where + ": " + e.what());
    }
    const auto& c = fields[3];
    auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), count);
    if (ec != std::errc{} || ptr != c.data() + c.size()) throw std::runtime_error(where + ": malformed count");
    if (seen[idx]) throw std::runtime_error(where + ": duplicate outcome");
    seen[idx] = true;
    out.record.counts[idx] = count;
  }
  if (first) throw std::runtime_error(path.string() + ": no data rows");
  return out;
}

}  // namespace hypercat::detection
