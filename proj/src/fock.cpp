#include "hypercat/fock.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace hypercat::fock {

namespace {

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

bool port_in(const std::vector<Mode>& ports, const Mode& m) {
  return std::any_of(ports.begin(), ports.end(), [&](const Mode& p) { return p.same_port(m); });
}

int port_index(const std::vector<Mode>& ports, const Mode& m) {
  for (std::size_t i = 0; i < ports.size(); ++i)
    if (ports[i].same_port(m)) return static_cast<int>(i);
  return -1;
}

Mode port_of(const Mode& m) { return {m.path, m.pol, 0}; }

}  // namespace

std::string to_string(const Mode& m) {
  std::string s = std::to_string(m.path) + (m.pol == Pol::H ? "H" : "V");
  if (m.tag != 0) s += "#" + std::to_string(m.tag);
  return s;
}

FockConfiguration::FockConfiguration(std::vector<std::pair<Mode, int>> occupations) {
  std::sort(occupations.begin(), occupations.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [mode, n] : occupations) {
    if (n < 0) throw std::invalid_argument("negative occupation on mode " + to_string(mode));
    if (n == 0) continue;
    if (!occ_.empty() && occ_.back().first == mode)
      occ_.back().second += n;
    else
      occ_.emplace_back(mode, n);
  }
}

int FockConfiguration::total() const {
  int t = 0;
  for (const auto& [m, n] : occ_) t += n;
  return t;
}

int FockConfiguration::count(const Mode& m) const {
  for (const auto& [mode, n] : occ_)
    if (mode == m) return n;
  return 0;
}

FockConfiguration FockConfiguration::with_added(const Mode& m, int n) const {
  auto occ = occ_;
  occ.emplace_back(m, n);
  return FockConfiguration(std::move(occ));
}

FockConfiguration FockConfiguration::merged(const FockConfiguration& other) const {
  auto occ = occ_;
  occ.insert(occ.end(), other.occ_.begin(), other.occ_.end());
  return FockConfiguration(std::move(occ));
}

OpticalState::OpticalState(std::vector<Mode> registry, int n_max) : n_max_(n_max) {
  if (n_max < 0) throw std::invalid_argument("n_max must be non-negative");
  set_registry(std::move(registry));
}

OpticalState OpticalState::vacuum(std::vector<Mode> registry, int n_max) {
  OpticalState s(std::move(registry), n_max);
  s.terms_[FockConfiguration{}] = 1.0;
  return s;
}

void OpticalState::set_registry(std::vector<Mode> registry) {
  for (auto& m : registry) m = port_of(m);
  std::sort(registry.begin(), registry.end());
  if (std::adjacent_find(registry.begin(), registry.end()) != registry.end())
    throw std::invalid_argument("duplicate port in mode registry");
  registry_ = std::move(registry);
}

bool OpticalState::has_port(const Mode& m) const { return port_in(registry_, m); }

double OpticalState::norm_squared() const {
  double s = 0.0;
  for (const auto& [c, a] : terms_) s += std::norm(a);
  return s;
}

Complex OpticalState::amplitude(const FockConfiguration& c) const {
  auto it = terms_.find(c);
  return it == terms_.end() ? Complex{} : it->second;
}

void OpticalState::add(const FockConfiguration& c, Complex amp) {
  if (c.total() > n_max_) throw std::invalid_argument("configuration exceeds photon cap");
  for (const auto& [m, n] : c.occupations())
    if (!has_port(m)) throw std::invalid_argument("unregistered mode " + to_string(m));
  terms_[c] += amp;
}

void OpticalState::scale(Complex factor) {
  for (auto& [c, a] : terms_) a *= factor;
}

void OpticalState::prune(double threshold) {
  std::erase_if(terms_, [&](const auto& kv) { return std::norm(kv.second) < threshold; });
}

OpticalState OpticalState::create(const Mode& m) const {
  if (!has_port(m)) throw std::invalid_argument("unregistered mode " + to_string(m));
  OpticalState out(registry_, n_max_);
  for (const auto& [c, a] : terms_) {
    if (c.total() + 1 > n_max_) continue;
    const int n = c.count(m);
    out.terms_[c.with_added(m, 1)] += a * std::sqrt(static_cast<double>(n + 1));
  }
  return out;
}

OpticalState OpticalState::retagged(int path, int tag_bits) const {
  OpticalState out(registry_, n_max_);
  for (const auto& [c, a] : terms_) {
    auto occ = c.occupations();
    for (auto& [m, n] : occ)
      if (m.path == path) m.tag |= tag_bits;
    out.terms_[FockConfiguration(std::move(occ))] += a;
  }
  return out;
}

std::string to_string(ElementKind k) {
  switch (k) {
    case ElementKind::PBS: return "PBS";
    case ElementKind::NBS: return "NBS";
    case ElementKind::HWP: return "HWP";
    case ElementKind::QWP: return "QWP";
    case ElementKind::PHASE: return "PHASE";
  }
  return "?";
}

ElementKind element_kind_from_string(const std::string& s) {
  for (auto k : {ElementKind::PBS, ElementKind::NBS, ElementKind::HWP, ElementKind::QWP,
                 ElementKind::PHASE})
    if (to_string(k) == s) return k;
  throw std::invalid_argument("unknown element kind '" + s + "'");
}

ElementUnitary ElementUnitary::inverse() const {
  ElementUnitary inv;
  inv.kind = kind;
  inv.params = params;
  inv.inputs = outputs;
  inv.outputs = inputs;
  inv.matrix = matrix.adjoint();
  return inv;
}

bool ElementUnitary::is_unitary(double tol) const {
  if (matrix.rows() != matrix.cols()) return false;
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(matrix.rows(), matrix.cols());
  return (matrix.adjoint() * matrix - id).cwiseAbs().maxCoeff() <= tol;
}

ElementUnitary pbs(int a, int b, int c, int d) {
  ElementUnitary u;
  u.kind = ElementKind::PBS;
  u.inputs = {H(a), V(a), H(b), V(b)};
  u.outputs = {H(c), V(c), H(d), V(d)};
  u.matrix = Eigen::MatrixXcd::Zero(4, 4);
  u.matrix(0, 0) = 1.0;  // aH -> cH
  u.matrix(3, 1) = 1.0;  // aV -> dV
  u.matrix(2, 2) = 1.0;  // bH -> dH
  u.matrix(1, 3) = 1.0;  // bV -> cV
  return u;
}

ElementUnitary pbs_split(int in, int h_out, int v_out) {
  ElementUnitary u;
  u.kind = ElementKind::PBS;
  u.inputs = {H(in), V(in)};
  u.outputs = {H(h_out), V(v_out)};
  u.matrix = Eigen::MatrixXcd::Identity(2, 2);
  return u;
}

ElementUnitary nbs(int a, int b, int c, int d) {
  using namespace std::complex_literals;
  const double r = 1.0 / std::numbers::sqrt2;
  ElementUnitary u;
  u.kind = ElementKind::NBS;
  u.inputs = {H(a), V(a), H(b), V(b)};
  u.outputs = {H(c), V(c), H(d), V(d)};
  u.matrix = Eigen::MatrixXcd::Zero(4, 4);
  for (int p = 0; p < 2; ++p) {
    u.matrix(p, p) = r;           // a -> c
    u.matrix(2 + p, p) = 1i * r;  // a -> d
    u.matrix(p, 2 + p) = 1i * r;  // b -> c
    u.matrix(2 + p, 2 + p) = r;   // b -> d
  }
  return u;
}

ElementUnitary hwp(int path, double angle) {
  ElementUnitary u;
  u.kind = ElementKind::HWP;
  u.params = {angle};
  u.inputs = {H(path), V(path)};
  u.outputs = u.inputs;
  const double c = std::cos(2 * angle), s = std::sin(2 * angle);
  u.matrix.resize(2, 2);
  u.matrix << c, s, s, -c;
  return u;
}

ElementUnitary qwp(int path, double angle) {
  using namespace std::complex_literals;
  ElementUnitary u;
  u.kind = ElementKind::QWP;
  u.params = {angle};
  u.inputs = {H(path), V(path)};
  u.outputs = u.inputs;
  const double c = std::cos(angle), s = std::sin(angle);
  const Complex off = (1.0 - 1i) * s * c;
  u.matrix.resize(2, 2);
  u.matrix << c * c + 1i * s * s, off, off, s * s + 1i * c * c;
  return u;
}

ElementUnitary phase(std::vector<Mode> ports, double phi) {
  ElementUnitary u;
  u.kind = ElementKind::PHASE;
  u.params = {phi};
  for (auto& p : ports) p = port_of(p);
  u.inputs = ports;
  u.outputs = std::move(ports);
  const auto n = static_cast<Eigen::Index>(u.inputs.size());
  u.matrix = Eigen::MatrixXcd::Identity(n, n) * std::polar(1.0, phi);
  return u;
}

OpticalState tensor(const OpticalState& a, const OpticalState& b, int cap) {
  for (const auto& m : b.registry())
    if (a.has_port(m)) throw std::invalid_argument("tensor: overlapping mode " + to_string(m));
  std::vector<Mode> reg = a.registry();
  reg.insert(reg.end(), b.registry().begin(), b.registry().end());
  OpticalState out(std::move(reg), std::min(a.n_max() + b.n_max(), cap));
  for (const auto& [ca, aa] : a.terms())
    for (const auto& [cb, ab] : b.terms()) {
      auto c = ca.merged(cb);
      if (c.total() > out.n_max()) continue;
      out.add(c, aa * ab);
    }
  return out;
}

OpticalState apply_element(const OpticalState& s, const ElementUnitary& u, double prune_threshold) {
  const auto n_in = u.inputs.size();
  if (u.matrix.rows() != static_cast<Eigen::Index>(u.outputs.size()) ||
      u.matrix.cols() != static_cast<Eigen::Index>(n_in))
    throw std::invalid_argument("element matrix shape does not match its ports");
  for (const auto& m : u.inputs)
    if (!s.has_port(m)) throw std::invalid_argument("element acts on unknown mode " + to_string(m));

  // Registry after the element: untouched ports plus the outputs.
  std::vector<Mode> reg;
  for (const auto& m : s.registry())
    if (!port_in(u.inputs, m)) reg.push_back(m);
  for (const auto& m : u.outputs) {
    if (port_in(reg, m))
      throw std::invalid_argument("element output collides with occupied mode " + to_string(m));
    if (!port_in(reg, m)) reg.push_back(port_of(m));
  }
  OpticalState out(reg, s.n_max());

  struct Photon {
    int input;
    int tag;
  };
  for (const auto& [config, amp] : s.terms()) {
    std::vector<std::pair<Mode, int>> rest;
    std::vector<Photon> photons;
    double norm = 1.0;
    for (const auto& [m, n] : config.occupations()) {
      const int idx = port_index(u.inputs, m);
      if (idx < 0) {
        rest.emplace_back(m, n);
        continue;
      }
      norm /= std::sqrt(factorial(n));
      for (int k = 0; k < n; ++k) photons.push_back({idx, m.tag});
    }
    if (photons.empty()) {
      out.add(config, amp);
      continue;
    }
    // Expand the product of transformed creation operators term by term.
    std::vector<int> choice(photons.size(), 0);
    auto recurse = [&](auto&& self, std::size_t k, Complex coef) -> void {
      if (std::norm(coef) == 0.0) return;
      if (k == photons.size()) {
        std::vector<std::pair<Mode, int>> occ = rest;
        for (std::size_t j = 0; j < photons.size(); ++j) {
          Mode m = u.outputs[choice[j]];
          m.tag = photons[j].tag;
          occ.emplace_back(m, 1);
        }
        FockConfiguration c(std::move(occ));
        double bose = 1.0;
        for (const auto& [m, n] : c.occupations())
          if (port_in(u.outputs, m)) bose *= factorial(n);
        out.add(c, amp * coef * norm * std::sqrt(bose));
        return;
      }
      for (Eigen::Index o = 0; o < u.matrix.rows(); ++o) {
        const Complex t = u.matrix(o, photons[k].input);
        if (t == Complex{}) continue;
        choice[k] = static_cast<int>(o);
        self(self, k + 1, coef * t);
      }
    };
    recurse(recurse, 0, 1.0);
  }
  out.prune(prune_threshold);
  return out;
}

std::pair<OpticalState, double> truncate(const OpticalState& s, int n_max) {
  if (n_max < 0) throw std::invalid_argument("n_max must be non-negative");
  OpticalState out(s.registry(), n_max);
  double dropped = 0.0;
  for (const auto& [c, a] : s.terms()) {
    if (c.total() > n_max)
      dropped += std::norm(a);
    else
      out.add(c, a);
  }
  return {out, dropped};
}

}  // namespace hypercat::fock
