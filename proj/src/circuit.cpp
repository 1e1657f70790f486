#include "hypercat/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace hypercat::circuit {

using fock::Mode;
using fock::Pol;

std::string to_string(SourceKind k) {
  switch (k) {
    case SourceKind::SPDC_PAIR: return "SPDC_PAIR";
    case SourceKind::WEAK_COHERENT: return "WEAK_COHERENT";
    case SourceKind::INJECTED: return "INJECTED";
  }
  return "?";
}

SourceKind source_kind_from_string(const std::string& s) {
  for (auto k : {SourceKind::SPDC_PAIR, SourceKind::WEAK_COHERENT, SourceKind::INJECTED})
    if (to_string(k) == s) return k;
  throw std::invalid_argument("unknown source kind '" + s + "'");
}

void SourceSpec::validate() const {
  switch (kind) {
    case SourceKind::SPDC_PAIR:
      if (!(tau >= 0.0 && tau < 0.5)) throw std::invalid_argument("tau must lie in [0, 0.5)");
      if (max_pairs < 1 || max_pairs > 2) throw std::invalid_argument("max_pairs must be 1 or 2");
      if (!(visibility_hv > 0.0 && visibility_hv <= 1.0) ||
          !(visibility_diag >= 0.0 && visibility_diag <= visibility_hv))
        throw std::invalid_argument("pair visibilities must satisfy 0 <= diag <= hv <= 1, hv > 0");
      break;
    case SourceKind::WEAK_COHERENT: {
      if (!(p >= 0.0 && p < 0.5)) throw std::invalid_argument("p must lie in [0, 0.5)");
      const double n = std::norm(pol_state[0]) + std::norm(pol_state[1]);
      if (std::abs(n - 1.0) > 1e-12) throw std::invalid_argument("pol_state must be normalized");
      break;
    }
    case SourceKind::INJECTED: {
      const auto size = amplitudes.size();
      if (size < 2 || (size & (size - 1)) != 0)
        throw std::invalid_argument("injected amplitudes must have 2^k entries");
      double n = 0.0;
      for (const auto& a : amplitudes) n += std::norm(a);
      if (std::abs(n - 1.0) > 1e-12) throw std::invalid_argument("injected state must be normalized");
      break;
    }
  }
}

double SourceSpec::coherent_weight() const {
  if (kind != SourceKind::SPDC_PAIR) return 1.0;
  return 0.5 * (1.0 + visibility_diag / visibility_hv);
}

void NoiseSpec::validate() const {
  if (!(tau >= 0.0 && tau < 0.5)) throw std::invalid_argument("tau must lie in [0, 0.5)");
  if (max_pairs < 1 || max_pairs > 2) throw std::invalid_argument("max_pairs must be 1 or 2");
  if (!(p >= 0.0 && p < 0.5)) throw std::invalid_argument("p must lie in [0, 0.5)");
  if (!(pair_visibility_hv > 0.0 && pair_visibility_hv <= 1.0) ||
      !(pair_visibility_diag >= 0.0 && pair_visibility_diag <= pair_visibility_hv))
    throw std::invalid_argument("pair visibilities must satisfy 0 <= diag <= hv <= 1, hv > 0");
  for (double x : xi)
    if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("xi must lie in [0, 1]");
  if (!(efficiency > 0.0 && efficiency <= 1.0)) throw std::invalid_argument("efficiency must lie in (0, 1]");
  if (!(analyzer_visibility >= 0.0 && analyzer_visibility <= 1.0))
    throw std::invalid_argument("analyzer visibility must lie in [0, 1]");
}

// With one photon detected per path, the H/V error fraction of a pair source
// is x / (2 (1 + 3x)) where x = tau² (1 - efficiency)².
double pair_visibility_for_tau(double tau, double efficiency) {
  const double loss = 1.0 - efficiency;
  const double x = tau * tau * loss * loss;
  return 1.0 - x / (1.0 + 3.0 * x);
}

double tau_for_pair_visibility(double visibility_hv, double efficiency) {
  if (!(visibility_hv > 2.0 / 3.0 && visibility_hv <= 1.0))
    throw std::invalid_argument("pair visibility must lie in (2/3, 1]");
  if (!(efficiency >= 0.0 && efficiency < 1.0))
    throw std::invalid_argument("efficiency must lie in [0, 1) to calibrate tau");
  const double x = (1.0 - visibility_hv) / (3.0 * visibility_hv - 2.0);
  return std::sqrt(x) / (1.0 - efficiency);
}

OpticalState spdc_pair_state(const SourceSpec& spec, int a, int b, int sign, int cap) {
  if (spec.kind != SourceKind::SPDC_PAIR) throw std::invalid_argument("spdc_pair_state needs an SPDC_PAIR source");
  spec.validate();
  if (a == b) throw std::invalid_argument("pair paths must differ");
  const std::vector<Mode> reg{fock::H(a), fock::V(a), fock::H(b), fock::V(b)};
  const auto vac = OpticalState::vacuum(reg, cap);

  // pair creation operator X = (aH† bH† ± aV† bV†)/√2
  auto apply_pair = [&](const OpticalState& s) {
    auto hh = s.create(fock::H(b)).create(fock::H(a));
    auto vv = s.create(fock::V(b)).create(fock::V(a));
    OpticalState out(reg, cap);
    for (const auto& [c, amp] : hh.terms()) out.add(c, amp * M_SQRT1_2);
    for (const auto& [c, amp] : vv.terms()) out.add(c, amp * (sign * M_SQRT1_2));
    return out;
  };

  OpticalState out = vac;
  OpticalState term = vac;
  double coef = 1.0;
  for (int k = 1; k <= spec.max_pairs; ++k) {
    term = apply_pair(term);
    coef *= spec.tau / k;
    for (const auto& [c, amp] : term.terms())
      if (c.total() <= cap) out.add(c, amp * coef);
  }
  out.scale(1.0 - 0.5 * spec.tau * spec.tau);
  out.prune();
  return out;
}

OpticalState weak_coherent_state(const SourceSpec& spec, int path, int cap) {
  if (spec.kind != SourceKind::WEAK_COHERENT)
    throw std::invalid_argument("weak_coherent_state needs a WEAK_COHERENT source");
  spec.validate();
  const std::vector<Mode> reg{fock::H(path), fock::V(path)};
  const auto vac = OpticalState::vacuum(reg, cap);
  auto create_psi = [&](const OpticalState& s) {
    auto h = s.create(fock::H(path));
    auto v = s.create(fock::V(path));
    OpticalState out(reg, cap);
    for (const auto& [c, amp] : h.terms()) out.add(c, amp * spec.pol_state[0]);
    for (const auto& [c, amp] : v.terms()) out.add(c, amp * spec.pol_state[1]);
    return out;
  };
  // e^{-p/2} [ |0> + √p |1ψ> + (p/√2) |2ψ> ], |2ψ> = (a_ψ†)²|0>/√2
  OpticalState out = vac;
  const auto one = create_psi(vac);
  for (const auto& [c, amp] : one.terms()) out.add(c, amp * std::sqrt(spec.p));
  if (cap >= 2) {
    const auto two = create_psi(one);
    for (const auto& [c, amp] : two.terms()) out.add(c, amp * (spec.p / 2.0));
  }
  out.scale(std::exp(-spec.p / 2.0));
  out.prune();
  return out;
}

OpticalState injected_state(const SourceSpec& spec, const std::vector<int>& paths, int cap) {
  if (spec.kind != SourceKind::INJECTED) throw std::invalid_argument("injected_state needs an INJECTED source");
  spec.validate();
  const auto k = static_cast<int>(paths.size());
  if (spec.amplitudes.size() != (std::size_t{1} << k))
    throw std::invalid_argument("injected amplitudes do not match the number of paths");
  if (k > cap) throw std::invalid_argument("injected state exceeds the photon cap");
  std::vector<Mode> reg;
  for (int p : paths) {
    reg.push_back(fock::H(p));
    reg.push_back(fock::V(p));
  }
  OpticalState out(reg, cap);
  for (std::size_t x = 0; x < spec.amplitudes.size(); ++x) {
    if (spec.amplitudes[x] == Complex{}) continue;
    std::vector<std::pair<Mode, int>> occ;
    for (int j = 0; j < k; ++j) {
      const bool v = (x >> (k - 1 - j)) & 1U;
      occ.emplace_back(v ? fock::V(paths[j]) : fock::H(paths[j]), 1);
    }
    out.add(fock::FockConfiguration(std::move(occ)), spec.amplitudes[x]);
  }
  return out;
}

OpticalState fuse_on_pbs(const OpticalState& s, int a, int b, int c, int d) {
  return fock::apply_element(s, fock::pbs(a, b, c, d));
}

OpticalState hyper_encode(const OpticalState& s, int path, int h, int v) {
  return fock::apply_element(s, fock::pbs_split(path, h, v));
}

int encoded_h_path(int p) { return 1000 + 2 * p; }
int encoded_v_path(int p) { return 1001 + 2 * p; }

void CircuitPlan::validate() const {
  if (efficiency <= 0.0 || efficiency > 1.0) throw std::invalid_argument("efficiency must lie in (0, 1]");
  if (photon_cap < 0) throw std::invalid_argument("photon_cap must be non-negative");
  if (qubit_map.empty()) throw std::invalid_argument("plan has no logical qubits");
  if (qubit_map.size() > 14) throw std::invalid_argument("plan has more than 14 logical qubits");
  std::set<int> seen;
  for (const auto& g : detectors) {
    if (g.paths.empty() || g.paths.size() > 2)
      throw std::invalid_argument("detector group must have one or two paths");
    for (int p : g.paths)
      if (!seen.insert(p).second) throw std::invalid_argument("path appears in two detector groups");
  }
  std::vector<int> pol_use(detectors.size(), 0), spatial_use(detectors.size(), 0);
  for (const auto& q : qubit_map) {
    if (q.detector < 0 || q.detector >= static_cast<int>(detectors.size()))
      throw std::invalid_argument("qubit refers to unknown detector group");
    if (q.kind == QubitKind::Spatial) {
      if (detectors[q.detector].paths.size() != 2)
        throw std::invalid_argument("spatial qubit needs a two-path detector group");
      ++spatial_use[q.detector];
    } else {
      ++pol_use[q.detector];
    }
  }
  for (std::size_t g = 0; g < detectors.size(); ++g) {
    if (pol_use[g] + spatial_use[g] == 0) throw std::invalid_argument("detector group carries no qubit");
    if (pol_use[g] > 1 || spatial_use[g] > 1) throw std::invalid_argument("detector group qubit mapped twice");
  }
  if (!analyzer_visibility.empty() && analyzer_visibility.size() != detectors.size())
    throw std::invalid_argument("analyzer_visibility needs one entry per detector group");
  for (double v : analyzer_visibility)
    if (v < 0.0 || v > 1.0) throw std::invalid_argument("analyzer visibility must lie in [0, 1]");
  for (const auto& lu : local_unitaries) {
    if (lu.qubit < 0 || lu.qubit >= num_qubits()) throw std::invalid_argument("local unitary on unknown qubit");
    if (!(lu.matrix.adjoint() * lu.matrix).isIdentity(1e-10))
      throw std::invalid_argument("local unitary is not unitary");
  }
  for (const auto& src : sources) src.spec.validate();
  for (const auto& e : elements)
    if (e.distinguishability < 0.0 || e.distinguishability > 1.0)
      throw std::invalid_argument("distinguishability must lie in [0, 1]");
}

std::string to_string(CatVariant v) {
  switch (v) {
    case CatVariant::Cat6: return "cat6";
    case CatVariant::Cat8: return "cat8";
    case CatVariant::Cat10: return "cat10";
  }
  return "?";
}

CatVariant cat_variant_from_string(const std::string& s) {
  for (auto v : {CatVariant::Cat6, CatVariant::Cat8, CatVariant::Cat10})
    if (to_string(v) == s) return v;
  throw std::invalid_argument("unknown cat variant '" + s + "'");
}

int photon_count(CatVariant v) {
  switch (v) {
    case CatVariant::Cat6: return 3;
    case CatVariant::Cat8: return 4;
    case CatVariant::Cat10: return 5;
  }
  return 0;
}

namespace {

// Path labels: 1..5 are the source paths; 31 and 41 leave PBS1 (3' and 4'),
// 11 and 42 leave PBS2 (1' and 4'').
constexpr int kOut3 = 31, kOut4 = 41, kOut1 = 11, kOut4b = 42;

void add_hyper_encoding(CircuitPlan& plan, const std::vector<int>& photon_paths,
                        const std::vector<int>& encode) {
  for (int p : photon_paths) {
    const bool enc = std::find(encode.begin(), encode.end(), p) != encode.end();
    if (enc) {
      plan.elements.push_back({fock::pbs_split(p, encoded_h_path(p), encoded_v_path(p)), 0.0,
                               "encode" + std::to_string(p)});
      plan.detectors.push_back({{encoded_h_path(p), encoded_v_path(p)}});
    } else {
      plan.detectors.push_back({{p}});
    }
  }
  // polarization block first, then spatial block
  for (std::size_t g = 0; g < plan.detectors.size(); ++g)
    plan.qubit_map.push_back({QubitKind::Polarization, static_cast<int>(g)});
  for (std::size_t g = 0; g < plan.detectors.size(); ++g)
    if (plan.detectors[g].paths.size() == 2) plan.qubit_map.push_back({QubitKind::Spatial, static_cast<int>(g)});
}

SourcePlacement pair_source(const NoiseSpec& n, int a, int b) {
  SourceSpec s;
  s.kind = SourceKind::SPDC_PAIR;
  s.tau = n.tau;
  s.max_pairs = n.max_pairs;
  s.visibility_hv = n.pair_visibility_hv;
  s.visibility_diag = n.pair_visibility_diag;
  return {s, {a, b}};
}

SourcePlacement wcs_source(const NoiseSpec& n, int path) {
  SourceSpec s;
  s.kind = SourceKind::WEAK_COHERENT;
  s.p = n.p;
  s.pol_state = {Complex{M_SQRT1_2}, std::polar(M_SQRT1_2, n.wcs_phase)};
  return {s, {path}};
}

}  // namespace

CircuitPlan build_cat_setup(CatVariant variant, const NoiseSpec& noise) {
  noise.validate();
  CircuitPlan plan;
  plan.name = to_string(variant);
  plan.efficiency = noise.efficiency;
  std::vector<int> photon_paths;
  switch (variant) {
    case CatVariant::Cat6:
      plan.sources = {wcs_source(noise, 1), pair_source(noise, 4, 5)};
      plan.elements.push_back({fock::pbs(1, 4, kOut1, kOut4b), noise.xi[1], "PBS2"});
      photon_paths = {kOut1, kOut4b, 5};
      break;
    case CatVariant::Cat8:
      plan.sources = {pair_source(noise, 2, 3), pair_source(noise, 4, 5)};
      plan.elements.push_back({fock::pbs(3, 4, kOut3, kOut4), noise.xi[0], "PBS1"});
      photon_paths = {2, kOut3, kOut4, 5};
      break;
    case CatVariant::Cat10:
      plan.sources = {wcs_source(noise, 1), pair_source(noise, 2, 3), pair_source(noise, 4, 5)};
      plan.elements.push_back({fock::pbs(3, 4, kOut3, kOut4), noise.xi[0], "PBS1"});
      plan.elements.push_back({fock::pbs(1, kOut4, kOut1, kOut4b), noise.xi[1], "PBS2"});
      photon_paths = {kOut1, 2, kOut3, kOut4b, 5};
      break;
  }
  add_hyper_encoding(plan, photon_paths, photon_paths);
  plan.analyzer_visibility.assign(plan.detectors.size(), noise.analyzer_visibility);
  plan.validate();
  return plan;
}

CircuitPlan build_graph_setup(const std::vector<Complex>& initial, const std::vector<int>& encode_set,
                              const std::vector<LocalUnitary>& local_unitaries) {
  SourceSpec s;
  s.kind = SourceKind::INJECTED;
  s.amplitudes = initial;
  s.validate();
  int k = 0;
  while ((std::size_t{1} << k) < initial.size()) ++k;
  std::vector<int> paths;
  for (int j = 0; j < k; ++j) paths.push_back(j + 1);
  std::vector<int> encode_paths;
  for (int e : encode_set) {
    if (e < 0 || e >= k) throw std::invalid_argument("encode_set refers to a photon outside 0.." + std::to_string(k - 1));
    encode_paths.push_back(e + 1);
  }
  CircuitPlan plan;
  plan.name = "graph";
  plan.photon_cap = std::max(k, 1);
  plan.sources.push_back({s, paths});
  add_hyper_encoding(plan, paths, encode_paths);
  plan.analyzer_visibility.assign(plan.detectors.size(), 1.0);
  plan.local_unitaries = local_unitaries;
  plan.validate();
  return plan;
}

RunResult run_plan(const CircuitPlan& plan) {
  plan.validate();
  const int cap = plan.photon_cap;

  // Each source contributes one or more weighted pure states.
  std::vector<Branch> branches{{1.0, OpticalState::vacuum({}, cap)}};
  for (const auto& src : plan.sources) {
    std::vector<Branch> variants;
    switch (src.spec.kind) {
      case SourceKind::SPDC_PAIR: {
        if (src.paths.size() != 2) throw std::invalid_argument("SPDC source needs two paths");
        const double w = src.spec.coherent_weight();
        variants.push_back({w, spdc_pair_state(src.spec, src.paths[0], src.paths[1], +1, cap)});
        if (w < 1.0) variants.push_back({1.0 - w, spdc_pair_state(src.spec, src.paths[0], src.paths[1], -1, cap)});
        break;
      }
      case SourceKind::WEAK_COHERENT:
        if (src.paths.size() != 1) throw std::invalid_argument("weak coherent source needs one path");
        variants.push_back({1.0, weak_coherent_state(src.spec, src.paths[0], cap)});
        break;
      case SourceKind::INJECTED:
        variants.push_back({1.0, injected_state(src.spec, src.paths, cap)});
        break;
    }
    std::vector<Branch> next;
    for (const auto& b : branches)
      for (const auto& v : variants) next.push_back({b.weight * v.weight, fock::tensor(b.state, v.state, cap)});
    branches = std::move(next);
  }

  int tag_bit = 1;
  for (const auto& pe : plan.elements) {
    const double xi = pe.distinguishability;
    std::vector<Branch> next;
    for (const auto& b : branches) {
      if (xi < 1.0) next.push_back({b.weight * (1.0 - xi), fock::apply_element(b.state, pe.element)});
      if (xi > 0.0) {
        // photons arriving at the second input carry a fresh label and no
        // longer interfere with those at the first
        const int second_input = pe.element.inputs.size() == 4 ? pe.element.inputs[2].path : pe.element.inputs[0].path;
        next.push_back({b.weight * xi, fock::apply_element(b.state.retagged(second_input, tag_bit), pe.element)});
      }
    }
    if (xi > 0.0) tag_bit <<= 1;
    branches = std::move(next);
  }

  RunResult r;
  r.branches = std::move(branches);
  double final_norm = 0.0;
  for (const auto& b : r.branches) final_norm += b.weight * b.state.norm_squared();
  r.dropped_weight = std::max(0.0, 1.0 - final_norm);
  return r;
}

}  // namespace hypercat::circuit
