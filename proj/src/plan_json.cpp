#include "hypercat/plan_json.hpp"

#include <stdexcept>

namespace hypercat::io {

using circuit::CircuitPlan;
using circuit::NoiseSpec;
using fock::ElementKind;
using fock::Mode;

namespace {

Json complex_json(Complex c) { return Json::array({c.real(), c.imag()}); }

Complex complex_from(const Json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_array() || j.size() != 2) throw std::invalid_argument("complex number must be [re, im]");
  return {j.at(0).get<double>(), j.at(1).get<double>()};
}

Json mode_json(const Mode& m) { return {{"path", m.path}, {"pol", m.pol == fock::Pol::H ? "H" : "V"}}; }

Mode mode_from(const Json& j) {
  const auto pol = j.at("pol").get<std::string>();
  if (pol != "H" && pol != "V") throw std::invalid_argument("polarization must be \"H\" or \"V\"");
  return {j.at("path").get<int>(), pol == "H" ? fock::Pol::H : fock::Pol::V, 0};
}

std::string qubit_kind_name(circuit::QubitKind k) {
  return k == circuit::QubitKind::Polarization ? "polarization" : "spatial";
}

// nlohmann reports type errors with its own exception family; callers expect
// std::invalid_argument.
template <class F>
auto guarded(const char* what, F&& f) {
  try {
    return f();
  } catch (const Json::exception& e) {
    throw std::invalid_argument(std::string(what) + ": " + e.what());
  }
}

}  // namespace

Json to_json(const fock::ElementUnitary& e) {
  Json j{{"kind", fock::to_string(e.kind)}};
  switch (e.kind) {
    case ElementKind::PBS:
    case ElementKind::NBS:
      if (e.inputs.size() == 2) {
        j["in"] = {e.inputs[0].path};
        j["out"] = {e.outputs[0].path, e.outputs[1].path};
      } else {
        j["in"] = {e.inputs[0].path, e.inputs[2].path};
        j["out"] = {e.outputs[0].path, e.outputs[2].path};
      }
      break;
    case ElementKind::HWP:
    case ElementKind::QWP:
      j["path"] = e.inputs.at(0).path;
      j["angle"] = e.params.at(0);
      break;
    case ElementKind::PHASE: {
      Json ports = Json::array();
      for (const auto& m : e.inputs) ports.push_back(mode_json(m));
      j["ports"] = ports;
      j["phi"] = e.params.at(0);
      break;
    }
  }
  return j;
}

fock::ElementUnitary element_from_json(const Json& j) {
  return guarded("element", [&] {
    const auto kind = fock::element_kind_from_string(j.at("kind").get<std::string>());
    switch (kind) {
      case ElementKind::PBS:
      case ElementKind::NBS: {
        const auto in = j.at("in").get<std::vector<int>>();
        const auto out = j.at("out").get<std::vector<int>>();
        if (out.size() != 2) throw std::invalid_argument("beam splitter needs two output paths");
        if (kind == ElementKind::PBS && in.size() == 1) return fock::pbs_split(in[0], out[0], out[1]);
        if (in.size() != 2) throw std::invalid_argument("beam splitter needs two input paths");
        return kind == ElementKind::PBS ? fock::pbs(in[0], in[1], out[0], out[1])
                                        : fock::nbs(in[0], in[1], out[0], out[1]);
      }
      case ElementKind::HWP: return fock::hwp(j.at("path").get<int>(), j.at("angle").get<double>());
      case ElementKind::QWP: return fock::qwp(j.at("path").get<int>(), j.at("angle").get<double>());
      case ElementKind::PHASE: {
        std::vector<Mode> ports;
        for (const auto& p : j.at("ports")) ports.push_back(mode_from(p));
        return fock::phase(std::move(ports), j.at("phi").get<double>());
      }
    }
    throw std::invalid_argument("unknown element");
  });
}

Json to_json(const CircuitPlan& plan) {
  Json sources = Json::array();
  for (const auto& s : plan.sources) {
    Json js{{"kind", circuit::to_string(s.spec.kind)}, {"paths", s.paths}};
    switch (s.spec.kind) {
      case circuit::SourceKind::SPDC_PAIR:
        js["tau"] = s.spec.tau;
        js["max_pairs"] = s.spec.max_pairs;
        js["visibility_hv"] = s.spec.visibility_hv;
        js["visibility_diag"] = s.spec.visibility_diag;
        break;
      case circuit::SourceKind::WEAK_COHERENT:
        js["p"] = s.spec.p;
        js["pol_state"] = {complex_json(s.spec.pol_state[0]), complex_json(s.spec.pol_state[1])};
        break;
      case circuit::SourceKind::INJECTED: {
        Json amps = Json::array();
        for (const auto& a : s.spec.amplitudes) amps.push_back(complex_json(a));
        js["amplitudes"] = amps;
        break;
      }
    }
    sources.push_back(js);
  }
  Json elements = Json::array();
  for (const auto& e : plan.elements)
    elements.push_back({{"element", to_json(e.element)}, {"distinguishability", e.distinguishability}, {"label", e.label}});
  Json detectors = Json::array();
  for (const auto& d : plan.detectors) detectors.push_back(d.paths);
  Json qubits = Json::array();
  for (const auto& q : plan.qubit_map) qubits.push_back({{"kind", qubit_kind_name(q.kind)}, {"detector", q.detector}});
  Json unitaries = Json::array();
  for (const auto& lu : plan.local_unitaries) {
    Json m = Json::array();
    for (int r = 0; r < 2; ++r) m.push_back({complex_json(lu.matrix(r, 0)), complex_json(lu.matrix(r, 1))});
    unitaries.push_back({{"qubit", lu.qubit}, {"matrix", m}});
  }
  return {{"name", plan.name},
          {"sources", sources},
          {"elements", elements},
          {"detectors", detectors},
          {"qubits", qubits},
          {"efficiency", plan.efficiency},
          {"photon_cap", plan.photon_cap},
          {"analyzer_visibility", plan.analyzer_visibility},
          {"local_unitaries", unitaries}};
}

CircuitPlan plan_from_json(const Json& j) {
  return guarded("plan", [&] {
    CircuitPlan plan;
    plan.name = j.value("name", std::string("custom"));
    for (const auto& js : j.at("sources")) {
      circuit::SourcePlacement sp;
      sp.spec.kind = circuit::source_kind_from_string(js.at("kind").get<std::string>());
      sp.paths = js.at("paths").get<std::vector<int>>();
      sp.spec.tau = js.value("tau", sp.spec.tau);
      sp.spec.max_pairs = js.value("max_pairs", sp.spec.max_pairs);
      sp.spec.visibility_hv = js.value("visibility_hv", sp.spec.visibility_hv);
      sp.spec.visibility_diag = js.value("visibility_diag", sp.spec.visibility_diag);
      sp.spec.p = js.value("p", sp.spec.p);
      if (js.contains("pol_state")) {
        const auto& ps = js.at("pol_state");
        if (!ps.is_array() || ps.size() != 2) throw std::invalid_argument("pol_state needs two entries");
        sp.spec.pol_state = {complex_from(ps[0]), complex_from(ps[1])};
      }
      if (js.contains("amplitudes"))
        for (const auto& a : js.at("amplitudes")) sp.spec.amplitudes.push_back(complex_from(a));
      plan.sources.push_back(std::move(sp));
    }
    for (const auto& je : j.at("elements"))
      plan.elements.push_back({element_from_json(je.at("element")), je.value("distinguishability", 0.0),
                               je.value("label", std::string())});
    for (const auto& jd : j.at("detectors")) plan.detectors.push_back({jd.get<std::vector<int>>()});
    for (const auto& jq : j.at("qubits")) {
      const auto kind = jq.at("kind").get<std::string>();
      if (kind != "polarization" && kind != "spatial")
        throw std::invalid_argument("qubit kind must be \"polarization\" or \"spatial\"");
      plan.qubit_map.push_back({kind == "polarization" ? circuit::QubitKind::Polarization : circuit::QubitKind::Spatial,
                                jq.at("detector").get<int>()});
    }
    plan.efficiency = j.value("efficiency", 1.0);
    plan.photon_cap = j.value("photon_cap", fock::kDefaultPhotonCap);
    plan.analyzer_visibility = j.value("analyzer_visibility", std::vector<double>{});
    if (j.contains("local_unitaries")) {
      for (const auto& ju : j.at("local_unitaries")) {
        circuit::LocalUnitary lu;
        lu.qubit = ju.at("qubit").get<int>();
        const auto& m = ju.at("matrix");
        if (!m.is_array() || m.size() != 2 || m[0].size() != 2 || m[1].size() != 2)
          throw std::invalid_argument("local unitary matrix must be 2x2");
        for (int r = 0; r < 2; ++r)
          for (int c = 0; c < 2; ++c) lu.matrix(r, c) = complex_from(m[r][c]);
        plan.local_unitaries.push_back(lu);
      }
    }
    plan.validate();
    return plan;
  });
}

Json to_json(const NoiseSpec& n) {
  return {{"tau", n.tau},
          {"max_pairs", n.max_pairs},
          {"p", n.p},
          {"pair_visibility_hv", n.pair_visibility_hv},
          {"pair_visibility_diag", n.pair_visibility_diag},
          {"xi", n.xi},
          {"efficiency", n.efficiency},
          {"analyzer_visibility", n.analyzer_visibility},
          {"wcs_phase", n.wcs_phase}};
}

NoiseSpec noise_from_json(const Json& j, NoiseSpec n) {
  return guarded("noise", [&] {
    if (!j.is_object()) throw std::invalid_argument("noise must be an object");
    n.tau = j.value("tau", n.tau);
    n.max_pairs = j.value("max_pairs", n.max_pairs);
    n.p = j.value("p", n.p);
    n.pair_visibility_hv = j.value("pair_visibility_hv", n.pair_visibility_hv);
    n.pair_visibility_diag = j.value("pair_visibility_diag", n.pair_visibility_diag);
    if (j.contains("xi")) {
      const auto& x = j.at("xi");
      if (x.is_number()) {
        n.xi = {x.get<double>(), x.get<double>()};
      } else {
        const auto v = x.get<std::vector<double>>();
        if (v.size() != 2) throw std::invalid_argument("xi needs one value per fusion PBS");
        n.xi = {v[0], v[1]};
      }
    }
    n.efficiency = j.value("efficiency", n.efficiency);
    n.analyzer_visibility = j.value("analyzer_visibility", n.analyzer_visibility);
    n.wcs_phase = j.value("wcs_phase", n.wcs_phase);
    n.validate();
    return n;
  });
}

}  // namespace hypercat::io
