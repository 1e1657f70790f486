#include "hypercat/scenario.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>

namespace hypercat::scenario {

using circuit::CatVariant;

namespace {

// Root of a monotone function on [lo, hi] by bisection.
double bisect(const std::function<double(double)>& g, double lo, double hi, int iters = 60) {
  const double glo = g(lo), ghi = g(hi);
  if (glo * ghi > 0.0) throw std::domain_error("calibration target is out of reach");
  const bool rising = ghi > glo;
  for (int i = 0; i < iters; ++i) {
    const double mid = 0.5 * (lo + hi);
    if ((g(mid) > 0.0) == rising)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double cat_fidelity(const detection::QubitEnsemble& e) {
  e.require_nonempty();
  const auto last = e.rho.rows() - 1;
  return 0.5 * (e.rho(0, 0).real() + e.rho(last, last).real()) + e.rho(0, last).real();
}

double exact_fidelity(CatVariant v, const circuit::NoiseSpec& noise) {
  return cat_fidelity(detection::simulate(circuit::build_cat_setup(v, noise)));
}

CalibratedNoise calibrate_noise(const Calibration& c) {
  circuit::NoiseSpec n;
  n.efficiency = c.efficiency;
  n.pair_visibility_hv = c.pair_visibility_hv;
  n.pair_visibility_diag = c.pair_visibility_diag;
  n.tau = circuit::tau_for_pair_visibility(c.pair_visibility_hv, c.efficiency);
  n.validate();

  // Without a weak coherent photon the eight-qubit state does not depend on p.
  n.xi = {0.0, 0.0};
  if (exact_fidelity(CatVariant::Cat8, n) > c.cat8_fidelity) {
    const double xi = bisect(
        [&](double x) {
          auto m = n;
          m.xi = {x, x};
          return exact_fidelity(CatVariant::Cat8, m) - c.cat8_fidelity;
        },
        0.0, 1.0);
    n.xi = {xi, xi};
  }
  n.p = bisect(
      [&](double p) {
        auto m = n;
        m.p = p;
        return exact_fidelity(CatVariant::Cat6, m) - c.cat6_fidelity;
      },
      1e-6, 0.499);

  CalibratedNoise out;
  out.noise = n;
  out.cat6 = exact_fidelity(CatVariant::Cat6, n);
  out.cat8 = exact_fidelity(CatVariant::Cat8, n);
  out.cat10 = exact_fidelity(CatVariant::Cat10, n);
  return out;
}

const CalibratedNoise& default_calibration() {
  static const CalibratedNoise c = calibrate_noise();
  return c;
}

Acquisition paper_acquisition(CatVariant v) {
  switch (v) {
    case CatVariant::Cat6: return {200.0, 150.0, 150.0};
    case CatVariant::Cat8: return {0.021 * 160.0, 480.0, 480.0};
    case CatVariant::Cat10: return {0.021, 6.0 * 3600.0, 1.5 * 3600.0};
  }
  return {};
}

std::vector<detection::MeasurementSetting> fidelity_settings(int n, int k0) {
  if (n < 1) throw std::invalid_argument("need at least one qubit");
  std::vector<detection::MeasurementSetting> out{detection::MeasurementSetting::all_z(n)};
  for (int k = k0; k < k0 + n; ++k)
    out.push_back(detection::MeasurementSetting::all_equatorial(n, k * std::numbers::pi / n));
  return out;
}

analysis::CatAnalysisInput make_input(int n, const std::vector<analysis::SettingData>& data) {
  analysis::CatAnalysisInput in;
  in.n = n;
  bool have_z = false;
  std::vector<bool> seen(n, false);
  const double step = std::numbers::pi / n;
  for (const auto& d : data) {
    if (d.n() != n) continue;
    if (d.setting.is_all_z()) {
      if (!have_z) in.z = d;
      have_z = true;
      continue;
    }
    if (!d.setting.is_uniform_equatorial()) continue;
    const double theta = d.setting.bases[0].theta;
    const long long k = std::llround(theta / step);
    if (std::abs(theta - k * step) > 1e-9) continue;
    long long kk = ((k % n) + n) % n;
    if (seen[kk]) continue;
    seen[kk] = true;
    in.thetas.push_back(d);
  }
  if (!have_z) throw std::invalid_argument("no all-Z setting");
  for (int k = 0; k < n; ++k)
    if (!seen[k]) throw std::invalid_argument("no equatorial setting for θ = " + std::to_string(k) + "π/" + std::to_string(n) + " (mod π)");
  return in;
}

analysis::CatAnalysisInput exact_input(const detection::QubitEnsemble& e) {
  std::vector<analysis::SettingData> data;
  for (const auto& s : fidelity_settings(e.n, 1))
    data.push_back(analysis::SettingData::from_distribution(s, detection::outcome_distribution(e, s)));
  return make_input(e.n, data);
}

double diagonal_noise_fraction(const std::vector<double>& z_weights, int photons) {
  const std::size_t dim = std::size_t{1} << (2 * photons);
  if (z_weights.size() != dim) throw std::invalid_argument("Z weights do not match the photon count");
  const std::size_t mask = (std::size_t{1} << photons) - 1;
  double diag = 0.0, total = 0.0;
  for (std::size_t x = 1; x + 1 < dim; ++x) {
    total += z_weights[x];
    if ((x >> photons) == (x & mask)) diag += z_weights[x];
  }
  return total > 0.0 ? diag / total : 1.0;
}

}  // namespace hypercat::scenario
