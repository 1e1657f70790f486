#include "hypercat/analysis.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace hypercat::analysis {

namespace {

int parity(std::size_t x) { return std::popcount(x) & 1; }

/// w_z = Π_i (1 + (-1)^{z_i} λ_i)², qubit 0 as the most significant bit.
std::vector<double> filter_weights(const std::vector<double>& lambdas) {
  std::vector<double> w{1.0};
  for (double l : lambdas) {
    const double up = (1.0 + l) * (1.0 + l), down = (1.0 - l) * (1.0 - l);
    std::vector<double> next(w.size() * 2);
    for (std::size_t i = 0; i < w.size(); ++i) {
      next[2 * i] = w[i] * up;
      next[2 * i + 1] = w[i] * down;
    }
    w = std::move(next);
  }
  return w;
}

struct ZStats {
  std::vector<double> prob;
  double total = 0.0;
  bool exact = false;
};

ZStats z_stats(const SettingData& z) {
  ZStats s;
  s.total = z.total();
  if (!(s.total > 0.0)) throw std::domain_error("Z-basis record has no counts");
  s.exact = z.exact;
  s.prob.resize(z.weights.size());
  for (std::size_t i = 0; i < z.weights.size(); ++i) s.prob[i] = z.weights[i] / s.total;
  return s;
}

/// Shared precomputation for the filtered quantities.
class FilterEvaluator {
 public:
  explicit FilterEvaluator(const CatAnalysisInput& input) : n_(input.n), z_(z_stats(input.z)) {
    input.validate();
    const auto grid = input.grid_expectations();
    double var = 0.0;
    for (int k = 1; k <= n_; ++k) {
      const double sign = (k % 2 == 0) ? 1.0 : -1.0;
      coherence_ += sign * grid[k - 1].value;
      var += grid[k - 1].sigma * grid[k - 1].sigma;
    }
    coherence_ /= n_;
    coherence_sigma_ = std::sqrt(var) / n_;
  }

  struct Parts {
    std::vector<double> w;
    double a2, b2, ab, zpart, num, den;
  };

  Parts parts(const FilterParams& lambda) const {
    Parts p;
    p.w = filter_weights(lambda.lambdas);
    p.a2 = p.w.front();
    p.b2 = p.w.back();
    p.ab = 1.0;
    for (double l : lambda.lambdas) p.ab *= (1.0 - l * l);
    p.zpart = p.a2 * z_.prob.front() + p.b2 * z_.prob.back();
    p.num = 0.5 * (p.zpart + p.ab * coherence_);
    p.den = 0.0;
    for (std::size_t i = 0; i < p.w.size(); ++i) p.den += p.w[i] * z_.prob[i];
    return p;
  }

  double witness_value(const FilterParams& lambda, const Parts& p) const {
    return witness_norm(lambda) * (0.5 * p.den - p.num);
  }

  double witness_norm(const FilterParams& lambda) const {
    const double tr = filtered_witness_trace(lambda);
    if (!(tr > 1e-300)) throw std::domain_error("filtered witness normalization is singular");
    return (std::ldexp(1.0, n_ - 1) - 1.0) / tr;
  }

  Estimate witness(const FilterParams& lambda) const {
    const auto p = parts(lambda);
    const double norm = witness_norm(lambda);
    Estimate e{norm * (0.5 * p.den - p.num), 0.0};
    double var = 0.0;
    if (!z_.exact) {
      const auto last = p.w.size() - 1;
      for (std::size_t z = 0; z < p.w.size(); ++z) {
        const double corner = (z == 0 || z == last) ? p.w[z] : 0.0;
        const double g = norm * (0.5 * (p.w[z] - p.den) - 0.5 * (corner - p.zpart)) / z_.total;
        var += g * g * z_.prob[z] * z_.total;
      }
    }
    const double gc = norm * 0.5 * p.ab * coherence_sigma_;
    e.sigma = std::sqrt(var + gc * gc);
    return e;
  }

  Estimate fidelity(const FilterParams& lambda) const {
    const auto p = parts(lambda);
    if (!(p.den > 0.0)) throw std::domain_error("filtered state normalization is not positive");
    Estimate e{p.num / p.den, 0.0};
    double var = 0.0;
    if (!z_.exact) {
      const auto last = p.w.size() - 1;
      for (std::size_t z = 0; z < p.w.size(); ++z) {
        const double corner = (z == 0 || z == last) ? p.w[z] : 0.0;
        const double dnum = 0.5 * (corner - p.zpart) / z_.total;
        const double dden = (p.w[z] - p.den) / z_.total;
        const double g = (dnum * p.den - p.num * dden) / (p.den * p.den);
        var += g * g * z_.prob[z] * z_.total;
      }
    }
    const double gc = 0.5 * p.ab / p.den * coherence_sigma_;
    e.sigma = std::sqrt(var + gc * gc);
    return e;
  }

  double objective(const FilterParams& lambda, FilterObjective o) const {
    const auto p = parts(lambda);
    if (o == FilterObjective::MinWitness) return witness_value(lambda, p);
    return -p.num / p.den;
  }

 private:
  int n_;
  ZStats z_;
  double coherence_ = 0.0;
  double coherence_sigma_ = 0.0;
};

/// Golden-section minimization of g on [a, b]; returns (argmin, min) over
/// all evaluated points.
template <class F>
std::pair<double, double> golden_section(F&& g, double a, double b, double tol) {
  const double c = 2.0 / (1.0 + std::sqrt(5.0));
  double u = c * a + (1.0 - c) * b, v = (1.0 - c) * a + c * b;
  double fa = g(a), fb = g(b), fu = g(u), fv = g(v);
  auto best = [&] {
    std::pair<double, double> r{a, fa};
    for (auto [x, fx] : {std::pair{u, fu}, std::pair{v, fv}, std::pair{b, fb}})
      if (fx < r.second) r = {x, fx};
    return r;
  };
  for (int it = 0; it < 200 && std::abs(b - a) >= tol; ++it) {
    if (fu > fv) {
      a = u;
      fa = fu;
      u = v;
      fu = fv;
      v = (1.0 - c) * a + c * b;
      fv = g(v);
    } else {
      b = v;
      fb = fv;
      v = u;
      fv = fu;
      u = c * a + (1.0 - c) * b;
      fu = g(u);
    }
  }
  return best();
}

}  // namespace

bool FilterParams::is_identity() const {
  return std::all_of(lambdas.begin(), lambdas.end(), [](double l) { return l == 0.0; });
}

void FilterParams::validate(int n) const {
  if (static_cast<int>(lambdas.size()) != n) throw std::invalid_argument("filter needs one λ per qubit");
  for (double l : lambdas)
    if (!std::isfinite(l) || std::abs(l) > 1.0 - kMargin)
      throw std::invalid_argument("filter parameter must satisfy |λ| <= 1 - 1e-6");
}

SettingData SettingData::from_counts(const CountRecord& rec) {
  SettingData d;
  d.setting = rec.setting;
  d.weights.assign(rec.counts.begin(), rec.counts.end());
  d.exact = false;
  return d;
}

SettingData SettingData::from_distribution(MeasurementSetting setting, std::vector<double> probs) {
  SettingData d;
  d.setting = std::move(setting);
  d.weights = std::move(probs);
  d.exact = true;
  return d;
}

double SettingData::total() const {
  double t = 0.0;
  for (double w : weights) t += w;
  return t;
}

void CatAnalysisInput::validate() const {
  if (n < 2) throw std::invalid_argument("cat analysis needs at least two qubits");
  const auto dim = std::size_t{1} << n;
  if (z.n() != n || !z.setting.is_all_z()) throw std::invalid_argument("Z record must measure every qubit in Z");
  if (z.weights.size() != dim) throw std::invalid_argument("Z record has the wrong number of outcomes");
  if (static_cast<int>(thetas.size()) != n)
    throw std::invalid_argument("expected " + std::to_string(n) + " equatorial settings, got " +
                                std::to_string(thetas.size()));
  for (const auto& t : thetas) {
    if (t.n() != n || !t.setting.is_uniform_equatorial())
      throw std::invalid_argument("equatorial record must use one angle on every qubit");
    if (t.weights.size() != dim) throw std::invalid_argument("equatorial record has the wrong number of outcomes");
  }
}

std::vector<Estimate> CatAnalysisInput::grid_expectations() const {
  std::vector<Estimate> out(n);
  std::vector<bool> filled(n, false);
  const double step = std::numbers::pi / n;
  for (const auto& t : thetas) {
    const double theta = t.setting.bases[0].theta;
    const long long k = std::llround(theta / step);
    if (std::abs(theta - k * step) > 1e-9)
      throw std::invalid_argument("equatorial angle is not on the kπ/n grid");
    long long kk = ((k % (2 * n)) + 2 * n) % (2 * n);
    double sign = 1.0;
    if (kk == 0 || kk > n) {
      kk = kk == 0 ? n : kk - n;
      sign = (n % 2 == 0) ? 1.0 : -1.0;
    }
    if (filled[kk - 1]) throw std::invalid_argument("duplicate equatorial setting for k = " + std::to_string(kk));
    filled[kk - 1] = true;
    auto e = expectation_M(t);
    out[kk - 1] = {sign * e.value, e.sigma};
  }
  for (int k = 1; k <= n; ++k)
    if (!filled[k - 1]) throw std::invalid_argument("missing equatorial setting for k = " + std::to_string(k));
  return out;
}

Estimate expectation_M(const SettingData& data) {
  if (!data.setting.is_uniform_equatorial())
    throw std::invalid_argument("expectation_M needs the same equatorial angle on every qubit");
  if (data.weights.size() != (std::size_t{1} << data.n()))
    throw std::invalid_argument("record has the wrong number of outcomes");
  const double total = data.total();
  if (!(total > 0.0)) throw std::domain_error("record has no counts");
  double s = 0.0;
  for (std::size_t i = 0; i < data.weights.size(); ++i) s += parity(i) ? -data.weights[i] : data.weights[i];
  const double e = s / total;
  if (data.exact) return {e, 0.0};
  return {e, std::sqrt(std::max(0.0, 1.0 - e * e) / total)};
}

Estimate expectation_M(const CountRecord& rec) { return expectation_M(SettingData::from_counts(rec)); }

Estimate fidelity_cat(const CatAnalysisInput& input) {
  input.validate();
  const auto z = z_stats(input.z);
  const double pop = z.prob.front() + z.prob.back();
  double pop_var = z.exact ? 0.0 : pop * (1.0 - pop) / z.total;
  const auto grid = input.grid_expectations();
  double coh = 0.0, coh_var = 0.0;
  for (int k = 1; k <= input.n; ++k) {
    coh += (k % 2 == 0 ? 1.0 : -1.0) * grid[k - 1].value;
    coh_var += grid[k - 1].sigma * grid[k - 1].sigma;
  }
  const double n = input.n;
  const double f = 0.5 * pop + coh / (2.0 * n);
  const double var = 0.25 * std::max(0.0, pop_var) + coh_var / (4.0 * n * n);
  return {f, std::sqrt(var)};
}

WitnessEstimate witness_value(const Estimate& fidelity) {
  WitnessEstimate w;
  w.value = 0.5 - fidelity.value;
  w.sigma = fidelity.sigma;
  const double excess = fidelity.value - 0.5;
  if (fidelity.sigma > 0.0)
    w.significance = excess / fidelity.sigma;
  else
    w.significance = excess == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), excess);
  return w;
}

FringeFit fringe_fit(const std::vector<FringePoint>& points, int n) {
  if (n < 1) throw std::invalid_argument("fringe order must be positive");
  std::vector<double> thetas;
  for (const auto& p : points) thetas.push_back(p.theta);
  std::sort(thetas.begin(), thetas.end());
  thetas.erase(std::unique(thetas.begin(), thetas.end()), thetas.end());
  if (thetas.size() < 4) throw std::invalid_argument("fringe fit needs at least four distinct angles");

  const bool weighted = std::all_of(points.begin(), points.end(), [](const auto& p) { return p.e.sigma > 0.0; });
  Eigen::Matrix2d ata = Eigen::Matrix2d::Zero();
  Eigen::Vector2d atb = Eigen::Vector2d::Zero();
  for (const auto& p : points) {
    const double w = weighted ? 1.0 / (p.e.sigma * p.e.sigma) : 1.0;
    const Eigen::Vector2d row(std::cos(n * p.theta), std::sin(n * p.theta));
    ata += w * row * row.transpose();
    atb += w * row * p.e.value;
  }
  if (std::abs(ata.determinant()) <= 1e-12 * ata.squaredNorm())
    throw std::domain_error("fringe fit design matrix is degenerate");
  Eigen::Matrix2d cov = ata.inverse();
  const Eigen::Vector2d coef = cov * atb;
  if (!weighted) {
    double rss = 0.0;
    for (const auto& p : points) {
      const double r = p.e.value - coef(0) * std::cos(n * p.theta) - coef(1) * std::sin(n * p.theta);
      rss += r * r;
    }
    const auto dof = static_cast<double>(points.size()) - 2.0;
    cov *= dof > 0.0 ? rss / dof : 0.0;
  }
  // a cos nθ + b sin nθ = V cos(nθ + φ) with a = V cos φ, b = -V sin φ
  const double a = coef(0), b = coef(1);
  const double v = std::hypot(a, b);
  FringeFit fit;
  fit.visibility.value = v;
  if (v > 0.0) {
    const Eigen::Vector2d gv(a / v, b / v);
    const Eigen::Vector2d gp(b / (v * v), -a / (v * v));
    fit.visibility.sigma = std::sqrt(std::max(0.0, gv.dot(cov * gv)));
    double phi = std::atan2(-b, a);
    if (phi < 0.0) phi += 2.0 * std::numbers::pi;
    if (phi >= 2.0 * std::numbers::pi) phi = 0.0;
    fit.phase = {phi, std::sqrt(std::max(0.0, gp.dot(cov * gp)))};
  } else {
    fit.visibility.sigma = std::sqrt(std::max(0.0, 0.5 * cov.trace()));
    fit.phase = {0.0, std::numbers::pi};
  }
  return fit;
}

SignalToNoise signal_to_noise(const SettingData& z) {
  if (!z.setting.is_all_z()) throw std::invalid_argument("signal-to-noise needs an all-Z record");
  const auto size = z.weights.size();
  if (size < 4) throw std::invalid_argument("signal-to-noise needs at least two qubits");
  const double signal = 0.5 * (z.weights.front() + z.weights.back());
  double noise_sum = 0.0;
  for (std::size_t i = 1; i + 1 < size; ++i) noise_sum += z.weights[i];
  SignalToNoise r;
  const double bins = static_cast<double>(size - 2);
  if (noise_sum <= 0.0) {
    r.floored = true;
    noise_sum = z.exact ? std::numeric_limits<double>::min() : 1.0;
  }
  r.ratio = signal / (noise_sum / bins);
  return r;
}

SignalToNoise signal_to_noise(const CountRecord& z) { return signal_to_noise(SettingData::from_counts(z)); }

double filtered_witness_trace(const FilterParams& lambda) {
  double tr_f2 = 1.0, a2 = 1.0, b2 = 1.0;
  for (double l : lambda.lambdas) {
    tr_f2 *= (1.0 + l) * (1.0 + l) + (1.0 - l) * (1.0 - l);
    a2 *= (1.0 + l) * (1.0 + l);
    b2 *= (1.0 - l) * (1.0 - l);
  }
  return 0.5 * tr_f2 - 0.5 * (a2 + b2);
}

Estimate filtered_witness(const CatAnalysisInput& input, const FilterParams& lambda) {
  input.validate();
  lambda.validate(input.n);
  if (lambda.is_identity()) {
    const auto w = witness_value(fidelity_cat(input));
    return {w.value, w.sigma};
  }
  return FilterEvaluator(input).witness(lambda);
}

Estimate filtered_fidelity(const CatAnalysisInput& input, const FilterParams& lambda) {
  input.validate();
  lambda.validate(input.n);
  if (lambda.is_identity()) return fidelity_cat(input);
  return FilterEvaluator(input).fidelity(lambda);
}

std::string to_string(FilterObjective o) {
  return o == FilterObjective::MinWitness ? "min_witness" : "max_fidelity";
}

std::string to_string(FilterMode m) { return m == FilterMode::PerQubit ? "per-qubit" : "uniform"; }

FilterResult optimize_filter(const CatAnalysisInput& input, FilterObjective objective,
                             const FilterSearchOptions& options) {
  input.validate();
  const FilterEvaluator eval(input);
  const int n = input.n;
  const double lo = -1.0 + FilterParams::kMargin, hi = 1.0 - FilterParams::kMargin;

  auto start = FilterParams::identity(n);
  const double f0 = objective == FilterObjective::MinWitness
                        ? witness_value(fidelity_cat(input)).value
                        : -fidelity_cat(input).value;
  FilterParams lambda = start;
  double best = f0;

  const int coords = options.mode == FilterMode::PerQubit ? n : 1;
  auto with_coord = [&](const FilterParams& base, int i, double t) {
    FilterParams p = base;
    if (options.mode == FilterMode::PerQubit)
      p.lambdas[i] = t;
    else
      std::fill(p.lambdas.begin(), p.lambdas.end(), t);
    return p;
  };

  for (int sweep = 0; sweep < options.max_sweeps; ++sweep) {
    const double sweep_start = best;
    for (int i = 0; i < coords; ++i) {
      auto g = [&](double t) { return eval.objective(with_coord(lambda, i, t), objective); };
      double best_t = lambda.lambdas[i];
      double best_g = best;
      for (int sub = 0; sub < 3; ++sub) {
        const double a = lo + sub * (hi - lo) / 3.0, b = lo + (sub + 1) * (hi - lo) / 3.0;
        const auto [t, gt] = golden_section(g, a, b, options.line_tolerance);
        if (gt < best_g) {
          best_g = gt;
          best_t = t;
        }
      }
      if (best_g < best) {
        best = best_g;
        lambda = with_coord(lambda, i, best_t);
      }
    }
    if (sweep_start - best < options.sweep_tolerance) break;
  }

  FilterResult r;
  r.lambda = lambda;
  r.unfiltered = objective == FilterObjective::MinWitness ? f0 : -f0;
  if (objective == FilterObjective::MinWitness)
    r.objective = filtered_witness(input, lambda);
  else
    r.objective = filtered_fidelity(input, lambda);
  return r;
}

}  // namespace hypercat::analysis
