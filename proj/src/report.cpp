#include "hypercat/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>

#include "hypercat/scenario.hpp"

namespace hypercat::report {

using nlohmann::json;

namespace {

json estimate_json(const analysis::Estimate& e) { return {{"value", e.value}, {"sigma", e.sigma}}; }

// JSON has no infinity; an unbounded significance is written as a string.
json real_or_label(double x) {
  if (std::isfinite(x)) return x;
  return x > 0 ? "inf" : "-inf";
}

json filter_json(const analysis::FilterResult& r) {
  return {{"lambdas", r.lambda.lambdas}, {"value", r.objective.value}, {"sigma", r.objective.sigma},
          {"unfiltered", r.unfiltered}};
}

}  // namespace

AnalysisReport analyze(const std::vector<NamedData>& records, std::optional<analysis::FilterMode> filter) {
  if (records.empty()) throw std::invalid_argument("no records to analyze");
  AnalysisReport r;
  r.n = records.front().data.n();
  r.exact = std::all_of(records.begin(), records.end(), [](const auto& x) { return x.data.exact; });

  std::vector<analysis::SettingData> data;
  std::set<double> angles;
  for (const auto& rec : records) {
    if (rec.data.n() != r.n) throw std::invalid_argument("records disagree on the qubit count");
    SettingSummary s{rec.id, rec.data.setting, rec.data.total(), std::nullopt};
    if (rec.data.setting.is_uniform_equatorial()) {
      s.expectation = analysis::expectation_M(rec.data);
      r.fringe.push_back({rec.data.setting.bases[0].theta, *s.expectation});
      angles.insert(rec.data.setting.bases[0].theta);
    }
    r.settings.push_back(std::move(s));
    data.push_back(rec.data);
  }
  std::sort(r.fringe.begin(), r.fringe.end(), [](const auto& a, const auto& b) { return a.theta < b.theta; });

  const auto input = scenario::make_input(r.n, data);
  r.fidelity = analysis::fidelity_cat(input);
  r.witness = analysis::witness_value(r.fidelity);
  r.signal_to_noise = analysis::signal_to_noise(input.z);
  if (angles.size() >= 4) {
    // on the kπ/n grid alone sin nθ vanishes and the phase is not identifiable
    try {
      r.fringe_fit = analysis::fringe_fit(r.fringe, r.n);
    } catch (const std::domain_error&) {
      r.fringe_fit.reset();
    }
  }

  if (filter) {
    analysis::FilterSearchOptions opt;
    opt.mode = *filter;
    FilterSummary f;
    f.mode = *filter;
    f.witness = analysis::optimize_filter(input, analysis::FilterObjective::MinWitness, opt);
    f.fidelity = analysis::optimize_filter(input, analysis::FilterObjective::MaxFidelity, opt);
    r.filter = f;
  }
  return r;
}

json to_json(const AnalysisReport& r) {
  json settings = json::array();
  for (const auto& s : r.settings) {
    json js{{"id", s.id}, {"qubit_bases", s.setting.to_string()}, {"total", s.total}};
    if (s.expectation) js["expectation"] = estimate_json(*s.expectation);
    settings.push_back(js);
  }
  json out{{"n", r.n},
           {"exact", r.exact},
           {"fidelity", estimate_json(r.fidelity)},
           {"witness",
            {{"value", r.witness.value}, {"sigma", r.witness.sigma}, {"significance", real_or_label(r.witness.significance)}}},
           {"signal_to_noise", {{"ratio", real_or_label(r.signal_to_noise.ratio)}, {"floored", r.signal_to_noise.floored}}},
           {"settings", settings}};
  if (r.fringe_fit)
    out["visibility_fit"] = {{"visibility", estimate_json(r.fringe_fit->visibility)},
                             {"phase", estimate_json(r.fringe_fit->phase)}};
  else
    out["visibility_fit"] = nullptr;
  if (r.filter)
    out["filter"] = {{"mode", analysis::to_string(r.filter->mode)},
                     {"min_witness", filter_json(r.filter->witness)},
                     {"max_fidelity", filter_json(r.filter->fidelity)}};
  return out;
}

void write_fringe_csv(const std::filesystem::path& path, const std::vector<analysis::FringePoint>& points) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  auto sorted = points;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.theta < b.theta; });
  f.precision(17);
  f << "theta,expectation,sigma\n";
  for (const auto& p : sorted) f << p.theta << ',' << p.e.value << ',' << p.e.sigma << '\n';
}

}  // namespace hypercat::report
