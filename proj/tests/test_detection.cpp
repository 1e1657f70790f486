#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>

#include "hypercat/circuit.hpp"
#include "hypercat/detection.hpp"
#include "hypercat/oracle.hpp"
#include "hypercat/scenario.hpp"

using namespace hypercat;
using namespace hypercat::detection;
namespace fs = std::filesystem;

namespace {

int popcount(std::size_t x) { return static_cast<int>(__builtin_popcountll(x)); }

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

QubitEnsemble ideal_cat(int n) { return QubitEnsemble::from_pure(oracle::dense_cat(n).amplitudes()); }

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("hypercat_detection_" + name);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("post-selection of the ten-qubit setup") {
  const auto plan = circuit::build_cat_setup(circuit::CatVariant::Cat10, circuit::NoiseSpec::ideal());
  const auto e = simulate(plan);
  REQUIRE(e.n == 10);
  CHECK(e.is_valid());
  CHECK(e.success_prob > 0.0);
  const auto cat = oracle::dense_cat(10).density();
  CHECK((e.rho - cat).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("double-pair noise sits on the diagonal line") {
  // lossy detection lets double pairs through the coincidence filter
  circuit::NoiseSpec n;
  n.tau = 0.3;
  n.p = 0.03;
  n.efficiency = 0.2;
  for (auto v : {circuit::CatVariant::Cat6, circuit::CatVariant::Cat8, circuit::CatVariant::Cat10}) {
    const int photons = circuit::photon_count(v);
    const auto e = simulate(circuit::build_cat_setup(v, n));
    const auto z = outcome_distribution(e, MeasurementSetting::all_z(e.n));
    const double noise = sum(z) - z.front() - z.back();
    CAPTURE(circuit::to_string(v));
    CHECK(noise > 1e-4);
    CHECK(scenario::diagonal_noise_fraction(z, photons) == doctest::Approx(1.0).epsilon(1e-9));
  }
  SUBCASE("an analyzer flip moves weight off the diagonal") {
    std::vector<double> z(1u << 6, 0.0);
    z[0] = z[63] = 0.45;
    z[0b001001] = 0.05;  // polarization 001, spatial 001
    z[0b001000] = 0.05;  // polarization 001, spatial 000
    CHECK(scenario::diagonal_noise_fraction(z, 3) == doctest::Approx(0.5));
  }
}

TEST_CASE("empty post-selection") {
  // one photon, two detector groups: never a coincidence
  circuit::SourceSpec s;
  s.kind = circuit::SourceKind::INJECTED;
  s.amplitudes = {Complex(1.0), Complex(0.0)};
  circuit::CircuitPlan plan;
  plan.sources.push_back({s, {1}});
  plan.elements.push_back({fock::pbs_split(1, 2, 3), 0.0, "split"});
  plan.detectors = {{{2}}, {{9}}};
  plan.qubit_map = {{circuit::QubitKind::Polarization, 0}, {circuit::QubitKind::Polarization, 1}};
  const auto e = simulate(plan);
  CHECK(e.empty());
  CHECK(e.success_prob == 0.0);
  CHECK_THROWS_AS(e.require_nonempty(), std::domain_error);
  CHECK_THROWS(outcome_distribution(e, MeasurementSetting::all_z(2)));
}

TEST_CASE("outcome distributions") {
  SUBCASE("ideal cat in Z") {
    for (int n : {2, 5, 8}) {
      const auto p = outcome_distribution(ideal_cat(n), MeasurementSetting::all_z(n));
      CHECK(p.front() == doctest::Approx(0.5));
      CHECK(p.back() == doctest::Approx(0.5));
      CHECK(sum(p) == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
  SUBCASE("ideal cat parity fringe") {
    for (int n : {3, 6}) {
      for (double theta : {0.0, 0.3, 1.1, 2.9, 5.0}) {
        const auto p = outcome_distribution(ideal_cat(n), MeasurementSetting::all_equatorial(n, theta));
        double even = 0.0, odd = 0.0;
        for (std::size_t x = 0; x < p.size(); ++x) (popcount(x) % 2 ? odd : even) += p[x];
        CHECK(std::abs(even - (1 + std::cos(n * theta)) / 2) < 1e-12);
        CHECK(std::abs(odd - (1 - std::cos(n * theta)) / 2) < 1e-12);
      }
    }
  }
  SUBCASE("equatorial outcome 0 is (|0> + e^{iθ}|1>)/√2") {
    const double theta = 0.7;
    Eigen::VectorXcd psi(2);
    psi << M_SQRT1_2, std::polar(M_SQRT1_2, theta);
    const auto p = outcome_distribution(QubitEnsemble::from_pure(psi), MeasurementSetting::all_equatorial(1, theta));
    CHECK(p[0] == doctest::Approx(1.0));
    CHECK(p[1] == doctest::Approx(0.0));
  }
  SUBCASE("maximally mixed state") {
    const int n = 4;
    const auto e = QubitEnsemble::from_density(Eigen::MatrixXcd::Identity(16, 16) / 16.0);
    MeasurementSetting m;
    m.bases = {QubitBasis::z(), QubitBasis::equatorial(0.4), QubitBasis::equatorial(2.0), QubitBasis::z()};
    for (double p : outcome_distribution(e, m)) CHECK(p == doctest::Approx(1.0 / (1 << n)));
  }
  SUBCASE("normalization on random states and settings") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> angle(0.0, 2 * M_PI);
    for (int trial = 0; trial < 20; ++trial) {
      const int n = 2 + trial % 4;
      const auto e = QubitEnsemble::from_density(oracle::random_density(n, 1 + trial % 3, 100 + trial));
      MeasurementSetting m;
      for (int q = 0; q < n; ++q)
        m.bases.push_back(rng() % 3 == 0 ? QubitBasis::z() : QubitBasis::equatorial(angle(rng)));
      const auto p = outcome_distribution(e, m);
      CHECK(std::abs(sum(p) - 1.0) < 1e-10);
      CHECK(*std::min_element(p.begin(), p.end()) > -1e-12);
    }
  }
  SUBCASE("product states factorize") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> angle(0.0, 2 * M_PI);
    for (int trial = 0; trial < 10; ++trial) {
      const int n = 3;
      Eigen::VectorXcd psi = Eigen::VectorXcd::Ones(1);
      std::vector<QubitEnsemble> singles;
      MeasurementSetting m;
      for (int q = 0; q < n; ++q) {
        Eigen::VectorXcd v(2);
        v << Complex(g(rng), g(rng)), Complex(g(rng), g(rng));
        v.normalize();
        singles.push_back(QubitEnsemble::from_pure(v));
        Eigen::VectorXcd next(psi.size() * 2);
        for (Eigen::Index i = 0; i < psi.size(); ++i) next.segment(2 * i, 2) = psi(i) * v;
        psi = next;
        m.bases.push_back(trial % 2 && q == 1 ? QubitBasis::z() : QubitBasis::equatorial(angle(rng)));
      }
      const auto joint = outcome_distribution(QubitEnsemble::from_pure(psi), m);
      std::vector<std::vector<double>> marg;
      for (int q = 0; q < n; ++q) marg.push_back(outcome_distribution(singles[q], MeasurementSetting{{m.bases[q]}}));
      for (std::size_t x = 0; x < joint.size(); ++x) {
        const double prod = marg[0][(x >> 2) & 1] * marg[1][(x >> 1) & 1] * marg[2][x & 1];
        CHECK(std::abs(joint[x] - prod) < 1e-12);
      }
    }
  }
  SUBCASE("length mismatch") {
    CHECK_THROWS_AS(outcome_distribution(ideal_cat(3), MeasurementSetting::all_z(4)), std::invalid_argument);
  }
}

TEST_CASE("Z marginal of the simulated cat is symmetric within each block") {
  circuit::NoiseSpec n;
  n.tau = 0.2;
  const auto e = simulate(circuit::build_cat_setup(circuit::CatVariant::Cat6, n));
  const auto z = outcome_distribution(e, MeasurementSetting::all_z(6));
  // permuting photons acts on both blocks at once; permuting within one block
  // is tested on the ideal state where both blocks are locked together
  const auto ideal = outcome_distribution(ideal_cat(6), MeasurementSetting::all_z(6));
  std::vector<int> perm{2, 0, 1, 4, 5, 3};
  for (std::size_t x = 0; x < ideal.size(); ++x) {
    std::size_t y = 0;
    for (int q = 0; q < 6; ++q)
      if ((x >> (5 - q)) & 1) y |= std::size_t{1} << (5 - perm[q]);
    CHECK(ideal[x] == ideal[y]);
  }
  CHECK(std::abs(sum(z) - 1.0) < 1e-10);
}

TEST_CASE("count sampling") {
  const auto setting = MeasurementSetting::all_z(3);
  std::vector<double> dist{0.4, 0.05, 0.05, 0.0, 0.1, 0.0, 0.1, 0.3};
  SUBCASE("zero duration") {
    const auto r = sample_counts(dist, setting, 200.0, 0.0, 3);
    CHECK(r.total() == 0);
  }
  SUBCASE("mean total at 200/s for 150 s") {
    double mean = 0.0;
    const int seeds = 1000;
    for (int s = 0; s < seeds; ++s) mean += sample_counts(dist, setting, 200.0, 150.0, s).total();
    mean /= seeds;
    CHECK(std::abs(mean - 30000.0) < 3 * std::sqrt(30000.0 / seeds));
  }
  SUBCASE("mean total at 0.021/s for 5400 s") {
    double mean = 0.0;
    const int seeds = 1000;
    for (int s = 0; s < seeds; ++s) mean += sample_counts(dist, setting, 0.021, 5400.0, s).total();
    mean /= seeds;
    CHECK(std::abs(mean - 113.4) < 3 * std::sqrt(113.4 / seeds));
  }
  SUBCASE("frequencies converge at 10^6 counts") {
    double worst = 0.0;
    for (int s = 0; s < 100; ++s) {
      const auto r = sample_counts(dist, setting, 1e6, 1.0, 1000 + s);
      const double total = static_cast<double>(r.total());
      for (std::size_t i = 0; i < dist.size(); ++i) {
        if (dist[i] == 0.0) {
          CHECK(r.counts[i] == 0);
          continue;
        }
        const double sigma = std::sqrt(dist[i] * (1 - dist[i]) / total);
        worst = std::max(worst, std::abs(r.counts[i] / total - dist[i]) / sigma);
      }
    }
    CHECK(worst < 5.0);
  }
  SUBCASE("deterministic per seed") {
    const auto a = sample_counts(dist, setting, 50.0, 10.0, 42);
    const auto b = sample_counts(dist, setting, 50.0, 10.0, 42);
    const auto c = sample_counts(dist, setting, 50.0, 10.0, 43);
    CHECK(a.counts == b.counts);
    CHECK(a.counts != c.counts);
    CHECK(a.seed == 42);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(sample_counts(dist, setting, -1.0, 1.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(sample_counts(dist, setting, 1.0, -1.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(sample_counts({0.5, 0.5}, setting, 1.0, 1.0, 1), std::invalid_argument);
  }
  SUBCASE("exact counts") {
    const auto r = exact_counts(dist, setting);
    CHECK(r.counts[0] == 400000000);
    CHECK(r.counts[3] == 0);
  }
}

TEST_CASE("analyzer interferometer curves") {
  std::vector<double> grid;
  for (int k = 0; k <= 72; ++k) grid.push_back(2 * M_PI * k / 72);
  const auto c = analyzer_scenario_single_photon(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double t = grid[i];
    CHECK(std::abs(c.plus_plus[i] - (1 + std::cos(t)) / 2) < 1e-12);
    CHECK(std::abs(c.plus_minus[i] - (1 - std::cos(t)) / 2) < 1e-12);
    CHECK(std::abs(c.r_plus[i] - (1 - std::sin(t)) / 2) < 1e-12);
    CHECK(std::abs(c.r_minus[i] - (1 + std::sin(t)) / 2) < 1e-12);
  }
  CHECK(c.plus_plus[0] == doctest::Approx(1.0));
  CHECK(c.plus_minus[0] == doctest::Approx(0.0));
  CHECK(c.r_plus[18] == doctest::Approx(0.0));
  CHECK(c.r_minus[18] == doctest::Approx(1.0));
  CHECK(curve_visibility(c.plus_plus) == doctest::Approx(1.0));

  const auto damped = analyzer_scenario_single_photon(grid, 0.99);
  CHECK(curve_visibility(damped.plus_plus) == doctest::Approx(0.99));
  CHECK_THROWS_AS(analyzer_scenario_single_photon(grid, 1.5), std::invalid_argument);
}

TEST_CASE("analyzer visibility dephases spatial qubits") {
  circuit::NoiseSpec n;
  n.analyzer_visibility = 0.9;
  const auto e = simulate(circuit::build_cat_setup(circuit::CatVariant::Cat6, n));
  CHECK(std::abs(scenario::cat_fidelity(e) - (1 + std::pow(0.9, 3)) / 2) < 1e-9);
}

TEST_CASE("settings and bitstrings") {
  CHECK(bitstring(5, 4) == "0101");
  CHECK(parse_bitstring("0101") == 5);
  CHECK_THROWS(parse_bitstring("01a"));
  const auto m = MeasurementSetting::all_equatorial(3, 0.25);
  CHECK(MeasurementSetting::parse(m.to_string()).bases == m.bases);
  CHECK(MeasurementSetting::parse(MeasurementSetting::all_z(2).to_string()).is_all_z());
  CHECK(m.is_uniform_equatorial());
  CHECK_FALSE(MeasurementSetting::all_z(3).is_uniform_equatorial());
}

TEST_CASE("counts CSV") {
  const auto dir = scratch("csv");
  MeasurementSetting m;
  m.bases = {QubitBasis::equatorial(M_PI / 3), QubitBasis::z(), QubitBasis::equatorial(0.1)};
  const auto rec = sample_counts(std::vector<double>(8, 0.125), m, 100.0, 1.0, 5);
  const auto path = dir / "counts.csv";
  write_counts_csv(path, "s01", rec);
  {
    std::ifstream f(path);
    std::string header;
    std::getline(f, header);
    CHECK(header == "setting_id,qubit_bases,outcome_bitstring,count");
  }
  const auto back = read_counts_csv(path);
  CHECK(back.setting_id == "s01");
  CHECK(back.record.counts == rec.counts);
  REQUIRE(back.record.setting.size() == 3);
  for (int q = 0; q < 3; ++q) CHECK(back.record.setting.bases[q] == m.bases[q]);

  auto write = [&](const std::string& body) {
    std::ofstream f(dir / "bad.csv", std::ios::binary);
    f << body;
  };
  write("a,b,c,d\n");
  CHECK_THROWS_AS(read_counts_csv(dir / "bad.csv"), std::runtime_error);
  write("setting_id,qubit_bases,outcome_bitstring,count\n");
  CHECK_THROWS_AS(read_counts_csv(dir / "bad.csv"), std::runtime_error);
  write("setting_id,qubit_bases,outcome_bitstring,count\ns,Z;Z,00,1\ns,Z;Z,000,1\n");
  CHECK_THROWS_AS(read_counts_csv(dir / "bad.csv"), std::runtime_error);
  write("setting_id,qubit_bases,outcome_bitstring,count\ns,Z;Z,00,-1\n");
  CHECK_THROWS_AS(read_counts_csv(dir / "bad.csv"), std::runtime_error);
  write("setting_id,qubit_bases,outcome_bitstring,count\ns,Z;Z,00,1\ns,Z;Z,00,2\n");
  CHECK_THROWS_AS(read_counts_csv(dir / "bad.csv"), std::runtime_error);
  write("setting_id,qubit_bases,outcome_bitstring,count\ns,Z;Q,00,1\n");
  CHECK_THROWS_AS(read_counts_csv(dir / "bad.csv"), std::runtime_error);
  CHECK_THROWS_AS(read_counts_csv(dir / "missing.csv"), std::runtime_error);
  fs::remove_all(dir);
}

TEST_CASE("ensemble helpers") {
  auto e = ideal_cat(2);
  dephase_qubit(e, 0, 0.5);
  CHECK(std::abs(e.rho(0, 3) - 0.25) < 1e-15);
  CHECK_THROWS_AS(dephase_qubit(e, 2, 0.5), std::invalid_argument);
  Eigen::Matrix2cd x;
  x << 0, 1, 1, 0;
  auto f = ideal_cat(2);
  apply_local_unitary(f, 1, x);
  CHECK(std::abs(f.rho(1, 2) - 0.5) < 1e-15);
  CHECK_THROWS_AS(QubitEnsemble::from_density(Eigen::MatrixXcd::Identity(3, 3)), std::invalid_argument);
}
