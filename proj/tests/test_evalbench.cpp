#include "bdsacq/evalbench.hpp"
#include "bdsacq/report.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

using namespace bdsacq;

namespace {

CampaignConfig small_nch() {
  CampaignConfig c;
  c.method = Method::Nch;
  c.nch.n_nch = 2;
  c.nch.carrier_min = -500.0;
  c.nch.carrier_max = 2000.0;
  c.nch.carrier_step = 500.0;
  return c;
}

CampaignConfig short_vlda(double t) {
  CampaignConfig c;
  c.method = Method::Vlda;
  c.vlda.coherent_length = t;
  c.vlda.grid = doppler_grid(t, -6.0, 6.0);
  return c;
}

// Term-by-term expansion of the operation-count formulas in long double.
long double vlda_mults(long double m, long double nt, long double nf, long double ns) {
  const long double lg = std::log2(m);
  return m * nt + 4 * m * nf * ns + 2 * m * nf * ns * lg;
}
long double vlda_adds(long double m, long double nt, long double nf, long double ns) {
  const long double lg = std::log2(m);
  return m * nf * nt + 2 * m * nf * ns + 3 * m * nf * ns * lg;
}
long double nch_mults(long double m, long double nf, long double nn, long double ns) {
  const long double lg = std::log2(m);
  return 2 * m * nf * nn + 6 * m * nf * nn * ns + 4 * m * nf * nn * ns * lg;
}
long double nch_adds(long double m, long double nf, long double nn, long double ns) {
  const long double lg = std::log2(m);
  return 4 * m * nf * nn * ns + 6 * m * nf * nn * ns * lg;
}

// Smallest k with P(X <= k) >= q for X ~ Binomial(n, p).
int binomial_quantile(int n, double p, double q) {
  double cdf = 0.0;
  for (int k = 0; k <= n; ++k) {
    cdf += std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) +
                    k * std::log(p) + (n - k) * std::log1p(-p));
    if (cdf >= q) return k;
  }
  return n;
}

}  // namespace

TEST_CASE("method names") {
  CHECK(to_string(Method::Vlda) == "vlda");
  CHECK(parse_method("nch") == Method::Nch);
  CHECK(parse_method("VLDA") == Method::Vlda);
  CHECK_THROWS_AS(parse_method("fft"), std::invalid_argument);
}

TEST_CASE("complexity reference counts") {
  const auto v = complexity_vlda(10000, 10000, 240, 63);
  CHECK(v.multiplications == doctest::Approx(4.74e9).epsilon(0.01));
  CHECK(v.additions == doctest::Approx(3.04e10).epsilon(0.01));
  const auto n = complexity_nch(10000, 21, 20, 63);
  CHECK(n.multiplications == doctest::Approx(1.57e10).epsilon(0.01));
  CHECK(n.additions == doctest::Approx(2.21e10).epsilon(0.01));
  CHECK(v.total() == v.multiplications + v.additions);
  // fs = 10 MHz, T = 10 s maps to the same inputs.
  const auto at = vlda_complexity_at(10e6, 10.0);
  CHECK(at.m == 10000);
  CHECK(at.n_t == 10000);
  CHECK(at.n_f == 240);
  CHECK(at.multiplications == v.multiplications);
  CHECK(nch_complexity_at(10e6, 20).additions == n.additions);
}

TEST_CASE("complexity formulas agree with an expanded second evaluation") {
  for (std::int64_t m : {1000, 2046, 10000, 40000}) {
    for (std::int64_t nf : {0, 1, 24, 240}) {
      for (std::int64_t nt : {1, 1000, 50000}) {
        const auto v = complexity_vlda(m, nt, nf, 63);
        CHECK(v.multiplications == doctest::Approx(double(vlda_mults(m, nt, nf, 63))).epsilon(1e-12));
        CHECK(v.additions == doctest::Approx(double(vlda_adds(m, nt, nf, 63))).epsilon(1e-12));
      }
      for (std::int64_t nn : {0, 1, 10, 20}) {
        const auto c = complexity_nch(m, nf, nn, 12);
        CHECK(c.multiplications == doctest::Approx(double(nch_mults(m, nf, nn, 12))).epsilon(1e-12));
        CHECK(c.additions == doctest::Approx(double(nch_adds(m, nf, nn, 12))).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("complexity edge cases") {
  const auto v = complexity_vlda(10000, 777, 0, 63);
  CHECK(v.multiplications == 10000.0 * 777);
  CHECK(v.additions == 0.0);
  CHECK(complexity_nch(10000, 21, 0, 63).total() == 0.0);
  const double one = complexity_nch(10000, 21, 1, 63).total();
  for (int k : {2, 5, 20}) CHECK(complexity_nch(10000, 21, k, 63).total() == doctest::Approx(k * one));
  CHECK_THROWS_AS(complexity_vlda(0, 1, 1, 1), std::invalid_argument);
  CHECK_THROWS_AS(complexity_nch(10, 1, -1, 1), std::invalid_argument);
}

TEST_CASE("complexity ranking at 10 MHz") {
  auto v = [](double t) { return vlda_complexity_at(10e6, t).total(); };
  auto n = [](int k) { return nch_complexity_at(10e6, k).total(); };
  CHECK(v(50) > v(20));
  CHECK(v(20) > v(10));
  // "About equal": within 10%.
  CHECK(std::abs(v(10) - n(20)) / n(20) < 0.10);
  CHECK(v(10) > n(10));
  CHECK(n(20) > n(10));
  CHECK(n(10) > v(5));
  CHECK(v(5) > v(2));
  CHECK(v(2) > v(1));
}

TEST_CASE("complexity sweep table") {
  const std::vector<double> fs = {5e6, 10e6, 20e6};
  const std::vector<double> t = {1.0, 10.0};
  const std::vector<int> nn = {10};
  const auto csv = complexity_sweep_csv(fs, t, nn);
  CHECK(csv.rfind("fs_mhz,method,parameter,M,N_T,N_f,N_nch,multiplications,additions,total\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 3 * 3);
  CHECK(csv.find("10,vlda,10,10000,10000,240,0,") != std::string::npos);
}

TEST_CASE("trial seeds") {
  CHECK(trial_seed(1, 5) == trial_seed(1, 5));
  CHECK(trial_seed(1, 5) != trial_seed(2, 5));
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 10000; ++i) seen.insert(trial_seed(42, i));
  CHECK(seen.size() == 10000);
}

TEST_CASE("trial scenarios") {
  const auto c = short_vlda(0.2);
  const auto a = trial_scenario(c, 99);
  const auto b = trial_scenario(c, 99);
  CHECK(a.code_phase_offset == b.code_phase_offset);
  CHECK(a.noise_seed == b.noise_seed);
  CHECK(a.duration * a.fs == doctest::Approx(double(c.trial_samples())));
  CHECK(c.trial_samples() == c.vlda.required_samples());
  CHECK(small_nch().trial_samples() == 20000);
  std::set<double> phases;
  for (std::uint64_t s = 0; s < 200; ++s) {
    const auto sc = trial_scenario(c, s);
    CHECK(sc.code_phase_offset >= 0.0);
    CHECK(sc.code_phase_offset < 10000.0);
    CHECK(sc.code_phase_offset == std::floor(sc.code_phase_offset));
    phases.insert(sc.code_phase_offset);
  }
  CHECK(phases.size() > 190);
  CHECK(c.parameter() == 0.2);
  CHECK(small_nch().parameter() == 2.0);
}

TEST_CASE("threshold from noise-only ratios") {
  std::vector<double> r;
  for (int i = 2; i <= 101; ++i) r.push_back(i);
  std::shuffle(r.begin(), r.end(), std::mt19937_64(1));
  const auto th = threshold_from_ratios(r, 0.05);
  CHECK(th.gamma == 96.0);
  CHECK(th.target_pfa == 0.05);
  CHECK(false_alarm_rate(r, th) == doctest::Approx(0.05));
  const auto all = threshold_from_ratios(r, 1.0);
  CHECK(all.gamma < 2.0);
  CHECK(false_alarm_rate(r, all) == 1.0);
  CHECK(threshold_from_ratios({1.0, 1.0, 1.0}, 0.5).gamma == 1.0);
  CHECK_THROWS_AS(threshold_from_ratios(r, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(threshold_from_ratios({}, 0.1), std::invalid_argument);
  std::vector<double> with_nan = {NAN, 3.0, 4.0, 5.0};
  CHECK(threshold_from_ratios(with_nan, 0.25).gamma == 4.0);
  CHECK(false_alarm_rate(with_nan, {10.0, 0.1}) == 0.0);
}

TEST_CASE("threshold grows as the target false-alarm rate shrinks") {
  std::mt19937_64 rng(5);
  std::exponential_distribution<double> e(1.0);
  std::vector<double> r(5000);
  for (auto& v : r) v = 1.0 + e(rng);
  double last = 0.0;
  for (double pfa : {0.5, 0.1, 1e-2, 1e-3}) {
    const double g = threshold_from_ratios(r, pfa).gamma;
    CHECK(g >= last);
    last = g;
  }
}

TEST_CASE("calibration needs enough trials") {
  CHECK_THROWS_AS(calibrate_threshold(small_nch(), 1e-2, 999, 1), std::invalid_argument);
  CHECK_THROWS_AS(calibrate_threshold(small_nch(), 0.0, 1000, 1), std::invalid_argument);
}

TEST_CASE("Wilson interval") {
  const auto mid = wilson_interval(50, 100);
  CHECK(mid.low == doctest::Approx(0.4038).epsilon(1e-3));
  CHECK(mid.high == doctest::Approx(0.5962).epsilon(1e-3));
  CHECK(wilson_interval(0, 20).low == 0.0);
  CHECK(wilson_interval(20, 20).high == 1.0);
  const auto none = wilson_interval(0, 0);
  CHECK(none.low == 0.0);
  CHECK(none.high == 1.0);
}

TEST_CASE("noise-free trials are always detected") {
  const DetectionThreshold th{1.5, 1e-2};
  CHECK(detection_probability(small_nch(), INFINITY, 10, th, 3) == 1.0);
  CHECK(detection_probability(short_vlda(0.1), INFINITY, 5, th, 3) == 1.0);
}

TEST_CASE("campaigns are reproducible and independent of the thread count") {
  auto c = small_nch();
  const DetectionThreshold th{1.3, 1e-2};
  const std::vector<double> grid = {30.0, 34.0, 38.0};
  c.jobs = 1;
  const auto a = monte_carlo(c, grid, 30, th, 11);
  c.jobs = 4;
  const auto b = monte_carlo(c, grid, 30, th, 11);
  CHECK(monte_carlo_json(a) == monte_carlo_json(b));
  CHECK(monte_carlo_csv(a) == monte_carlo_csv(b));
  CHECK(a.pd == b.pd);
  const auto r1 = noise_only_ratios(c, 40, 8);
  c.jobs = 1;
  CHECK(noise_only_ratios(c, 40, 8) == r1);
  CHECK(noise_only_ratios(c, 40, 9) != r1);
}

TEST_CASE("detection probability does not fall with C/N0") {
  const auto c = small_nch();
  const DetectionThreshold th{1.3, 1e-2};
  const std::vector<double> grid = {28.0, 31.0, 34.0, 37.0, 40.0, 43.0};
  const int trials = 60;
  const auto rep = monte_carlo(c, grid, trials, th, 21);
  REQUIRE(rep.pd.size() == grid.size());
  for (std::size_t i = 1; i < grid.size(); ++i) {
    CHECK(rep.pd[i] >= rep.ci[i - 1].low);
    CHECK(rep.ci[i].high >= rep.pd[i - 1]);
  }
  CHECK(rep.pd.front() < 0.5);
  CHECK(rep.pd.back() >= 0.9);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(rep.ci[i].low <= rep.pd[i]);
    CHECK(rep.pd[i] <= rep.ci[i].high);
  }
}

TEST_CASE("longer coherent length does not lower Pd") {
  const DetectionThreshold th{1.25, 1e-2};
  const int trials = 40;
  const double cn0 = 42.0;
  const auto t1 = run_trials(short_vlda(0.2), cn0, trials, th, 31);
  const auto t2 = run_trials(short_vlda(0.4), cn0, trials, th, 31);
  auto hits = [](const std::vector<TrialOutcome>& o) {
    return static_cast<int>(std::count_if(o.begin(), o.end(), [](const auto& x) { return x.detected && x.phase_ok; }));
  };
  const int h1 = hits(t1), h2 = hits(t2);
  CAPTURE(h1);
  CAPTURE(h2);
  CHECK(wilson_interval(h2, trials).high >= double(h1) / trials);
  CHECK(h2 >= h1);
}

TEST_CASE("calibrated threshold holds the false-alarm rate on held-out trials") {
  // One carrier bin and one period keep trials cheap, so the calibration can
  // use enough trials that its own spread stays well inside the held-out interval.
  auto c = small_nch();
  c.nch.n_nch = 1;
  c.nch.carrier_min = c.nch.carrier_max = 1500.0;
  const auto th = calibrate_threshold(c, 1e-2, 8000, 1);
  CHECK(th.gamma > 1.0);
  const auto held_out = noise_only_ratios(c, 1000, 2);
  const double fa = false_alarm_rate(held_out, th);
  CAPTURE(fa);
  CHECK(fa * 1000 >= binomial_quantile(1000, 1e-2, 0.025));
  CHECK(fa * 1000 <= binomial_quantile(1000, 1e-2, 0.975));
}

TEST_CASE("sensitivity search") {
  const auto c = small_nch();
  const DetectionThreshold th{1.3, 1e-2};
  const auto res = sensitivity_search(c, th, 40, 5, 28.0, 48.0, 0.9, 0.5);
  CHECK(res.cn0_at_pd90 - res.bracket_low == doctest::Approx(0.5));
  CHECK(res.method == Method::Nch);
  CHECK(res.parameter == 2.0);
  bool seen_hi = false, seen_lo = false;
  for (const auto& [cn0, pd] : res.evaluated) {
    if (cn0 == res.cn0_at_pd90) {
      seen_hi = true;
      CHECK(pd >= 0.9);
    }
    if (cn0 == res.bracket_low) {
      seen_lo = true;
      CHECK(pd < 0.9);
    }
    CHECK(pd == detection_probability(c, cn0, 40, th, 5));
  }
  CHECK(seen_hi);
  CHECK(seen_lo);
  CHECK(sensitivity_json(res).find("\"cn0_at_pd_target\"") != std::string::npos);
  CHECK_THROWS_AS(sensitivity_search(c, th, 20, 5, 20.0, 22.0), InfeasibleError);
  CHECK_THROWS_AS(sensitivity_search(c, th, 20, 5, 22.0, 20.0), std::invalid_argument);
}
