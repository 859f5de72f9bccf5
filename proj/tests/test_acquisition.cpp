#include "bdsacq/acquisition.hpp"
#include "bdsacq/fft.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace bdsacq;

namespace {

VldaConfig short_vlda(double t = 0.1) {
  VldaConfig c;
  c.coherent_length = t;
  c.grid = doppler_grid(t, -5.0, 5.0);
  c.threshold.gamma = 1.5;
  return c;
}

ScenarioConfig scenario_for(const VldaConfig& c) {
  ScenarioConfig s;
  s.duration = (c.required_samples() + 1) / s.fs;
  return s;
}

Eigen::Index circular_distance(Eigen::Index a, Eigen::Index b, Eigen::Index m) {
  const Eigen::Index d = std::abs(a - b) % m;
  return std::min(d, m - d);
}

}  // namespace

TEST_CASE("FFT correlation equals direct correlation") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (int m : {4, 8, 16, 1000}) {
    SampleArray a(m), b(m);
    for (int i = 0; i < m; ++i) {
      a[i] = g(rng);
      b[i] = g(rng);
    }
    RealFft<double> fft;
    const auto r = circular_correlate<double>(as_span(a), fft.forward(as_span(b)));
    const auto direct = oracle::circular_xcorr(oracle::to_vector(a), oracle::to_vector(b));
    double scale = 0.0;
    for (double v : direct) scale = std::max(scale, std::abs(v));
    for (int k = 0; k < m; ++k) REQUIRE(std::abs(r[k] - direct[k]) <= 1e-9 * scale);

    // The full complex inverse of a real-pair product is real to rounding.
    ComplexFft<double> cfft;
    ComplexSpectrum x = full_spectrum(fft.forward(as_span(a)), m);
    const ComplexSpectrum y = full_spectrum(fft.forward(as_span(b)), m);
    x.array() *= y.array().conjugate();
    ComplexSpectrum t;
    cfft.inverse(x, t);
    CHECK(t.imag().cwiseAbs().maxCoeff() < 1e-6 * scale);
  }
  RealFft<double> fft;
  SampleArray a = SampleArray::Ones(8);
  CHECK_THROWS_AS(circular_correlate<double>(as_span(a), fft.forward(as_span(SampleArray(SampleArray::Ones(16))))),
                  std::invalid_argument);
}

TEST_CASE("correlation index is the code phase") {
  const auto code = upsample_code(gen_ranging_code(4), 10e6);
  RealFft<double> fft;
  const auto spec = fft.forward(as_span(code));
  for (Eigen::Index shift : {0, 1, 4321, 9999}) {
    SampleArray block(code.size());
    for (Eigen::Index n = 0; n < code.size(); ++n) block[n] = code[(n - shift + code.size()) % code.size()];
    const auto r = circular_correlate<double>(as_span(block), spec);
    Eigen::Index arg = 0;
    r.maxCoeff(&arg);
    CHECK(arg == shift);
    CHECK(r[arg] == doctest::Approx(10000.0));
  }
}

TEST_CASE("peak metrics") {
  std::vector<double> c(1000, 0.0);
  c[3] = 10.0;
  c[100] = -2.0;
  c[6] = 9.0;  // inside the zone
  auto pm = peak_metrics(c, 5);
  CHECK(pm.peak == 10.0);
  CHECK(pm.second_peak == 2.0);
  CHECK(pm.ratio == 5.0);
  CHECK(pm.code_phase == 3);
  c[998] = 3.0;  // circularly 5 samples away: outside +/-4? no, distance 5 > zone? equal
  pm = peak_metrics(c, 5);
  CHECK(pm.second_peak == 2.0);
  c[997] = 4.0;  // distance 6
  CHECK(peak_metrics(c, 5).second_peak == 4.0);

  const std::vector<double> flat(64, 3.0);
  CHECK(peak_metrics(flat, 5).ratio == 1.0);
  const std::vector<double> zero(64, 0.0);
  CHECK(std::isnan(peak_metrics(zero, 5).ratio));
  std::vector<double> spike(64, 0.0);
  spike[10] = 1.0;
  CHECK(std::isinf(peak_metrics(spike, 5).ratio));
  CHECK_THROWS_AS(peak_metrics(std::vector<double>(10, 1.0), 5), std::invalid_argument);
  CHECK_THROWS_AS(peak_metrics(flat, -1), std::invalid_argument);
  CHECK(default_exclusion_zone(10e6) == 5);
  CHECK(default_exclusion_zone(2.046e6) == 1);
}

TEST_CASE("sample budget") {
  VldaConfig c;
  c.coherent_length = 1.0;
  c.grid = doppler_grid(1.0, -6.0, 6.0);
  // ceil(1000 * 10000 * 6 / 2.046e6) + 2 = 32.
  CHECK(c.margin_samples() == 32);
  CHECK(c.required_samples() == 10'000'000 + 32 + 10);
}

TEST_CASE("VLDA: noise-free reference scenario") {
  VldaConfig c;
  c.grid = doppler_grid(1.0, -6.0, 6.0);
  c.threshold.gamma = 1.5;
  c.estimate_carrier = true;
  auto sc = scenario_for(c);
  sc.code_phase_offset = 3210.0;
  const auto sig = synth_if_signal(sc);
  const std::vector<int> prns = {1};
  const auto res = acquire_vlda(sig, prns, c);
  REQUIRE(res.size() == 1);
  CHECK(res[0].detected);
  CHECK(circular_distance(res[0].code_phase, 3210, 10000) <= 1);
  REQUIRE(res[0].code_doppler.has_value());
  CHECK(std::abs(*res[0].code_doppler - 2.2) <= 0.5);
  REQUIRE(res[0].carrier_doppler.has_value());
  CHECK(std::abs(*res[0].carrier_doppler - 1678.6) <= 100.0);
  CHECK(res[0].ratio == doctest::Approx(res[0].peak / res[0].second_peak));

  // Per-bin peaks rise towards the true code Doppler.
  const DamReferenceBank bank(prns, 10, sc.fs);
  const auto peaks = vlda_bin_peaks(sig, bank, 1, c);
  REQUIRE(peaks.size() == c.grid.size());
  std::size_t best = 0;
  for (std::size_t i = 0; i < peaks.size(); ++i) {
    if (peaks[i].peak > peaks[best].peak) best = i;
  }
  CHECK(std::abs(c.grid.bins[best] - 2.2) <= c.grid.step);
  CHECK(peaks[best].peak > peaks[0].peak);
}

TEST_CASE("VLDA: code phase from random offsets") {
  const auto c = short_vlda();
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> phase(0, 9999);
  const std::vector<int> prns = {9};
  const DamReferenceBank bank(prns, 10, 10e6);
  int ok = 0;
  for (int i = 0; i < 100; ++i) {
    auto sc = scenario_for(c);
    sc.prn = 9;
    sc.code_phase_offset = phase(rng);
    sc.nav_seed = i + 1;
    const auto res = acquire_vlda(synth_if_signal(sc), bank, prns, c);
    ok += res[0].detected &&
          circular_distance(res[0].code_phase, static_cast<Eigen::Index>(sc.code_phase_offset), 10000) <= 1;
  }
  CHECK(ok == 100);
}

TEST_CASE("VLDA: result does not depend on the input scale") {
  auto c = short_vlda();
  auto sc = scenario_for(c);
  sc.cn0 = 50.0;
  const auto sig = add_awgn(synth_if_signal(sc), sc.cn0, 9);
  SampledSignal scaled = sig;
  scaled.samples *= 3.7;
  const std::vector<int> prns = {1, 2};
  const auto a = acquire_vlda(sig, prns, c);
  const auto b = acquire_vlda(scaled, prns, c);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].detected == b[i].detected);
    CHECK(a[i].code_phase == b[i].code_phase);
    CHECK(b[i].ratio == doctest::Approx(a[i].ratio).epsilon(1e-9));
  }
}

TEST_CASE("VLDA: absent PRNs stay below the threshold") {
  auto c = short_vlda(0.2);
  c.grid = doppler_grid(0.2, -6.0, 6.0);
  const auto sig = synth_if_signal(scenario_for(c));
  const std::vector<int> prns = {2, 3, 4, 5, 6, 30, 63};
  for (const auto& r : acquire_vlda(sig, prns, c)) {
    CAPTURE(r.prn);
    CAPTURE(r.ratio);
    CHECK_FALSE(r.detected);
  }
}

TEST_CASE("VLDA: thread count does not change the answer") {
  auto c = short_vlda(0.2);
  c.grid = doppler_grid(0.2, -6.0, 6.0);
  auto sc = scenario_for(c);
  sc.cn0 = 47.0;
  const auto sig = add_awgn(synth_if_signal(sc), sc.cn0, 21);
  const std::vector<int> prns = {1, 2, 3};
  c.jobs = 1;
  const auto a = acquire_vlda(sig, prns, c);
  c.jobs = 4;
  const auto b = acquire_vlda(sig, prns, c);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].detected == b[i].detected);
    CHECK(a[i].code_phase == b[i].code_phase);
    CHECK(a[i].code_doppler == b[i].code_doppler);
    CHECK(a[i].peak == b[i].peak);
    CHECK(a[i].second_peak == b[i].second_peak);
  }
}

TEST_CASE("VLDA: argument checks") {
  auto c = short_vlda();
  const auto sig = synth_if_signal(scenario_for(c));
  const std::vector<int> prns = {1};
  const std::vector<int> none;
  CHECK_THROWS_AS(acquire_vlda(sig, none, c), std::invalid_argument);
  SampledSignal cut = sig;
  cut.samples = sig.samples.head(sig.size() / 2);
  CHECK_THROWS_AS(acquire_vlda(cut, prns, c), std::invalid_argument);
  const DamReferenceBank other(prns, 20, 10e6);
  CHECK_THROWS_AS(acquire_vlda(sig, other, prns, c), std::invalid_argument);
  CHECK_THROWS_AS(other.at(2), std::invalid_argument);
}

TEST_CASE("NCH: noise-free detection") {
  NchConfig c;
  c.threshold.gamma = 1.5;
  ScenarioConfig sc;
  sc.duration = 0.0101;
  sc.code_phase_offset = 777.0;
  const auto sig = synth_if_signal(sc);
  const std::vector<int> prns = {1, 2};
  const auto res = acquire_nch(sig, prns, c);
  CHECK(res[0].detected);
  CHECK(circular_distance(res[0].code_phase, 777, 10000) <= 1);
  REQUIRE(res[0].carrier_doppler.has_value());
  CHECK(*res[0].carrier_doppler == doctest::Approx(1500.0));
  CHECK_FALSE(res[0].code_doppler.has_value());
  CHECK_FALSE(res[1].detected);

  CHECK(c.carrier_bins().size() == 21);
  c.jobs = 3;
  const auto again = acquire_nch(sig, prns, c);
  CHECK(again[0].peak == res[0].peak);
  CHECK(again[1].second_peak == res[1].second_peak);

  SampledSignal baseband = sig;
  baseband.f_if.reset();
  CHECK_THROWS_AS(acquire_nch(baseband, prns, c), std::invalid_argument);
  c.n_nch = 20;
  CHECK_THROWS_AS(acquire_nch(sig, prns, c), std::invalid_argument);
}

TEST_CASE("carrier estimation") {
  ScenarioConfig sc;
  sc.duration = 0.03;
  sc.code_phase_offset = 500.0;
  sc.carrier_doppler = -3210.0;
  const auto code = gen_ranging_code(sc.prn);
  const auto clean = synth_if_signal(sc);
  const auto est = estimate_carrier(clean, 500, code, 0.01);
  CHECK(est.reliable);
  CHECK(std::abs(est.frequency - (sc.f_if + sc.carrier_doppler)) <= 100.0);

  const auto noisy = add_awgn(clean, 45.0, 4);
  const auto est2 = estimate_carrier(noisy, 500, code, 0.02);
  CHECK(est2.reliable);
  CHECK(std::abs(est2.frequency - (sc.f_if + sc.carrier_doppler)) <= 50.0);

  SampledSignal zero = clean;
  zero.samples.setZero();
  int unreliable = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    unreliable += !estimate_carrier(add_awgn(zero, 45.0, seed), 500, code, 0.01).reliable;
  }
  CHECK(unreliable >= 19);

  CHECK_THROWS_AS(estimate_carrier(clean, 500, code, 0.0005), std::invalid_argument);
  CHECK_THROWS_AS(estimate_carrier(clean, 10000, code, 0.01), std::invalid_argument);
  CHECK_THROWS_AS(estimate_carrier(clean, 0, code, 0.05), std::invalid_argument);
}
