#include "bdsacq/codegen.hpp"
#include "bdsacq/dam.hpp"
#include "bdsacq/fft.hpp"
#include "bdsacq/sigsynth.hpp"
#include "bdsacq/vlda.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace bdsacq;

namespace {

SampledSignal integer_noise(Eigen::Index n, std::uint64_t seed) {
  // Small integers keep every partial sum exact, so two summation orders agree bit for bit.
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> d(-3, 3);
  SampledSignal s;
  s.fs = 10e6;
  s.samples.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) s.samples[i] = d(rng);
  return s;
}

// Per-sample reference: walk the input, duplicating or skipping at each
// adjustment position, and fold the stream into one period.
SampleArray fold_reference(const SampleArray& x, double candidate, double rate, Eigen::Index m,
                           std::int64_t max_blocks) {
  std::vector<double> stream;
  const double per = rate / std::abs(candidate);
  std::int64_t k = 1;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    bool hit = false;
    if (candidate != 0.0 && static_cast<std::int64_t>(std::floor(k * per)) == i) {
      hit = true;
      ++k;
    }
    if (hit && candidate < 0.0) continue;
    stream.push_back(x[i]);
    if (hit) stream.push_back(x[i]);
  }
  std::int64_t blocks = static_cast<std::int64_t>(stream.size()) / m;
  if (max_blocks >= 0) blocks = std::min(blocks, max_blocks);
  SampleArray out = SampleArray::Zero(m);
  for (std::int64_t j = 0; j < blocks * m; ++j) out[j % m] += stream[j];
  return out;
}

}  // namespace

TEST_CASE("adjustment period") {
  CHECK(n_per(2.046e6, 2.2) == doctest::Approx(930000.0));
  CHECK(n_per(2.046e6, -2.2) == n_per(2.046e6, 2.2));
  CHECK(std::isinf(n_per(2.046e6, 0.0)));
  CHECK_THROWS_AS(n_per(0.0, 1.0), std::invalid_argument);
}

TEST_CASE("adjustment positions") {
  const auto e = adjustment_positions(2.2, 2.046e6, 100'000'000);
  CHECK(e.size() == 107);
  for (std::size_t k = 0; k < e.size(); ++k) {
    CHECK(e[k] == static_cast<std::int64_t>(std::floor((k + 1) * (2.046e6 / 2.2))));
  }
  CHECK(adjustment_positions(0.0, 2.046e6, 1000).empty());
  CHECK(adjustment_positions(1e-15, 2.046e6, 1000).empty());
  CHECK(adjustment_positions(-1e-300, 2.046e6, 1000).empty());
}

TEST_CASE("adjustment count matches the period drift") {
  for (double t : {0.5, 1.0, 2.0, 10.0}) {
    for (double df : {-6.0, -2.2, 0.7, 2.2, 5.89}) {
      const auto n = static_cast<Eigen::Index>(t * 10e6);
      const auto count = static_cast<double>(adjustment_positions(df, 2.046e6, n).size());
      CHECK(std::abs(count - std::abs(period_drift_samples(t, 10e6, df))) <= 1.0);
    }
  }
}

TEST_CASE("compensation at 2.2 Hz over 10 s") {
  // 10^8 samples are too many to materialize here; the positions carry the count.
  const auto e = adjustment_positions(2.2, constants::kB1iChipRate, 100'000'000);
  CHECK(std::abs(static_cast<double>(e.size()) - 107.0) <= 1.0);
}

TEST_CASE("zero candidate folds copies") {
  SampledSignal s;
  s.fs = 1.0;
  SampleArray period = SampleArray::LinSpaced(8, 1.0, 8.0);
  s.samples.resize(8 * 5 + 3);
  for (int k = 0; k < 5; ++k) s.samples.segment(8 * k, 8) = period;
  s.samples.tail(3).setConstant(100.0);
  const auto acc = compensate_and_accumulate(s, 0.0, 2.046e6, 8);
  CHECK(acc.n_blocks == 5);
  CHECK(acc.adjustments_applied == 0);
  CHECK(((acc.samples - 5.0 * period).abs() < 1e-12).all());
  CHECK(compensate_and_accumulate(s, 0.0, 2.046e6, 8, 2).n_blocks == 2);
  CHECK_THROWS_AS(compensate_and_accumulate(s, 0.0, 2.046e6, 100), std::invalid_argument);
}

TEST_CASE("insertions and deletions") {
  SampledSignal s;
  s.fs = 1.0;
  s.samples = SampleArray::LinSpaced(20, 0.0, 19.0);
  // rate / |df| = 6: adjustments at 6, 12, 18.
  const auto ins = compensate_and_accumulate(s, 1.0, 6.0, 9);
  CHECK(ins.adjustments_applied == 3);
  // 23 compensated samples, two whole periods of 9.
  CHECK(ins.n_blocks == 2);
  const double stream[23] = {0, 1, 2, 3, 4, 5, 6, 6, 7, 8, 9, 10, 11, 12,
                             12, 13, 14, 15, 16, 17, 18, 18, 19};
  for (int i = 0; i < 9; ++i) CHECK(ins.samples[i] == stream[i] + stream[i + 9]);
  const auto del = compensate_and_accumulate(s, -1.0, 6.0, 17);
  CHECK(del.adjustments_applied == -3);
  const double expected_del[17] = {0, 1, 2, 3, 4, 5, 7, 8, 9, 10, 11, 13, 14, 15, 16, 17, 19};
  for (int i = 0; i < 17; ++i) CHECK(del.samples[i] == expected_del[i]);
}

TEST_CASE("compensation agrees with the per-sample reference") {
  const auto s = integer_noise(200'003, 11);
  const Eigen::Index m = 1000;
  for (double df : {0.0, 3.0, -3.0, 40.0, -40.0, 2000.0, -2000.0}) {
    for (std::int64_t cap : {std::int64_t{-1}, std::int64_t{150}}) {
      const auto ref = fold_reference(s.samples, df, 2.046e6, m, cap);
      const auto acc = compensate_and_accumulate(s, df, 2.046e6, m, cap);
      CAPTURE(df);
      CHECK((acc.samples == ref).all());
    }
  }
}

TEST_CASE("period accumulator equals direct compensation") {
  const auto s = integer_noise(500'017, 12);
  const Eigen::Index m = 997;
  const PeriodAccumulator acc(s.samples, m);
  CHECK(acc.length() == s.size());
  CHECK(acc.period_samples() == m);
  for (double df : {0.0, 0.5, -0.5, 6.0, -6.0, 123.0, -123.0, 9000.0, -9000.0}) {
    for (std::int64_t cap : {std::int64_t{-1}, std::int64_t{0}, std::int64_t{100}, std::int64_t{501}}) {
      const auto a = acc.accumulate(df, 2.046e6, cap);
      const auto b = compensate_and_accumulate(s, df, 2.046e6, m, cap);
      CAPTURE(df);
      CAPTURE(cap);
      CHECK(a.n_blocks == b.n_blocks);
      CHECK(a.adjustments_applied == b.adjustments_applied);
      CHECK((a.samples == b.samples).all());
    }
  }
  CHECK_THROWS_AS(PeriodAccumulator(SampleArray::Zero(10), 11), std::invalid_argument);
}

TEST_CASE("accumulation is linear") {
  const auto a = integer_noise(100'000, 1);
  const auto b = integer_noise(100'000, 2);
  SampledSignal sum = a;
  sum.samples = a.samples + 2.0 * b.samples;
  for (double df : {0.0, 50.0, -50.0}) {
    const auto ra = compensate_and_accumulate(a, df, 2.046e6, 1000);
    const auto rb = compensate_and_accumulate(b, df, 2.046e6, 1000);
    const auto rs = compensate_and_accumulate(sum, df, 2.046e6, 1000);
    CHECK(((rs.samples - (ra.samples + 2.0 * rb.samples)).abs() < 1e-9).all());
  }
}

TEST_CASE("Doppler grid") {
  const auto g10 = doppler_grid(10.0, -6.0, 6.0);
  CHECK(g10.step == doctest::Approx(0.05));
  CHECK(g10.size() == 241);
  CHECK(g10.bins.front() == -6.0);
  CHECK(g10.bins.back() == doctest::Approx(6.0));
  const auto g1 = doppler_grid(1.0, -6.0, 6.0);
  CHECK(g1.size() == 25);
  CHECK(g1.bins[12] == doctest::Approx(0.0));
  const auto g0 = doppler_grid(2.0, 0.0, 0.0);
  REQUIRE(g0.size() == 1);
  CHECK(g0.bins[0] == 0.0);
  CHECK_THROWS_AS(doppler_grid(0.0, -1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(doppler_grid(1.0, 1.0, -1.0), std::invalid_argument);
}

TEST_CASE("matched candidate beats the uncompensated fold") {
  ScenarioConfig sc;
  sc.duration = 1.01;
  const auto dam = delay_multiply(synth_if_signal(sc), 10);
  const auto ref = make_dam_reference(gen_ranging_code(sc.prn), 10, sc.fs);
  const PeriodAccumulator acc(dam.samples, 10000);
  auto peak = [&](double df) {
    const auto block = acc.accumulate(df, 2.046e6, 1000);
    return circular_correlate<double>(as_span(block.samples), ref.spectrum).abs().maxCoeff();
  };
  CHECK(peak(2.2) > peak(0.0));
  CHECK(peak(2.2) > peak(4.4));
}

TEST_CASE("post-accumulation SNR grows with the number of periods") {
  ScenarioConfig sc;
  sc.duration = 1.0001;
  sc.code_doppler = 0.0;
  sc.code_phase_offset = 0.0;
  sc.cn0 = 48.0;
  sc.noise_seed = 77;
  const auto noisy = add_awgn(synth_if_signal(sc), sc.cn0, sc.noise_seed);
  const auto dam = delay_multiply(noisy, 10);
  const auto ref = make_dam_reference(gen_ranging_code(sc.prn), 10, sc.fs);
  const Eigen::Index m = 10000;
  const Eigen::Index lag = m - 10;  // true phase in the product domain
  RealFft<double> fft;

  // Signal from the noise-free product; noise as the difference between the
  // noisy and noise-free products, which the linear back end carries separately.
  const auto clean = delay_multiply(synth_if_signal(sc), 10);
  SampledSignal residual = dam;
  residual.samples -= clean.samples;

  auto snr = [&](int n_t) {
    const int segments = 1000 / n_t;
    double value = 0.0, noise2 = 0.0;
    SampleArray r;
    auto fold = [&](const SampledSignal& x, int s) {
      SampledSignal seg;
      seg.fs = x.fs;
      seg.samples = x.samples.segment(static_cast<Eigen::Index>(s) * n_t * m, n_t * m);
      return compensate_and_accumulate(seg, 0.0, 2.046e6, m).samples;
    };
    for (int s = 0; s < segments; ++s) {
      circular_correlate(fft, as_span(fold(clean, s)), ref.spectrum, r);
      value += std::abs(r[lag]) / segments;
      circular_correlate(fft, as_span(fold(residual, s)), ref.spectrum, r);
      noise2 += r.square().mean() / segments;
    }
    return value / std::sqrt(noise2);
  };
  const double base = snr(1);
  for (int n_t : {10, 100, 1000}) {
    const double gain_db = 20.0 * std::log10(snr(n_t) / base);
    CAPTURE(n_t);
    CAPTURE(gain_db);
    CHECK(std::abs(gain_db - 10.0 * std::log10(n_t)) <= 1.0);
  }
}
