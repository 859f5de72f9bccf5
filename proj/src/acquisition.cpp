#include "bdsacq/acquisition.hpp"

#include "bdsacq/fft.hpp"
#include "bdsacq/parallel.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <random>
#include <stdexcept>
#include <tuple>

namespace bdsacq {

namespace {

std::vector<int> unique_prns(std::span<const int> prns) {
  std::vector<int> out(prns.begin(), prns.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  if (out.empty()) throw std::invalid_argument("acquisition: empty PRN set");
  return out;
}

double ratio_of(double peak, double second) {
  if (peak == 0.0) return std::numeric_limits<double>::quiet_NaN();
  if (second == 0.0) return std::numeric_limits<double>::infinity();
  return peak / second;
}

AcquisitionResult make_result(int prn, const PeakMetrics& pm, double gamma) {
  AcquisitionResult r;
  r.prn = prn;
  r.code_phase = pm.code_phase;
  r.peak = pm.peak;
  r.second_peak = pm.second_peak;
  r.ratio = pm.ratio;
  r.detected = !std::isnan(pm.ratio) && pm.ratio > gamma;
  return r;
}

int resolve_zone(int zone, double fs) { return zone < 0 ? default_exclusion_zone(fs) : zone; }

std::int64_t circular_distance(std::int64_t a, std::int64_t b, std::int64_t m) {
  const std::int64_t d = std::abs(a - b);
  return std::min(d, m - d);
}

// Search map over (bin, code phase) for a set of PRNs. Only the per-bin peak
// and the per-phase maximum over bins are kept. Each worker folds into its
// own column maxima and merging takes elementwise maxima, so the result does
// not depend on scheduling.
struct SearchMap {
  SearchMap(std::size_t prns, std::size_t n_bins, std::size_t workers, Eigen::Index m)
      : bins(prns, std::vector<BinPeak>(n_bins)),
        column_max(prns, SampleArray::Zero(m)),
        partial(workers, std::vector<SampleArray>(prns, SampleArray::Zero(m))) {}

  void record(std::size_t prn, std::size_t bin, std::size_t worker, const SampleArray& values) {
    const SampleArray mag = values.abs();
    Eigen::Index arg = 0;
    bins[prn][bin].peak = mag.maxCoeff(&arg);
    bins[prn][bin].code_phase = arg;
    partial[worker][prn] = partial[worker][prn].max(mag);
  }

  void merge_workers() {
    for (const auto& per_worker : partial) {
      for (std::size_t i = 0; i < column_max.size(); ++i) column_max[i] = column_max[i].max(per_worker[i]);
    }
    partial.clear();
  }

  std::vector<std::vector<BinPeak>> bins;  // [prn][bin]
  std::vector<SampleArray> column_max;     // [prn], max over bins per phase
  std::vector<std::vector<SampleArray>> partial;
};

// Winning bin (highest peak, lowest index on ties) and the map-wide ratio.
std::pair<std::size_t, PeakMetrics> reduce_map(const std::vector<BinPeak>& bins,
                                               const SampleArray& column_max, int zone) {
  std::size_t best = 0;
  for (std::size_t b = 1; b < bins.size(); ++b) {
    if (bins[b].peak > bins[best].peak) best = b;
  }
  const auto m = static_cast<std::int64_t>(column_max.size());
  if (m <= 2 * static_cast<std::int64_t>(zone)) {
    throw std::invalid_argument("acquisition: code period shorter than twice the exclusion zone");
  }
  PeakMetrics pm;
  pm.peak = bins[best].peak;
  pm.code_phase = bins[best].code_phase;
  for (std::int64_t k = 0; k < m; ++k) {
    if (circular_distance(k, pm.code_phase, m) > zone) {
      pm.second_peak = std::max(pm.second_peak, column_max[k]);
    }
  }
  pm.ratio = ratio_of(pm.peak, pm.second_peak);
  return {best, pm};
}

SearchMap vlda_search(const SampledSignal& signal, const DamReferenceBank& bank,
                      const std::vector<int>& ids, const VldaConfig& config) {
  if (!(config.coherent_length > 0.0)) throw std::invalid_argument("acquire_vlda: T must be positive");
  if (config.grid.bins.empty()) throw std::invalid_argument("acquire_vlda: empty Doppler grid");
  if (std::abs(signal.fs - bank.fs()) > 1e-6 * bank.fs()) {
    throw std::invalid_argument("acquire_vlda: reference bank built for a different sampling rate");
  }
  if (bank.delay_samples() != config.dam.delay_samples) {
    throw std::invalid_argument("acquire_vlda: reference bank built for a different delay");
  }
  config.dam.validate();
  const Eigen::Index m = bank.period_samples();
  const auto periods =
      static_cast<Eigen::Index>(std::llround(config.coherent_length / constants::kB1iCodePeriod));
  const Eigen::Index delay = config.dam.delay_samples;
  if (periods < 1) throw std::invalid_argument("acquire_vlda: T shorter than one code period");
  if (signal.size() < periods * m + delay) {
    throw std::invalid_argument("acquire_vlda: signal shorter than the coherent length T");
  }

  const Eigen::Index used =
      std::min<Eigen::Index>(signal.size(), periods * m + config.margin_samples() + delay);
  const PeriodAccumulator acc(delay_multiply(signal.samples.head(used).eval(), static_cast<int>(delay)), m);

  const std::size_t n_bins = config.grid.size();
  const std::size_t workers = worker_count(n_bins, config.jobs);
  std::vector<RealFft<double>> ffts(workers);
  SearchMap map(ids.size(), n_bins, workers, m);

  parallel_for(n_bins, config.jobs, [&](std::size_t w, std::size_t b) {
    auto& fft = ffts[w];
    const AccumulatedBlock block = acc.accumulate(config.grid.bins[b], config.code_rate, periods);
    ComplexSpectrum spec;
    ComplexSpectrum scratch;
    SampleArray corr;
    fft.forward(as_span(block.samples), spec);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      correlate_spectra(fft, spec, bank.at(ids[i]).spectrum, m, scratch, corr);
      map.record(i, b, w, corr);
    }
  });
  map.merge_workers();
  return map;
}

}  // namespace

int default_exclusion_zone(double fs, double chip_rate) {
  if (!(fs > 0.0) || !(chip_rate > 0.0)) {
    throw std::invalid_argument("default_exclusion_zone: rates must be positive");
  }
  return static_cast<int>(std::ceil(fs / chip_rate - 1e-9));
}

PeakMetrics peak_metrics(std::span<const double> correlation, int exclusion_zone) {
  const auto m = static_cast<std::int64_t>(correlation.size());
  if (exclusion_zone < 0) throw std::invalid_argument("peak_metrics: negative exclusion zone");
  if (m <= 2 * static_cast<std::int64_t>(exclusion_zone)) {
    throw std::invalid_argument("peak_metrics: correlation shorter than twice the exclusion zone");
  }
  PeakMetrics pm;
  for (std::int64_t k = 0; k < m; ++k) {
    const double v = std::abs(correlation[k]);
    if (v > pm.peak) {
      pm.peak = v;
      pm.code_phase = k;
    }
  }
  for (std::int64_t k = 0; k < m; ++k) {
    if (circular_distance(k, pm.code_phase, m) > exclusion_zone) {
      pm.second_peak = std::max(pm.second_peak, std::abs(correlation[k]));
    }
  }
  pm.ratio = ratio_of(pm.peak, pm.second_peak);
  return pm;
}

DamReferenceBank::DamReferenceBank(std::span<const int> prns, int delay_samples, double fs)
    : delay_(delay_samples), fs_(fs) {
  for (int prn : unique_prns(prns)) {
    auto ref = make_dam_reference(gen_ranging_code(prn), delay_samples, fs);
    period_ = ref.samples.size();
    refs_.emplace(prn, std::move(ref));
  }
}

const DamReference& DamReferenceBank::at(int prn) const {
  auto it = refs_.find(prn);
  if (it == refs_.end()) {
    throw std::invalid_argument("DamReferenceBank: PRN " + std::to_string(prn) + " not in bank");
  }
  return it->second;
}

CodeReferenceBank::CodeReferenceBank(std::span<const int> prns, double fs) : fs_(fs) {
  for (int prn : unique_prns(prns)) {
    auto code = make_sampled_code(gen_ranging_code(prn), fs);
    period_ = code.samples.size();
    full_.emplace(prn, bdsacq::full_spectrum(code.spectrum, period_));
    codes_.emplace(prn, std::move(code));
  }
}

const SampledCode& CodeReferenceBank::at(int prn) const {
  auto it = codes_.find(prn);
  if (it == codes_.end()) {
    throw std::invalid_argument("CodeReferenceBank: PRN " + std::to_string(prn) + " not in bank");
  }
  return it->second;
}

const ComplexSpectrum& CodeReferenceBank::full_spectrum(int prn) const {
  at(prn);
  return full_.at(prn);
}

Eigen::Index VldaConfig::margin_samples() const {
  double max_abs = 0.0;
  for (double f : grid.bins) max_abs = std::max(max_abs, std::abs(f));
  const double nominal = std::round(coherent_length / constants::kB1iCodePeriod) *
                         std::round(dam.fs * constants::kB1iCodePeriod);
  return static_cast<Eigen::Index>(std::ceil(nominal * max_abs / code_rate)) + 2;
}

Eigen::Index VldaConfig::required_samples() const {
  const auto periods = static_cast<Eigen::Index>(std::round(coherent_length / constants::kB1iCodePeriod));
  const auto m = static_cast<Eigen::Index>(std::round(dam.fs * constants::kB1iCodePeriod));
  return periods * m + margin_samples() + dam.delay_samples;
}

std::vector<double> NchConfig::carrier_bins() const {
  if (!(carrier_step > 0.0)) throw std::invalid_argument("NchConfig: carrier step must be positive");
  if (carrier_max < carrier_min) throw std::invalid_argument("NchConfig: carrier_max < carrier_min");
  std::vector<double> bins;
  const auto intervals =
      static_cast<std::int64_t>(std::floor((carrier_max - carrier_min) / carrier_step + 1e-9));
  for (std::int64_t k = 0; k <= intervals; ++k) bins.push_back(carrier_min + k * carrier_step);
  return bins;
}

std::vector<AcquisitionResult> acquire_vlda(const SampledSignal& signal, std::span<const int> prns,
                                            const VldaConfig& config) {
  const DamReferenceBank bank(prns, config.dam.delay_samples, signal.fs);
  return acquire_vlda(signal, bank, prns, config);
}

std::vector<AcquisitionResult> acquire_vlda(const SampledSignal& signal, const DamReferenceBank& bank,
                                            std::span<const int> prns, const VldaConfig& config) {
  const auto ids = unique_prns(prns);
  const SearchMap map = vlda_search(signal, bank, ids, config);
  const Eigen::Index m = bank.period_samples();
  const int zone = resolve_zone(config.exclusion_zone, signal.fs);
  std::vector<AcquisitionResult> results;
  results.reserve(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    auto [best, pm] = reduce_map(map.bins[i], map.column_max[i], zone);
    // Lag k in the product domain pairs input samples k + delay and k.
    pm.code_phase = (pm.code_phase + config.dam.delay_samples) % m;
    AcquisitionResult r = make_result(ids[i], pm, config.threshold.gamma);
    r.code_doppler = config.grid.bins[best];
    if (config.estimate_carrier && r.detected && signal.f_if) {
      const auto est = estimate_carrier(signal, r.code_phase, gen_ranging_code(ids[i]),
                                        config.carrier_window, config.carrier_search);
      if (est.reliable) r.carrier_doppler = est.frequency - *signal.f_if;
    }
    results.push_back(r);
  }
  return results;
}

std::vector<BinPeak> vlda_bin_peaks(const SampledSignal& signal, const DamReferenceBank& bank, int prn,
                                    const VldaConfig& config) {
  return vlda_search(signal, bank, {prn}, config).bins.front();
}

std::vector<AcquisitionResult> acquire_nch(const SampledSignal& signal, std::span<const int> prns,
                                           const NchConfig& config) {
  const CodeReferenceBank bank(prns, signal.fs);
  return acquire_nch(signal, bank, prns, config);
}

std::vector<AcquisitionResult> acquire_nch(const SampledSignal& signal, const CodeReferenceBank& bank,
                                           std::span<const int> prns, const NchConfig& config) {
  if (config.n_nch < 1) throw std::invalid_argument("acquire_nch: N_nch must be at least 1");
  if (!signal.f_if) throw std::invalid_argument("acquire_nch: signal has no IF (carrier already removed)");
  if (std::abs(signal.fs - bank.fs()) > 1e-6 * bank.fs()) {
    throw std::invalid_argument("acquire_nch: reference bank built for a different sampling rate");
  }
  const auto ids = unique_prns(prns);
  const Eigen::Index m = bank.period_samples();
  if (signal.size() < config.n_nch * m) {
    throw std::invalid_argument("acquire_nch: signal shorter than N_nch code periods");
  }
  const int zone = resolve_zone(config.exclusion_zone, signal.fs);
  const auto bins = config.carrier_bins();
  const std::size_t workers = worker_count(bins.size(), config.jobs);
  std::vector<ComplexFft<double>> ffts(workers);
  SearchMap map(ids.size(), bins.size(), workers, m);

  parallel_for(bins.size(), config.jobs, [&](std::size_t w, std::size_t b) {
    auto& fft = ffts[w];
    const double step = -constants::kTwoPi * (*signal.f_if + bins[b]) / signal.fs;
    std::vector<SampleArray> power(ids.size(), SampleArray::Zero(m));
    ComplexSpectrum block(m);
    ComplexSpectrum spec;
    ComplexSpectrum prod;
    ComplexSpectrum corr;
    for (int blk = 0; blk < config.n_nch; ++blk) {
      const Eigen::Index base = blk * m;
      for (Eigen::Index n = 0; n < m; ++n) {
        const double phase = std::fmod(step * static_cast<double>(base + n), constants::kTwoPi);
        block[n] = signal.samples[base + n] * std::polar(1.0, phase);
      }
      fft.forward(block, spec);
      for (std::size_t i = 0; i < ids.size(); ++i) {
        prod = spec.array() * bank.full_spectrum(ids[i]).array().conjugate();
        fft.inverse(prod, corr);
        power[i] += corr.array().abs2();
      }
    }
    for (std::size_t i = 0; i < ids.size(); ++i) map.record(i, b, w, power[i]);
  });
  map.merge_workers();

  std::vector<AcquisitionResult> results;
  results.reserve(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto [best, pm] = reduce_map(map.bins[i], map.column_max[i], zone);
    AcquisitionResult r = make_result(ids[i], pm, config.threshold.gamma);
    r.carrier_doppler = bins[best];
    results.push_back(r);
  }
  return results;
}

namespace {

// Squared-segment spectrum of a decimated complex baseband record laid out
// as per_segment x segments. Row k of `twiddle` holds exp(-j w_k n) over one
// segment and `advance[k]` the phase step per segment.
SampleArray squared_segment_power(const Eigen::MatrixXcd& y, const Eigen::MatrixXcd& twiddle,
                                  const Eigen::VectorXcd& advance) {
  const Eigen::MatrixXcd acc = twiddle * y;
  SampleArray power(acc.rows());
  for (Eigen::Index k = 0; k < acc.rows(); ++k) {
    const std::complex<double> step = advance[k] * advance[k];
    std::complex<double> rot{1.0, 0.0};
    std::complex<double> total{0.0, 0.0};
    for (Eigen::Index s = 0; s < acc.cols(); ++s) {
      total += acc(k, s) * acc(k, s) * rot;
      rot *= step;
    }
    power[k] = std::norm(total);
  }
  return power;
}

double peak_to_mean(const SampleArray& power) {
  const double mean = power.mean();
  return mean > 0.0 ? power.maxCoeff() / mean : 0.0;
}

constexpr double kCarrierSignificance = 1e-3;
constexpr int kCarrierCalibrationTrials = 10000;

// Noise-only (1 - significance) quantile of peak_to_mean for a given grid,
// from white complex Gaussian input. Cached per grid shape.
double carrier_threshold(const Eigen::MatrixXcd& twiddle, const Eigen::VectorXcd& advance,
                         Eigen::Index per_segment, Eigen::Index segments, double cycles_per_sample) {
  using Key = std::tuple<Eigen::Index, Eigen::Index, Eigen::Index, double>;
  static std::mutex mutex;
  static std::map<Key, double> cache;
  const Key key{per_segment, segments, twiddle.rows(), cycles_per_sample};
  {
    std::lock_guard<std::mutex> lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> g;
  Eigen::MatrixXcd y(per_segment, segments);
  std::vector<double> stats(kCarrierCalibrationTrials);
  for (auto& v : stats) {
    for (Eigen::Index i = 0; i < y.size(); ++i) y.data()[i] = {g(rng), g(rng)};
    v = peak_to_mean(squared_segment_power(y, twiddle, advance));
  }
  std::sort(stats.begin(), stats.end());
  const auto idx = static_cast<std::size_t>(std::ceil((1.0 - kCarrierSignificance) * stats.size())) - 1;
  const double threshold = stats[idx];
  std::lock_guard<std::mutex> lock(mutex);
  cache.emplace(key, threshold);
  return threshold;
}

}  // namespace

CarrierEstimate estimate_carrier(const SampledSignal& signal, Eigen::Index code_phase,
                                 const RangingCode& code, double window, double search_halfwidth) {
  if (!signal.f_if) throw std::invalid_argument("estimate_carrier: signal has no IF");
  if (!(search_halfwidth > 0.0)) throw std::invalid_argument("estimate_carrier: search band must be positive");
  const SampleArray replica = upsample_code(code, signal.fs);
  const Eigen::Index m = replica.size();
  const auto segments = static_cast<Eigen::Index>(std::floor(window * signal.fs / m + 1e-9));
  if (segments < 1) throw std::invalid_argument("estimate_carrier: window shorter than one code period");
  if (code_phase < 0 || code_phase >= m) throw std::invalid_argument("estimate_carrier: code phase outside [0, M)");
  if (code_phase + segments * m > signal.size()) {
    throw std::invalid_argument("estimate_carrier: signal shorter than code phase + window");
  }

  // Segments start on code epochs, so the data and secondary-code sign is
  // constant inside each one. Squaring the per-segment coherent sums removes
  // that sign; the sum across segments then rotates at twice the offset.
  const double span_s = static_cast<double>(segments * m) / signal.fs;
  const double step = 1.0 / (4.0 * span_s);
  const auto k_bins = static_cast<Eigen::Index>(std::floor(2.0 * search_halfwidth / step)) + 1;
  const double f_if = *signal.f_if;

  // Code wipe-off, mix to baseband at the IF and boxcar-decimate to at least
  // four times the search half width. The decimation factor divides M so
  // segments stay whole.
  Eigen::Index dec = 1;
  for (Eigen::Index d = 1; d <= m; ++d) {
    if (m % d == 0 && signal.fs / static_cast<double>(d) >= 4.0 * search_halfwidth) dec = d;
  }
  const Eigen::Index per_segment = m / dec;
  const double w_if = -constants::kTwoPi * f_if / signal.fs;
  Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(per_segment, segments);
  for (Eigen::Index n = 0; n < segments * m; ++n) {
    const double phase = std::fmod(w_if * static_cast<double>(n), constants::kTwoPi);
    y.data()[n / dec] += signal.samples[code_phase + n] * replica[n % m] * std::polar(1.0, phase);
  }

  const double rate = signal.fs / static_cast<double>(dec);
  Eigen::MatrixXcd twiddle(k_bins, per_segment);
  Eigen::VectorXcd advance(k_bins);
  for (Eigen::Index k = 0; k < k_bins; ++k) {
    const double w = -constants::kTwoPi * (-search_halfwidth + k * step) / rate;
    for (Eigen::Index n = 0; n < per_segment; ++n) twiddle(k, n) = std::polar(1.0, w * n);
    advance[k] = std::polar(1.0, w * per_segment);
  }

  const SampleArray power = squared_segment_power(y, twiddle, advance);
  Eigen::Index arg = 0;
  power.maxCoeff(&arg);
  CarrierEstimate est;
  est.frequency = f_if - search_halfwidth + static_cast<double>(arg) * step;
  est.peak_to_mean = peak_to_mean(power);
  est.reliable =
      est.peak_to_mean > carrier_threshold(twiddle, advance, per_segment, segments, step / rate);
  return est;
}

}  // namespace bdsacq
