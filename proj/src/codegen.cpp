#include "bdsacq/codegen.hpp"

#include "bdsacq/fft.hpp"

#include <array>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace bdsacq {

namespace {

// G2 output stage selections (1-based stages) per PRN from the B1I signal ICD.
// PRN 1..37 use two taps, 38..63 three taps.
constexpr std::array<std::array<int, 3>, constants::kMaxPrn> kG2Taps = {{
    {1, 3, 0},  {1, 4, 0},  {1, 5, 0},  {1, 6, 0},  {1, 8, 0},  {1, 9, 0},  {1, 10, 0},
    {1, 11, 0}, {2, 7, 0},  {3, 4, 0},  {3, 5, 0},  {3, 6, 0},  {3, 8, 0},  {3, 9, 0},
    {3, 10, 0}, {3, 11, 0}, {4, 5, 0},  {4, 6, 0},  {4, 8, 0},  {4, 9, 0},  {4, 10, 0},
    {4, 11, 0}, {5, 6, 0},  {5, 8, 0},  {5, 9, 0},  {5, 10, 0}, {5, 11, 0}, {6, 8, 0},
    {6, 9, 0},  {6, 10, 0}, {6, 11, 0}, {8, 9, 0},  {8, 10, 0}, {8, 11, 0}, {9, 10, 0},
    {9, 11, 0}, {10, 11, 0}, {1, 2, 7}, {1, 3, 4},  {1, 3, 6},  {1, 3, 8},  {1, 3, 10},
    {1, 3, 11}, {1, 4, 5},  {1, 4, 9},  {1, 5, 6},  {1, 5, 8},  {1, 5, 10}, {1, 5, 11},
    {1, 6, 9},  {1, 7, 8},  {1, 7, 9},  {1, 7, 11}, {1, 8, 10}, {1, 8, 11}, {1, 9, 10},
    {1, 9, 11}, {2, 3, 7},  {2, 3, 9},  {2, 5, 6},  {2, 5, 8},  {2, 5, 11}, {2, 6, 9},
}};

// B1I NH code, 0 -> +1, 1 -> -1.
constexpr std::array<int, constants::kNhLength> kNhBits = {0, 0, 0, 0, 0, 1, 0, 0, 1, 1,
                                                           0, 1, 0, 1, 0, 0, 1, 1, 1, 0};

using Register = std::array<int, 11>;

Register initial_register() {
  Register r{};
  for (int i = 0; i < 11; ++i) r[i] = i % 2;  // 01010101010
  return r;
}

void shift(Register& r, int feedback) {
  for (int i = 10; i > 0; --i) r[i] = r[i - 1];
  r[0] = feedback;
}

SampleArray gold_chips(int prn, int count) {
  if (prn < 1 || prn > constants::kMaxPrn) {
    throw std::invalid_argument("unknown B1I PRN " + std::to_string(prn));
  }
  const auto& taps = kG2Taps[prn - 1];
  Register g1 = initial_register();
  Register g2 = initial_register();
  SampleArray chips(count);
  for (int n = 0; n < count; ++n) {
    int g2_out = 0;
    for (int t : taps) {
      if (t > 0) g2_out ^= g2[t - 1];
    }
    const int bit = g1[10] ^ g2_out;
    chips[n] = bit ? -1.0 : 1.0;
    // G1(X) = 1 + X + X^7 + X^8 + X^9 + X^10 + X^11
    const int fb1 = g1[0] ^ g1[6] ^ g1[7] ^ g1[8] ^ g1[9] ^ g1[10];
    // G2(X) = 1 + X + X^2 + X^3 + X^4 + X^5 + X^8 + X^9 + X^11
    const int fb2 = g2[0] ^ g2[1] ^ g2[2] ^ g2[3] ^ g2[4] ^ g2[7] ^ g2[8] ^ g2[10];
    shift(g1, fb1);
    shift(g2, fb2);
  }
  return chips;
}

SampleArray delay_product(const SampleArray& x, int delay) {
  const auto m = x.size();
  SampleArray out(m);
  for (Eigen::Index n = 0; n < m; ++n) {
    Eigen::Index k = (n - delay) % m;
    if (k < 0) k += m;
    out[n] = x[n] * x[k];
  }
  return out;
}

double max_abs_rounded(const SampleArray& r, int exclusion) {
  const auto m = r.size();
  double best = 0.0;
  for (Eigen::Index k = 0; k < m; ++k) {
    const Eigen::Index dist = std::min<Eigen::Index>(k, m - k);
    if (dist < exclusion) continue;
    best = std::max(best, std::abs(std::nearbyint(r[k])));
  }
  return best;
}

double ratio_or_inf(double peak, double side) {
  return side > 0.0 ? peak / side : std::numeric_limits<double>::infinity();
}

}  // namespace

RangingCode gen_ranging_code(int prn) {
  RangingCode code;
  code.prn = prn;
  code.chips = gold_chips(prn, constants::kB1iCodeLength);
  code.chip_rate = constants::kB1iChipRate;
  return code;
}

std::vector<RangingCode> gen_all_ranging_codes() {
  std::vector<RangingCode> codes;
  codes.reserve(constants::kMaxPrn);
  for (int prn = 1; prn <= constants::kMaxPrn; ++prn) codes.push_back(gen_ranging_code(prn));
  return codes;
}

SampleArray gen_untruncated_gold(int prn) { return gold_chips(prn, 2047); }

NhCode gen_nh_code() {
  NhCode nh;
  nh.chips.resize(constants::kNhLength);
  for (int i = 0; i < constants::kNhLength; ++i) nh.chips[i] = kNhBits[i] ? -1.0 : 1.0;
  return nh;
}

Eigen::Index samples_per_period(const RangingCode& code, double fs) {
  return static_cast<Eigen::Index>(std::llround(fs * code.period()));
}

SampleArray upsample_code(const RangingCode& code, double fs) {
  if (!(fs >= code.chip_rate)) {
    throw std::invalid_argument("upsample_code: sampling rate below chip rate");
  }
  const Eigen::Index m = samples_per_period(code, fs);
  const Eigen::Index length = code.length();
  const double chips_per_sample = code.chip_rate / fs;
  SampleArray out(m);
  for (Eigen::Index n = 0; n < m; ++n) {
    // The small bias keeps exact chip boundaries (n * rate / fs integral) on the new chip.
    auto chip = static_cast<Eigen::Index>(std::floor(static_cast<double>(n) * chips_per_sample + 1e-9));
    out[n] = code.chips[chip % length];
  }
  return out;
}

DamReference make_dam_reference(const RangingCode& code, int delay_samples, double fs) {
  SampleArray up = upsample_code(code, fs);
  if (delay_samples < 0 || delay_samples >= up.size()) {
    throw std::invalid_argument("make_dam_reference: delay outside one code period");
  }
  DamReference ref;
  ref.prn = code.prn;
  ref.delay_samples = delay_samples;
  ref.fs = fs;
  ref.samples = delay_product(up, delay_samples);
  RealFft<double> fft;
  ref.spectrum = fft.forward(as_span(ref.samples));
  return ref;
}

SampledCode make_sampled_code(const RangingCode& code, double fs) {
  SampledCode out;
  out.prn = code.prn;
  out.fs = fs;
  out.samples = upsample_code(code, fs);
  RealFft<double> fft;
  out.spectrum = fft.forward(as_span(out.samples));
  return out;
}

int main_lobe_exclusion(double fs, double chip_rate) {
  // Smallest integer lag >= fs / chip_rate; lags below this are main lobe.
  return static_cast<int>(std::ceil(fs / chip_rate - 1e-9));
}

CorrelationReport correlation_metrics(std::span<const RangingCode> codes, int delay_samples,
                                      double fs) {
  if (codes.empty()) throw std::invalid_argument("correlation_metrics: empty code set");
  const int exclusion = main_lobe_exclusion(fs, codes.front().chip_rate);

  RealFft<double> fft;
  std::vector<ComplexSpectrum> spectra;
  spectra.reserve(codes.size());
  Eigen::Index m = 0;
  for (const auto& code : codes) {
    SampleArray up = upsample_code(code, fs);
    if (delay_samples != 0) {
      if (delay_samples < 0 || delay_samples >= up.size()) {
        throw std::invalid_argument("correlation_metrics: delay outside one code period");
      }
      up = delay_product(up, delay_samples);
    }
    m = up.size();
    spectra.push_back(fft.forward(as_span(up)));
  }

  // Integer correlation sums; R(0) = m for any +/-1 sequence.
  const double peak = static_cast<double>(m);
  ComplexSpectrum scratch;
  SampleArray r;

  double k_auto = std::numeric_limits<double>::infinity();
  for (const auto& s : spectra) {
    scratch = s.array() * s.array().conjugate();
    fft.inverse(scratch, m, r);
    k_auto = std::min(k_auto, ratio_or_inf(peak, max_abs_rounded(r, exclusion)));
  }

  CorrelationReport report;
  report.delay_samples = delay_samples;
  report.tau = delay_samples / fs;
  report.k_auto = k_auto;
  if (spectra.size() > 1) {
    double k_cross = std::numeric_limits<double>::infinity();
    // |R_ij(lag)| = |R_ji(-lag)|, so unordered pairs suffice.
    for (std::size_t i = 0; i < spectra.size(); ++i) {
      for (std::size_t j = i + 1; j < spectra.size(); ++j) {
        scratch = spectra[i].array() * spectra[j].array().conjugate();
        fft.inverse(scratch, m, r);
        k_cross = std::min(k_cross, ratio_or_inf(peak, max_abs_rounded(r, 0)));
      }
    }
    report.k_cross = k_cross;
  }
  return report;
}

std::vector<CorrelationReport> tau_performance_sweep(std::span<const RangingCode> codes,
                                                     double tau_min, double tau_max, double fs) {
  std::vector<CorrelationReport> out;
  if (tau_max < tau_min) return out;
  const auto first = static_cast<int>(std::ceil(tau_min * fs - 1e-9));
  const auto last = static_cast<int>(std::floor(tau_max * fs + 1e-9));
  for (int d = std::max(first, 0); d <= last; ++d) {
    out.push_back(correlation_metrics(codes, d, fs));
  }
  return out;
}

std::string sweep_to_csv(std::span<const CorrelationReport> reports) {
  std::ostringstream os;
  os << "delay_samples,tau_us,k_auto,k_cross\n";
  os << std::setprecision(10);
  for (const auto& r : reports) {
    os << r.delay_samples << ',' << r.tau * 1e6 << ',' << r.k_auto << ',';
    if (r.k_cross) os << *r.k_cross;
    os << '\n';
  }
  return os.str();
}

}  // namespace bdsacq
