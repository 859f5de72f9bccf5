#include "bdsacq/sigsynth.hpp"

#include "bdsacq/codegen.hpp"
#include "bdsacq/fft.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace bdsacq {

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::int64_t positive_mod(std::int64_t a, std::int64_t b) {
  std::int64_t r = a % b;
  return r < 0 ? r + b : r;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  std::string v = value;
  std::transform(v.begin(), v.end(), v.begin(), ::tolower);
  if (v == "inf" || v == "+inf" || v == "infinity" || v == "noise-free") {
    return std::numeric_limits<double>::infinity();
  }
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != value.size()) throw std::invalid_argument("bad numeric value for " + key + ": " + value);
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw std::invalid_argument("bad boolean value for " + key + ": " + value);
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  std::uint64_t out = 0;
  try {
    out = std::stoull(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != value.size()) throw std::invalid_argument("bad integer value for " + key + ": " + value);
  return out;
}

// Linear convolution by zero-padded FFT; output has the input's length and is
// aligned to the filter's group delay.
SampleArray fir_filter_same(const SampleArray& x, const SampleArray& taps) {
  const Eigen::Index n = x.size();
  const Eigen::Index k = taps.size();
  Eigen::Index nfft = 1;
  while (nfft < n + k - 1) nfft <<= 1;
  SampleArray xp = SampleArray::Zero(nfft);
  SampleArray hp = SampleArray::Zero(nfft);
  xp.head(n) = x;
  hp.head(k) = taps;
  RealFft<double> fft;
  ComplexSpectrum xs = fft.forward(as_span(xp));
  ComplexSpectrum hs = fft.forward(as_span(hp));
  xs.array() *= hs.array();
  SampleArray y;
  fft.inverse(xs, nfft, y);
  return y.segment((k - 1) / 2, n);
}

}  // namespace

void ScenarioConfig::validate() const {
  if (prn < 1 || prn > constants::kMaxPrn) throw std::invalid_argument("scenario: prn out of range");
  if (!(fs > 0.0)) throw std::invalid_argument("scenario: fs must be positive");
  if (!(fs > 2.0 * (f_if + carrier_doppler))) {
    throw std::invalid_argument("scenario: fs must exceed twice the carrier frequency");
  }
  if (!(duration > 0.0)) throw std::invalid_argument("scenario: duration must be positive");
  const double period_samples = fs * constants::kB1iCodePeriod;
  if (!(code_phase_offset >= 0.0 && code_phase_offset < period_samples)) {
    throw std::invalid_argument("scenario: code_phase_offset outside one code period");
  }
  if (!(signal_power >= 0.0)) throw std::invalid_argument("scenario: signal_power must be >= 0");
  if (std::isnan(cn0)) throw std::invalid_argument("scenario: cn0 is NaN");
}

SampledSignal synth_if_signal(const ScenarioConfig& config) {
  config.validate();
  const RangingCode code = gen_ranging_code(config.prn);
  const NhCode nh = gen_nh_code();
  const std::int64_t length = code.length();
  const auto n_samples = static_cast<Eigen::Index>(std::llround(config.duration * config.fs));

  const double chips_per_sample = (code.chip_rate + config.code_doppler) / config.fs;
  const double amplitude = std::sqrt(2.0 * config.signal_power);
  const double fc = config.f_if + config.carrier_doppler;

  // Code epoch range touched by the record, for the nav bit draw.
  auto epoch_at = [&](Eigen::Index n) {
    const double chip = (static_cast<double>(n) - config.code_phase_offset) * chips_per_sample;
    return floor_div(static_cast<std::int64_t>(std::floor(chip)), length);
  };
  const std::int64_t first_bit = floor_div(epoch_at(0), constants::kNhLength);
  const std::int64_t last_bit = floor_div(epoch_at(std::max<Eigen::Index>(n_samples, 1) - 1),
                                          constants::kNhLength);
  std::vector<double> nav_bits(static_cast<std::size_t>(last_bit - first_bit + 1), 1.0);
  if (!config.unit_data) {
    std::mt19937_64 rng(config.nav_seed);
    for (auto& b : nav_bits) b = (rng() & 1u) ? -1.0 : 1.0;
  }

  SampledSignal out;
  out.fs = config.fs;
  out.f_if = config.f_if;
  out.origin.description = "synthetic";
  out.origin.scenario = config;
  out.samples.resize(n_samples);

  // Carrier by phasor rotation, re-anchored to the exact phase every block.
  constexpr Eigen::Index kAnchor = 4096;
  const double cycles_per_sample = fc / config.fs;
  const std::complex<double> step = std::polar(1.0, constants::kTwoPi * cycles_per_sample);
  std::complex<double> phasor;

  for (Eigen::Index n = 0; n < n_samples; ++n) {
    if (n % kAnchor == 0) {
      const double cycles = std::fmod(static_cast<double>(n) * cycles_per_sample, 1.0);
      phasor = std::polar(1.0, constants::kTwoPi * cycles + config.carrier_phase);
    }
    const double chip_pos = (static_cast<double>(n) - config.code_phase_offset) * chips_per_sample;
    const auto chip_abs = static_cast<std::int64_t>(std::floor(chip_pos));
    const std::int64_t epoch = floor_div(chip_abs, length);

    double c = 1.0;
    if (!config.unit_code) c = code.chips[static_cast<Eigen::Index>(chip_abs - epoch * length)];
    double d = 1.0;
    if (!config.unit_data) {
      d = nav_bits[static_cast<std::size_t>(floor_div(epoch, constants::kNhLength) - first_bit)];
      if (config.nh_enabled) d *= nh.chips[positive_mod(epoch, constants::kNhLength)];
    }
    out.samples[n] = amplitude * d * c * phasor.real();
    phasor *= step;
  }
  return out;
}

double awgn_variance(double cn0_dbhz, double fs, double signal_power) {
  return signal_power * fs / (2.0 * std::pow(10.0, cn0_dbhz / 10.0));
}

SampledSignal add_awgn(SampledSignal signal, double cn0_dbhz, std::uint64_t seed,
                       double signal_power) {
  if (!std::isfinite(cn0_dbhz)) return signal;
  const double sigma = std::sqrt(awgn_variance(cn0_dbhz, signal.fs, signal_power));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, sigma);
  for (Eigen::Index n = 0; n < signal.samples.size(); ++n) signal.samples[n] += gauss(rng);
  return signal;
}

SampleArray bandpass_taps(double fs, double center, double bandwidth, int taps) {
  if (taps < 3 || taps % 2 == 0) throw std::invalid_argument("bandpass_taps: taps must be odd >= 3");
  if (!(bandwidth > 0.0)) throw std::invalid_argument("bandpass_taps: bandwidth must be positive");
  SampleArray h(taps);
  const double mid = (taps - 1) / 2.0;
  for (int k = 0; k < taps; ++k) {
    const double t = (k - mid) / fs;
    const double x = bandwidth * t;
    const double sinc = (x == 0.0) ? 1.0 : std::sin(constants::kPi * x) / (constants::kPi * x);
    const double w = 0.42 - 0.5 * std::cos(constants::kTwoPi * k / (taps - 1)) +
                     0.08 * std::cos(2.0 * constants::kTwoPi * k / (taps - 1));
    h[k] = w * (2.0 * bandwidth / fs) * sinc * std::cos(constants::kTwoPi * center * t);
  }
  // Unit gain at the centre frequency.
  std::complex<double> gain = 0.0;
  for (int k = 0; k < taps; ++k) {
    gain += h[k] * std::polar(1.0, -constants::kTwoPi * center * (k - mid) / fs);
  }
  h /= std::abs(gain);
  return h;
}

SampledSignal add_bandlimited_awgn(SampledSignal signal, double cn0_dbhz, std::uint64_t seed,
                                   double bandwidth, int taps, double signal_power) {
  if (!std::isfinite(cn0_dbhz)) return signal;
  if (!signal.f_if) throw std::invalid_argument("add_bandlimited_awgn: signal has no IF");
  const double sigma = std::sqrt(awgn_variance(cn0_dbhz, signal.fs, signal_power));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, sigma);
  SampleArray white(signal.samples.size());
  for (Eigen::Index n = 0; n < white.size(); ++n) white[n] = gauss(rng);
  signal.samples += fir_filter_same(white, bandpass_taps(signal.fs, *signal.f_if, bandwidth, taps));
  return signal;
}

SampledSignal quantize_samples(SampledSignal signal, int bits, double full_scale) {
  if (bits != 8 && bits != 16) throw std::invalid_argument("quantize_samples: bits must be 8 or 16");
  if (!(full_scale > 0.0)) throw std::invalid_argument("quantize_samples: full_scale must be positive");
  const double levels = std::ldexp(1.0, bits - 1);
  const double lsb = full_scale / levels;
  signal.samples = (signal.samples / lsb).round().max(-levels).min(levels - 1.0) * lsb;
  return signal;
}

double period_drift_samples(double duration, double fs, double code_doppler, double chip_rate,
                            int code_length) {
  const double periods = duration * chip_rate / code_length;
  return -periods * code_length * fs * code_doppler / ((chip_rate + code_doppler) * chip_rate);
}

void set_scenario_field(ScenarioConfig& c, const std::string& key, const std::string& value) {
  if (key == "prn") {
    c.prn = static_cast<int>(parse_u64(key, value));
  } else if (key == "cn0") {
    c.cn0 = parse_double(key, value);
  } else if (key == "fs") {
    c.fs = parse_double(key, value);
  } else if (key == "f_if") {
    c.f_if = parse_double(key, value);
  } else if (key == "carrier_doppler") {
    c.carrier_doppler = parse_double(key, value);
  } else if (key == "code_doppler") {
    c.code_doppler = parse_double(key, value);
  } else if (key == "carrier_phase") {
    c.carrier_phase = parse_double(key, value);
  } else if (key == "code_phase_offset") {
    c.code_phase_offset = parse_double(key, value);
  } else if (key == "duration") {
    c.duration = parse_double(key, value);
  } else if (key == "nav_seed") {
    c.nav_seed = parse_u64(key, value);
  } else if (key == "noise_seed") {
    c.noise_seed = parse_u64(key, value);
  } else if (key == "nh_enabled") {
    c.nh_enabled = parse_bool(key, value);
  } else if (key == "signal_power") {
    c.signal_power = parse_double(key, value);
  } else {
    throw std::invalid_argument("unknown scenario key: " + key);
  }
}

std::vector<std::pair<std::string, std::string>> read_key_values(std::istream& in) {
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected key = value");
    }
    out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return out;
}

ScenarioConfig parse_scenario(std::istream& in) {
  ScenarioConfig config;
  for (const auto& [key, value] : read_key_values(in)) set_scenario_field(config, key, value);
  config.validate();
  return config;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scenario file " + path);
  return parse_scenario(in);
}

std::string format_scenario(const ScenarioConfig& c) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "prn = " << c.prn << '\n';
  if (std::isfinite(c.cn0)) {
    os << "cn0 = " << c.cn0 << '\n';
  } else {
    os << "cn0 = inf\n";
  }
  os << "fs = " << c.fs << '\n'
     << "f_if = " << c.f_if << '\n'
     << "carrier_doppler = " << c.carrier_doppler << '\n'
     << "code_doppler = " << c.code_doppler << '\n'
     << "carrier_phase = " << c.carrier_phase << '\n'
     << "code_phase_offset = " << c.code_phase_offset << '\n'
     << "duration = " << c.duration << '\n'
     << "nav_seed = " << c.nav_seed << '\n'
     << "noise_seed = " << c.noise_seed << '\n'
     << "nh_enabled = " << (c.nh_enabled ? "true" : "false") << '\n'
     << "signal_power = " << c.signal_power << '\n';
  return os.str();
}

}  // namespace bdsacq
