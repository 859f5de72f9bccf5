#pragma once

#include "bdsacq/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace bdsacq {

/// Full description of one synthetic single-PRN scenario.
struct ScenarioConfig {
  int prn = 1;
  /// Carrier-to-noise density in dB-Hz; +inf means noise free.
  double cn0 = std::numeric_limits<double>::infinity();
  double fs = constants::kDefaultFs;
  double f_if = constants::kDefaultIf;
  double carrier_doppler = constants::kDefaultCarrierDoppler;  // Hz
  double code_doppler = constants::kDefaultCodeDoppler;        // Hz on the chip rate
  double carrier_phase = 0.0;                                  // rad
  double code_phase_offset = 0.0;  // samples, start of code epoch 0
  double duration = 1.0;           // s
  std::uint64_t nav_seed = 1;
  std::uint64_t noise_seed = 2;
  bool nh_enabled = true;  // D1 (MEO/IGSO) when true, D2 (GEO) when false
  double signal_power = 1.0;

  // Test hooks: replace D(t) or C(t) by a constant +1.
  bool unit_data = false;
  bool unit_code = false;

  void validate() const;
};

struct SignalOrigin {
  std::string description;
  std::optional<ScenarioConfig> scenario;
};

struct SampledSignal {
  SampleArray samples;
  double fs = 0.0;
  /// Nominal IF; cleared once the carrier has been removed.
  std::optional<double> f_if;
  SignalOrigin origin;

  Eigen::Index size() const { return samples.size(); }
  double duration() const { return fs > 0.0 ? samples.size() / fs : 0.0; }
};

/// Noise-free IF samples sqrt(2 Ps) D(t) C(t) cos(2 pi (f_if + fd) t + phi).
SampledSignal synth_if_signal(const ScenarioConfig& config);

/// Per-sample variance of white noise over the Nyquist band for a given C/N0.
double awgn_variance(double cn0_dbhz, double fs, double signal_power = 1.0);

/// Adds white Gaussian noise with variance Ps * fs / (2 * 10^(cn0/10)).
/// A non-finite cn0 leaves the signal untouched.
SampledSignal add_awgn(SampledSignal signal, double cn0_dbhz, std::uint64_t seed,
                       double signal_power = 1.0);

/// Same noise density as add_awgn, passed through a windowed-sinc bandpass
/// of width `bandwidth` centred on the signal's IF before being added.
SampledSignal add_bandlimited_awgn(SampledSignal signal, double cn0_dbhz, std::uint64_t seed,
                                   double bandwidth, int taps = 801, double signal_power = 1.0);

/// Linear-phase windowed-sinc bandpass FIR with unit passband gain.
SampleArray bandpass_taps(double fs, double center, double bandwidth, int taps);

/// Uniform mid-tread quantizer with 2^bits levels over [-full_scale, full_scale).
SampledSignal quantize_samples(SampledSignal signal, int bits, double full_scale);

/// Expected total number of samples by which `duration` seconds of signal
/// deviates from nominal because of code Doppler (negative means shorter).
double period_drift_samples(double duration, double fs, double code_doppler,
                            double chip_rate = constants::kB1iChipRate,
                            int code_length = constants::kB1iCodeLength);

// Scenario documents: "key = value" lines, '#' starts a comment.
std::vector<std::pair<std::string, std::string>> read_key_values(std::istream& in);
ScenarioConfig parse_scenario(std::istream& in);
ScenarioConfig load_scenario(const std::string& path);
/// Applies a single key/value pair; throws std::invalid_argument on unknown keys.
void set_scenario_field(ScenarioConfig& config, const std::string& key, const std::string& value);
std::string format_scenario(const ScenarioConfig& config);

}  // namespace bdsacq
