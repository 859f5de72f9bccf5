#pragma once

#include "bdsacq/types.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace bdsacq {

/// A +/-1 spreading sequence for one PRN.
struct RangingCode {
  int prn = 0;
  SampleArray chips;
  double chip_rate = constants::kB1iChipRate;

  Eigen::Index length() const { return chips.size(); }
  double period() const { return static_cast<double>(chips.size()) / chip_rate; }
};

/// Neumann-Hoffman secondary code, one chip per primary code period.
struct NhCode {
  SampleArray chips;
  double rate = constants::kNhRate;
};

/// Delay-product replica of one code period, C(n) * C(n - delay), with the
/// half spectrum of its real FFT cached for correlation.
struct DamReference {
  int prn = 0;
  int delay_samples = 0;
  double fs = 0.0;
  SampleArray samples;
  ComplexSpectrum spectrum;
};

/// Upsampled replica of the original code (no delay product), used by the
/// non-coherent baseline and carrier estimation.
struct SampledCode {
  int prn = 0;
  double fs = 0.0;
  SampleArray samples;
  ComplexSpectrum spectrum;
};

struct CorrelationReport {
  int delay_samples = 0;
  double tau = 0.0;  // s
  double k_auto = 0.0;
  std::optional<double> k_cross;  // absent for a single code
};

/// BeiDou B1I ranging code (2046 chips) for PRN 1..63.
RangingCode gen_ranging_code(int prn);

/// All 63 B1I ranging codes, PRN order.
std::vector<RangingCode> gen_all_ranging_codes();

/// Full-period (2047 chip) Gold sequence before B1I truncation. Exposed for
/// checking the generator's sequence family properties.
SampleArray gen_untruncated_gold(int prn);

NhCode gen_nh_code();

/// Samples one code period at fs. Sample n carries chip floor(n * chip_rate / fs) mod L.
SampleArray upsample_code(const RangingCode& code, double fs);

/// Number of samples per code period at fs.
Eigen::Index samples_per_period(const RangingCode& code, double fs);

DamReference make_dam_reference(const RangingCode& code, int delay_samples, double fs);

SampledCode make_sampled_code(const RangingCode& code, double fs);

/// Integer-sample main lobe half width used to exclude the autocorrelation
/// shoulder: lags with |lag| < fs / chip_rate belong to the main lobe.
int main_lobe_exclusion(double fs, double chip_rate);

/// K_auto / K_cross quality ratios of the delay-product codes. delay 0 means
/// the original codes.
CorrelationReport correlation_metrics(std::span<const RangingCode> codes, int delay_samples,
                                      double fs);

/// One report per integer-sample delay within [tau_min, tau_max], in order.
std::vector<CorrelationReport> tau_performance_sweep(std::span<const RangingCode> codes,
                                                     double tau_min, double tau_max, double fs);

/// CSV with columns delay_samples,tau_us,k_auto,k_cross.
std::string sweep_to_csv(std::span<const CorrelationReport> reports);

}  // namespace bdsacq
