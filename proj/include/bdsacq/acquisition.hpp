#pragma once

#include "bdsacq/codegen.hpp"
#include "bdsacq/dam.hpp"
#include "bdsacq/sigsynth.hpp"
#include "bdsacq/vlda.hpp"

#include <map>
#include <optional>
#include <span>
#include <vector>

namespace bdsacq {

struct PeakMetrics {
  double peak = 0.0;
  double second_peak = 0.0;
  /// peak / second_peak; NaN when the input is all zero, +inf when only the
  /// excluded zone is non-zero.
  double ratio = 0.0;
  Eigen::Index code_phase = 0;
};

/// Highest |correlation| of one search bin and where it occurs.
struct BinPeak {
  double peak = 0.0;
  Eigen::Index code_phase = 0;
};

struct DetectionThreshold {
  double gamma = 1.0;
  double target_pfa = 1e-2;
};

struct AcquisitionResult {
  int prn = 0;
  bool detected = false;
  Eigen::Index code_phase = 0;  // samples in [0, M)
  std::optional<double> code_doppler;     // Hz
  std::optional<double> carrier_doppler;  // Hz relative to the IF
  double peak = 0.0;
  double second_peak = 0.0;
  double ratio = 0.0;
};

struct CarrierEstimate {
  double frequency = 0.0;  // Hz, absolute (IF + Doppler)
  double peak_to_mean = 0.0;
  bool reliable = false;
};

/// Second-peak exclusion half width, ceil(fs / chip_rate) samples.
int default_exclusion_zone(double fs, double chip_rate = constants::kB1iChipRate);

/// Peak statistics of |correlation|. The second peak is searched outside
/// +/- exclusion_zone samples (circular) of the main peak.
PeakMetrics peak_metrics(std::span<const double> correlation, int exclusion_zone);

/// Delay-product reference spectra for a PRN set, computed once per (delay, fs).
class DamReferenceBank {
 public:
  DamReferenceBank(std::span<const int> prns, int delay_samples, double fs);
  const DamReference& at(int prn) const;
  int delay_samples() const { return delay_; }
  double fs() const { return fs_; }
  Eigen::Index period_samples() const { return period_; }

 private:
  int delay_;
  double fs_;
  Eigen::Index period_ = 0;
  std::map<int, DamReference> refs_;
};

/// Original-code references with full complex spectra for the NCH search.
class CodeReferenceBank {
 public:
  CodeReferenceBank(std::span<const int> prns, double fs);
  const SampledCode& at(int prn) const;
  const ComplexSpectrum& full_spectrum(int prn) const;
  double fs() const { return fs_; }
  Eigen::Index period_samples() const { return period_; }

 private:
  double fs_;
  Eigen::Index period_ = 0;
  std::map<int, SampledCode> codes_;
  std::map<int, ComplexSpectrum> full_;
};

struct VldaConfig {
  double coherent_length = 1.0;  // T, s
  DopplerGrid grid = doppler_grid(1.0, -6.0, 6.0);
  DamConfig dam{};
  DetectionThreshold threshold{};
  int exclusion_zone = -1;  // < 0 selects default_exclusion_zone
  double code_rate = constants::kB1iChipRate;
  int jobs = 1;
  bool estimate_carrier = false;
  double carrier_window = 0.01;        // s
  double carrier_search = 5000.0;      // +/- Hz around the IF

  /// Extra input samples beyond T * fs + delay needed so that deleting
  /// candidates still fill every period.
  Eigen::Index margin_samples() const;
  /// Input samples the pipeline consumes.
  Eigen::Index required_samples() const;
};

struct NchConfig {
  int n_nch = 10;
  double carrier_min = -5000.0;  // Hz relative to the IF
  double carrier_max = 5000.0;
  double carrier_step = 500.0;
  DetectionThreshold threshold{};
  int exclusion_zone = -1;
  int jobs = 1;

  std::vector<double> carrier_bins() const;
};

/// Delay-and-multiply, per-bin length compensation and accumulation, then
/// FFT code-phase search for each PRN. Per PRN the cell with the largest
/// correlation magnitude over the whole (bin, phase) map wins; its ratio is
/// taken against the largest value of the map outside the exclusion zone
/// around the winning phase, in any bin.
std::vector<AcquisitionResult> acquire_vlda(const SampledSignal& signal, std::span<const int> prns,
                                            const VldaConfig& config);
std::vector<AcquisitionResult> acquire_vlda(const SampledSignal& signal, const DamReferenceBank& bank,
                                            std::span<const int> prns, const VldaConfig& config);

/// Per-bin peaks of the VLDA search for one PRN, in grid order. Phases are in
/// the delay-product domain (add the delay for the input-domain phase).
std::vector<BinPeak> vlda_bin_peaks(const SampledSignal& signal, const DamReferenceBank& bank, int prn,
                                    const VldaConfig& config);

/// Carrier wipe-off per bin, 1 ms FFT correlation against the original code,
/// squared magnitudes accumulated over n_nch periods. Reduced over the
/// (carrier bin, phase) map as in acquire_vlda.
std::vector<AcquisitionResult> acquire_nch(const SampledSignal& signal, std::span<const int> prns,
                                           const NchConfig& config);
std::vector<AcquisitionResult> acquire_nch(const SampledSignal& signal, const CodeReferenceBank& bank,
                                           std::span<const int> prns, const NchConfig& config);

/// Carrier frequency from the code-wiped, squared IF signal (squaring removes
/// the data and NH signs). The estimate is flagged unreliable when its
/// peak-to-mean ratio does not exceed the 1e-3 noise-only quantile, found once
/// per grid shape by simulating white Gaussian input.
CarrierEstimate estimate_carrier(const SampledSignal& signal, Eigen::Index code_phase,
                                 const RangingCode& code, double window,
                                 double search_halfwidth = 5000.0);

}  // namespace bdsacq
