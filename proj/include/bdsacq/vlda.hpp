#pragma once

#include "bdsacq/sigsynth.hpp"
#include "bdsacq/types.hpp"

#include <cstdint>
#include <vector>

namespace bdsacq {

struct DopplerGrid {
  double f_min = 0.0;
  double f_max = 0.0;
  double step = 0.0;
  std::vector<double> bins;

  std::size_t size() const { return bins.size(); }
};

struct AccumulatedBlock {
  SampleArray samples;  // one code period, M samples
  int n_blocks = 0;
  double candidate_doppler = 0.0;
  /// Signed count of length adjustments: positive for inserted samples,
  /// negative for deleted ones.
  std::int64_t adjustments_applied = 0;
};

/// Samples between single-sample adjustments, f_R / |delta_f|; +inf for delta_f = 0.
double n_per(double code_rate, double delta_f);

/// Input indices at which a length adjustment happens for the given
/// candidate code Doppler, for a record of `length` samples. The k-th
/// adjustment (k >= 1) falls on floor(k * N_per).
std::vector<std::int64_t> adjustment_positions(double candidate_doppler, double code_rate,
                                               Eigen::Index length);

/// Code-Doppler length compensation followed by periodic accumulation.
///
/// A positive candidate (code running fast, periods shorter than M) repeats
/// the sample at each adjustment position; a negative candidate drops it.
/// The compensated stream is cut into whole M-sample periods which are summed;
/// the trailing partial period is discarded.
/// A non-negative max_blocks caps the number of summed periods.
AccumulatedBlock compensate_and_accumulate(const SampledSignal& signal, double candidate_doppler,
                                           double code_rate, Eigen::Index period_samples,
                                           std::int64_t max_blocks = -1);

/// Step 1/(2T), bins f_min, f_min + step, ... <= f_max (endpoints inclusive).
DopplerGrid doppler_grid(double coherent_length, double f_min, double f_max);

/// Same accumulation as compensate_and_accumulate, evaluated for many
/// candidates over one record. Period-wise prefix sums are built once, after
/// which each candidate costs O(M * (adjustments + 1)) instead of O(N).
class PeriodAccumulator {
 public:
  PeriodAccumulator(SampleArray samples, Eigen::Index period_samples);

  /// Thread safe; the prefix table is read-only after construction.
  AccumulatedBlock accumulate(double candidate_doppler, double code_rate,
                              std::int64_t max_blocks = -1) const;

  Eigen::Index period_samples() const { return period_; }
  Eigen::Index length() const { return length_; }

 private:
  void add_direct(SampleArray& block, std::int64_t j0, std::int64_t j1, std::int64_t offset) const;
  void add_periods(SampleArray& block, std::int64_t first_period, std::int64_t end_period,
                   std::int64_t offset) const;

  SampleArray samples_;
  Eigen::Index period_;
  Eigen::Index length_;
  Eigen::Index rows_;
  SampleArray prefix_;  // (rows_ + 1) x period_, row-major
};

}  // namespace bdsacq
