#include "bdsacq/vlda.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace bdsacq {

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

struct Run {
  std::int64_t begin;   // input index, inclusive
  std::int64_t end;     // input index, exclusive
  std::int64_t offset;  // compensated index = input index + offset
};

// Piecewise-constant input -> compensated index map.
std::vector<Run> compensation_runs(const std::vector<std::int64_t>& events, bool insert,
                                   std::int64_t length) {
  std::vector<Run> runs;
  const auto k_total = static_cast<std::int64_t>(events.size());
  runs.reserve(events.size() + 1);
  for (std::int64_t k = 0; k <= k_total; ++k) {
    Run r{};
    if (insert) {
      // Sample e_k is emitted twice: once closing run k-1, once opening run k.
      r.begin = k == 0 ? 0 : events[k - 1];
      r.end = k == k_total ? length : events[k] + 1;
      r.offset = k;
    } else {
      r.begin = k == 0 ? 0 : events[k - 1] + 1;
      r.end = k == k_total ? length : events[k];
      r.offset = -k;
    }
    if (r.end > r.begin) runs.push_back(r);
  }
  return runs;
}

}  // namespace

double n_per(double code_rate, double delta_f) {
  if (!(code_rate > 0.0)) throw std::invalid_argument("n_per: code rate must be positive");
  if (delta_f == 0.0) return std::numeric_limits<double>::infinity();
  return code_rate / std::abs(delta_f);
}

std::vector<std::int64_t> adjustment_positions(double candidate_doppler, double code_rate,
                                               Eigen::Index length) {
  std::vector<std::int64_t> events;
  const double period = n_per(code_rate, candidate_doppler);
  if (!std::isfinite(period)) return events;
  for (std::int64_t k = 1;; ++k) {
    // Compare before converting: tiny candidates give positions beyond int64.
    const double e = std::floor(static_cast<double>(k) * period);
    if (!(e < static_cast<double>(length))) break;
    events.push_back(static_cast<std::int64_t>(e));
  }
  return events;
}

AccumulatedBlock compensate_and_accumulate(const SampledSignal& signal, double candidate_doppler,
                                           double code_rate, Eigen::Index period_samples,
                                           std::int64_t max_blocks) {
  const Eigen::Index m = period_samples;
  if (m <= 0) throw std::invalid_argument("compensate_and_accumulate: period must be positive");
  if (signal.size() < m) {
    throw std::invalid_argument("compensate_and_accumulate: signal shorter than one period");
  }
  const auto events = adjustment_positions(candidate_doppler, code_rate, signal.size());
  const bool insert = candidate_doppler > 0.0;
  const auto k_total = static_cast<std::int64_t>(events.size());
  const std::int64_t compensated = signal.size() + (insert ? k_total : -k_total);
  std::int64_t n_blocks = compensated / m;
  if (max_blocks >= 0) n_blocks = std::min(n_blocks, max_blocks);
  const std::int64_t limit = n_blocks * m;

  AccumulatedBlock out;
  out.samples = SampleArray::Zero(m);
  out.n_blocks = static_cast<int>(n_blocks);
  out.candidate_doppler = candidate_doppler;
  out.adjustments_applied = insert ? k_total : -k_total;

  std::int64_t j = 0;
  std::size_t next = 0;
  auto emit = [&](double v) {
    if (j < limit) out.samples[j % m] += v;
    ++j;
  };
  for (Eigen::Index i = 0; i < signal.size() && j < limit; ++i) {
    const bool adjust = next < events.size() && events[next] == i;
    if (adjust) ++next;
    if (adjust && !insert) continue;
    emit(signal.samples[i]);
    if (adjust) emit(signal.samples[i]);
  }
  return out;
}

DopplerGrid doppler_grid(double coherent_length, double f_min, double f_max) {
  if (!(coherent_length > 0.0)) throw std::invalid_argument("doppler_grid: T must be positive");
  if (f_max < f_min) throw std::invalid_argument("doppler_grid: f_max < f_min");
  DopplerGrid grid;
  grid.f_min = f_min;
  grid.f_max = f_max;
  grid.step = 1.0 / (2.0 * coherent_length);
  const auto intervals = static_cast<std::int64_t>(std::floor((f_max - f_min) / grid.step + 1e-9));
  grid.bins.reserve(static_cast<std::size_t>(intervals + 1));
  for (std::int64_t k = 0; k <= intervals; ++k) grid.bins.push_back(f_min + k * grid.step);
  return grid;
}

PeriodAccumulator::PeriodAccumulator(SampleArray samples, Eigen::Index period_samples)
    : samples_(std::move(samples)), period_(period_samples), length_(samples_.size()) {
  if (period_ <= 0) throw std::invalid_argument("PeriodAccumulator: period must be positive");
  if (length_ < period_) throw std::invalid_argument("PeriodAccumulator: signal shorter than one period");
  rows_ = (length_ + period_ - 1) / period_;
  prefix_ = SampleArray::Zero((rows_ + 1) * period_);
  for (Eigen::Index r = 0; r < rows_; ++r) {
    const Eigen::Index count = std::min(period_, length_ - r * period_);
    auto next = prefix_.segment((r + 1) * period_, period_);
    next = prefix_.segment(r * period_, period_);
    next.head(count) += samples_.segment(r * period_, count);
  }
}

void PeriodAccumulator::add_direct(SampleArray& block, std::int64_t j0, std::int64_t j1,
                                   std::int64_t offset) const {
  for (std::int64_t j = j0; j < j1; ++j) block[j % period_] += samples_[j - offset];
}

void PeriodAccumulator::add_periods(SampleArray& block, std::int64_t first_period,
                                    std::int64_t end_period, std::int64_t offset) const {
  // block[n] += sum_{p in [first, end)} x[p M + n - offset]; the source row
  // index shifts by one where n - offset crosses a multiple of M.
  const std::int64_t m = period_;
  const std::int64_t a_lo = floor_div(-offset, m);
  const std::int64_t split = std::min<std::int64_t>(m, (a_lo + 1) * m + offset);
  auto add_segment = [&](std::int64_t n0, std::int64_t n1, std::int64_t a) {
    if (n1 <= n0) return;
    const std::int64_t m0 = n0 - offset - a * m;
    const std::int64_t len = n1 - n0;
    block.segment(n0, len) += prefix_.segment((end_period + a) * m + m0, len) -
                              prefix_.segment((first_period + a) * m + m0, len);
  };
  add_segment(0, split, a_lo);
  add_segment(split, m, a_lo + 1);
}

AccumulatedBlock PeriodAccumulator::accumulate(double candidate_doppler, double code_rate,
                                               std::int64_t max_blocks) const {
  const auto events = adjustment_positions(candidate_doppler, code_rate, length_);
  const bool insert = candidate_doppler > 0.0;
  const auto k_total = static_cast<std::int64_t>(events.size());
  const std::int64_t compensated = length_ + (insert ? k_total : -k_total);
  std::int64_t n_blocks = compensated / period_;
  if (max_blocks >= 0) n_blocks = std::min(n_blocks, max_blocks);
  const std::int64_t limit = n_blocks * period_;

  AccumulatedBlock out;
  out.samples = SampleArray::Zero(period_);
  out.n_blocks = static_cast<int>(n_blocks);
  out.candidate_doppler = candidate_doppler;
  out.adjustments_applied = insert ? k_total : -k_total;

  for (const Run& run : compensation_runs(events, insert, length_)) {
    const std::int64_t j0 = run.begin + run.offset;
    const std::int64_t j1 = std::min(run.end + run.offset, limit);
    if (j0 >= j1) continue;
    const std::int64_t p0 = (j0 + period_ - 1) / period_;
    const std::int64_t p1 = j1 / period_;
    if (p0 >= p1) {
      add_direct(out.samples, j0, j1, run.offset);
    } else {
      add_direct(out.samples, j0, p0 * period_, run.offset);
      add_periods(out.samples, p0, p1, run.offset);
      add_direct(out.samples, p1 * period_, j1, run.offset);
    }
  }
  return out;
}

}  // namespace bdsacq
