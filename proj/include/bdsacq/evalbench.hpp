#pragma once

#include "bdsacq/acquisition.hpp"
#include "bdsacq/sigsynth.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace bdsacq {

enum class Method { Vlda, Nch };

std::string to_string(Method method);
Method parse_method(const std::string& text);

/// Everything a Monte-Carlo trial needs: the acquisition method and its
/// configuration plus the scenario template. Per trial, code phase, carrier
/// phase, nav bits and noise are drawn from the trial seed.
struct CampaignConfig {
  Method method = Method::Vlda;
  VldaConfig vlda{};
  NchConfig nch{};
  ScenarioConfig scenario{};
  int jobs = 1;  // trials evaluated concurrently
  int phase_tolerance = 1;  // samples

  /// Coherent length T (VLDA) or N_nch (NCH), for reports.
  double parameter() const;
  /// Samples synthesized per trial.
  Eigen::Index trial_samples() const;
};

/// Per-trial seed, a splitmix64 mix of the master seed and the trial index.
std::uint64_t trial_seed(std::uint64_t master_seed, std::uint64_t trial_index);

/// Scenario of one trial (before noise); randomized fields drawn from the seed.
ScenarioConfig trial_scenario(const CampaignConfig& config, std::uint64_t seed);

/// Peak ratio of the configured PRN on noise-only input, one per trial.
std::vector<double> noise_only_ratios(const CampaignConfig& config, int trials,
                                      std::uint64_t master_seed);

/// gamma such that a fraction pfa_target of `ratios` lies strictly above it.
DetectionThreshold threshold_from_ratios(std::vector<double> ratios, double pfa_target);

/// Noise-only calibration; requires trials >= 10 / pfa_target.
DetectionThreshold calibrate_threshold(const CampaignConfig& config, double pfa_target, int trials,
                                       std::uint64_t master_seed);

/// Fraction of `ratios` above gamma.
double false_alarm_rate(std::span<const double> ratios, const DetectionThreshold& threshold);

struct TrialOutcome {
  bool detected = false;
  bool phase_ok = false;
  double ratio = 0.0;
};

std::vector<TrialOutcome> run_trials(const CampaignConfig& config, double cn0, int trials,
                                     const DetectionThreshold& threshold, std::uint64_t master_seed);

/// Fraction of trials detected at the true code phase (within the tolerance).
double detection_probability(const CampaignConfig& config, double cn0, int trials,
                             const DetectionThreshold& threshold, std::uint64_t master_seed);

struct BinomialInterval {
  double low = 0.0;
  double high = 1.0;
};

/// Wilson score interval at the given two-sided confidence z (1.96 ~ 95%).
BinomialInterval wilson_interval(int successes, int trials, double z = 1.959963984540054);

struct MonteCarloReport {
  Method method = Method::Vlda;
  double parameter = 0.0;
  std::vector<double> cn0_points;
  std::vector<double> pd;
  std::vector<BinomialInterval> ci;
  int trials_per_point = 0;
  double pfa_target = 0.0;
  double threshold = 0.0;
  std::uint64_t master_seed = 0;
};

/// Pd curve over cn0_points; the same trial seeds are reused at every point.
MonteCarloReport monte_carlo(const CampaignConfig& config, std::span<const double> cn0_points,
                             int trials, const DetectionThreshold& threshold,
                             std::uint64_t master_seed);

struct SensitivityResult {
  Method method = Method::Vlda;
  double parameter = 0.0;
  double cn0_at_pd90 = 0.0;  // smallest grid C/N0 with Pd >= target
  double bracket_low = 0.0;  // largest grid C/N0 with Pd < target
  double resolution = 0.25;
  double pd_target = 0.9;
  std::vector<std::pair<double, double>> evaluated;  // (cn0, pd) in evaluation order
};

/// Bisection over a C/N0 grid of the given resolution between cn0_low and
/// cn0_high. Throws InfeasibleError when the target is not bracketed.
SensitivityResult sensitivity_search(const CampaignConfig& config, const DetectionThreshold& threshold,
                                     int trials, std::uint64_t master_seed, double cn0_low,
                                     double cn0_high, double pd_target = 0.9,
                                     double resolution = 0.25);

struct ComplexityReport {
  Method method = Method::Vlda;
  std::int64_t m = 0;
  std::int64_t n_t = 0;
  std::int64_t n_f = 0;
  std::int64_t n_sat = 0;
  std::int64_t n_nch = 0;
  double multiplications = 0.0;
  double additions = 0.0;

  double total() const { return multiplications + additions; }
};

ComplexityReport complexity_vlda(std::int64_t m, std::int64_t n_t, std::int64_t n_f, std::int64_t n_sat);
ComplexityReport complexity_nch(std::int64_t m, std::int64_t n_f, std::int64_t n_nch, std::int64_t n_sat);

/// Counts for the VLDA pipeline at sampling rate fs and coherent length T:
/// M = fs * 1 ms, N_T = T / 1 ms, N_f = 2 T (f_max - f_min) search intervals.
ComplexityReport vlda_complexity_at(double fs, double coherent_length, std::int64_t n_sat = 63,
                                    double f_min = -6.0, double f_max = 6.0);
/// NCH counts at fs with the default 21-bin carrier grid.
ComplexityReport nch_complexity_at(double fs, std::int64_t n_nch, std::int64_t n_sat = 63,
                                   std::int64_t n_f = 21);

/// Operation counts versus sampling rate: one row per fs for every VLDA T and NCH N_nch given.
std::string complexity_sweep_csv(std::span<const double> fs_values, std::span<const double> vlda_t,
                                 std::span<const int> nch_n, std::int64_t n_sat = 63);

}  // namespace bdsacq
