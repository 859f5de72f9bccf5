#include "bdsacq/evalbench.hpp"

#include "bdsacq/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>

namespace bdsacq {

namespace {

// Noise level for signal-free trials. The ratio statistic is scale free, so
// the value only has to be finite.
constexpr double kNoiseOnlyCn0 = 40.0;

struct Banks {
  std::optional<DamReferenceBank> dam;
  std::optional<CodeReferenceBank> code;
};

Banks make_banks(const CampaignConfig& config) {
  const int prn = config.scenario.prn;
  Banks banks;
  if (config.method == Method::Vlda) {
    banks.dam.emplace(std::span<const int>(&prn, 1), config.vlda.dam.delay_samples, config.scenario.fs);
  } else {
    banks.code.emplace(std::span<const int>(&prn, 1), config.scenario.fs);
  }
  return banks;
}

AcquisitionResult acquire_one(const CampaignConfig& config, const Banks& banks,
                              const SampledSignal& signal, const DetectionThreshold& threshold) {
  const int prn = config.scenario.prn;
  const std::span<const int> prns(&prn, 1);
  if (config.method == Method::Vlda) {
    VldaConfig vc = config.vlda;
    vc.threshold = threshold;
    vc.jobs = 1;
    vc.estimate_carrier = false;
    return acquire_vlda(signal, *banks.dam, prns, vc).front();
  }
  NchConfig nc = config.nch;
  nc.threshold = threshold;
  nc.jobs = 1;
  return acquire_nch(signal, *banks.code, prns, nc).front();
}

Eigen::Index samples_per_code_period(double fs) {
  return static_cast<Eigen::Index>(std::llround(fs * constants::kB1iCodePeriod));
}

}  // namespace

std::string to_string(Method method) { return method == Method::Vlda ? "vlda" : "nch"; }

Method parse_method(const std::string& text) {
  if (text == "vlda" || text == "VLDA") return Method::Vlda;
  if (text == "nch" || text == "NCH") return Method::Nch;
  throw std::invalid_argument("unknown method '" + text + "' (expected vlda or nch)");
}

double CampaignConfig::parameter() const {
  return method == Method::Vlda ? vlda.coherent_length : static_cast<double>(nch.n_nch);
}

Eigen::Index CampaignConfig::trial_samples() const {
  if (method == Method::Vlda) return vlda.required_samples();
  return nch.n_nch * samples_per_code_period(scenario.fs);
}

std::uint64_t trial_seed(std::uint64_t master_seed, std::uint64_t trial_index) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(master_seed) ^ trial_index);
}

ScenarioConfig trial_scenario(const CampaignConfig& config, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  ScenarioConfig sc = config.scenario;
  const Eigen::Index m = samples_per_code_period(sc.fs);
  sc.code_phase_offset = static_cast<double>(std::uniform_int_distribution<Eigen::Index>(0, m - 1)(rng));
  sc.carrier_phase = std::uniform_real_distribution<double>(0.0, constants::kTwoPi)(rng);
  sc.nav_seed = rng();
  sc.noise_seed = rng();
  sc.duration = static_cast<double>(config.trial_samples()) / sc.fs;
  return sc;
}

std::vector<double> noise_only_ratios(const CampaignConfig& config, int trials,
                                      std::uint64_t master_seed) {
  if (trials < 1) throw std::invalid_argument("noise_only_ratios: trials must be positive");
  const Banks banks = make_banks(config);
  std::vector<double> ratios(static_cast<std::size_t>(trials));
  const DetectionThreshold none{std::numeric_limits<double>::infinity(), 0.0};
  parallel_for(ratios.size(), config.jobs, [&](std::size_t, std::size_t t) {
    const ScenarioConfig sc = trial_scenario(config, trial_seed(master_seed, t));
    SampledSignal signal;
    signal.fs = sc.fs;
    signal.f_if = sc.f_if;
    signal.samples = SampleArray::Zero(config.trial_samples());
    signal.origin.description = "noise only";
    signal = add_awgn(std::move(signal), kNoiseOnlyCn0, sc.noise_seed, sc.signal_power);
    ratios[t] = acquire_one(config, banks, signal, none).ratio;
  });
  return ratios;
}

DetectionThreshold threshold_from_ratios(std::vector<double> ratios, double pfa_target) {
  if (!(pfa_target > 0.0 && pfa_target <= 1.0)) {
    throw std::invalid_argument("threshold: pfa_target must lie in (0, 1]");
  }
  if (ratios.empty()) throw std::invalid_argument("threshold: no noise-only trials");
  // A NaN ratio (all-zero input) can never be detected; rank it lowest.
  for (double& r : ratios) {
    if (std::isnan(r)) r = -std::numeric_limits<double>::infinity();
  }
  std::sort(ratios.begin(), ratios.end());
  const auto n = static_cast<std::int64_t>(ratios.size());
  const auto above = static_cast<std::int64_t>(std::floor(pfa_target * static_cast<double>(n) + 1e-9));
  DetectionThreshold th;
  th.target_pfa = pfa_target;
  if (above >= n) {
    // Every trial must exceed gamma; stay just below the minimum.
    th.gamma = std::nextafter(ratios.front(), -std::numeric_limits<double>::infinity());
  } else {
    th.gamma = ratios[static_cast<std::size_t>(n - above - 1)];
  }
  th.gamma = std::max(th.gamma, 1.0);
  return th;
}

DetectionThreshold calibrate_threshold(const CampaignConfig& config, double pfa_target, int trials,
                                       std::uint64_t master_seed) {
  if (!(pfa_target > 0.0 && pfa_target <= 1.0)) {
    throw std::invalid_argument("calibrate_threshold: pfa_target must lie in (0, 1]");
  }
  if (static_cast<double>(trials) < 10.0 / pfa_target - 1e-9) {
    throw std::invalid_argument("calibrate_threshold: need at least 10 / pfa_target trials");
  }
  return threshold_from_ratios(noise_only_ratios(config, trials, master_seed), pfa_target);
}

double false_alarm_rate(std::span<const double> ratios, const DetectionThreshold& threshold) {
  if (ratios.empty()) return 0.0;
  const auto hits = std::count_if(ratios.begin(), ratios.end(),
                                  [&](double r) { return !std::isnan(r) && r > threshold.gamma; });
  return static_cast<double>(hits) / static_cast<double>(ratios.size());
}

std::vector<TrialOutcome> run_trials(const CampaignConfig& config, double cn0, int trials,
                                     const DetectionThreshold& threshold, std::uint64_t master_seed) {
  if (trials < 1) throw std::invalid_argument("run_trials: trials must be positive");
  const Banks banks = make_banks(config);
  const Eigen::Index m = samples_per_code_period(config.scenario.fs);
  std::vector<TrialOutcome> out(static_cast<std::size_t>(trials));
  parallel_for(out.size(), config.jobs, [&](std::size_t, std::size_t t) {
    ScenarioConfig sc = trial_scenario(config, trial_seed(master_seed, t));
    sc.cn0 = cn0;
    SampledSignal signal = add_awgn(synth_if_signal(sc), cn0, sc.noise_seed, sc.signal_power);
    const AcquisitionResult r = acquire_one(config, banks, signal, threshold);
    const auto truth = static_cast<Eigen::Index>(std::llround(sc.code_phase_offset)) % m;
    Eigen::Index d = std::abs(r.code_phase - truth);
    d = std::min(d, m - d);
    out[t] = {r.detected, d <= config.phase_tolerance, r.ratio};
  });
  return out;
}

double detection_probability(const CampaignConfig& config, double cn0, int trials,
                             const DetectionThreshold& threshold, std::uint64_t master_seed) {
  const auto outcomes = run_trials(config, cn0, trials, threshold, master_seed);
  const auto hits = std::count_if(outcomes.begin(), outcomes.end(),
                                  [](const TrialOutcome& o) { return o.detected && o.phase_ok; });
  return static_cast<double>(hits) / static_cast<double>(outcomes.size());
}

BinomialInterval wilson_interval(int successes, int trials, double z) {
  if (trials <= 0) return {0.0, 1.0};
  const double n = trials;
  const double p = successes / n;
  const double z2 = z * z;
  const double centre = (p + z2 / (2 * n)) / (1 + z2 / n);
  const double half = z * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / (1 + z2 / n);
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

MonteCarloReport monte_carlo(const CampaignConfig& config, std::span<const double> cn0_points,
                             int trials, const DetectionThreshold& threshold,
                             std::uint64_t master_seed) {
  MonteCarloReport rep;
  rep.method = config.method;
  rep.parameter = config.parameter();
  rep.trials_per_point = trials;
  rep.pfa_target = threshold.target_pfa;
  rep.threshold = threshold.gamma;
  rep.master_seed = master_seed;
  for (double cn0 : cn0_points) {
    const double pd = detection_probability(config, cn0, trials, threshold, master_seed);
    rep.cn0_points.push_back(cn0);
    rep.pd.push_back(pd);
    rep.ci.push_back(wilson_interval(static_cast<int>(std::lround(pd * trials)), trials));
  }
  return rep;
}

SensitivityResult sensitivity_search(const CampaignConfig& config, const DetectionThreshold& threshold,
                                     int trials, std::uint64_t master_seed, double cn0_low,
                                     double cn0_high, double pd_target, double resolution) {
  if (!(resolution > 0.0)) throw std::invalid_argument("sensitivity_search: resolution must be positive");
  if (!(cn0_high > cn0_low)) throw std::invalid_argument("sensitivity_search: empty C/N0 range");
  SensitivityResult res;
  res.method = config.method;
  res.parameter = config.parameter();
  res.resolution = resolution;
  res.pd_target = pd_target;

  auto cn0_at = [&](std::int64_t i) { return cn0_low + static_cast<double>(i) * resolution; };
  std::map<std::int64_t, double> cache;
  auto pd_at = [&](std::int64_t i) {
    auto it = cache.find(i);
    if (it != cache.end()) return it->second;
    const double pd = detection_probability(config, cn0_at(i), trials, threshold, master_seed);
    cache.emplace(i, pd);
    res.evaluated.emplace_back(cn0_at(i), pd);
    return pd;
  };

  std::int64_t lo = 0;
  std::int64_t hi = static_cast<std::int64_t>(std::ceil((cn0_high - cn0_low) / resolution - 1e-9));
  const double pd_lo = pd_at(lo);
  const double pd_hi = pd_at(hi);
  if (!(pd_lo < pd_target) || !(pd_hi >= pd_target)) {
    std::ostringstream msg;
    msg << "sensitivity_search: Pd target " << pd_target << " not bracketed; Pd(" << cn0_at(lo)
        << ") = " << pd_lo << ", Pd(" << cn0_at(hi) << ") = " << pd_hi;
    throw InfeasibleError(msg.str());
  }
  while (hi - lo > 1) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    if (pd_at(mid) >= pd_target) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  res.cn0_at_pd90 = cn0_at(hi);
  res.bracket_low = cn0_at(lo);
  return res;
}

ComplexityReport complexity_vlda(std::int64_t m, std::int64_t n_t, std::int64_t n_f, std::int64_t n_sat) {
  if (m <= 0 || n_t < 0 || n_f < 0 || n_sat < 0) {
    throw std::invalid_argument("complexity_vlda: counts must be non-negative, M positive");
  }
  const double dm = static_cast<double>(m);
  const double lg = std::log2(dm);
  const double nf = static_cast<double>(n_f);
  const double ns = static_cast<double>(n_sat);
  ComplexityReport r{Method::Vlda, m, n_t, n_f, n_sat, 0, 0.0, 0.0};
  r.multiplications = dm * (static_cast<double>(n_t) + 4.0 * nf * ns + 2.0 * nf * ns * lg);
  r.additions = dm * nf * (static_cast<double>(n_t) + 2.0 * ns + 3.0 * ns * lg);
  return r;
}

ComplexityReport complexity_nch(std::int64_t m, std::int64_t n_f, std::int64_t n_nch, std::int64_t n_sat) {
  if (m <= 0 || n_f < 0 || n_nch < 0 || n_sat < 0) {
    throw std::invalid_argument("complexity_nch: counts must be non-negative, M positive");
  }
  const double dm = static_cast<double>(m);
  const double lg = std::log2(dm);
  const double base = dm * static_cast<double>(n_f) * static_cast<double>(n_nch);
  const double ns = static_cast<double>(n_sat);
  ComplexityReport r{Method::Nch, m, 0, n_f, n_sat, n_nch, 0.0, 0.0};
  r.multiplications = base * (2.0 + 6.0 * ns + 4.0 * ns * lg);
  r.additions = base * ns * (4.0 + 6.0 * lg);
  return r;
}

ComplexityReport vlda_complexity_at(double fs, double coherent_length, std::int64_t n_sat,
                                    double f_min, double f_max) {
  const auto m = static_cast<std::int64_t>(std::llround(fs * constants::kB1iCodePeriod));
  const auto n_t = static_cast<std::int64_t>(std::llround(coherent_length / constants::kB1iCodePeriod));
  const auto n_f = static_cast<std::int64_t>(std::llround(2.0 * coherent_length * (f_max - f_min)));
  return complexity_vlda(m, n_t, n_f, n_sat);
}

ComplexityReport nch_complexity_at(double fs, std::int64_t n_nch, std::int64_t n_sat, std::int64_t n_f) {
  const auto m = static_cast<std::int64_t>(std::llround(fs * constants::kB1iCodePeriod));
  return complexity_nch(m, n_f, n_nch, n_sat);
}

std::string complexity_sweep_csv(std::span<const double> fs_values, std::span<const double> vlda_t,
                                 std::span<const int> nch_n, std::int64_t n_sat) {
  std::ostringstream out;
  out.precision(10);
  out << "fs_mhz,method,parameter,M,N_T,N_f,N_nch,multiplications,additions,total\n";
  auto row = [&](double fs, const ComplexityReport& r, double parameter) {
    out << fs / 1e6 << ',' << to_string(r.method) << ',' << parameter << ',' << r.m << ',' << r.n_t
        << ',' << r.n_f << ',' << r.n_nch << ',' << r.multiplications << ',' << r.additions << ','
        << r.total() << '\n';
  };
  for (double fs : fs_values) {
    for (double t : vlda_t) row(fs, vlda_complexity_at(fs, t, n_sat), t);
    for (int n : nch_n) row(fs, nch_complexity_at(fs, n, n_sat), n);
  }
  return out.str();
}

}  // namespace bdsacq
