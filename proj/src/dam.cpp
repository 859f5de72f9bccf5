#include "bdsacq/dam.hpp"

#include <json.hpp>

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace bdsacq {

namespace {

constexpr double kTrigTolerance = 1e-9;

// integral_0^x K0(t) dt via t = e^s, composite Simpson.
double integral_k0(double x) {
  if (x <= 0.0) return 0.0;
  constexpr int kIntervals = 4000;  // even
  const double hi = std::log(x);
  const double lo = hi - 45.0;
  const double h = (hi - lo) / kIntervals;
  auto f = [](double s) {
    const double t = std::exp(s);
    return std::cyl_bessel_k(0.0, t) * t;
  };
  double sum = f(lo) + f(hi);
  for (int i = 1; i < kIntervals; ++i) sum += f(lo + i * h) * (i % 2 ? 4.0 : 2.0);
  return sum * h / 3.0;
}

}  // namespace

void DamConfig::validate(double code_period) const {
  if (!(fs > 0.0)) throw std::invalid_argument("DamConfig: fs must be positive");
  if (delay_samples < 1) throw std::invalid_argument("DamConfig: delay must be at least one sample");
  if (std::abs(tau - delay_samples / fs) > 1e-12) {
    throw std::invalid_argument("DamConfig: tau must equal delay_samples / fs");
  }
  if (tau > code_period / 100.0 + 1e-15) {
    throw std::invalid_argument("DamConfig: delay must not exceed 1% of the code period");
  }
}

DamConfig select_delay(double fs, double f_if, double bandwidth, double code_period) {
  if (!(fs > 0.0 && f_if > 0.0 && bandwidth > 0.0 && code_period > 0.0)) {
    throw std::invalid_argument("select_delay: fs, f_if, bandwidth and period must be positive");
  }
  const auto max_delay = static_cast<int>(std::floor(fs * code_period / 100.0 + 1e-9));
  int cos_hits = 0;
  int sin_hits = 0;
  for (int d = 1; d <= max_delay; ++d) {
    const double tau = d / fs;
    const bool cos_ok = std::abs(std::cos(constants::kTwoPi * f_if * tau)) >= 1.0 - kTrigTolerance;
    const bool sin_ok = std::abs(std::sin(constants::kPi * bandwidth * tau)) <= kTrigTolerance;
    cos_hits += cos_ok;
    sin_hits += sin_ok;
    if (cos_ok && sin_ok) {
      DamConfig config;
      config.delay_samples = d;
      config.tau = tau;
      config.fs = fs;
      config.f_if = f_if;
      config.bandwidth = bandwidth;
      return config;
    }
  }
  std::ostringstream msg;
  msg << "select_delay: no delay up to " << max_delay << " samples (tau <= T0/100) satisfies ";
  if (cos_hits == 0 && sin_hits == 0) {
    msg << "|cos(2 pi f tau)| = 1 or sin(pi B tau) = 0";
  } else if (cos_hits == 0) {
    msg << "|cos(2 pi f tau)| = 1";
  } else if (sin_hits == 0) {
    msg << "sin(pi B tau) = 0";
  } else {
    msg << "|cos(2 pi f tau)| = 1 and sin(pi B tau) = 0 simultaneously (" << cos_hits << " and "
        << sin_hits << " delays meet them separately)";
  }
  throw InfeasibleError(msg.str());
}

SampledSignal delay_multiply(const SampledSignal& signal, int delay_samples) {
  if (delay_samples < 1) throw std::invalid_argument("delay_multiply: delay must be >= 1");
  if (signal.size() <= delay_samples) {
    throw std::invalid_argument("delay_multiply: signal shorter than the delay");
  }
  SampledSignal out;
  out.fs = signal.fs;
  out.origin = signal.origin;
  out.samples = delay_multiply(signal.samples, delay_samples);
  return out;
}

double bandlimited_noise_acf(double tau, double n0, double bandwidth, double f_if) {
  if (!(bandwidth > 0.0)) throw std::invalid_argument("bandlimited_noise_acf: bandwidth must be positive");
  const double x = bandwidth * tau;
  const double sinc = (x == 0.0) ? 1.0 : std::sin(constants::kPi * x) / (constants::kPi * x);
  return n0 * bandwidth * sinc * std::cos(constants::kTwoPi * f_if * tau);
}

double product_noise_pdf(double u, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("product_noise_pdf: sigma must be positive");
  if (u == 0.0) return std::numeric_limits<double>::infinity();
  const double s2 = sigma * sigma;
  return std::cyl_bessel_k(0.0, std::abs(u) / s2) / (constants::kPi * s2);
}

double product_noise_cdf(double u, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("product_noise_cdf: sigma must be positive");
  const double x = std::abs(u) / (sigma * sigma);
  // integral_0^inf K0 = pi / 2, so the half-line mass is 1/2.
  const double half = std::min(0.5, integral_k0(x) / constants::kPi);
  return u >= 0.0 ? 0.5 + half : 0.5 - half;
}

LinkBudget link_budget(double received_power_dbw, double noise_temperature, double bandwidth,
                       double required_baseband_snr) {
  if (!(bandwidth > 0.0)) throw std::invalid_argument("link_budget: bandwidth must be positive");
  if (!(noise_temperature > 0.0)) throw std::invalid_argument("link_budget: temperature must be positive");
  LinkBudget b;
  b.received_power = received_power_dbw;
  b.noise_temperature = noise_temperature;
  b.bandwidth = bandwidth;
  b.required_baseband_snr = required_baseband_snr;
  b.snr = received_power_dbw - 10.0 * std::log10(constants::kBoltzmann * noise_temperature * bandwidth);
  b.snr_after_dam = 2.0 * b.snr;
  // snr_after_dam + 10 log10(B Tc) >= required
  b.min_coherent_length = std::pow(10.0, (required_baseband_snr - b.snr_after_dam) / 10.0) / bandwidth;
  return b;
}

double max_code_doppler(double v_sat, double r_earth, double r_sat, double code_rate) {
  if (v_sat < 0.0 || !(r_earth > 0.0) || !(code_rate > 0.0) || !(r_sat > r_earth)) {
    throw std::invalid_argument("max_code_doppler: need v >= 0, r_earth > 0, r_sat > r_earth");
  }
  return v_sat * r_earth * code_rate / (r_sat * constants::kSpeedOfLight);
}

double circular_orbit_speed(double r_sat, double gm) { return std::sqrt(gm / r_sat); }

std::string to_json(const LinkBudget& b) {
  nlohmann::ordered_json j;
  j["received_power_dbw"] = b.received_power;
  j["noise_temperature_k"] = b.noise_temperature;
  j["bandwidth_hz"] = b.bandwidth;
  j["snr_db"] = b.snr;
  j["snr_after_dam_db"] = b.snr_after_dam;
  j["required_baseband_snr_db"] = b.required_baseband_snr;
  j["min_coherent_length_s"] = b.min_coherent_length;
  return j.dump(2);
}

}  // namespace bdsacq
