#pragma once

#include "bdsacq/sigsynth.hpp"
#include "bdsacq/types.hpp"

#include <string>

namespace bdsacq {

struct DamConfig {
  int delay_samples = 10;
  double tau = 1.0e-6;  // s, delay_samples / fs
  double fs = constants::kDefaultFs;
  double f_if = constants::kDefaultIf;
  double bandwidth = constants::kDefaultBandwidth;

  void validate(double code_period = constants::kB1iCodePeriod) const;
};

struct LinkBudget {
  double received_power = 0.0;     // dBW
  double noise_temperature = 0.0;  // K
  double bandwidth = 0.0;          // Hz
  double snr = 0.0;                // dB
  double snr_after_dam = 0.0;      // dB
  double required_baseband_snr = 14.0;  // dB
  double min_coherent_length = 0.0;     // s
};

/// Smallest delay (in samples) with |cos(2 pi f_if tau)| = 1 and
/// sin(pi B tau) = 0 to within 1e-9, tau <= code_period / 100.
/// Throws InfeasibleError when nothing qualifies.
DamConfig select_delay(double fs, double f_if, double bandwidth,
                       double code_period = constants::kB1iCodePeriod);

/// out[n] = x[n + delay] * x[n], n in [0, N - delay).
template <typename Derived>
Samples<typename Derived::Scalar> delay_multiply(const Eigen::ArrayBase<Derived>& x, int delay) {
  const Eigen::Index n = x.size() - delay;
  return x.tail(n) * x.head(n);
}

/// Delay-and-multiply on a sampled signal. The carrier is removed, so the
/// result carries no IF.
SampledSignal delay_multiply(const SampledSignal& signal, int delay_samples);

/// N0 * B * sinc(B tau) * cos(2 pi f tau).
double bandlimited_noise_acf(double tau, double n0, double bandwidth, double f_if);

/// Density of the product of two independent N(0, sigma^2) variables,
/// K0(|u| / sigma^2) / (pi sigma^2). Diverges at u = 0, where +inf is returned.
double product_noise_pdf(double u, double sigma);

/// Cumulative distribution of the same product law (for goodness-of-fit checks).
double product_noise_cdf(double u, double sigma);

LinkBudget link_budget(double received_power_dbw, double noise_temperature, double bandwidth,
                       double required_baseband_snr = 14.0);

/// v_sat * R_e * f_R / (R_sat * c).
double max_code_doppler(double v_sat, double r_earth, double r_sat, double code_rate);

/// Circular orbit speed sqrt(GM / r).
double circular_orbit_speed(double r_sat, double gm = constants::kEarthGm);

std::string to_json(const LinkBudget& budget);

}  // namespace bdsacq
