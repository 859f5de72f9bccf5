#pragma once

#include <Eigen/Core>

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace bdsacq {

/// Real-valued sample column, templated on the sample scalar.
template <typename Scalar>
using Samples = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Spectrum = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>;

using SampleArray = Samples<double>;
using ComplexSpectrum = Spectrum<double>;

namespace constants {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

inline constexpr double kB1iChipRate = 2.046e6;   // chips/s
inline constexpr int kB1iCodeLength = 2046;       // chips
inline constexpr double kB1iCodePeriod = 1.0e-3;  // s
inline constexpr int kNhLength = 20;
inline constexpr double kNhRate = 1000.0;  // chips/s
inline constexpr double kNavBitRate = 50.0;  // bit/s
inline constexpr int kMaxPrn = 63;

inline constexpr double kBoltzmann = 1.38e-23;  // J/K
inline constexpr double kSpeedOfLight = 2.998e8;  // m/s
inline constexpr double kEarthGm = 3.986e14;  // m^3/s^2
inline constexpr double kEarthRadius = 6.371e6;  // m

// Defaults of the reference simulation setup.
inline constexpr double kDefaultFs = 10.0e6;
inline constexpr double kDefaultIf = 2.5e6;
inline constexpr double kDefaultBandwidth = 4.0e6;
inline constexpr double kDefaultCarrierDoppler = 1678.6;
inline constexpr double kDefaultCodeDoppler = 2.2;

}  // namespace constants

/// Input or output could not be read, written or decoded.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parameters are individually valid but admit no solution.
class InfeasibleError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace bdsacq
