#pragma once

#include "bdsacq/types.hpp"

#include <unsupported/Eigen/FFT>

#include <span>
#include <stdexcept>

namespace bdsacq {

/// Real-input FFT working on half spectra (n/2 + 1 bins).
///
/// Wraps Eigen's FFT front end. The plan cache inside is not thread safe, so
/// each worker owns its own instance.
template <typename Scalar>
class RealFft {
 public:
  using Complex = std::complex<Scalar>;

  RealFft() { fft_.SetFlag(Eigen::FFT<Scalar>::HalfSpectrum); }

  static Eigen::Index half_size(Eigen::Index n) { return n / 2 + 1; }

  void forward(std::span<const Scalar> x, Spectrum<Scalar>& out) {
    const auto n = static_cast<Eigen::Index>(x.size());
    out.resize(half_size(n));
    if (n == 0) return;
    fft_.fwd(out.data(), x.data(), n);
  }

  Spectrum<Scalar> forward(std::span<const Scalar> x) {
    Spectrum<Scalar> out;
    forward(x, out);
    return out;
  }

  /// Inverse of a half spectrum to n real samples, scaled by 1/n.
  void inverse(const Spectrum<Scalar>& half, Eigen::Index n, Samples<Scalar>& out) {
    if (half.size() != half_size(n)) {
      throw std::invalid_argument("RealFft::inverse: spectrum size does not match n");
    }
    out.resize(n);
    if (n == 0) return;
    fft_.inv(out.data(), half.data(), n);
  }

 private:
  Eigen::FFT<Scalar> fft_;
};

/// Complex-to-complex FFT over full spectra.
template <typename Scalar>
class ComplexFft {
 public:
  void forward(const Spectrum<Scalar>& x, Spectrum<Scalar>& out) {
    out.resize(x.size());
    if (x.size() > 0) fft_.fwd(out.data(), x.data(), x.size());
  }
  void inverse(const Spectrum<Scalar>& x, Spectrum<Scalar>& out) {
    out.resize(x.size());
    if (x.size() > 0) fft_.inv(out.data(), x.data(), x.size());
  }

 private:
  Eigen::FFT<Scalar> fft_;
};

/// Expands a real-input half spectrum to the full conjugate-symmetric one.
template <typename Scalar>
Spectrum<Scalar> full_spectrum(const Spectrum<Scalar>& half, Eigen::Index n) {
  Spectrum<Scalar> full(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    full[k] = k < half.size() ? half[k] : std::conj(half[n - k]);
  }
  return full;
}

/// Circular cross-correlation r[k] = sum_n block[n] * ref[(n - k) mod M],
/// given the cached half spectrum of ref. Index k is the code phase.
template <typename Scalar>
void circular_correlate(RealFft<Scalar>& fft, std::span<const Scalar> block,
                        const Spectrum<Scalar>& ref_spectrum, Samples<Scalar>& out) {
  const auto m = static_cast<Eigen::Index>(block.size());
  if (ref_spectrum.size() != RealFft<Scalar>::half_size(m)) {
    throw std::invalid_argument("circular_correlate: block and reference lengths differ");
  }
  Spectrum<Scalar> spec;
  fft.forward(block, spec);
  spec.array() *= ref_spectrum.array().conjugate();
  fft.inverse(spec, m, out);
}

/// Same as above when the block spectrum is already available.
template <typename Scalar>
void correlate_spectra(RealFft<Scalar>& fft, const Spectrum<Scalar>& block_spectrum,
                       const Spectrum<Scalar>& ref_spectrum, Eigen::Index m,
                       Spectrum<Scalar>& scratch, Samples<Scalar>& out) {
  if (block_spectrum.size() != ref_spectrum.size()) {
    throw std::invalid_argument("correlate_spectra: spectrum sizes differ");
  }
  scratch = block_spectrum.array() * ref_spectrum.array().conjugate();
  fft.inverse(scratch, m, out);
}

template <typename Scalar>
Samples<Scalar> circular_correlate(std::span<const Scalar> block,
                                   const Spectrum<Scalar>& ref_spectrum) {
  RealFft<Scalar> fft;
  Samples<Scalar> out;
  circular_correlate(fft, block, ref_spectrum, out);
  return out;
}

template <typename Derived>
std::span<const typename Derived::Scalar> as_span(const Eigen::PlainObjectBase<Derived>& x) {
  return {x.data(), static_cast<std::size_t>(x.size())};
}

}  // namespace bdsacq
