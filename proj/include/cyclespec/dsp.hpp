// Copyright 2026 CycleSpec Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <vector>

#include "cyclespec/errors.hpp"

// STFT analysis/synthesis, polar decomposition, phase unwrap/rewrap, the
// four-resolution spectra bank and MFCC extraction. Everything here is a
// pure function of its inputs; Scalar is double throughout the pipeline but
// the core stays generic.
namespace cyclespec::dsp {

using Eigen::Index;

template <class Scalar>
using Plane = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using Column = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

inline constexpr std::array<Index, 4> kBankWindows{1024, 512, 256, 128};
inline constexpr Index kBankHop = 32;
inline constexpr Index kBaseWindow = 1024;
inline constexpr Index kBaseDft = 1024;
inline constexpr double kDefaultSampleRate = 16000.0;

enum class Window { hann, rect };

struct StftGeometry {
  Index window_size = kBaseWindow;
  Index hop = kBankHop;
  Index dft_size = kBaseDft;
  double sample_rate = kDefaultSampleRate;
};

// Complex-valued time-frequency grid; rows are the dft_size/2+1 frequency
// bins, columns are frames.
template <class Scalar>
struct ComplexSpectrogramT {
  Plane<Scalar> real;
  Plane<Scalar> imag;
  StftGeometry geometry;
  Index bins() const { return real.rows(); }
  Index frames() const { return real.cols(); }
};

// Amplitude plane (non-negative) and phase plane unwrapped along frames.
template <class Scalar>
struct PolarSpectrogramT {
  Plane<Scalar> amplitude;
  Plane<Scalar> phase;
  StftGeometry geometry;
  Index bins() const { return amplitude.rows(); }
  Index frames() const { return amplitude.cols(); }
};

// Ordered bank over windows 1024/512/256/128 with shared hop 32.
template <class Scalar>
struct MultiResSpectraT {
  std::vector<PolarSpectrogramT<Scalar>> bank;
};

using ComplexSpectrogram = ComplexSpectrogramT<double>;
using PolarSpectrogram = PolarSpectrogramT<double>;
using MultiResSpectra = MultiResSpectraT<double>;

inline Index frame_count(Index length, Index window, Index hop) {
  return length < window ? 0 : (length - window) / hop + 1;
}

// Periodic Hann, w[k] = 0.5 - 0.5 cos(2 pi k / size).
template <class Scalar>
Column<Scalar> make_window(Window kind, Index size) {
  Column<Scalar> w(size);
  for (Index k = 0; k < size; ++k) {
    w[k] = kind == Window::rect
               ? Scalar(1)
               : Scalar(0.5) -
                     Scalar(0.5) *
                         std::cos(2.0 * std::numbers::pi *
                                  static_cast<double>(k) /
                                  static_cast<double>(size));
  }
  return w;
}

// Frame n covers samples [n*hop, n*hop + window); each frame is windowed,
// zero-padded to dft_size and transformed; dft_size/2+1 bins are kept.
template <class Scalar>
ComplexSpectrogramT<Scalar> stft(std::span<const Scalar> signal,
                                 const StftGeometry& geometry,
                                 Window window_kind = Window::hann) {
  if (signal.empty()) throw InputError("stft: empty signal");
  if (geometry.hop <= 0) throw ConfigError("stft: hop must be positive");
  if (geometry.window_size <= 0 || geometry.dft_size <= 0) {
    throw ConfigError("stft: window and DFT sizes must be positive");
  }
  if (geometry.window_size > geometry.dft_size) {
    throw ConfigError("stft: window larger than DFT size");
  }
  const Index length = static_cast<Index>(signal.size());
  if (length < geometry.window_size) {
    throw InputError("stft: signal shorter than the analysis window");
  }
  const Index frames =
      frame_count(length, geometry.window_size, geometry.hop);
  const Index bins = geometry.dft_size / 2 + 1;
  const Column<Scalar> window =
      make_window<Scalar>(window_kind, geometry.window_size);

  ComplexSpectrogramT<Scalar> out;
  out.geometry = geometry;
  out.real = Plane<Scalar>::Zero(bins, frames);
  out.imag = Plane<Scalar>::Zero(bins, frames);

  Eigen::FFT<Scalar> fft;
  fft.SetFlag(Eigen::FFT<Scalar>::HalfSpectrum);
  std::vector<Scalar> frame(geometry.dft_size, Scalar(0));
  std::vector<std::complex<Scalar>> spectrum;
  for (Index n = 0; n < frames; ++n) {
    const Index start = n * geometry.hop;
    for (Index k = 0; k < geometry.window_size; ++k) {
      frame[k] = window[k] * signal[start + k];
    }
    std::fill(frame.begin() + geometry.window_size, frame.end(), Scalar(0));
    fft.fwd(spectrum, frame);
    for (Index b = 0; b < bins; ++b) {
      out.real(b, n) = spectrum[b].real();
      out.imag(b, n) = spectrum[b].imag();
    }
  }
  return out;
}

// Weighted overlap-add inverse with window-square normalization. Exact on
// the interior; requires hop <= window/2 so the Hann overlap stays COLA.
template <class Scalar>
std::vector<Scalar> istft(const ComplexSpectrogramT<Scalar>& spec,
                          Index length, Window window_kind = Window::hann) {
  const auto& g = spec.geometry;
  if (g.hop <= 0 || g.hop > g.window_size / 2) {
    throw ConfigError("istft: hop must satisfy 0 < hop <= window/2 for "
                      "constant-overlap-add");
  }
  if (spec.bins() != g.dft_size / 2 + 1) {
    throw ShapeError("istft: bin count does not match DFT size");
  }
  const Index frames = spec.frames();
  const Column<Scalar> window =
      make_window<Scalar>(window_kind, g.window_size);

  std::vector<Scalar> accum(static_cast<std::size_t>(length), Scalar(0));
  std::vector<Scalar> weight(static_cast<std::size_t>(length), Scalar(0));

  Eigen::FFT<Scalar> fft;
  fft.SetFlag(Eigen::FFT<Scalar>::HalfSpectrum);
  std::vector<std::complex<Scalar>> spectrum(spec.bins());
  std::vector<Scalar> frame;
  for (Index n = 0; n < frames; ++n) {
    for (Index b = 0; b < spec.bins(); ++b) {
      spectrum[b] = std::complex<Scalar>(spec.real(b, n), spec.imag(b, n));
    }
    fft.inv(frame, spectrum, g.dft_size);
    const Index start = n * g.hop;
    for (Index k = 0; k < g.window_size; ++k) {
      const Index i = start + k;
      if (i >= length) break;
      accum[i] += window[k] * frame[k];
      weight[i] += window[k] * window[k];
    }
  }
  for (Index i = 0; i < length; ++i) {
    accum[i] = weight[i] > Scalar(1e-12) ? accum[i] / weight[i] : Scalar(0);
  }
  return accum;
}

// Principal value in (-pi, pi].
template <class Scalar>
Scalar wrap_to_pi(Scalar d) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  return d - Scalar(two_pi * std::ceil((static_cast<double>(d) -
                                        std::numbers::pi) /
                                       two_pi));
}

// Per-bin continuation along frames: the first frame is kept, successive
// differences are folded into (-pi, pi].
template <class Scalar>
Plane<Scalar> unwrap_phase(const Plane<Scalar>& phase) {
  Plane<Scalar> out = phase;
  for (Index b = 0; b < out.rows(); ++b) {
    for (Index n = 1; n < out.cols(); ++n) {
      out(b, n) = out(b, n - 1) + wrap_to_pi(phase(b, n) - phase(b, n - 1));
    }
  }
  return out;
}

template <class Scalar>
Plane<Scalar> wrap_phase(const Plane<Scalar>& phase) {
  Plane<Scalar> out(phase.rows(), phase.cols());
  for (Index b = 0; b < out.rows(); ++b) {
    for (Index n = 0; n < out.cols(); ++n) out(b, n) = wrap_to_pi(phase(b, n));
  }
  return out;
}

// S = S_a * exp(j S_p): amplitude sqrt(re^2 + im^2), phase atan2 unwrapped
// along frames (0 + 0j maps to amplitude 0, phase 0).
template <class Scalar>
PolarSpectrogramT<Scalar> polar_decompose(
    const ComplexSpectrogramT<Scalar>& spec) {
  PolarSpectrogramT<Scalar> out;
  out.geometry = spec.geometry;
  out.amplitude = (spec.real.square() + spec.imag.square()).sqrt();
  Plane<Scalar> wrapped(spec.bins(), spec.frames());
  for (Index b = 0; b < spec.bins(); ++b) {
    for (Index n = 0; n < spec.frames(); ++n) {
      wrapped(b, n) = std::atan2(spec.imag(b, n), spec.real(b, n));
    }
  }
  out.phase = unwrap_phase(wrapped);
  return out;
}

template <class Scalar>
ComplexSpectrogramT<Scalar> polar_recompose(
    const PolarSpectrogramT<Scalar>& polar) {
  if ((polar.amplitude < Scalar(0)).any()) {
    throw InputError("polar_recompose: negative amplitude");
  }
  ComplexSpectrogramT<Scalar> out;
  out.geometry = polar.geometry;
  out.real = polar.amplitude * polar.phase.cos();
  out.imag = polar.amplitude * polar.phase.sin();
  return out;
}

// Polar bank at windows 1024/512/256/128, hop 32, per-resolution DFT size
// equal to the window size (bins 513/257/129/65).
template <class Scalar>
MultiResSpectraT<Scalar> multi_res(std::span<const Scalar> signal,
                                   double sample_rate = kDefaultSampleRate) {
  if (static_cast<Index>(signal.size()) < kBankWindows[0]) {
    throw InputError("multi_res: signal shorter than the largest window (" +
                     std::to_string(kBankWindows[0]) + " samples)");
  }
  MultiResSpectraT<Scalar> out;
  out.bank.reserve(kBankWindows.size());
  for (const Index w : kBankWindows) {
    StftGeometry g{w, kBankHop, w, sample_rate};
    out.bank.push_back(polar_decompose(stft(signal, g)));
  }
  return out;
}

namespace detail {

inline double hz_to_mel(double hz) {
  return 2595.0 * std::log10(1.0 + hz / 700.0);
}

inline double mel_to_hz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

}  // namespace detail

// Triangular mel filterbank over [0, Nyquist], each row normalized to unit
// sum. Rows x bins.
template <class Scalar>
Plane<Scalar> mel_filterbank(Index n_mels, Index bins, double sample_rate,
                             Index dft_size) {
  const double nyquist = sample_rate / 2.0;
  const double mel_max = detail::hz_to_mel(nyquist);
  std::vector<double> edges(n_mels + 2);
  for (Index j = 0; j < n_mels + 2; ++j) {
    edges[j] = detail::mel_to_hz(mel_max * static_cast<double>(j) /
                                 static_cast<double>(n_mels + 1));
  }
  Plane<Scalar> fb = Plane<Scalar>::Zero(n_mels, bins);
  for (Index j = 0; j < n_mels; ++j) {
    const double lo = edges[j], mid = edges[j + 1], hi = edges[j + 2];
    for (Index b = 0; b < bins; ++b) {
      const double f = sample_rate * static_cast<double>(b) /
                       static_cast<double>(dft_size);
      double w = 0.0;
      if (f > lo && f < hi) {
        w = f <= mid ? (f - lo) / (mid - lo) : (hi - f) / (hi - mid);
      }
      fb(j, b) = static_cast<Scalar>(w);
    }
    const Scalar s = fb.row(j).sum();
    if (s > Scalar(0)) fb.row(j) /= s;
  }
  return fb;
}

// Log mel energies followed by an orthonormal DCT-II; first n_coeffs kept.
// Auxiliary/diagnostic feature; the trainers consume the spectra bank.
template <class Scalar>
Plane<Scalar> mfcc(const PolarSpectrogramT<Scalar>& polar, Index n_mels = 40,
                   Index n_coeffs = 13) {
  if (n_coeffs > n_mels) {
    throw ConfigError("mfcc: n_coeffs must not exceed n_mels");
  }
  const Plane<Scalar> fb = mel_filterbank<Scalar>(
      n_mels, polar.bins(), polar.geometry.sample_rate,
      polar.geometry.dft_size);
  Plane<Scalar> mel = (fb.matrix() * polar.amplitude.matrix()).array();
  mel = mel.max(Scalar(1e-10)).log();

  Plane<Scalar> out(n_coeffs, polar.frames());
  const double norm0 = std::sqrt(1.0 / static_cast<double>(n_mels));
  const double normk = std::sqrt(2.0 / static_cast<double>(n_mels));
  for (Index k = 0; k < n_coeffs; ++k) {
    for (Index n = 0; n < polar.frames(); ++n) {
      double acc = 0.0;
      for (Index j = 0; j < n_mels; ++j) {
        acc += mel(j, n) * std::cos(std::numbers::pi * k * (2 * j + 1) /
                                    (2.0 * static_cast<double>(n_mels)));
      }
      out(k, n) = static_cast<Scalar>((k == 0 ? norm0 : normk) * acc);
    }
  }
  return out;
}

}  // namespace cyclespec::dsp
