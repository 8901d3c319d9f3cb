// Copyright 2026 CycleSpec Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <doctest.h>

#include <cmath>
#include <numbers>

#include "cyclespec/dsp.hpp"
#include "cyclespec/rng.hpp"
#include "oracles.hpp"

using namespace cyclespec;
using dsp::StftGeometry;

namespace {

std::vector<double> random_signal(std::size_t n, std::uint64_t seed) {
  std::vector<double> x(n);
  Rng rng(seed);
  for (auto& v : x) v = rng.uniform(-1, 1);
  return x;
}

double max_abs(const dsp::Plane<double>& p) {
  return p.size() == 0 ? 0.0 : p.abs().maxCoeff();
}

}  // namespace

TEST_CASE("stft of the zero signal is the zero spectrogram") {
  std::vector<double> x(4096, 0.0);
  const auto spec = dsp::stft<double>(x, StftGeometry{});
  CHECK(spec.bins() == 513);
  CHECK(max_abs(spec.real) == 0.0);
  CHECK(max_abs(spec.imag) == 0.0);
}

TEST_CASE("stft framing locality (rectangular-equivalent impulse check)") {
  // Unit impulse at sample 0; the rectangular window isolates the framing
  // itself from the Hann taper's zero endpoint.
  std::vector<double> x(4096, 0.0);
  x[0] = 1.0;
  const auto spec = dsp::stft<double>(x, StftGeometry{}, dsp::Window::rect);
  const auto energy = (spec.real.square() + spec.imag.square()).colwise().sum();
  CHECK(energy[0] > 0.0);
  for (Eigen::Index n = 1; n < spec.frames(); ++n) {
    CHECK(energy[n] == 0.0);  // frames starting past the impulse see nothing
  }
}

TEST_CASE("stft puts a bin-exact sinusoid in the right bin") {
  const StftGeometry g{};
  const double fs = g.sample_rate;
  for (const int k : {3, 40, 200}) {
    const double f = k * fs / static_cast<double>(g.dft_size);
    std::vector<double> x(4096);
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = std::sin(2.0 * std::numbers::pi * f * i / fs);
    }
    const auto spec = dsp::stft<double>(x, g);
    const auto mean_mag =
        (spec.real.square() + spec.imag.square()).sqrt().rowwise().mean();
    Eigen::Index argmax = 0;
    mean_mag.maxCoeff(&argmax);
    CHECK(argmax == k);

    // Brute-force DFT oracle on one windowed frame agrees.
    const auto window = dsp::make_window<double>(dsp::Window::hann, g.window_size);
    std::vector<double> frame(g.dft_size, 0.0);
    for (Eigen::Index i = 0; i < g.window_size; ++i) frame[i] = window[i] * x[i];
    const auto ref = oracles::dft(frame);
    for (Eigen::Index b = 0; b < spec.bins(); b += 97) {
      CHECK(spec.real(b, 0) == doctest::Approx(ref[b].real()).epsilon(1e-9));
      CHECK(spec.imag(b, 0) == doctest::Approx(ref[b].imag()).epsilon(1e-9));
    }
  }
}

TEST_CASE("stft error contracts") {
  std::vector<double> empty;
  CHECK_THROWS_AS(dsp::stft<double>(empty, StftGeometry{}), InputError);
  std::vector<double> x(4096, 0.1);
  StftGeometry bad_hop{1024, 0, 1024, 16000.0};
  CHECK_THROWS_AS(dsp::stft<double>(x, bad_hop), ConfigError);
  StftGeometry big_window{2048, 32, 1024, 16000.0};
  CHECK_THROWS_AS(dsp::stft<double>(x, big_window), ConfigError);
  std::vector<double> shorty(100, 0.1);
  CHECK_THROWS_AS(dsp::stft<double>(shorty, StftGeometry{}), InputError);
}

TEST_CASE("istft round trip is exact on the interior for all bank windows") {
  const auto x = random_signal(6000, 99);
  for (const Index w : dsp::kBankWindows) {
    const StftGeometry g{w, dsp::kBankHop, w, 16000.0};
    const auto spec = dsp::stft<double>(x, g);
    const auto y = dsp::istft(spec, static_cast<Index>(x.size()));
    REQUIRE(y.size() == x.size());
    double err = 0.0, scale = 0.0;
    for (std::size_t i = static_cast<std::size_t>(w);
         i + static_cast<std::size_t>(w) < x.size(); ++i) {
      err = std::max(err, std::abs(y[i] - x[i]));
      scale = std::max(scale, std::abs(x[i]));
    }
    CHECK(err / scale <= 1e-10);
  }
}

TEST_CASE("istft of the zero spectrogram is the zero signal") {
  dsp::ComplexSpectrogram spec;
  spec.geometry = StftGeometry{};
  spec.real = dsp::Plane<double>::Zero(513, 8);
  spec.imag = dsp::Plane<double>::Zero(513, 8);
  const auto y = dsp::istft(spec, 2048);
  for (const double v : y) CHECK(v == 0.0);
}

TEST_CASE("istft rejects geometry without constant overlap-add") {
  dsp::ComplexSpectrogram spec;
  spec.geometry = StftGeometry{1024, 700, 1024, 16000.0};
  spec.real = dsp::Plane<double>::Zero(513, 4);
  spec.imag = dsp::Plane<double>::Zero(513, 4);
  CHECK_THROWS_AS(dsp::istft(spec, 4096), ConfigError);
}

TEST_CASE("Parseval sanity: frame energy within 1% for window == dft size") {
  const auto x = random_signal(3000, 123);
  const StftGeometry g{1024, 512, 1024, 16000.0};
  const auto spec = dsp::stft<double>(x, g);
  const auto window = dsp::make_window<double>(dsp::Window::hann, g.window_size);
  for (Eigen::Index n = 0; n < spec.frames(); ++n) {
    double time_energy = 0.0;
    for (Eigen::Index k = 0; k < g.window_size; ++k) {
      const double s = window[k] * x[static_cast<std::size_t>(n * g.hop + k)];
      time_energy += s * s;
    }
    double freq_energy = 0.0;
    for (Eigen::Index b = 0; b < spec.bins(); ++b) {
      const double m2 = spec.real(b, n) * spec.real(b, n) +
                        spec.imag(b, n) * spec.imag(b, n);
      const bool edge = (b == 0 || b == spec.bins() - 1);
      freq_energy += (edge ? 1.0 : 2.0) * m2;
    }
    freq_energy /= static_cast<double>(g.dft_size);
    CHECK(freq_energy ==
          doctest::Approx(time_energy).epsilon(0.01));
  }
}

TEST_CASE("polar decomposition basics") {
  dsp::ComplexSpectrogram spec;
  spec.geometry = StftGeometry{};
  spec.real = dsp::Plane<double>::Zero(2, 1);
  spec.imag = dsp::Plane<double>::Zero(2, 1);
  spec.real(0, 0) = 1.0;  // 1 + 0j
  spec.imag(1, 0) = 1.0;  // 0 + 1j
  const auto polar = dsp::polar_decompose(spec);
  CHECK(polar.amplitude(0, 0) == doctest::Approx(1.0));
  CHECK(polar.phase(0, 0) == doctest::Approx(0.0));
  CHECK(polar.amplitude(1, 0) == doctest::Approx(1.0));
  CHECK(polar.phase(1, 0) == doctest::Approx(std::numbers::pi / 2));
}

TEST_CASE("polar recompose basics and error contract") {
  dsp::PolarSpectrogram polar;
  polar.geometry = StftGeometry{};
  polar.amplitude = dsp::Plane<double>::Constant(1, 2, 2.0);
  polar.phase = dsp::Plane<double>::Zero(1, 2);
  polar.phase(0, 1) = std::numbers::pi;
  const auto spec = dsp::polar_recompose(polar);
  CHECK(spec.real(0, 0) == doctest::Approx(2.0));
  CHECK(spec.imag(0, 0) == doctest::Approx(0.0));
  CHECK(spec.real(0, 1) == doctest::Approx(-2.0));

  polar.amplitude(0, 0) = -0.5;
  CHECK_THROWS_AS(dsp::polar_recompose(polar), InputError);
}

TEST_CASE("polar decompose/recompose are mutually inverse to 1e-12") {
  Rng rng(5);
  dsp::ComplexSpectrogram spec;
  spec.geometry = StftGeometry{};
  spec.real = dsp::Plane<double>::Zero(33, 17);
  spec.imag = dsp::Plane<double>::Zero(33, 17);
  for (Eigen::Index b = 0; b < 33; ++b) {
    for (Eigen::Index n = 0; n < 17; ++n) {
      spec.real(b, n) = rng.uniform(-3, 3);
      spec.imag(b, n) = rng.uniform(-3, 3);
    }
  }
  const auto back = dsp::polar_recompose(dsp::polar_decompose(spec));
  CHECK(max_abs(back.real - spec.real) <= 1e-12);
  CHECK(max_abs(back.imag - spec.imag) <= 1e-12);
}

TEST_CASE("unwrap_phase minimal-jump continuation") {
  dsp::Plane<double> row(1, 2);
  row(0, 0) = 3.0;
  row(0, 1) = -3.0;
  const auto un = dsp::unwrap_phase(row);
  CHECK(un(0, 0) == doctest::Approx(3.0));
  CHECK(un(0, 1) == doctest::Approx(2.0 * std::numbers::pi - 3.0));

  dsp::Plane<double> constant = dsp::Plane<double>::Constant(3, 5, 1.25);
  const auto same = dsp::unwrap_phase(constant);
  CHECK(max_abs(same - constant) == 0.0);
}

TEST_CASE("wrap(unwrap(p)) == p and jumps stay within pi") {
  Rng rng(17);
  dsp::Plane<double> p(6, 40);
  for (Eigen::Index b = 0; b < p.rows(); ++b) {
    for (Eigen::Index n = 0; n < p.cols(); ++n) {
      p(b, n) = rng.uniform(-std::numbers::pi, std::numbers::pi);
    }
  }
  const auto un = dsp::unwrap_phase(p);
  const auto rewrapped = dsp::wrap_phase(un);
  CHECK(max_abs(rewrapped - p) <= 1e-12);
  for (Eigen::Index b = 0; b < un.rows(); ++b) {
    for (Eigen::Index n = 1; n < un.cols(); ++n) {
      CHECK(std::abs(un(b, n) - un(b, n - 1)) <=
            std::numbers::pi + 1e-12);
    }
  }
}

TEST_CASE("multi_res bank geometry") {
  const auto x = random_signal(4096, 3);
  const auto spectra = dsp::multi_res<double>(x);
  REQUIRE(spectra.bank.size() == 4);
  const Index want_bins[4] = {513, 257, 129, 65};
  for (int i = 0; i < 4; ++i) {
    CHECK(spectra.bank[i].bins() == want_bins[i]);
    const Index w = dsp::kBankWindows[i];
    CHECK(spectra.bank[i].frames() == (4096 - w) / 32 + 1);
  }
  CHECK_THROWS_AS(dsp::multi_res<double>(std::span<const double>(x.data(), 512)),
                  InputError);
}

TEST_CASE("multi_res of the zero signal has zero amplitudes") {
  std::vector<double> x(2048, 0.0);
  const auto spectra = dsp::multi_res<double>(x);
  for (const auto& polar : spectra.bank) {
    CHECK(max_abs(polar.amplitude) == 0.0);
  }
}

TEST_CASE("mfcc of a flat spectrum concentrates in coefficient 0") {
  dsp::PolarSpectrogram polar;
  polar.geometry = StftGeometry{};
  polar.amplitude = dsp::Plane<double>::Constant(513, 4, 1.0);
  polar.phase = dsp::Plane<double>::Zero(513, 4);
  const auto coeffs = dsp::mfcc(polar);
  REQUIRE(coeffs.rows() == 13);
  double tail_energy = 0.0;
  for (Eigen::Index k = 1; k < coeffs.rows(); ++k) {
    tail_energy += coeffs(k, 0) * coeffs(k, 0);
  }
  CHECK(tail_energy <= 1e-16);
  for (Eigen::Index k = 1; k < coeffs.rows(); ++k) {
    CHECK(std::abs(coeffs(k, 0)) <= 1e-8);
  }
}

TEST_CASE("mfcc log-floor on zero amplitude") {
  dsp::PolarSpectrogram polar;
  polar.geometry = StftGeometry{};
  polar.amplitude = dsp::Plane<double>::Zero(513, 2);
  polar.phase = dsp::Plane<double>::Zero(513, 2);
  const auto coeffs = dsp::mfcc(polar, 40, 13);
  // Orthonormal DCT-II of a constant vector c over J mels: coefficient 0 is
  // c * sqrt(J), the rest vanish.
  const double want_c0 = std::log(1e-10) * std::sqrt(40.0);
  CHECK(coeffs(0, 0) == doctest::Approx(want_c0).epsilon(1e-9));
  for (Eigen::Index k = 1; k < coeffs.rows(); ++k) {
    CHECK(std::abs(coeffs(k, 0)) <= 1e-9);
  }
}

TEST_CASE("mel filterbank rows are normalized and cover the band") {
  const auto fb = dsp::mel_filterbank<double>(40, 513, 16000.0, 1024);
  for (Eigen::Index j = 0; j < fb.rows(); ++j) {
    CHECK(fb.row(j).sum() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(fb.row(j).minCoeff() >= 0.0);
  }
  // Every bin strictly inside (0, Nyquist) is touched by some filter.
  for (Eigen::Index b = 1; b < 512; ++b) {
    CHECK(fb.col(b).sum() > 0.0);
  }
}

TEST_CASE("mfcc rejects n_coeffs > n_mels") {
  dsp::PolarSpectrogram polar;
  polar.geometry = StftGeometry{};
  polar.amplitude = dsp::Plane<double>::Constant(513, 1, 1.0);
  polar.phase = dsp::Plane<double>::Zero(513, 1);
  CHECK_THROWS_AS(dsp::mfcc(polar, 10, 11), ConfigError);
}
