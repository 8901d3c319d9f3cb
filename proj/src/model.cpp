// Copyright 2026 CycleSpec Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "cyclespec/model.hpp"

#include <algorithm>
#include <cmath>

#include "cyclespec/rng.hpp"

namespace cyclespec::model {

namespace {

Tensor glorot_conv(Index c_out, Index c_in, Index kernel, std::uint64_t seed) {
  const double fan_in = static_cast<double>(c_in * kernel);
  const double fan_out = static_cast<double>(c_out * kernel);
  const double bound = std::sqrt(6.0 / (fan_in + fan_out));
  Tensor w = Tensor::zeros({c_out, c_in, kernel}, /*requires_grad=*/true);
  Rng rng(seed);
  for (Index i = 0; i < w.numel(); ++i) {
    w.values()[i] = rng.uniform(-bound, bound);
  }
  return w;
}

ConvParams make_conv(Index c_out, Index c_in, Index kernel,
                     std::uint64_t root_seed, const std::string& name) {
  ConvParams p;
  p.weight = glorot_conv(c_out, c_in, kernel, derive_seed(root_seed, name));
  p.bias = Tensor::zeros({c_out}, /*requires_grad=*/true);
  return p;
}

const std::vector<Index>& schedule_for(const ModelConfig& cfg, Role role) {
  return role == Role::fae ? cfg.fae_channels : cfg.dae_channels;
}

// Decoder trunk channels: reversed FAE encoder schedule, truncated to the
// active resolution count. Shared by FAE and DAE so decoder weights can be
// copied across.
std::vector<Index> decoder_channels(const ModelConfig& cfg) {
  std::vector<Index> rev(cfg.fae_channels.rbegin(), cfg.fae_channels.rend());
  rev.resize(static_cast<std::size_t>(cfg.resolutions));
  return rev;
}

void collect_conv(std::vector<std::pair<std::string, Tensor*>>& out,
                  const std::string& name, ConvParams& p) {
  out.emplace_back(name + ".weight", &p.weight);
  out.emplace_back(name + ".bias", &p.bias);
}

BoundConv bind_conv(Tape& tape, const ConvParams& p) {
  return BoundConv{tape.leaf(p.weight), tape.leaf(p.bias)};
}

Var conv_apply(Tape& tape, const BoundConv& conv, Var x, Index stride,
               Index padding) {
  (void)tape;
  return conv1d(x, conv.weight, conv.bias, stride, padding);
}

Tensor plane_to_tensor(const dsp::Plane<double>& plane, Index frames) {
  Tensor t = Tensor::zeros({plane.rows(), frames});
  for (Index r = 0; r < plane.rows(); ++r) {
    for (Index c = 0; c < frames; ++c) t(r, c) = plane(r, c);
  }
  return t;
}

}  // namespace

ModelConfig ModelConfig::desk() {
  ModelConfig cfg;
  for (auto& c : cfg.fae_channels) c = std::max<Index>(1, c / 8);
  for (auto& c : cfg.dae_channels) c = std::max<Index>(1, c / 8);
  cfg.latent_dim = std::max<Index>(1, cfg.latent_dim / 8);
  return cfg;
}

void ModelConfig::validate() const {
  if (fae_channels.empty() || dae_channels.empty()) {
    throw ConfigError("model: empty channel schedule");
  }
  if (fae_channels.back() != latent_dim || dae_channels.back() != latent_dim) {
    throw ConfigError("model: final hidden size must equal latent_dim");
  }
  if (resolutions < 1 ||
      resolutions > static_cast<int>(bank_bins.size())) {
    throw ConfigError("model: resolutions must be in [1, " +
                      std::to_string(bank_bins.size()) + "]");
  }
  if (resolutions > static_cast<int>(fae_channels.size()) ||
      resolutions > static_cast<int>(dae_channels.size())) {
    throw ConfigError("model: more resolutions than encoder layers");
  }
  if (kernel < 1 || stride < 1) {
    throw ConfigError("model: kernel and stride must be positive");
  }
}

AutoencoderParams make_autoencoder(const ModelConfig& cfg, Role role,
                                   std::uint64_t seed) {
  cfg.validate();
  const auto& sched = schedule_for(cfg, role);
  const std::string tag = role == Role::fae ? "fae" : "dae";
  AutoencoderParams p;
  p.role = role;

  for (std::size_t i = 0; i < sched.size(); ++i) {
    const Index c_in = i == 0 ? sched[0] : sched[i - 1];
    p.encoder.convs.push_back(make_conv(sched[i], c_in, cfg.kernel, seed,
                                        tag + ".enc.conv" +
                                            std::to_string(i)));
  }
  for (int r = 0; r < cfg.resolutions; ++r) {
    const Index c_out = r == 0 ? sched[0] : sched[r - 1];
    p.encoder.inject.push_back(make_conv(c_out, cfg.injected_rows(), 1, seed,
                                         tag + ".enc.inject" +
                                             std::to_string(r)));
  }
  p.encoder.mean_head = make_conv(cfg.latent_dim, sched.back(), 1, seed,
                                  tag + ".enc.mean");
  p.encoder.logvar_head = make_conv(cfg.latent_dim, sched.back(), 1, seed,
                                    tag + ".enc.logvar");
  // Start the latent near-deterministic (sigma ~ 0.14): large initial
  // sampling noise swamps the reconstruction signal at desk scale.
  p.encoder.logvar_head.bias.values().setConstant(-4.0);

  const auto dec = decoder_channels(cfg);
  const auto build_decoder = [&](const std::string& which) {
    DecoderParams d;
    for (std::size_t j = 0; j < dec.size(); ++j) {
      const Index c_in = j == 0 ? cfg.latent_dim : dec[j - 1];
      d.trunk.push_back(make_conv(dec[j], c_in, cfg.kernel, seed,
                                  tag + "." + which + ".trunk" +
                                      std::to_string(j)));
      d.heads.push_back(make_conv(cfg.base_bins, dec[j], 1, seed,
                                  tag + "." + which + ".head" +
                                      std::to_string(j)));
    }
    return d;
  };
  p.amp_decoder = build_decoder("dec_a");
  if (cfg.phase_aware) p.phase_decoder = build_decoder("dec_p");
  return p;
}

std::vector<std::pair<std::string, Tensor*>> collect_params(
    AutoencoderParams& p) {
  std::vector<std::pair<std::string, Tensor*>> out;
  for (std::size_t r = 0; r < p.encoder.inject.size(); ++r) {
    collect_conv(out, "enc.inject" + std::to_string(r), p.encoder.inject[r]);
  }
  for (std::size_t i = 0; i < p.encoder.convs.size(); ++i) {
    collect_conv(out, "enc.conv" + std::to_string(i), p.encoder.convs[i]);
  }
  collect_conv(out, "enc.mean", p.encoder.mean_head);
  collect_conv(out, "enc.logvar", p.encoder.logvar_head);
  const auto collect_decoder = [&](const std::string& which,
                                   DecoderParams& d) {
    for (std::size_t j = 0; j < d.trunk.size(); ++j) {
      collect_conv(out, which + ".trunk" + std::to_string(j), d.trunk[j]);
      collect_conv(out, which + ".head" + std::to_string(j), d.heads[j]);
    }
  };
  collect_decoder("dec_a", p.amp_decoder);
  collect_decoder("dec_p", p.phase_decoder);
  return out;
}

std::vector<std::pair<std::string, const Tensor*>> collect_params(
    const AutoencoderParams& p) {
  auto mutable_view = collect_params(const_cast<AutoencoderParams&>(p));
  std::vector<std::pair<std::string, const Tensor*>> out;
  out.reserve(mutable_view.size());
  for (auto& [name, tensor] : mutable_view) out.emplace_back(name, tensor);
  return out;
}

void copy_decoders(const AutoencoderParams& fae, AutoencoderParams& dae) {
  const auto copy = [](const DecoderParams& src, DecoderParams& dst) {
    if (src.trunk.size() != dst.trunk.size()) {
      throw ShapeError("copy_decoders: stage count mismatch");
    }
    for (std::size_t j = 0; j < src.trunk.size(); ++j) {
      if (!src.trunk[j].weight.same_shape(dst.trunk[j].weight) ||
          !src.heads[j].weight.same_shape(dst.heads[j].weight)) {
        throw ShapeError("copy_decoders: stage shape mismatch");
      }
      dst.trunk[j].weight.values() = src.trunk[j].weight.values();
      dst.trunk[j].bias.values() = src.trunk[j].bias.values();
      dst.heads[j].weight.values() = src.heads[j].weight.values();
      dst.heads[j].bias.values() = src.heads[j].bias.values();
    }
  };
  copy(fae.amp_decoder, dae.amp_decoder);
  if (!fae.phase_decoder.trunk.empty()) {
    copy(fae.phase_decoder, dae.phase_decoder);
  }
}

BoundAutoencoder bind(Tape& tape, const AutoencoderParams& params,
                      const ModelConfig& config) {
  BoundAutoencoder b;
  b.config = &config;
  for (const auto& c : params.encoder.convs) {
    b.encoder.convs.push_back(bind_conv(tape, c));
  }
  for (const auto& c : params.encoder.inject) {
    b.encoder.inject.push_back(bind_conv(tape, c));
  }
  b.encoder.mean_head = bind_conv(tape, params.encoder.mean_head);
  b.encoder.logvar_head = bind_conv(tape, params.encoder.logvar_head);
  const auto bind_decoder = [&](const DecoderParams& d) {
    BoundDecoder out;
    for (const auto& c : d.trunk) out.trunk.push_back(bind_conv(tape, c));
    for (const auto& c : d.heads) out.heads.push_back(bind_conv(tape, c));
    return out;
  };
  b.amp_decoder = bind_decoder(params.amp_decoder);
  b.phase_decoder = bind_decoder(params.phase_decoder);
  return b;
}

std::vector<Var> collect_bound_params(const BoundAutoencoder& b) {
  // Must walk the same order as collect_params.
  std::vector<Var> out;
  const auto push = [&](const BoundConv& c) {
    out.push_back(c.weight);
    out.push_back(c.bias);
  };
  for (const auto& c : b.encoder.inject) push(c);
  for (const auto& c : b.encoder.convs) push(c);
  push(b.encoder.mean_head);
  push(b.encoder.logvar_head);
  const auto push_decoder = [&](const BoundDecoder& d) {
    for (std::size_t j = 0; j < d.trunk.size(); ++j) {
      push(d.trunk[j]);
      push(d.heads[j]);
    }
  };
  push_decoder(b.amp_decoder);
  push_decoder(b.phase_decoder);
  return out;
}

EncodeResult encode(Tape& tape, const BoundAutoencoder& ae,
                    const BankVars& bank) {
  const ModelConfig& cfg = *ae.config;
  const auto resolutions = static_cast<std::size_t>(cfg.resolutions);
  if (bank.amplitude.size() != resolutions ||
      (cfg.phase_aware && bank.phase.size() != resolutions)) {
    throw ShapeError("encode: bank has " +
                     std::to_string(bank.amplitude.size()) +
                     " resolutions, expected " + std::to_string(resolutions));
  }

  // Per-resolution injection input: compressed amplitude (and scaled phase)
  // resampled to the base frequency grid, then a 1x1 channel projection.
  std::vector<Var> injected;
  injected.reserve(resolutions);
  for (std::size_t r = 0; r < resolutions; ++r) {
    Var stack = resample_rows(log1p(bank.amplitude[r]), cfg.base_bins);
    if (cfg.phase_aware) {
      Var ph = resample_rows(scale(bank.phase[r], cfg.phase_input_scale),
                             cfg.base_bins);
      stack = concat_rows(stack, ph);
    }
    injected.push_back(
        conv_apply(tape, ae.encoder.inject[r], stack, 1, 0));
  }

  EncodeResult result;
  Var x = injected[0];
  const std::size_t layers = ae.encoder.convs.size();
  for (std::size_t i = 0; i < layers; ++i) {
    Var h = conv_apply(tape, ae.encoder.convs[i], x, cfg.stride,
                       cfg.padding());
    Var a = leaky_relu(h, cfg.leaky_slope);
    if (i < resolutions) result.layer_features.push_back(a);
    x = (i + 1 < layers && i + 1 < resolutions) ? add(a, injected[i + 1]) : a;
  }
  result.mean = conv_apply(tape, ae.encoder.mean_head, x, 1, 0);
  result.log_variance = conv_apply(tape, ae.encoder.logvar_head, x, 1, 0);
  return result;
}

Var sample_latent(Tape& tape, Var mean, Var log_variance,
                  const Tensor& noise) {
  const Tensor& m = tape.value(mean);
  if (!m.same_shape(tape.value(log_variance)) || !m.same_shape(noise)) {
    throw ShapeError("sample_latent: mean/log_variance/noise shape mismatch");
  }
  Var sigma = exp(scale(log_variance, 0.5));
  return add(mean, mul(sigma, tape.constant(noise)));
}

std::vector<Var> decode(Tape& tape, const BoundDecoder& decoder,
                        const ModelConfig& cfg, Var z, bool amplitude) {
  if (decoder.trunk.empty()) {
    throw StateError("decode: decoder has no stages (phase-aware off?)");
  }
  const Tensor& zv = tape.value(z);
  if (zv.rank() != 2 || zv.extent(0) != cfg.latent_dim) {
    throw ShapeError("decode: latent must have " +
                     std::to_string(cfg.latent_dim) + " channels");
  }
  std::vector<Var> planes;
  Var f = z;
  for (std::size_t j = 0; j < decoder.trunk.size(); ++j) {
    f = leaky_relu(conv_apply(tape, decoder.trunk[j], f, cfg.stride,
                              cfg.padding()),
                   cfg.leaky_slope);
    Var head = conv_apply(tape, decoder.heads[j], f, 1, 0);
    Var plane = resample_rows(head, cfg.bank_bins[j]);
    planes.push_back(amplitude
                         ? softplus(scale(plane, cfg.amp_output_scale))
                         : scale(plane, cfg.phase_output_scale));
  }
  return planes;
}

AlignedBank align_bank(const dsp::MultiResSpectra& spectra, int resolutions) {
  if (static_cast<int>(spectra.bank.size()) < resolutions) {
    throw ShapeError("align_bank: bank smaller than requested resolutions");
  }
  AlignedBank out;
  out.frames = spectra.bank[0].frames();  // largest window == fewest frames
  for (int r = 0; r < resolutions; ++r) {
    const auto& polar = spectra.bank[r];
    if (polar.frames() < out.frames) {
      throw ShapeError("align_bank: resolution has fewer frames than base");
    }
    out.amplitude.push_back(plane_to_tensor(polar.amplitude, out.frames));
    out.phase.push_back(plane_to_tensor(polar.phase, out.frames));
  }
  return out;
}

std::vector<double> enhance(std::span<const double> mixture,
                            const AutoencoderParams& dae,
                            const AutoencoderParams& fae,
                            const ModelConfig& cfg, double sample_rate) {
  if (static_cast<Index>(mixture.size()) < dsp::kBankWindows[0]) {
    throw InputError("enhance: mixture shorter than the analysis window");
  }
  const dsp::MultiResSpectra spectra = dsp::multi_res(mixture, sample_rate);
  const AlignedBank aligned = align_bank(spectra, cfg.resolutions);

  Tape tape;
  BoundAutoencoder enc = bind(tape, dae, cfg);
  BoundAutoencoder dec = bind(tape, fae, cfg);
  BankVars bank;
  for (int r = 0; r < cfg.resolutions; ++r) {
    bank.amplitude.push_back(tape.constant(aligned.amplitude[r]));
    bank.phase.push_back(tape.constant(aligned.phase[r]));
  }

  // Test-time latent is the distribution mean; no sampling.
  EncodeResult code = encode(tape, enc, bank);
  const Tensor& amp =
      tape.value(decode(tape, dec.amp_decoder, cfg, code.mean, true)[0]);

  const Index frames = aligned.frames;
  dsp::PolarSpectrogram polar;
  polar.geometry = spectra.bank[0].geometry;
  polar.amplitude.resize(cfg.base_bins, frames);
  polar.phase.resize(cfg.base_bins, frames);
  for (Index b = 0; b < cfg.base_bins; ++b) {
    for (Index n = 0; n < frames; ++n) polar.amplitude(b, n) = amp(b, n);
  }
  if (cfg.phase_aware) {
    const Tensor& ph = tape.value(
        decode(tape, dec.phase_decoder, cfg, code.mean, false)[0]);
    for (Index b = 0; b < cfg.base_bins; ++b) {
      for (Index n = 0; n < frames; ++n) polar.phase(b, n) = ph(b, n);
    }
  } else {
    // Amplitude-only baseline: reuse the mixture phase.
    polar.phase = spectra.bank[0].phase.leftCols(frames);
  }
  polar.phase = dsp::wrap_phase(polar.phase);

  std::vector<double> out =
      dsp::istft(dsp::polar_recompose(polar),
                 static_cast<Index>(mixture.size()));
  return out;
}

}  // namespace cyclespec::model
