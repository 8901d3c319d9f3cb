// Copyright 2026 CycleSpec Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cyclespec/dsp.hpp"
#include "cyclespec/tensor.hpp"

// The two variational autoencoders. The FAE owns a 4-layer encoder
// (512-256-128-64 at paper scale) and two 4-stage decoders with one output
// head per spectra resolution; the DAE owns the 6-layer encoder
// (512-400-300-200-100-64) and decoders that mirror the FAE decoder
// topology so they can be initialized from the trained FAE weights.
namespace cyclespec::model {

struct ModelConfig {
  std::vector<Index> fae_channels{512, 256, 128, 64};
  std::vector<Index> dae_channels{512, 400, 300, 200, 100, 64};
  Index latent_dim = 64;
  Index kernel = 7;
  Index stride = 1;
  double leaky_slope = 0.2;
  Index base_bins = 513;
  std::vector<Index> bank_bins{513, 257, 129, 65};
  int resolutions = 4;       // 1 when the multi-resolution toggle is off
  bool phase_aware = true;   // phase planes feed the encoder, phase decoder exists
  // Unwrapped phase can reach a few hundred radians; it is scaled before
  // injection so both plane kinds enter the encoder at comparable magnitude.
  double phase_input_scale = 0.01;
  // Head outputs are pre-scaled before the output activation so the decoders
  // reach the plane magnitudes within a small number of optimizer steps.
  double amp_output_scale = 2.0;
  double phase_output_scale = 10.0;

  Index padding() const { return (kernel - 1) / 2; }
  Index injected_rows() const {
    return (phase_aware ? 2 : 1) * base_bins;
  }

  // Channel schedules divided by 8 for desk-scale runs.
  static ModelConfig desk();
  static ModelConfig full() { return ModelConfig{}; }

  void validate() const;
};

enum class Role { fae, dae };

struct ConvParams {
  Tensor weight;  // [C_out x C_in x K]
  Tensor bias;    // [C_out]
};

struct EncoderParams {
  std::vector<ConvParams> convs;
  std::vector<ConvParams> inject;  // per-resolution 1x1 projections
  ConvParams mean_head;
  ConvParams logvar_head;
};

struct DecoderParams {
  std::vector<ConvParams> trunk;  // one stage per resolution
  std::vector<ConvParams> heads;  // 1x1 stage features -> base bins
};

struct AutoencoderParams {
  Role role = Role::fae;
  EncoderParams encoder;
  DecoderParams amp_decoder;
  DecoderParams phase_decoder;  // empty when phase_aware is off
};

// Seeded Glorot-uniform init; every parameter draws from its own stream so
// the values are independent of construction order.
AutoencoderParams make_autoencoder(const ModelConfig& config, Role role,
                                   std::uint64_t seed);

// Name/tensor pairs in deterministic order ("enc.conv0.weight", ...).
std::vector<std::pair<std::string, Tensor*>> collect_params(
    AutoencoderParams& params);
std::vector<std::pair<std::string, const Tensor*>> collect_params(
    const AutoencoderParams& params);

// Copies trained FAE decoder weights into a DAE (shared-representation
// coupling); shapes must agree.
void copy_decoders(const AutoencoderParams& fae, AutoencoderParams& dae);

// -- tape-bound forward ------------------------------------------------------

struct BoundConv {
  Var weight, bias;
};
struct BoundEncoder {
  std::vector<BoundConv> convs, inject;
  BoundConv mean_head, logvar_head;
};
struct BoundDecoder {
  std::vector<BoundConv> trunk, heads;
};
struct BoundAutoencoder {
  const ModelConfig* config = nullptr;
  BoundEncoder encoder;
  BoundDecoder amp_decoder;
  BoundDecoder phase_decoder;
};

BoundAutoencoder bind(Tape& tape, const AutoencoderParams& params,
                      const ModelConfig& config);

// Bound parameter Vars in the same order as collect_params, so per-item
// gradients can be reduced against the parameter registry.
std::vector<Var> collect_bound_params(const BoundAutoencoder& bound);

// Spectra bank planes bound on a tape, amplitude[i]/phase[i] shaped
// [bank_bins[i] x N] with a shared frame count.
struct BankVars {
  std::vector<Var> amplitude;
  std::vector<Var> phase;
};

struct EncodeResult {
  Var mean;
  Var log_variance;
  std::vector<Var> layer_features;  // per-resolution encoder features Z^i
};

// Resolution i is resampled along frequency to the base grid, projected by
// a 1x1 conv and added at encoder layer i; the variational heads read the
// final layer.
EncodeResult encode(Tape& tape, const BoundAutoencoder& ae,
                    const BankVars& bank);

// Z = mean + exp(0.5 log_var) * noise.
Var sample_latent(Tape& tape, Var mean, Var log_variance,
                  const Tensor& noise);

// Sequential stages: stage 1 consumes Z, stage i>1 the previous stage's
// pre-head features; head i emits the base-bin plane resampled to
// resolution i. Amplitude heads apply softplus, phase heads stay linear.
std::vector<Var> decode(Tape& tape, const BoundDecoder& decoder,
                        const ModelConfig& config, Var z, bool amplitude);

// -- data plumbing -----------------------------------------------------------

// Bank planes cropped to the base resolution's frame count and flattened
// into row-major tensors, ready to bind on a tape.
struct AlignedBank {
  std::vector<Tensor> amplitude;
  std::vector<Tensor> phase;
  Index frames = 0;
};

AlignedBank align_bank(const dsp::MultiResSpectra& spectra, int resolutions);

// Full test-time pipeline: mixture -> E2 latent mean -> D11/D12 base-
// resolution planes -> rewrapped phase -> inverse STFT, trimmed to the
// input length. Deterministic. With phase_aware off the mixture phase is
// reused, matching the amplitude-only baseline.
std::vector<double> enhance(std::span<const double> mixture,
                            const AutoencoderParams& dae,
                            const AutoencoderParams& fae,
                            const ModelConfig& config,
                            double sample_rate = dsp::kDefaultSampleRate);

}  // namespace cyclespec::model
