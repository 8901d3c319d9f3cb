// Copyright 2026 CycleSpec Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cyclespec/data.hpp"
#include "cyclespec/loss.hpp"
#include "cyclespec/model.hpp"
#include "cyclespec/tensor.hpp"

// Two-phase training: the FAE pipeline on clean speech (with the
// complex-cycle-consistent backward mappings), then the DAE on unpaired
// mixtures with the FAE frozen. One Adam step per batch; an epoch is one
// pass over the corpus.
namespace cyclespec::train {

struct Toggles {
  bool multi_resolution = true;
  bool phase_aware = true;
  bool ccc = true;
};

struct TrainConfig {
  double lr = 0.001;
  int batch = 20;
  int fae_epochs = 700;
  int dae_epochs = 1500;
  loss::LossWeights weights;
  std::uint64_t seed = 0;
  enum class Scale { full, desk };
  Scale scale_preset = Scale::desk;
  Toggles toggles;

  Index crop_samples = 2048;   // training excerpt taken from each utterance
  int checkpoint_every = 50;
  double grad_clip = 5.0;
  // Divide each squared-L2 plane term by its element count (stability
  // option; off reproduces the plain norms).
  bool normalize_losses = false;
  // Strength of the pull of DAE latent means toward the shared prior
  // (beyond the KL term). Off by default.
  double latent_align_weight = 0.0;
  bool dae_decoders_from_fae = true;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  int threads = 0;  // 0: CYCLESPEC_THREADS or hardware
  double sample_rate = dsp::kDefaultSampleRate;

  void validate() const;  // ccc requires phase_aware; positive counts
};

// Projects the ablation toggles onto the model topology.
model::ModelConfig apply_toggles(model::ModelConfig config,
                                 const Toggles& toggles);

// Backward-cycle banks carried between epochs; undefined before epoch 2.
struct CCCState {
  std::vector<Tensor> bc_phase_bank;      // S_{a->p}
  std::vector<Tensor> bc_amplitude_bank;  // S_{p->a}
  std::int64_t epoch = 0;                 // 1-based, advanced per corpus pass
  bool has_banks() const { return !bc_phase_bank.empty(); }
};

// State of one training phase (either autoencoder).
struct PhaseState {
  model::AutoencoderParams params;
  model::ModelConfig model_config;
  AdamState adam;
  CCCState ccc;
  std::int64_t epoch = 0;

  static PhaseState create(const model::ModelConfig& config, model::Role role,
                           const TrainConfig& train_config);
};

using Batch = std::vector<std::vector<double>>;

// The CCC-S backward cycle on an already-built reconstruction graph:
// re-encodes the bank with amplitude planes replaced by the current
// amplitude reconstructions, decodes the BC phase through the phase
// decoder, combines via the theta1-weighted update, then mirrors the
// procedure from the updated phase back to amplitude. StateError when
// called before epoch 2.
struct CccStepResult {
  Var j_phase_combined;
  Var j_amp_combined;
  Var j_a2p;
  Var j_p2a;
  std::vector<Var> bc_phase;
  std::vector<Var> bc_amplitude;
};

CccStepResult ccc_s_step(Tape& tape, const model::BoundAutoencoder& bound,
                         const model::BankVars& target_bank,
                         const std::vector<Var>& recon_amp,
                         const std::vector<Var>& recon_phase, Var j_sa_base,
                         Var j_sp_base, CCCState& state, double theta1);

// One Adam step of the FAE pipeline on a batch of clean signals
// (>= 1024 samples each). Advances the epoch counter; the backward-cycle
// terms join from epoch 2 on when the ccc toggle is set.
loss::LossReport fae_epoch(PhaseState& state, const Batch& batch,
                           const TrainConfig& config);

// One Adam step of the DAE on a batch of mixtures. The FAE is not
// involved in the graph at all (frozen by construction); its decoders only
// seed the DAE decoder weights at creation time.
loss::LossReport dae_epoch(PhaseState& state, const Batch& batch,
                           const TrainConfig& config);

// Step variants driven by an explicit epoch index (used when an epoch
// spans several batches).
loss::LossReport fae_step(PhaseState& state, const Batch& batch,
                          std::int64_t epoch, const TrainConfig& config);
loss::LossReport dae_step(PhaseState& state, const Batch& batch,
                          std::int64_t epoch, const TrainConfig& config);

struct PhaseResult {
  std::vector<loss::LossReport> reports;  // one per epoch
  std::filesystem::path checkpoint;
  std::filesystem::path meta;
};

struct TrainResult {
  PhaseResult fae;
  PhaseResult dae;
  model::AutoencoderParams fae_params;
  model::AutoencoderParams dae_params;
};

// FAE phase over the manifest's fae split. Writes checkpoints every
// checkpoint_every epochs and at the end, plus fae_loss.csv.
PhaseResult train_fae_phase(const data::Manifest& manifest,
                            const TrainConfig& config,
                            const model::ModelConfig& model_config,
                            const std::filesystem::path& run_dir,
                            model::AutoencoderParams* out_params = nullptr);

// DAE phase over the manifest's dae split; requires the trained FAE.
PhaseResult train_dae_phase(const data::Manifest& manifest,
                            const TrainConfig& config,
                            const model::ModelConfig& model_config,
                            const model::AutoencoderParams& fae_params,
                            const std::filesystem::path& run_dir,
                            model::AutoencoderParams* out_params = nullptr);

// Both phases; DataError if the manifest violates the unpaired contract.
TrainResult train_full(const data::Manifest& manifest,
                       const TrainConfig& config,
                       const model::ModelConfig& model_config,
                       const std::filesystem::path& run_dir);

// -- checkpoint metadata -------------------------------------------------------

// Plain-text sidecar describing the architecture a checkpoint was trained
// with (schedule, latent_dim, activations, seed, toggles).
void save_model_meta(const std::filesystem::path& path,
                     const model::ModelConfig& config, model::Role role,
                     const TrainConfig& train_config);

struct ModelMeta {
  model::ModelConfig config;
  model::Role role = model::Role::fae;
  std::uint64_t seed = 0;
  Toggles toggles;
};

ModelMeta load_model_meta(const std::filesystem::path& path);

// Rebuilds parameters from a checkpoint + sidecar. StateError when either
// file is missing or a parameter is absent.
model::AutoencoderParams load_autoencoder(
    const std::filesystem::path& checkpoint,
    const std::filesystem::path& meta_path, model::ModelConfig* out_config,
    Toggles* out_toggles = nullptr);

// The valid ablation rows (multi_resolution, phase_aware, ccc): all toggle
// combinations except ccc-without-phase-aware.
std::vector<Toggles> ablation_rows();

}  // namespace cyclespec::train
