// Copyright 2026 CycleSpec Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "cyclespec/train.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "cyclespec/checkpoint.hpp"
#include "cyclespec/parallel.hpp"
#include "cyclespec/rng.hpp"
#include "cyclespec/wav.hpp"

namespace cyclespec::train {

namespace {

namespace fs = std::filesystem;

// Per-plane squared-L2 bank loss, optionally normalized by element count.
Var bank_loss(Tape& tape, const std::vector<Var>& target,
              const std::vector<Var>& estimate, bool normalize) {
  if (!normalize) return loss::bank_sq_loss(tape, target, estimate);
  Var acc;
  for (std::size_t i = 0; i < target.size(); ++i) {
    Var term = sq_sum(sub(target[i], estimate[i]));
    term = scale(term, 1.0 / static_cast<double>(
                           tape.value(target[i]).numel()));
    acc = i == 0 ? term : add(acc, term);
  }
  return acc;
}

Tensor draw_noise(const Shape& shape, std::uint64_t seed) {
  Tensor t = Tensor::zeros(shape);
  Rng rng(seed);
  for (Index i = 0; i < t.numel(); ++i) t.values()[i] = rng.normal();
  return t;
}

struct ItemOutput {
  loss::LossReport terms;
  std::vector<Eigen::ArrayXd> grads;
  std::vector<Tensor> bc_phase;
  std::vector<Tensor> bc_amplitude;
};

// The backward cycle shared by CCC-S and CCC-M; pure function of the tape.
struct BackwardCycle {
  std::vector<Var> bc_phase;
  std::vector<Var> bc_amplitude;
  Var j_a2p;
  Var j_p2a;
  Var j_amp_combined;
  Var j_phase_combined;
};

BackwardCycle backward_cycle(Tape& tape, const model::BoundAutoencoder& bound,
                             const std::vector<Var>& target_amp,
                             const std::vector<Var>& target_phase,
                             const std::vector<Var>& recon_amp, Var j_sa_base,
                             Var j_sp_base, double theta1, bool normalize) {
  const model::ModelConfig& cfg = *bound.config;
  BackwardCycle out;

  // BC a->p: re-encode with amplitude planes replaced by the current
  // amplitude reconstructions; the latent mean (no sampling) feeds the
  // phase decoder.
  model::BankVars bank_ap;
  bank_ap.amplitude = recon_amp;
  bank_ap.phase = target_phase;
  model::EncodeResult enc_ap = model::encode(tape, bound, bank_ap);
  out.bc_phase =
      model::decode(tape, bound.phase_decoder, cfg, enc_ap.mean, false);
  out.j_a2p = bank_loss(tape, target_phase, out.bc_phase, normalize);
  out.j_phase_combined = loss::combined_loss(tape, j_sp_base, out.j_a2p,
                                             theta1);

  // BC p->a from the updated phase reconstruction.
  model::BankVars bank_pa;
  bank_pa.amplitude = target_amp;
  bank_pa.phase = out.bc_phase;
  model::EncodeResult enc_pa = model::encode(tape, bound, bank_pa);
  out.bc_amplitude =
      model::decode(tape, bound.amp_decoder, cfg, enc_pa.mean, true);
  out.j_p2a = bank_loss(tape, target_amp, out.bc_amplitude, normalize);
  out.j_amp_combined = loss::combined_loss(tape, j_sa_base, out.j_p2a,
                                           theta1);
  return out;
}

std::vector<Tensor> bank_values(const Tape& tape, const std::vector<Var>& v) {
  std::vector<Tensor> out;
  out.reserve(v.size());
  for (const Var x : v) out.push_back(tape.value(x));
  return out;
}

ItemOutput run_item(const PhaseState& state, const TrainConfig& cfg,
                    std::span<const double> signal, std::uint64_t noise_seed,
                    std::int64_t epoch, bool is_fae) {
  const model::ModelConfig& mcfg = state.model_config;
  const bool ccc_active =
      cfg.toggles.ccc && mcfg.phase_aware && epoch >= 2;

  const dsp::MultiResSpectra spectra =
      dsp::multi_res<double>(signal, cfg.sample_rate);
  const model::AlignedBank aligned =
      model::align_bank(spectra, mcfg.resolutions);

  Tape tape;
  const model::BoundAutoencoder bound = model::bind(tape, state.params, mcfg);
  model::BankVars bank;
  for (int r = 0; r < mcfg.resolutions; ++r) {
    bank.amplitude.push_back(tape.constant(aligned.amplitude[r]));
    if (mcfg.phase_aware) {
      bank.phase.push_back(tape.constant(aligned.phase[r]));
    }
  }

  model::EncodeResult enc = model::encode(tape, bound, bank);
  const Tensor noise =
      draw_noise(tape.value(enc.mean).shape(), noise_seed);
  Var z = model::sample_latent(tape, enc.mean, enc.log_variance, noise);

  const std::vector<Var> amp_est =
      model::decode(tape, bound.amp_decoder, mcfg, z, true);
  std::vector<Var> phase_est;
  if (mcfg.phase_aware) {
    phase_est = model::decode(tape, bound.phase_decoder, mcfg, z, false);
  }

  Var j_amp = bank_loss(tape, bank.amplitude, amp_est, cfg.normalize_losses);
  Var j_phase;
  if (mcfg.phase_aware) {
    j_phase = bank_loss(tape, bank.phase, phase_est, cfg.normalize_losses);
  }

  ItemOutput out;
  Var j_amp_run = j_amp;
  Var j_phase_run = j_phase;
  if (ccc_active) {
    const BackwardCycle bc =
        backward_cycle(tape, bound, bank.amplitude, bank.phase, amp_est,
                       j_amp, j_phase, cfg.weights.theta1,
                       cfg.normalize_losses);
    j_amp_run = bc.j_amp_combined;
    j_phase_run = bc.j_phase_combined;
    out.terms.j_a2p = tape.value(bc.j_a2p).scalar_value();
    out.terms.j_p2a = tape.value(bc.j_p2a).scalar_value();
    out.bc_phase = bank_values(tape, bc.bc_phase);
    out.bc_amplitude = bank_values(tape, bc.bc_amplitude);
  }

  Var j_spectra =
      mcfg.phase_aware ? add(j_amp_run, j_phase_run) : j_amp_run;
  Var j_kl = loss::kl_loss(tape, enc.mean, enc.log_variance);

  Var total;
  if (is_fae) {
    // Re-encode the reconstruction bank for the latent cycle term.
    model::BankVars bank_hat;
    bank_hat.amplitude = amp_est;
    if (mcfg.phase_aware) bank_hat.phase = phase_est;
    model::EncodeResult enc_hat = model::encode(tape, bound, bank_hat);
    Var latent_term = loss::latent_sq_loss(tape, enc.layer_features,
                                           enc_hat.layer_features);
    Var j_cyc = add(j_spectra, scale(latent_term, cfg.weights.theta3));
    total = add(add(scale(j_kl, cfg.weights.theta2), j_spectra), j_cyc);
    out.terms.j_cyc = tape.value(j_cyc).scalar_value();
    out.terms.j_sa = tape.value(j_amp_run).scalar_value();
    if (mcfg.phase_aware) {
      out.terms.j_sp = tape.value(j_phase_run).scalar_value();
    }
  } else {
    total = add(scale(j_kl, cfg.weights.theta2), j_spectra);
    if (cfg.latent_align_weight > 0.0) {
      total = add(total, scale(sq_sum(enc.mean), cfg.latent_align_weight));
    }
    out.terms.j_ma = tape.value(j_amp_run).scalar_value();
    if (mcfg.phase_aware) {
      out.terms.j_mp = tape.value(j_phase_run).scalar_value();
    }
  }
  out.terms.j_kl = tape.value(j_kl).scalar_value();
  out.terms.j_total = tape.value(total).scalar_value();
  if (!std::isfinite(out.terms.j_total)) {
    throw NumericsError("non-finite total loss");
  }

  backward(tape, total);

  const std::vector<Var> bound_vars = model::collect_bound_params(bound);
  out.grads.reserve(bound_vars.size());
  for (const Var v : bound_vars) {
    out.grads.push_back(tape.has_grad(v)
                            ? tape.grad(v)
                            : Eigen::ArrayXd::Zero(tape.value(v).numel()));
  }
  return out;
}

loss::LossReport step_impl(PhaseState& state, const Batch& batch,
                           std::int64_t epoch, const TrainConfig& cfg,
                           bool is_fae) {
  cfg.validate();
  if (batch.empty()) throw InputError("training step: empty batch");
  for (const auto& s : batch) {
    if (static_cast<Index>(s.size()) < dsp::kBankWindows[0]) {
      throw InputError("training step: signal shorter than 1024 samples");
    }
  }
  auto registry = model::collect_params(state.params);
  const int batch_size = static_cast<int>(batch.size());
  std::vector<ItemOutput> items(batch.size());
  const char* phase_tag = is_fae ? "fae" : "dae";

  parallel_for(batch_size, worker_count(batch_size, cfg.threads), [&](int i) {
    try {
      // Keyed by batch slot only: shuffling reassigns slots across epochs,
      // and a fixed batch sees a reproducible draw (lr=0 keeps losses
      // constant).
      const std::uint64_t noise_seed =
          derive_seed(cfg.seed, is_fae ? "fae_noise" : "dae_noise",
                      {static_cast<std::uint64_t>(i)});
      items[static_cast<std::size_t>(i)] =
          run_item(state, cfg, batch[static_cast<std::size_t>(i)],
                   noise_seed, epoch, is_fae);
    } catch (const NumericsError& e) {
      std::ostringstream os;
      os << phase_tag << " epoch " << epoch << " item " << i << ": "
         << e.what();
      throw NumericsError(os.str());
    }
  });

  // Fixed-order reduction keeps results identical for any worker count.
  std::vector<Eigen::ArrayXd> grads;
  grads.reserve(registry.size());
  for (const auto& [name, tensor] : registry) {
    grads.push_back(Eigen::ArrayXd::Zero(tensor->numel()));
  }
  for (const auto& item : items) {
    for (std::size_t p = 0; p < grads.size(); ++p) grads[p] += item.grads[p];
  }
  const double inv_batch = 1.0 / static_cast<double>(batch.size());
  for (auto& g : grads) g *= inv_batch;
  clip_global_norm(grads, cfg.grad_clip);

  std::vector<Tensor*> param_ptrs;
  param_ptrs.reserve(registry.size());
  for (auto& [name, tensor] : registry) param_ptrs.push_back(tensor);
  adam_step(param_ptrs, grads, state.adam);

  if (!items.back().bc_phase.empty()) {
    state.ccc.bc_phase_bank = items.back().bc_phase;
    state.ccc.bc_amplitude_bank = items.back().bc_amplitude;
  }

  loss::LossReport report;
  report.epoch = epoch;
  for (const auto& item : items) {
    report.j_sa += item.terms.j_sa;
    report.j_sp += item.terms.j_sp;
    report.j_ma += item.terms.j_ma;
    report.j_mp += item.terms.j_mp;
    report.j_a2p += item.terms.j_a2p;
    report.j_p2a += item.terms.j_p2a;
    report.j_kl += item.terms.j_kl;
    report.j_cyc += item.terms.j_cyc;
    report.j_total += item.terms.j_total;
  }
  report.j_sa *= inv_batch;
  report.j_sp *= inv_batch;
  report.j_ma *= inv_batch;
  report.j_mp *= inv_batch;
  report.j_a2p *= inv_batch;
  report.j_p2a *= inv_batch;
  report.j_kl *= inv_batch;
  report.j_cyc *= inv_batch;
  report.j_total *= inv_batch;
  return report;
}

std::vector<std::vector<double>> load_crops(
    const std::vector<data::ManifestEntry>& entries, const TrainConfig& cfg) {
  std::vector<std::vector<double>> out;
  out.reserve(entries.size());
  for (const auto& e : entries) {
    WavData wav = read_wav(e.path);
    if (static_cast<Index>(wav.samples.size()) < dsp::kBankWindows[0]) {
      throw DataError("utterance '" + e.id + "' shorter than 1024 samples");
    }
    if (static_cast<Index>(wav.samples.size()) > cfg.crop_samples) {
      wav.samples.resize(static_cast<std::size_t>(cfg.crop_samples));
    }
    out.push_back(std::move(wav.samples));
  }
  return out;
}

std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  Rng rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.integer(i));
    std::swap(idx[i - 1], idx[j]);
  }
  return idx;
}

loss::LossReport mean_reports(const std::vector<loss::LossReport>& reports,
                              std::int64_t epoch) {
  loss::LossReport out;
  out.epoch = epoch;
  const double inv = 1.0 / static_cast<double>(reports.size());
  for (const auto& r : reports) {
    out.j_sa += r.j_sa * inv;
    out.j_sp += r.j_sp * inv;
    out.j_ma += r.j_ma * inv;
    out.j_mp += r.j_mp * inv;
    out.j_a2p += r.j_a2p * inv;
    out.j_p2a += r.j_p2a * inv;
    out.j_kl += r.j_kl * inv;
    out.j_cyc += r.j_cyc * inv;
    out.j_total += r.j_total * inv;
  }
  return out;
}

PhaseResult run_phase(PhaseState& state, const TrainConfig& cfg,
                      const std::vector<std::vector<double>>& signals,
                      int epochs, const fs::path& run_dir,
                      const std::string& tag, bool is_fae) {
  PhaseResult result;
  const auto save = [&](const fs::path& path) {
    std::vector<std::pair<std::string, const Tensor*>> view;
    for (const auto& [name, tensor] : model::collect_params(state.params)) {
      view.emplace_back(name, tensor);
    }
    save_checkpoint(path, view);
  };

  for (int epoch = 1; epoch <= epochs; ++epoch) {
    state.epoch = epoch;
    state.ccc.epoch = epoch;
    const auto order = shuffled_indices(
        signals.size(),
        derive_seed(cfg.seed, tag + "_shuffle",
                    {static_cast<std::uint64_t>(epoch)}));
    std::vector<loss::LossReport> step_reports;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(cfg.batch)) {
      Batch batch;
      const std::size_t end =
          std::min(order.size(), start + static_cast<std::size_t>(cfg.batch));
      for (std::size_t k = start; k < end; ++k) {
        batch.push_back(signals[order[k]]);
      }
      step_reports.push_back(is_fae ? fae_step(state, batch, epoch, cfg)
                                    : dae_step(state, batch, epoch, cfg));
    }
    result.reports.push_back(mean_reports(step_reports, epoch));
    if (cfg.checkpoint_every > 0 && epoch % cfg.checkpoint_every == 0 &&
        epoch != epochs) {
      std::ostringstream name;
      name << tag << "_e" << std::setw(4) << std::setfill('0') << epoch
           << ".cspc";
      save(run_dir / name.str());
    }
  }

  result.checkpoint = run_dir / (tag + ".cspc");
  result.meta = run_dir / (tag + ".meta");
  save(result.checkpoint);
  save_model_meta(result.meta, state.model_config,
                  is_fae ? model::Role::fae : model::Role::dae, cfg);
  loss::write_loss_csv(run_dir / (tag + "_loss.csv"), result.reports);
  return result;
}

}  // namespace

void TrainConfig::validate() const {
  if (lr < 0.0) throw ConfigError("train: lr must be non-negative");
  if (batch <= 0) throw ConfigError("train: batch must be positive");
  if (fae_epochs <= 0 || dae_epochs <= 0) {
    throw ConfigError("train: epoch counts must be positive");
  }
  if (toggles.ccc && !toggles.phase_aware) {
    throw ConfigError(
        "train: the ccc toggle requires phase_aware (backward cycles map "
        "between the amplitude and phase domains)");
  }
  if (weights.theta1 < 0 || weights.theta2 < 0 || weights.theta3 < 0) {
    throw ConfigError("train: loss weights must be non-negative");
  }
  if (crop_samples < dsp::kBankWindows[0]) {
    throw ConfigError("train: crop_samples must be at least 1024");
  }
  if (grad_clip <= 0.0) throw ConfigError("train: grad_clip must be positive");
  if (sample_rate <= 0.0) throw ConfigError("train: bad sample_rate");
}

model::ModelConfig apply_toggles(model::ModelConfig config,
                                 const Toggles& toggles) {
  config.resolutions = toggles.multi_resolution ? 4 : 1;
  config.phase_aware = toggles.phase_aware;
  return config;
}

PhaseState PhaseState::create(const model::ModelConfig& config,
                              model::Role role,
                              const TrainConfig& train_config) {
  PhaseState state;
  state.model_config = config;
  state.params = model::make_autoencoder(
      config, role, derive_seed(train_config.seed, "init"));
  auto registry = model::collect_params(state.params);
  std::vector<Tensor*> ptrs;
  ptrs.reserve(registry.size());
  for (auto& [name, tensor] : registry) ptrs.push_back(tensor);
  state.adam = AdamState::create(ptrs, train_config.lr,
                                 train_config.adam_beta1,
                                 train_config.adam_beta2,
                                 train_config.adam_epsilon);
  return state;
}

CccStepResult ccc_s_step(Tape& tape, const model::BoundAutoencoder& bound,
                         const model::BankVars& target_bank,
                         const std::vector<Var>& recon_amp,
                         const std::vector<Var>& recon_phase, Var j_sa_base,
                         Var j_sp_base, CCCState& state, double theta1) {
  (void)recon_phase;  // the phase BC starts from the amplitude reconstruction
  if (state.epoch < 2) {
    throw StateError("ccc_s_step: backward-cycle terms are undefined at "
                     "epoch 1 (base losses only)");
  }
  const BackwardCycle bc =
      backward_cycle(tape, bound, target_bank.amplitude, target_bank.phase,
                     recon_amp, j_sa_base, j_sp_base, theta1, false);
  CccStepResult out;
  out.j_phase_combined = bc.j_phase_combined;
  out.j_amp_combined = bc.j_amp_combined;
  out.j_a2p = bc.j_a2p;
  out.j_p2a = bc.j_p2a;
  out.bc_phase = bc.bc_phase;
  out.bc_amplitude = bc.bc_amplitude;
  state.bc_phase_bank = bank_values(tape, bc.bc_phase);
  state.bc_amplitude_bank = bank_values(tape, bc.bc_amplitude);
  return out;
}

loss::LossReport fae_step(PhaseState& state, const Batch& batch,
                          std::int64_t epoch, const TrainConfig& config) {
  return step_impl(state, batch, epoch, config, true);
}

loss::LossReport dae_step(PhaseState& state, const Batch& batch,
                          std::int64_t epoch, const TrainConfig& config) {
  return step_impl(state, batch, epoch, config, false);
}

loss::LossReport fae_epoch(PhaseState& state, const Batch& batch,
                           const TrainConfig& config) {
  state.epoch += 1;
  state.ccc.epoch = state.epoch;
  return fae_step(state, batch, state.epoch, config);
}

loss::LossReport dae_epoch(PhaseState& state, const Batch& batch,
                           const TrainConfig& config) {
  state.epoch += 1;
  state.ccc.epoch = state.epoch;
  return dae_step(state, batch, state.epoch, config);
}

PhaseResult train_fae_phase(const data::Manifest& manifest,
                            const TrainConfig& config,
                            const model::ModelConfig& model_config,
                            const fs::path& run_dir,
                            model::AutoencoderParams* out_params) {
  config.validate();
  manifest.validate();
  const model::ModelConfig mcfg = apply_toggles(model_config, config.toggles);
  const auto entries = manifest.select(data::Split::fae, data::Role::clean);
  if (entries.empty()) {
    throw DataError("train-fae: manifest has no clean fae-split entries");
  }
  const auto signals = load_crops(entries, config);
  PhaseState state = PhaseState::create(mcfg, model::Role::fae, config);
  PhaseResult result = run_phase(state, config, signals, config.fae_epochs,
                                 run_dir, "fae", true);
  if (out_params != nullptr) *out_params = state.params;
  return result;
}

PhaseResult train_dae_phase(const data::Manifest& manifest,
                            const TrainConfig& config,
                            const model::ModelConfig& model_config,
                            const model::AutoencoderParams& fae_params,
                            const fs::path& run_dir,
                            model::AutoencoderParams* out_params) {
  config.validate();
  manifest.validate();
  const model::ModelConfig mcfg = apply_toggles(model_config, config.toggles);
  const auto entries = manifest.select(data::Split::dae, data::Role::mixture);
  if (entries.empty()) {
    throw DataError("train-dae: manifest has no mixture dae-split entries");
  }
  const auto signals = load_crops(entries, config);
  PhaseState state = PhaseState::create(mcfg, model::Role::dae, config);
  if (config.dae_decoders_from_fae) {
    model::copy_decoders(fae_params, state.params);
  }
  PhaseResult result = run_phase(state, config, signals, config.dae_epochs,
                                 run_dir, "dae", false);
  if (out_params != nullptr) *out_params = state.params;
  return result;
}

TrainResult train_full(const data::Manifest& manifest,
                       const TrainConfig& config,
                       const model::ModelConfig& model_config,
                       const fs::path& run_dir) {
  TrainResult result;
  result.fae = train_fae_phase(manifest, config, model_config, run_dir,
                               &result.fae_params);
  result.dae = train_dae_phase(manifest, config, model_config,
                               result.fae_params, run_dir,
                               &result.dae_params);
  return result;
}

// -- metadata -----------------------------------------------------------------

namespace {

std::string join_indices(const std::vector<Index>& v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) os << ",";
    os << v[i];
  }
  return os.str();
}

std::vector<Index> split_indices(const std::string& s) {
  std::vector<Index> out;
  std::istringstream is(s);
  std::string tok;
  while (std::getline(is, tok, ',')) out.push_back(std::stoll(tok));
  return out;
}

}  // namespace

void save_model_meta(const fs::path& path, const model::ModelConfig& config,
                     model::Role role, const TrainConfig& train_config) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot write model meta: " + path.string());
  os << "role=" << (role == model::Role::fae ? "fae" : "dae") << "\n";
  os << "fae_channels=" << join_indices(config.fae_channels) << "\n";
  os << "dae_channels=" << join_indices(config.dae_channels) << "\n";
  os << "latent_dim=" << config.latent_dim << "\n";
  os << "kernel=" << config.kernel << "\n";
  os << "stride=" << config.stride << "\n";
  os << "leaky_slope=" << config.leaky_slope << "\n";
  os << "base_bins=" << config.base_bins << "\n";
  os << "bank_bins=" << join_indices(config.bank_bins) << "\n";
  os << "resolutions=" << config.resolutions << "\n";
  os << "phase_aware=" << (config.phase_aware ? 1 : 0) << "\n";
  os << "phase_input_scale=" << config.phase_input_scale << "\n";
  os << "amp_output_scale=" << config.amp_output_scale << "\n";
  os << "phase_output_scale=" << config.phase_output_scale << "\n";
  os << "activations=leaky_relu(" << config.leaky_slope
     << ")+softplus_amplitude_head\n";
  os << "seed=" << train_config.seed << "\n";
  os << "multi_resolution=" << (train_config.toggles.multi_resolution ? 1 : 0)
     << "\n";
  os << "ccc=" << (train_config.toggles.ccc ? 1 : 0) << "\n";
}

ModelMeta load_model_meta(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw StateError("model meta not found: " + path.string());
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(is, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  const auto need = [&](const std::string& key) -> const std::string& {
    const auto it = kv.find(key);
    if (it == kv.end()) {
      throw FormatError("model meta missing key '" + key + "' in " +
                        path.string());
    }
    return it->second;
  };
  ModelMeta meta;
  meta.role = need("role") == "dae" ? model::Role::dae : model::Role::fae;
  meta.config.fae_channels = split_indices(need("fae_channels"));
  meta.config.dae_channels = split_indices(need("dae_channels"));
  meta.config.latent_dim = std::stoll(need("latent_dim"));
  meta.config.kernel = std::stoll(need("kernel"));
  meta.config.stride = std::stoll(need("stride"));
  meta.config.leaky_slope = std::stod(need("leaky_slope"));
  meta.config.base_bins = std::stoll(need("base_bins"));
  meta.config.bank_bins = split_indices(need("bank_bins"));
  meta.config.resolutions = static_cast<int>(std::stoll(need("resolutions")));
  meta.config.phase_aware = need("phase_aware") == "1";
  meta.config.phase_input_scale = std::stod(need("phase_input_scale"));
  meta.config.amp_output_scale = std::stod(need("amp_output_scale"));
  meta.config.phase_output_scale = std::stod(need("phase_output_scale"));
  meta.seed = std::stoull(need("seed"));
  meta.toggles.multi_resolution = need("multi_resolution") == "1";
  meta.toggles.phase_aware = meta.config.phase_aware;
  meta.toggles.ccc = need("ccc") == "1";
  return meta;
}

model::AutoencoderParams load_autoencoder(const fs::path& checkpoint,
                                          const fs::path& meta_path,
                                          model::ModelConfig* out_config,
                                          Toggles* out_toggles) {
  if (!fs::exists(checkpoint)) {
    throw StateError("checkpoint not found: " + checkpoint.string());
  }
  const ModelMeta meta = load_model_meta(meta_path);
  auto loaded = load_checkpoint(checkpoint);
  model::AutoencoderParams params =
      model::make_autoencoder(meta.config, meta.role, 0);
  for (auto& [name, tensor] : model::collect_params(params)) {
    const auto it = loaded.find(name);
    if (it == loaded.end()) {
      throw StateError("checkpoint " + checkpoint.string() +
                       " is missing parameter '" + name + "'");
    }
    if (!it->second.same_shape(*tensor)) {
      throw ShapeError("checkpoint parameter '" + name +
                       "' has mismatched shape");
    }
    tensor->values() = it->second.values();
  }
  if (out_config != nullptr) *out_config = meta.config;
  if (out_toggles != nullptr) *out_toggles = meta.toggles;
  return params;
}

std::vector<Toggles> ablation_rows() {
  return {
      Toggles{false, false, false}, Toggles{true, false, false},
      Toggles{false, true, false},  Toggles{false, true, true},
      Toggles{true, true, false},   Toggles{true, true, true},
  };
}

}  // namespace cyclespec::train
