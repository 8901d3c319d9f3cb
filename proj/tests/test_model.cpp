// Copyright 2026 CycleSpec Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <doctest.h>

#include <cmath>

#include "cyclespec/data.hpp"
#include "cyclespec/model.hpp"
#include "cyclespec/rng.hpp"

using namespace cyclespec;

namespace {

// Tiny schedules keep forward passes around a millisecond.
model::ModelConfig micro_config() {
  model::ModelConfig cfg;
  cfg.fae_channels = {8, 6, 4, 4};
  cfg.dae_channels = {8, 6, 5, 4, 4, 4};
  cfg.latent_dim = 4;
  return cfg;
}

model::BankVars bind_bank(Tape& tape, const model::AlignedBank& bank,
                          const model::ModelConfig& cfg) {
  model::BankVars out;
  for (int r = 0; r < cfg.resolutions; ++r) {
    out.amplitude.push_back(tape.constant(bank.amplitude[r]));
    if (cfg.phase_aware) out.phase.push_back(tape.constant(bank.phase[r]));
  }
  return out;
}

model::AlignedBank random_bank(const model::ModelConfig& cfg, Index frames,
                               std::uint64_t seed) {
  model::AlignedBank bank;
  bank.frames = frames;
  Rng rng(seed);
  for (int r = 0; r < cfg.resolutions; ++r) {
    Tensor amp = Tensor::zeros({cfg.bank_bins[r], frames});
    Tensor ph = Tensor::zeros({cfg.bank_bins[r], frames});
    for (Index i = 0; i < amp.numel(); ++i) {
      amp.values()[i] = rng.uniform(0, 2);
      ph.values()[i] = rng.uniform(-30, 30);
    }
    bank.amplitude.push_back(std::move(amp));
    bank.phase.push_back(std::move(ph));
  }
  return bank;
}

void zero_params(model::AutoencoderParams& params) {
  for (auto& [name, tensor] : model::collect_params(params)) {
    tensor->values().setZero();
  }
}

}  // namespace

TEST_CASE("encode on a zero bank with zero parameters gives zero stats") {
  const auto cfg = micro_config();
  auto params = model::make_autoencoder(cfg, model::Role::fae, 1);
  zero_params(params);

  model::AlignedBank bank;
  bank.frames = 5;
  for (int r = 0; r < cfg.resolutions; ++r) {
    bank.amplitude.push_back(Tensor::zeros({cfg.bank_bins[r], 5}));
    bank.phase.push_back(Tensor::zeros({cfg.bank_bins[r], 5}));
  }
  Tape tape;
  const auto bound = model::bind(tape, params, cfg);
  const auto enc = model::encode(tape, bound, bind_bank(tape, bank, cfg));
  CHECK(tape.value(enc.mean).values().abs().maxCoeff() == 0.0);
  CHECK(tape.value(enc.log_variance).values().abs().maxCoeff() == 0.0);
}

TEST_CASE("encode shape contract holds for any frame count") {
  const auto cfg = micro_config();
  const auto params = model::make_autoencoder(cfg, model::Role::fae, 2);
  for (const Index frames : {1, 3, 9}) {
    Tape tape;
    const auto bound = model::bind(tape, params, cfg);
    const auto bank = random_bank(cfg, frames, 7 + frames);
    const auto enc = model::encode(tape, bound, bind_bank(tape, bank, cfg));
    CHECK(tape.value(enc.mean).extent(0) == cfg.latent_dim);
    CHECK(tape.value(enc.mean).extent(1) == frames);
    CHECK(enc.layer_features.size() == 4);
  }
}

TEST_CASE("encode rejects a bank of the wrong size") {
  const auto cfg = micro_config();
  const auto params = model::make_autoencoder(cfg, model::Role::fae, 3);
  Tape tape;
  const auto bound = model::bind(tape, params, cfg);
  auto bank = random_bank(cfg, 4, 11);
  model::BankVars vars = bind_bank(tape, bank, cfg);
  vars.amplitude.pop_back();
  CHECK_THROWS_AS(model::encode(tape, bound, vars), ShapeError);
}

TEST_CASE("DAE encoder uses the six-layer schedule") {
  const auto cfg = micro_config();
  const auto params = model::make_autoencoder(cfg, model::Role::dae, 4);
  CHECK(params.encoder.convs.size() == 6);
  Tape tape;
  const auto bound = model::bind(tape, params, cfg);
  const auto bank = random_bank(cfg, 6, 13);
  const auto enc = model::encode(tape, bound, bind_bank(tape, bank, cfg));
  CHECK(tape.value(enc.mean).extent(0) == cfg.latent_dim);
  CHECK(enc.layer_features.size() == 4);
}

TEST_CASE("sample_latent reparameterization") {
  const auto cfg = micro_config();
  Tape tape;
  Tensor mean = Tensor::full({4, 3}, 0.5, true);
  Tensor log_var = Tensor::zeros({4, 3}, true);
  Var m = tape.leaf(mean);
  Var lv = tape.leaf(log_var);

  Var z0 = model::sample_latent(tape, m, lv, Tensor::zeros({4, 3}));
  CHECK((tape.value(z0).values() == mean.values()).all());

  Tensor noise = Tensor::full({4, 3}, 2.0);
  Var z1 = model::sample_latent(tape, m, lv, noise);
  CHECK(tape.value(z1).values()[0] == doctest::Approx(2.5));

  CHECK_THROWS_AS(model::sample_latent(tape, m, lv, Tensor::zeros({4, 2})),
                  ShapeError);
}

TEST_CASE("decode emits every resolution with the right bins") {
  const auto cfg = micro_config();
  const auto params = model::make_autoencoder(cfg, model::Role::fae, 5);
  Tape tape;
  const auto bound = model::bind(tape, params, cfg);
  Rng rng(6);
  Tensor z = Tensor::zeros({cfg.latent_dim, 7});
  for (Index i = 0; i < z.numel(); ++i) z.values()[i] = rng.uniform(-1, 1);
  const auto planes =
      model::decode(tape, bound.amp_decoder, cfg, tape.constant(z), true);
  REQUIRE(planes.size() == 4);
  for (int r = 0; r < 4; ++r) {
    const Tensor& p = tape.value(planes[r]);
    CHECK(p.extent(0) == cfg.bank_bins[r]);
    CHECK(p.extent(1) == 7);
    CHECK(p.values().minCoeff() >= 0.0);  // softplus range
  }
}

TEST_CASE("decode with zero parameters: softplus(0) amplitude, zero phase") {
  const auto cfg = micro_config();
  auto params = model::make_autoencoder(cfg, model::Role::fae, 7);
  zero_params(params);
  Tape tape;
  const auto bound = model::bind(tape, params, cfg);
  const Tensor z = Tensor::zeros({cfg.latent_dim, 3});
  const auto amp =
      model::decode(tape, bound.amp_decoder, cfg, tape.constant(z), true);
  const auto phase =
      model::decode(tape, bound.phase_decoder, cfg, tape.constant(z), false);
  for (int r = 0; r < 4; ++r) {
    const Tensor& a = tape.value(amp[r]);
    for (Index i = 0; i < a.numel(); ++i) {
      CHECK(a.values()[i] == doctest::Approx(std::log(2.0)));
    }
    CHECK(tape.value(phase[r]).values().abs().maxCoeff() == 0.0);
  }
}

TEST_CASE("decode rejects a latent with the wrong channel count") {
  const auto cfg = micro_config();
  const auto params = model::make_autoencoder(cfg, model::Role::fae, 8);
  Tape tape;
  const auto bound = model::bind(tape, params, cfg);
  const Tensor z = Tensor::zeros({cfg.latent_dim + 1, 3});
  CHECK_THROWS_AS(
      model::decode(tape, bound.amp_decoder, cfg, tape.constant(z), true),
      ShapeError);
}

TEST_CASE("single-resolution topology (multi-resolution toggle off)") {
  auto cfg = micro_config();
  cfg.resolutions = 1;
  const auto params = model::make_autoencoder(cfg, model::Role::fae, 9);
  CHECK(params.encoder.inject.size() == 1);
  CHECK(params.amp_decoder.trunk.size() == 1);
  Tape tape;
  const auto bound = model::bind(tape, params, cfg);
  const auto bank = random_bank(cfg, 4, 21);
  const auto enc = model::encode(tape, bound, bind_bank(tape, bank, cfg));
  const auto planes =
      model::decode(tape, bound.amp_decoder, cfg, enc.mean, true);
  CHECK(planes.size() == 1);
  CHECK(tape.value(planes[0]).extent(0) == 513);
}

TEST_CASE("amplitude-only topology (phase-aware toggle off)") {
  auto cfg = micro_config();
  cfg.phase_aware = false;
  const auto params = model::make_autoencoder(cfg, model::Role::fae, 10);
  CHECK(params.phase_decoder.trunk.empty());
  Tape tape;
  const auto bound = model::bind(tape, params, cfg);
  auto bank = random_bank(micro_config(), 4, 22);
  model::BankVars vars;
  for (int r = 0; r < 4; ++r) {
    vars.amplitude.push_back(tape.constant(bank.amplitude[r]));
  }
  const auto enc = model::encode(tape, bound, vars);
  CHECK(tape.value(enc.mean).extent(0) == cfg.latent_dim);
  CHECK_THROWS_AS(
      model::decode(tape, bound.phase_decoder, cfg, enc.mean, false),
      StateError);
}

TEST_CASE("align_bank crops every resolution to the base frame count") {
  const auto signal = data::synth_speech(3, 2048, 16000);
  const auto spectra = dsp::multi_res<double>(signal);
  const auto aligned = model::align_bank(spectra, 4);
  const Index base_frames = (2048 - 1024) / 32 + 1;
  CHECK(aligned.frames == base_frames);
  for (int r = 0; r < 4; ++r) {
    CHECK(aligned.amplitude[r].extent(1) == base_frames);
    CHECK(aligned.amplitude[r].extent(0) == dsp::kBankWindows[r] / 2 + 1);
  }
}

TEST_CASE("copy_decoders transfers FAE decoder weights into the DAE") {
  const auto cfg = micro_config();
  const auto fae = model::make_autoencoder(cfg, model::Role::fae, 11);
  auto dae = model::make_autoencoder(cfg, model::Role::dae, 12);
  model::copy_decoders(fae, dae);
  CHECK((dae.amp_decoder.trunk[0].weight.values() ==
         fae.amp_decoder.trunk[0].weight.values())
            .all());
  CHECK((dae.phase_decoder.heads[3].weight.values() ==
         fae.phase_decoder.heads[3].weight.values())
            .all());
  // Encoders stay independent.
  CHECK(dae.encoder.convs.size() != fae.encoder.convs.size());
}

TEST_CASE("enhance is deterministic and length-preserving") {
  const auto cfg = micro_config();
  const auto fae = model::make_autoencoder(cfg, model::Role::fae, 13);
  const auto dae = model::make_autoencoder(cfg, model::Role::dae, 14);
  const auto mix = data::synth_speech(15, 3000, 16000);
  const auto out1 = model::enhance(mix, dae, fae, cfg);
  const auto out2 = model::enhance(mix, dae, fae, cfg);
  REQUIRE(out1.size() == mix.size());
  CHECK(out1 == out2);  // bitwise: no test-time sampling
  std::vector<double> tiny(100, 0.0);
  CHECK_THROWS_AS(model::enhance(tiny, dae, fae, cfg), InputError);
}

TEST_CASE("parameter registry is stable and collect orders agree") {
  const auto cfg = micro_config();
  auto params = model::make_autoencoder(cfg, model::Role::fae, 16);
  const auto registry = model::collect_params(params);
  Tape tape;
  const auto bound = model::bind(tape, params, cfg);
  const auto bound_vars = model::collect_bound_params(bound);
  REQUIRE(registry.size() == bound_vars.size());
  for (std::size_t i = 0; i < registry.size(); ++i) {
    CHECK((registry[i].second->values() ==
           tape.value(bound_vars[i]).values())
              .all());
  }
}
