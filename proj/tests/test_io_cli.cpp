// Copyright 2026 CycleSpec Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <doctest.h>

#include <fstream>

#include "cyclespec/checkpoint.hpp"
#include "cyclespec/cli.hpp"
#include "cyclespec/config.hpp"
#include "cyclespec/rng.hpp"
#include "cyclespec/wav.hpp"

using namespace cyclespec;

namespace {

namespace fs = std::filesystem;

int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"cyclespec"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return cli::run(static_cast<int>(argv.size()), argv.data());
}

fs::path temp_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("cyclespec_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string file_bytes(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(is)),
                     std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("wav round trip at 16-bit resolution") {
  const auto dir = temp_dir("wav");
  std::vector<double> x(500);
  Rng rng(3);
  for (auto& v : x) v = rng.uniform(-0.9, 0.9);
  write_wav(dir / "x.wav", x, 16000);
  const WavData back = read_wav(dir / "x.wav");
  CHECK(back.sample_rate == 16000);
  REQUIRE(back.samples.size() == x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    CHECK(back.samples[i] == doctest::Approx(x[i]).epsilon(1e-3));
  }
  fs::remove_all(dir);
}

TEST_CASE("wav reader downmixes stereo by averaging") {
  const auto dir = temp_dir("wav_stereo");
  // Hand-built stereo file: L = 0.5, R = -0.5 -> mono 0.
  std::ofstream os(dir / "st.wav", std::ios::binary);
  const auto put32 = [&](std::uint32_t v) {
    char b[4] = {char(v), char(v >> 8), char(v >> 16), char(v >> 24)};
    os.write(b, 4);
  };
  const auto put16 = [&](std::uint16_t v) {
    char b[2] = {char(v), char(v >> 8)};
    os.write(b, 2);
  };
  const int frames = 10;
  os.write("RIFF", 4);
  put32(36 + frames * 4);
  os.write("WAVE", 4);
  os.write("fmt ", 4);
  put32(16);
  put16(1);
  put16(2);  // stereo
  put32(8000);
  put32(8000 * 4);
  put16(4);
  put16(16);
  os.write("data", 4);
  put32(frames * 4);
  for (int i = 0; i < frames; ++i) {
    put16(static_cast<std::uint16_t>(16384));   // L
    put16(static_cast<std::uint16_t>(-16384));  // R
  }
  os.close();
  const WavData wav = read_wav(dir / "st.wav");
  CHECK(wav.sample_rate == 8000);
  REQUIRE(wav.samples.size() == 10);
  for (const double v : wav.samples) CHECK(v == doctest::Approx(0.0));
  fs::remove_all(dir);
}

TEST_CASE("checkpoint round trip preserves names, shapes and bits") {
  const auto dir = temp_dir("ckpt");
  Tensor a = Tensor::zeros({2, 3, 4});
  Tensor b = Tensor::zeros({7});
  Rng rng(5);
  for (Index i = 0; i < a.numel(); ++i) a.values()[i] = rng.uniform(-1, 1);
  for (Index i = 0; i < b.numel(); ++i) b.values()[i] = rng.uniform(-1, 1);
  save_checkpoint(dir / "m.cspc", {{"layer.weight", &a}, {"layer.bias", &b}});

  // Magic string first.
  CHECK(file_bytes(dir / "m.cspc").substr(0, 5) == "CSPC1");

  const auto loaded = load_checkpoint(dir / "m.cspc");
  REQUIRE(loaded.size() == 2);
  CHECK(loaded.at("layer.weight").shape() == Shape{2, 3, 4});
  CHECK((loaded.at("layer.weight").values() == a.values()).all());
  CHECK((loaded.at("layer.bias").values() == b.values()).all());

  // Corrupt magic.
  {
    std::ofstream os(dir / "bad.cspc", std::ios::binary);
    os << "NOPE!";
  }
  CHECK_THROWS_AS(load_checkpoint(dir / "bad.cspc"), FormatError);
  CHECK_THROWS_AS(load_checkpoint(dir / "missing.cspc"), StateError);
  fs::remove_all(dir);
}

TEST_CASE("config file parsing with sections and overrides") {
  const auto cfg = config::FileConfig::parse_text(
      "# comment\n[train]\nlr = 0.01\nccc = off\n[data]\nfae_clean=3\n");
  CHECK(cfg.get_double("train.lr", 0.0) == doctest::Approx(0.01));
  CHECK(cfg.get_bool("train.ccc", true) == false);
  CHECK(cfg.get_int("data.fae_clean", 0) == 3);
  CHECK(cfg.get_int("data.missing", 7) == 7);
  CHECK_THROWS_AS(config::FileConfig::parse_text("novalue\n"), ConfigError);
  CHECK_THROWS_AS(
      config::resolve(config::FileConfig::parse_text(
                          "[train]\nphase_aware=0\nccc=1\n"),
                      false, std::nullopt, std::nullopt),
      ConfigError);

  const auto settings =
      config::resolve(cfg, false, std::uint64_t{9}, std::nullopt);
  CHECK(settings.train.lr == doctest::Approx(0.01));
  CHECK(settings.train.seed == 9);
  CHECK(settings.train.fae_epochs == 30);  // desk preset
  CHECK(settings.model.latent_dim == 8);

  const auto paper =
      config::resolve(config::FileConfig{}, true, std::nullopt, std::nullopt);
  CHECK(paper.train.fae_epochs == 700);
  CHECK(paper.train.dae_epochs == 1500);
  CHECK(paper.model.latent_dim == 64);
  CHECK(paper.model.fae_channels ==
        std::vector<Index>{512, 256, 128, 64});
}

TEST_CASE("cli rejects unknown flags and missing subcommands") {
  CHECK(run_cli({"no-such-command"}) == 1);
  CHECK(run_cli({"gradcheck", "--bogus"}) == 1);
  CHECK(run_cli({}) == 1);
}

TEST_CASE("cli gradcheck exits zero when every op passes") {
  CHECK(run_cli({"gradcheck", "--seeds", "2"}) == 0);
}

TEST_CASE("cli train-dae fails fast without an FAE checkpoint") {
  const auto dir = temp_dir("cli_dae_guard");
  // Tiny corpus so the manifest exists.
  const auto corpus_cfg =
      "[data]\nfae_clean=1\ndae_sources=1\ntest_utterances=1\n"
      "utterance_seconds=0.15\nnoise_seconds=0.3\n";
  const auto cfg_path = dir / "micro.cfg";
  {
    std::ofstream os(cfg_path);
    os << corpus_cfg;
  }
  CHECK(run_cli({"prepare-data", "--out", (dir / "corpus").string(),
                 "--config", cfg_path.string(), "--seed", "3"}) == 0);
  const auto run_dir = dir / "run";
  const int code = run_cli({"train-dae", "--data",
                            (dir / "corpus" / "manifest.tsv").string(),
                            "--fae", (dir / "nothing").string(), "--out",
                            run_dir.string(), "--seed", "3"});
  CHECK(code == 1);
  CHECK_FALSE(fs::exists(run_dir / "dae.cspc"));
  CHECK_FALSE(fs::exists(run_dir / "config_resolved.txt"));  // no partial state
  fs::remove_all(dir);
}

TEST_CASE("cli end-to-end pipeline on a micro corpus") {
  const auto dir = temp_dir("cli_e2e");
  const auto cfg_path = dir / "micro.cfg";
  {
    std::ofstream os(cfg_path);
    os << "[data]\nfae_clean=2\ndae_sources=2\ntest_utterances=1\n"
          "utterance_seconds=0.15\nnoise_seconds=0.3\n"
          "[train]\nfae_epochs=2\ndae_epochs=2\nbatch=2\nthreads=2\n"
          "[model]\n";
  }
  // Shrink the model via a custom config? The desk preset is already small;
  // two epochs keep this test under a few seconds.
  const auto corpus = (dir / "corpus").string();
  REQUIRE(run_cli({"prepare-data", "--out", corpus, "--config",
                   cfg_path.string(), "--seed", "11"}) == 0);
  const auto manifest = corpus + "/manifest.tsv";

  const auto fae_run = (dir / "fae_run").string();
  REQUIRE(run_cli({"train-fae", "--data", manifest, "--out", fae_run,
                   "--config", cfg_path.string(), "--seed", "11"}) == 0);
  CHECK(fs::exists(fs::path(fae_run) / "fae.cspc"));
  CHECK(fs::exists(fs::path(fae_run) / "config_resolved.txt"));
  CHECK(fs::exists(fs::path(fae_run) / "manifest.tsv"));

  const auto dae_run = (dir / "dae_run").string();
  REQUIRE(run_cli({"train-dae", "--data", manifest, "--fae", fae_run,
                   "--out", dae_run, "--config", cfg_path.string(), "--seed",
                   "11"}) == 0);
  CHECK(fs::exists(fs::path(dae_run) / "dae.cspc"));
  CHECK(fs::exists(fs::path(dae_run) / "fae.cspc"));  // copied alongside

  // enhance: identical length and sample rate.
  const auto mix_entries = data::Manifest::load(manifest)
                               .select(data::Split::test, data::Role::mixture);
  REQUIRE(!mix_entries.empty());
  const auto est_path = (dir / "est.wav").string();
  REQUIRE(run_cli({"enhance", "--in", mix_entries[0].path, "--out", est_path,
                   "--model", dae_run}) == 0);
  const WavData in = read_wav(mix_entries[0].path);
  const WavData out = read_wav(est_path);
  CHECK(out.sample_rate == in.sample_rate);
  CHECK(out.samples.size() == in.samples.size());

  const auto eval_dir = (dir / "eval").string();
  REQUIRE(run_cli({"evaluate", "--data", manifest, "--model", dae_run,
                   "--out", eval_dir, "--config", cfg_path.string(), "--seed",
                   "11"}) == 0);
  CHECK(fs::exists(fs::path(eval_dir) / "metrics.csv"));
  CHECK(fs::exists(fs::path(eval_dir) / "metrics_cells.csv"));

  fs::remove_all(dir);
}
