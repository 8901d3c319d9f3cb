// Copyright 2026 CycleSpec Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "cyclespec/cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>

#include "cyclespec/config.hpp"
#include "cyclespec/data.hpp"
#include "cyclespec/eval.hpp"
#include "cyclespec/gradcheck.hpp"
#include "cyclespec/model.hpp"
#include "cyclespec/rng.hpp"
#include "cyclespec/train.hpp"
#include "cyclespec/wav.hpp"

namespace cyclespec::cli {

namespace {

namespace fs = std::filesystem;

struct CommonArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  bool paper_scale = false;
  std::optional<int> threads;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "key=value config file");
  cmd->add_option("--seed", args.seed, "root random seed");
  cmd->add_option("--out", args.out_dir, "output/run directory");
  cmd->add_flag("--paper-scale", args.paper_scale,
                "published schedules and epoch counts instead of the desk "
                "preset");
  cmd->add_option("--threads", args.threads,
                  "worker cap (otherwise CYCLESPEC_THREADS or hardware)");
}

config::Settings load_settings(const CommonArgs& args) {
  config::FileConfig file;
  if (!args.config_path.empty()) {
    file = config::FileConfig::parse_file(args.config_path);
  }
  return config::resolve(file, args.paper_scale, args.seed, args.threads);
}

fs::path resolve_run_dir(const CommonArgs& args, std::uint64_t seed) {
  if (!args.out_dir.empty()) return args.out_dir;
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm_utc{};
  gmtime_r(&t, &tm_utc);
  std::ostringstream name;
  name << std::put_time(&tm_utc, "%Y%m%d-%H%M%S") << "-seed" << seed;
  return fs::path("runs") / name.str();
}

fs::path prepare_run_dir(const CommonArgs& args,
                         const config::Settings& settings) {
  const fs::path dir = resolve_run_dir(args, settings.train.seed);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create run directory: " + ec.message());
  config::write_resolved(dir / "config_resolved.txt", settings);
  return dir;
}

void snapshot_manifest(const fs::path& manifest_path, const fs::path& dir) {
  std::error_code ec;
  fs::copy_file(manifest_path, dir / "manifest.tsv",
                fs::copy_options::overwrite_existing, ec);
  if (ec) {
    throw IoError("cannot snapshot manifest into run directory: " +
                  ec.message());
  }
}

struct LoadedModels {
  model::AutoencoderParams fae;
  model::AutoencoderParams dae;
  model::ModelConfig config;
};

LoadedModels load_models(const fs::path& model_dir) {
  LoadedModels m;
  model::ModelConfig fae_cfg, dae_cfg;
  m.fae = train::load_autoencoder(model_dir / "fae.cspc",
                                  model_dir / "fae.meta", &fae_cfg);
  m.dae = train::load_autoencoder(model_dir / "dae.cspc",
                                  model_dir / "dae.meta", &dae_cfg);
  if (fae_cfg.latent_dim != dae_cfg.latent_dim ||
      fae_cfg.resolutions != dae_cfg.resolutions ||
      fae_cfg.phase_aware != dae_cfg.phase_aware ||
      fae_cfg.base_bins != dae_cfg.base_bins) {
    throw StateError("fae/dae checkpoints in " + model_dir.string() +
                     " were trained with incompatible configurations");
  }
  m.config = dae_cfg;
  return m;
}

eval::Enhancer make_enhancer(const LoadedModels& models, double sample_rate) {
  return [&models, sample_rate](std::span<const double> mixture) {
    return model::enhance(mixture, models.dae, models.fae, models.config,
                          sample_rate);
  };
}

// -- command bodies -----------------------------------------------------------

int cmd_prepare_data(const CommonArgs& args, const std::string& ingest_clean,
                     const std::string& ingest_noise) {
  const config::Settings settings = load_settings(args);
  const fs::path dir = prepare_run_dir(args, settings);
  data::Manifest manifest =
      data::synth_corpus(settings.corpus, settings.train.seed, dir);
  if (!ingest_clean.empty()) {
    for (auto e : data::ingest(ingest_clean, data::Role::clean)) {
      manifest.entries.push_back(std::move(e));
    }
  }
  if (!ingest_noise.empty()) {
    for (auto e : data::ingest(ingest_noise, data::Role::noise)) {
      manifest.entries.push_back(std::move(e));
    }
  }
  manifest.validate();
  manifest.save(dir / "manifest.tsv");
  std::cout << "corpus written to " << dir.string() << " ("
            << manifest.entries.size() << " manifest entries)\n";
  return 0;
}

int cmd_train_fae(const CommonArgs& args, const std::string& manifest_path) {
  const config::Settings settings = load_settings(args);
  const data::Manifest manifest = data::Manifest::load(manifest_path);
  const fs::path dir = prepare_run_dir(args, settings);
  snapshot_manifest(manifest_path, dir);
  const auto result = train::train_fae_phase(manifest, settings.train,
                                             settings.model, dir);
  std::cout << "fae checkpoint: " << result.checkpoint.string() << "\n";
  if (!result.reports.empty()) {
    std::cout << "J_FAE epoch 1: " << result.reports.front().j_total
              << "  epoch " << result.reports.size() << ": "
              << result.reports.back().j_total << "\n";
  }
  return 0;
}

int cmd_train_dae(const CommonArgs& args, const std::string& manifest_path,
                  const std::string& fae_dir) {
  const config::Settings settings = load_settings(args);
  const data::Manifest manifest = data::Manifest::load(manifest_path);

  // Fail fast before any run-directory state is written.
  const fs::path fae_ckpt = fs::path(fae_dir) / "fae.cspc";
  const fs::path fae_meta = fs::path(fae_dir) / "fae.meta";
  if (!fs::exists(fae_ckpt) || !fs::exists(fae_meta)) {
    throw StateError(
        "train-dae requires a trained FAE checkpoint; not found in '" +
        fae_dir + "' (run train-fae first)");
  }
  model::ModelConfig fae_cfg;
  const model::AutoencoderParams fae_params =
      train::load_autoencoder(fae_ckpt, fae_meta, &fae_cfg);

  const fs::path dir = prepare_run_dir(args, settings);
  snapshot_manifest(manifest_path, dir);
  const auto result = train::train_dae_phase(manifest, settings.train,
                                             settings.model, fae_params, dir);
  // Keep the FAE pair next to the DAE so the run directory is
  // self-contained for enhance/evaluate.
  std::error_code ec;
  fs::copy_file(fae_ckpt, dir / "fae.cspc",
                fs::copy_options::overwrite_existing, ec);
  fs::copy_file(fae_meta, dir / "fae.meta",
                fs::copy_options::overwrite_existing, ec);
  std::cout << "dae checkpoint: " << result.checkpoint.string() << "\n";
  return 0;
}

int cmd_enhance(const std::string& in_path, const std::string& out_path,
                const std::string& model_dir) {
  const LoadedModels models = load_models(model_dir);
  const WavData in = read_wav(in_path);
  const std::vector<double> out =
      model::enhance(in.samples, models.dae, models.fae, models.config,
                     in.sample_rate);
  write_wav(out_path, out, in.sample_rate);
  std::cout << "enhanced " << in.samples.size() << " samples -> " << out_path
            << "\n";
  return 0;
}

int cmd_evaluate(const CommonArgs& args, const std::string& manifest_path,
                 const std::string& model_dir,
                 const std::vector<double>& snr_filter,
                 const std::vector<std::string>& noise_filter) {
  const config::Settings settings = load_settings(args);
  data::Manifest manifest = data::Manifest::load(manifest_path);
  if (!snr_filter.empty() || !noise_filter.empty()) {
    data::Manifest filtered;
    for (const auto& e : manifest.entries) {
      if (e.role == data::Role::mixture && e.split == data::Split::test) {
        if (!snr_filter.empty() &&
            std::find(snr_filter.begin(), snr_filter.end(),
                      e.snr_db.value_or(1e9)) == snr_filter.end()) {
          continue;
        }
        if (!noise_filter.empty() &&
            std::find(noise_filter.begin(), noise_filter.end(),
                      e.noise_kind) == noise_filter.end()) {
          continue;
        }
      }
      filtered.entries.push_back(e);
    }
    manifest = std::move(filtered);
  }

  const LoadedModels models = load_models(model_dir);
  const fs::path dir = prepare_run_dir(args, settings);
  const eval::MetricReport report = eval::evaluate_set(
      manifest, make_enhancer(models, settings.train.sample_rate),
      settings.train.threads);
  report.save_csv(dir / "metrics.csv");
  report.save_cells_csv(dir / "metrics_cells.csv");
  report.save_jsonl(dir / "metrics.jsonl");
  std::cout << "evaluated " << report.rows.size()
            << " mixtures; mean SDR " << report.mean_sdr() << " dB\n";
  return 0;
}

int cmd_ablate(const CommonArgs& args, const std::string& manifest_path,
               int seeds) {
  const config::Settings settings = load_settings(args);
  const data::Manifest manifest = data::Manifest::load(manifest_path);
  const fs::path dir = prepare_run_dir(args, settings);
  snapshot_manifest(manifest_path, dir);

  std::ofstream csv(dir / "ablation.csv", std::ios::trunc);
  if (!csv) throw IoError("cannot write ablation.csv");
  csv << std::setprecision(17);
  csv << "multi_resolution,phase_aware,ccc,seed,mean_sdr_db,mean_si_sdr_db,"
         "mean_lsd_db\n";

  for (const auto& row : train::ablation_rows()) {
    double acc_sdr = 0, acc_si = 0, acc_lsd = 0;
    for (int s = 0; s < seeds; ++s) {
      train::TrainConfig tcfg = settings.train;
      tcfg.toggles = row;
      tcfg.seed = derive_seed(settings.train.seed, "ablate",
                              {static_cast<std::uint64_t>(s)});
      std::ostringstream sub;
      sub << "row_mr" << row.multi_resolution << "_pa" << row.phase_aware
          << "_ccc" << row.ccc << "_s" << s;
      const fs::path row_dir = dir / sub.str();
      fs::create_directories(row_dir);
      const auto trained =
          train::train_full(manifest, tcfg, settings.model, row_dir);

      const model::ModelConfig row_cfg =
          train::apply_toggles(settings.model, row);
      const eval::Enhancer enhancer =
          [&](std::span<const double> mixture) {
            return model::enhance(mixture, trained.dae_params,
                                  trained.fae_params, row_cfg,
                                  tcfg.sample_rate);
          };
      const eval::MetricReport report =
          eval::evaluate_set(manifest, enhancer, tcfg.threads);
      double mean_si = 0, mean_lsd = 0;
      for (const auto& r : report.rows) {
        mean_si += r.si_sdr_db;
        mean_lsd += r.lsd_db;
      }
      mean_si /= static_cast<double>(report.rows.size());
      mean_lsd /= static_cast<double>(report.rows.size());
      csv << row.multi_resolution << ',' << row.phase_aware << ',' << row.ccc
          << ',' << s << ',' << report.mean_sdr() << ',' << mean_si << ','
          << mean_lsd << '\n';
      acc_sdr += report.mean_sdr();
      acc_si += mean_si;
      acc_lsd += mean_lsd;
    }
    csv << row.multi_resolution << ',' << row.phase_aware << ',' << row.ccc
        << ",mean," << acc_sdr / seeds << ',' << acc_si / seeds << ','
        << acc_lsd / seeds << '\n';
  }
  std::cout << "ablation table: " << (dir / "ablation.csv").string() << "\n";
  return 0;
}

int cmd_gradcheck(int seeds) {
  gradcheck::Options options;
  options.seeds = seeds;
  const auto checks = gradcheck::run(options);
  for (const auto& c : checks) {
    std::cout << (c.ok ? "[PASS] " : "[FAIL] ") << c.name
              << "  max_rel_err=" << c.max_rel_err << "\n";
  }
  return gradcheck::all_ok(checks) ? 0 : 1;
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"cyclespec: phase-aware self-supervised speech enhancement"};
  app.require_subcommand(1);

  CommonArgs prep_args, fae_args, dae_args, eval_args, abl_args;
  std::string manifest_path, fae_dir, in_path, out_path, model_dir;
  std::string ingest_clean, ingest_noise;
  std::vector<double> snr_filter;
  std::vector<std::string> noise_filter;
  int ablate_seeds = 1;
  int gradcheck_seeds = 20;

  auto* prep = app.add_subcommand(
      "prepare-data", "generate the synthetic corpus and manifest");
  add_common(prep, prep_args);
  prep->add_option("--ingest-clean", ingest_clean,
                   "directory of user WAVs to register as clean");
  prep->add_option("--ingest-noise", ingest_noise,
                   "directory of user WAVs to register as noise");

  auto* tfae = app.add_subcommand("train-fae",
                                  "train the foundation autoencoder");
  add_common(tfae, fae_args);
  tfae->add_option("--data", manifest_path, "manifest path")->required();

  auto* tdae = app.add_subcommand("train-dae",
                                  "train the downstream autoencoder");
  add_common(tdae, dae_args);
  tdae->add_option("--data", manifest_path, "manifest path")->required();
  tdae->add_option("--fae", fae_dir,
                   "run directory holding fae.cspc/fae.meta")->required();

  auto* enh = app.add_subcommand("enhance", "enhance one mixture WAV");
  enh->add_option("--in", in_path, "input WAV")->required();
  enh->add_option("--out", out_path, "output WAV")->required();
  enh->add_option("--model", model_dir,
                  "run directory with fae/dae checkpoints")->required();

  auto* evl = app.add_subcommand("evaluate",
                                 "score the test split of a manifest");
  add_common(evl, eval_args);
  evl->add_option("--data", manifest_path, "manifest path")->required();
  evl->add_option("--model", model_dir,
                  "run directory with fae/dae checkpoints")->required();
  evl->add_option("--snr", snr_filter, "restrict to these SNR cells (dB)");
  evl->add_option("--noise", noise_filter, "restrict to these noise kinds");

  auto* abl = app.add_subcommand(
      "ablate", "train and score every valid toggle combination");
  add_common(abl, abl_args);
  abl->add_option("--data", manifest_path, "manifest path")->required();
  abl->add_option("--seeds", ablate_seeds, "seeds per ablation row");

  auto* gc = app.add_subcommand(
      "gradcheck", "finite-difference validation of every op");
  gc->add_option("--seeds", gradcheck_seeds, "random draws per op");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (prep->parsed()) {
      return cmd_prepare_data(prep_args, ingest_clean, ingest_noise);
    }
    if (tfae->parsed()) return cmd_train_fae(fae_args, manifest_path);
    if (tdae->parsed()) return cmd_train_dae(dae_args, manifest_path, fae_dir);
    if (enh->parsed()) return cmd_enhance(in_path, out_path, model_dir);
    if (evl->parsed()) {
      return cmd_evaluate(eval_args, manifest_path, model_dir, snr_filter,
                          noise_filter);
    }
    if (abl->parsed()) return cmd_ablate(abl_args, manifest_path, ablate_seeds);
    if (gc->parsed()) return cmd_gradcheck(gradcheck_seeds);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 1;
  } catch (const FormatError& e) {
    std::cerr << "format error: " << e.what() << "\n";
    return 1;
  } catch (const StateError& e) {
    std::cerr << "state error: " << e.what() << "\n";
    return 1;
  } catch (const ShapeError& e) {
    std::cerr << "shape error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "runtime failure: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace cyclespec::cli
