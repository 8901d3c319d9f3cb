// Copyright 2026 CycleSpec Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "cyclespec/config.hpp"

#include <fstream>
#include <sstream>

#include "cyclespec/errors.hpp"

namespace cyclespec::config {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

FileConfig FileConfig::parse_text(const std::string& text) {
  FileConfig cfg;
  std::istringstream is(text);
  std::string line, section;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError("config line " + std::to_string(line_no) +
                          ": unterminated section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": empty key");
    }
    cfg.values[section.empty() ? key : section + "." + key] = value;
  }
  return cfg;
}

FileConfig FileConfig::parse_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config file: " + path.string());
  std::stringstream buffer;
  buffer << is.rdbuf();
  return parse_text(buffer.str());
}

std::string FileConfig::get(const std::string& key,
                            const std::string& fallback) const {
  const auto it = values.find(key);
  return it == values.end() ? fallback : it->second;
}

double FileConfig::get_double(const std::string& key, double fallback) const {
  const auto it = values.find(key);
  if (it == values.end()) return fallback;
  try {
    return std::stod(it->second);
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "' is not a number: " +
                      it->second);
  }
}

std::int64_t FileConfig::get_int(const std::string& key,
                                 std::int64_t fallback) const {
  const auto it = values.find(key);
  if (it == values.end()) return fallback;
  try {
    return std::stoll(it->second);
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "' is not an integer: " +
                      it->second);
  }
}

bool FileConfig::get_bool(const std::string& key, bool fallback) const {
  const auto it = values.find(key);
  if (it == values.end()) return fallback;
  const std::string& v = it->second;
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ConfigError("config key '" + key + "' is not a boolean: " + v);
}

Settings resolve(const FileConfig& file, bool paper_scale,
                 std::optional<std::uint64_t> seed_override,
                 std::optional<int> threads_override) {
  Settings s;
  s.paper_scale = paper_scale;

  // Model: desk-scale schedules unless the paper scale is requested.
  s.model = paper_scale ? model::ModelConfig::full() : model::ModelConfig::desk();
  s.model.leaky_slope = file.get_double("model.leaky_slope",
                                        s.model.leaky_slope);
  s.model.phase_input_scale = file.get_double("model.phase_input_scale",
                                              s.model.phase_input_scale);

  // Train: desk defaults keep CI runs in minutes.
  s.train.scale_preset = paper_scale ? train::TrainConfig::Scale::full
                                     : train::TrainConfig::Scale::desk;
  s.train.fae_epochs = paper_scale ? 700 : 30;
  s.train.dae_epochs = paper_scale ? 1500 : 30;
  s.train.crop_samples = paper_scale ? 16384 : 2048;
  s.train.lr = file.get_double("train.lr", s.train.lr);
  s.train.batch = static_cast<int>(file.get_int("train.batch", s.train.batch));
  s.train.fae_epochs =
      static_cast<int>(file.get_int("train.fae_epochs", s.train.fae_epochs));
  s.train.dae_epochs =
      static_cast<int>(file.get_int("train.dae_epochs", s.train.dae_epochs));
  s.train.weights.theta1 =
      file.get_double("train.theta1", s.train.weights.theta1);
  s.train.weights.theta2 =
      file.get_double("train.theta2", s.train.weights.theta2);
  s.train.weights.theta3 =
      file.get_double("train.theta3", s.train.weights.theta3);
  s.train.seed = static_cast<std::uint64_t>(
      file.get_int("train.seed", static_cast<std::int64_t>(s.train.seed)));
  s.train.crop_samples =
      file.get_int("train.crop_samples", s.train.crop_samples);
  s.train.checkpoint_every = static_cast<int>(
      file.get_int("train.checkpoint_every", s.train.checkpoint_every));
  s.train.grad_clip = file.get_double("train.grad_clip", s.train.grad_clip);
  s.train.normalize_losses =
      file.get_bool("train.normalize_losses", s.train.normalize_losses);
  s.train.latent_align_weight = file.get_double(
      "train.latent_align_weight", s.train.latent_align_weight);
  s.train.dae_decoders_from_fae = file.get_bool(
      "train.dae_decoders_from_fae", s.train.dae_decoders_from_fae);
  s.train.adam_beta1 = file.get_double("train.adam_beta1", s.train.adam_beta1);
  s.train.adam_beta2 = file.get_double("train.adam_beta2", s.train.adam_beta2);
  s.train.adam_epsilon =
      file.get_double("train.adam_epsilon", s.train.adam_epsilon);
  s.train.threads =
      static_cast<int>(file.get_int("train.threads", s.train.threads));
  s.train.toggles.multi_resolution = file.get_bool(
      "train.multi_resolution", s.train.toggles.multi_resolution);
  s.train.toggles.phase_aware =
      file.get_bool("train.phase_aware", s.train.toggles.phase_aware);
  s.train.toggles.ccc = file.get_bool("train.ccc", s.train.toggles.ccc);

  // DSP / data.
  s.train.sample_rate =
      file.get_double("dsp.sample_rate", s.train.sample_rate);
  s.corpus.sample_rate = static_cast<int>(s.train.sample_rate);
  s.corpus.fae_clean =
      static_cast<int>(file.get_int("data.fae_clean", s.corpus.fae_clean));
  s.corpus.dae_sources =
      static_cast<int>(file.get_int("data.dae_sources", s.corpus.dae_sources));
  s.corpus.test_utterances = static_cast<int>(
      file.get_int("data.test_utterances", s.corpus.test_utterances));
  s.corpus.utterance_seconds = file.get_double("data.utterance_seconds",
                                               s.corpus.utterance_seconds);
  s.corpus.noise_seconds =
      file.get_double("data.noise_seconds", s.corpus.noise_seconds);

  if (seed_override) s.train.seed = *seed_override;
  if (threads_override) s.train.threads = *threads_override;

  s.train.validate();
  s.model.validate();
  return s;
}

void write_resolved(const std::filesystem::path& path,
                    const Settings& s) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot write resolved config: " + path.string());
  const auto indices = [](const std::vector<Index>& v) {
    std::ostringstream ss;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) ss << ",";
      ss << v[i];
    }
    return ss.str();
  };
  os << "[train]\n";
  os << "lr=" << s.train.lr << "\n";
  os << "batch=" << s.train.batch << "\n";
  os << "fae_epochs=" << s.train.fae_epochs << "\n";
  os << "dae_epochs=" << s.train.dae_epochs << "\n";
  os << "theta1=" << s.train.weights.theta1 << "\n";
  os << "theta2=" << s.train.weights.theta2 << "\n";
  os << "theta3=" << s.train.weights.theta3 << "\n";
  os << "seed=" << s.train.seed << "\n";
  os << "scale_preset="
     << (s.train.scale_preset == train::TrainConfig::Scale::full ? "full"
                                                                 : "desk")
     << "\n";
  os << "crop_samples=" << s.train.crop_samples << "\n";
  os << "checkpoint_every=" << s.train.checkpoint_every << "\n";
  os << "grad_clip=" << s.train.grad_clip << "\n";
  os << "normalize_losses=" << (s.train.normalize_losses ? 1 : 0) << "\n";
  os << "latent_align_weight=" << s.train.latent_align_weight << "\n";
  os << "dae_decoders_from_fae=" << (s.train.dae_decoders_from_fae ? 1 : 0)
     << "\n";
  os << "adam_beta1=" << s.train.adam_beta1 << "\n";
  os << "adam_beta2=" << s.train.adam_beta2 << "\n";
  os << "adam_epsilon=" << s.train.adam_epsilon << "\n";
  os << "threads=" << s.train.threads << "\n";
  os << "multi_resolution=" << (s.train.toggles.multi_resolution ? 1 : 0)
     << "\n";
  os << "phase_aware=" << (s.train.toggles.phase_aware ? 1 : 0) << "\n";
  os << "ccc=" << (s.train.toggles.ccc ? 1 : 0) << "\n";
  os << "[model]\n";
  os << "fae_channels=" << indices(s.model.fae_channels) << "\n";
  os << "dae_channels=" << indices(s.model.dae_channels) << "\n";
  os << "latent_dim=" << s.model.latent_dim << "\n";
  os << "kernel=" << s.model.kernel << "\n";
  os << "stride=" << s.model.stride << "\n";
  os << "leaky_slope=" << s.model.leaky_slope << "\n";
  os << "phase_input_scale=" << s.model.phase_input_scale << "\n";
  os << "[dsp]\n";
  os << "sample_rate=" << s.train.sample_rate << "\n";
  os << "bank_windows=1024,512,256,128\n";
  os << "hop=32\n";
  os << "[data]\n";
  os << "fae_clean=" << s.corpus.fae_clean << "\n";
  os << "dae_sources=" << s.corpus.dae_sources << "\n";
  os << "test_utterances=" << s.corpus.test_utterances << "\n";
  os << "utterance_seconds=" << s.corpus.utterance_seconds << "\n";
  os << "noise_seconds=" << s.corpus.noise_seconds << "\n";
}

}  // namespace cyclespec::config
