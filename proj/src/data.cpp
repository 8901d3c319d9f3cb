// Copyright 2026 CycleSpec Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "cyclespec/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "cyclespec/errors.hpp"
#include "cyclespec/rng.hpp"
#include "cyclespec/wav.hpp"

namespace cyclespec::data {

namespace {

double power(std::span<const double> x) {
  double p = 0.0;
  for (const double v : x) p += v * v;
  return p;
}

std::string format_snr(double snr_db) {
  std::ostringstream os;
  os << (snr_db < 0 ? "m" : "p") << std::abs(static_cast<int>(snr_db));
  return os.str();
}

Role parse_role(const std::string& s) {
  if (s == "clean") return Role::clean;
  if (s == "noise") return Role::noise;
  if (s == "mixture") return Role::mixture;
  throw FormatError("manifest: unknown role '" + s + "'");
}

Split parse_split(const std::string& s) {
  if (s == "fae") return Split::fae;
  if (s == "dae") return Split::dae;
  if (s == "test") return Split::test;
  if (s == "-") return Split::none;
  throw FormatError("manifest: unknown split '" + s + "'");
}

}  // namespace

std::string to_string(Role role) {
  switch (role) {
    case Role::clean: return "clean";
    case Role::noise: return "noise";
    case Role::mixture: return "mixture";
  }
  return "?";
}

std::string to_string(Split split) {
  switch (split) {
    case Split::fae: return "fae";
    case Split::dae: return "dae";
    case Split::test: return "test";
    case Split::none: return "-";
  }
  return "?";
}

std::string source_id(const std::string& id) {
  const auto dot = id.find('.');
  return dot == std::string::npos ? id : id.substr(0, dot);
}

void Manifest::validate() const {
  std::set<std::string> ids;
  std::set<std::string> fae_sources, dae_sources, test_sources;
  for (const auto& e : entries) {
    if (!ids.insert(e.id).second) {
      throw DataError("manifest: duplicate id '" + e.id + "'");
    }
    const std::string src = source_id(e.id);
    switch (e.split) {
      case Split::fae: fae_sources.insert(src); break;
      case Split::dae: dae_sources.insert(src); break;
      case Split::test: test_sources.insert(src); break;
      case Split::none: break;
    }
  }
  const auto overlap = [](const std::set<std::string>& a,
                          const std::set<std::string>& b) -> std::string {
    for (const auto& s : a) {
      if (b.count(s)) return s;
    }
    return {};
  };
  if (auto s = overlap(fae_sources, dae_sources); !s.empty()) {
    throw DataError("manifest: fae and dae splits share utterance '" + s +
                    "' (training must be unpaired)");
  }
  if (auto s = overlap(fae_sources, test_sources); !s.empty()) {
    throw DataError("manifest: fae and test splits share utterance '" + s +
                    "'");
  }
  if (auto s = overlap(dae_sources, test_sources); !s.empty()) {
    throw DataError("manifest: dae and test splits share utterance '" + s +
                    "'");
  }
}

std::vector<ManifestEntry> Manifest::select(Split split) const {
  std::vector<ManifestEntry> out;
  for (const auto& e : entries) {
    if (e.split == split) out.push_back(e);
  }
  return out;
}

std::vector<ManifestEntry> Manifest::select(Split split, Role role) const {
  std::vector<ManifestEntry> out;
  for (const auto& e : entries) {
    if (e.split == split && e.role == role) out.push_back(e);
  }
  return out;
}

const ManifestEntry* Manifest::find(const std::string& id) const {
  for (const auto& e : entries) {
    if (e.id == id) return &e;
  }
  return nullptr;
}

void Manifest::save(const std::filesystem::path& path) const {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot write manifest: " + path.string());
  os << std::setprecision(17);
  for (const auto& e : entries) {
    os << e.id << '\t' << e.path << '\t' << to_string(e.role) << '\t'
       << to_string(e.split) << '\t';
    if (e.snr_db) {
      os << *e.snr_db;
    } else {
      os << '-';
    }
    os << '\t' << (e.noise_kind.empty() ? "-" : e.noise_kind) << '\n';
  }
}

Manifest Manifest::load(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot read manifest: " + path.string());
  Manifest m;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::vector<std::string> fields;
    std::string f;
    while (std::getline(ss, f, '\t')) fields.push_back(f);
    if (fields.size() != 6) {
      throw FormatError("manifest line " + std::to_string(line_no) +
                        ": expected 6 tab-separated fields");
    }
    ManifestEntry e;
    e.id = fields[0];
    e.path = fields[1];
    e.role = parse_role(fields[2]);
    e.split = parse_split(fields[3]);
    if (fields[4] != "-") e.snr_db = std::stod(fields[4]);
    if (fields[5] != "-") e.noise_kind = fields[5];
    m.entries.push_back(std::move(e));
  }
  m.validate();
  return m;
}

std::vector<double> mix_at_snr(std::span<const double> clean,
                               std::span<const double> noise, double snr_db,
                               std::uint64_t tile_seed) {
  const double p_clean = power(clean);
  if (p_clean <= 0.0) throw InputError("mix_at_snr: clean has zero power");
  if (noise.empty() || power(noise) <= 0.0) {
    throw InputError("mix_at_snr: noise has zero power");
  }

  // Tile the noise to the clean length, offset chosen from the seed.
  std::vector<double> tiled(clean.size());
  Rng rng(derive_seed(tile_seed, "noise_tile"));
  const std::size_t offset =
      static_cast<std::size_t>(rng.integer(noise.size()));
  for (std::size_t i = 0; i < clean.size(); ++i) {
    tiled[i] = noise[(offset + i) % noise.size()];
  }
  const double p_noise = power(tiled);
  if (p_noise <= 0.0) {
    throw InputError("mix_at_snr: tiled noise segment has zero power");
  }
  const double gain =
      std::sqrt(p_clean / (p_noise * std::pow(10.0, snr_db / 10.0)));
  std::vector<double> out(clean.size());
  for (std::size_t i = 0; i < clean.size(); ++i) {
    out[i] = clean[i] + gain * tiled[i];
  }
  return out;
}

// -- synthetic corpus ---------------------------------------------------------

std::vector<double> synth_speech(std::uint64_t seed, int samples,
                                 int sample_rate, const VoiceParams& voice) {
  Rng rng(seed);
  // Small discrete pitch family keeps the clean manifold learnable at desk
  // scale; vibrato and envelopes provide per-utterance variation.
  const double f0_base =
      voice.pitches[rng.integer(voice.pitches.size())];
  const double vibrato_hz =
      rng.uniform(voice.vibrato_hz_min, voice.vibrato_hz_max);
  const double vibrato_depth = rng.uniform(0.2, 1.0) * voice.vibrato_depth;
  const double syllable_hz = rng.uniform(2.0, 4.0);
  const double syllable_shape = rng.uniform(0.8, 2.0);
  const double syllable_phase = rng.uniform(0.0, 2.0 * std::numbers::pi);

  // Formant-style band emphasis (three resonances, log-frequency Gaussians).
  const double formants[3] = {rng.uniform(350.0, 750.0),
                              rng.uniform(1100.0, 2100.0),
                              rng.uniform(2500.0, 3200.0)};
  const double widths[3] = {0.25, 0.3, 0.35};
  const auto formant_gain = [&](double hz) {
    double g = 0.05;
    for (int j = 0; j < 3; ++j) {
      const double d = std::log(hz / formants[j]) / widths[j];
      g += std::exp(-0.5 * d * d);
    }
    return g;
  };

  const int harmonics =
      static_cast<int>(std::floor(5500.0 / f0_base));
  std::vector<double> amp(harmonics + 1, 0.0);
  for (int h = 1; h <= harmonics; ++h) {
    amp[h] = formant_gain(h * f0_base) / std::pow(static_cast<double>(h), 1.1);
  }

  std::vector<double> out(samples, 0.0);
  double phase_f0 = 0.0;  // integrated fundamental phase
  for (int i = 0; i < samples; ++i) {
    const double t = static_cast<double>(i) / sample_rate;
    const double f0 =
        f0_base * (1.0 + vibrato_depth *
                             std::sin(2.0 * std::numbers::pi * vibrato_hz * t));
    phase_f0 += 2.0 * std::numbers::pi * f0 / sample_rate;
    double s = 0.0;
    for (int h = 1; h <= harmonics; ++h) {
      s += amp[h] * std::sin(h * phase_f0);
    }
    const double syl =
        0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * syllable_hz * t +
                             syllable_phase);
    out[i] = s * (0.25 + 0.75 * std::pow(syl, syllable_shape));
  }
  // Fade-in/out ramps and peak normalization. Headroom keeps -10 dB
  // mixtures inside the 16-bit range.
  const int ramp = std::min(samples / 16, sample_rate / 100);
  for (int i = 0; i < ramp; ++i) {
    const double w = static_cast<double>(i) / ramp;
    out[i] *= w;
    out[samples - 1 - i] *= w;
  }
  double peak = 1e-12;
  for (const double v : out) peak = std::max(peak, std::abs(v));
  for (double& v : out) v *= 0.25 / peak;
  return out;
}

std::vector<double> synth_noise(const std::string& kind, std::uint64_t seed,
                                int samples, int sample_rate) {
  Rng rng(seed);
  std::vector<double> out(samples, 0.0);
  if (kind == "stationary") {
    // Broadband noise with a gentle one-pole spectral tilt.
    double state = 0.0;
    for (int i = 0; i < samples; ++i) {
      const double white = rng.uniform(-1.0, 1.0);
      state = 0.85 * state + 0.15 * white;
      out[i] = 0.7 * state + 0.3 * white;
    }
  } else if (kind == "babble") {
    // Overlapping speech-like streams.
    for (int v = 0; v < 6; ++v) {
      const auto stream =
          synth_speech(derive_seed(seed, "babble_voice", {(std::uint64_t)v}),
                       samples, sample_rate);
      const std::size_t shift = rng.integer(static_cast<std::uint64_t>(samples));
      for (int i = 0; i < samples; ++i) {
        out[i] += stream[(i + shift) % samples] / 6.0;
      }
    }
  } else if (kind == "cafe") {
    // Low-passed noise under a slow random amplitude modulation.
    double state = 0.0, env = 0.5;
    const double env_rate = rng.uniform(0.5, 2.0);
    double env_phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    for (int i = 0; i < samples; ++i) {
      const double white = rng.uniform(-1.0, 1.0);
      state = 0.95 * state + 0.05 * white;
      const double t = static_cast<double>(i) / sample_rate;
      env = 0.55 + 0.45 * std::sin(2.0 * std::numbers::pi * env_rate * t +
                                   env_phase);
      out[i] = state * env * 3.0;
    }
  } else {
    throw ConfigError("unknown noise kind '" + kind + "'");
  }
  double peak = 1e-12;
  for (const double v : out) peak = std::max(peak, std::abs(v));
  for (double& v : out) v *= 0.2 / peak;
  return out;
}

Manifest synth_corpus(const CorpusConfig& cfg, std::uint64_t seed,
                      const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir / "wav", ec);
  if (ec) throw IoError("cannot create corpus directory: " + ec.message());

  const int utt_samples =
      static_cast<int>(cfg.utterance_seconds * cfg.sample_rate);
  const int noise_samples =
      static_cast<int>(cfg.noise_seconds * cfg.sample_rate);

  Manifest manifest;
  const auto wav_path = [&](const std::string& id) {
    return (out_dir / "wav" / (id + ".wav")).string();
  };
  const auto add_wav = [&](const std::string& id,
                           const std::vector<double>& samples, Role role,
                           Split split, std::optional<double> snr,
                           const std::string& noise_kind) {
    write_wav(wav_path(id), samples, cfg.sample_rate);
    manifest.entries.push_back(
        ManifestEntry{id, wav_path(id), role, split, snr, noise_kind});
  };

  // Noise beds, shared across mixtures.
  std::map<std::string, std::vector<double>> noises;
  for (const auto& kind : cfg.noise_kinds) {
    noises[kind] = synth_noise(kind, derive_seed(seed, "noise_" + kind),
                               noise_samples, cfg.sample_rate);
    add_wav("noise_" + kind, noises[kind], Role::noise, Split::none,
            std::nullopt, kind);
  }

  int utt = 0;
  const auto utt_id = [&]() {
    std::ostringstream os;
    os << "u" << std::setw(4) << std::setfill('0') << utt;
    return os.str();
  };

  // FAE split: clean only.
  for (int i = 0; i < cfg.fae_clean; ++i, ++utt) {
    const auto clean = synth_speech(derive_seed(seed, "utt", {(std::uint64_t)utt}),
                                    utt_samples, cfg.sample_rate, cfg.voice);
    add_wav(utt_id(), clean, Role::clean, Split::fae, std::nullopt, "");
  }

  // DAE split: one mixture per unseen source; clean never written.
  Rng mix_rng(derive_seed(seed, "dae_mix"));
  for (int i = 0; i < cfg.dae_sources; ++i, ++utt) {
    const auto clean = synth_speech(derive_seed(seed, "utt", {(std::uint64_t)utt}),
                                    utt_samples, cfg.sample_rate, cfg.voice);
    const auto& kind =
        cfg.noise_kinds[mix_rng.integer(cfg.noise_kinds.size())];
    const double snr = cfg.snr_grid[mix_rng.integer(cfg.snr_grid.size())];
    const auto mixture =
        mix_at_snr(clean, noises[kind], snr,
                   derive_seed(seed, "dae_tile", {(std::uint64_t)utt}));
    add_wav(utt_id() + "." + kind + "." + format_snr(snr), mixture,
            Role::mixture, Split::dae, snr, kind);
  }

  // Test split: clean reference plus a mixture for every (noise, snr) cell.
  for (int i = 0; i < cfg.test_utterances; ++i, ++utt) {
    const auto clean = synth_speech(derive_seed(seed, "utt", {(std::uint64_t)utt}),
                                    utt_samples, cfg.sample_rate, cfg.voice);
    add_wav(utt_id(), clean, Role::clean, Split::test, std::nullopt, "");
    for (const auto& kind : cfg.noise_kinds) {
      for (const double snr : cfg.snr_grid) {
        const auto mixture = mix_at_snr(
            clean, noises[kind], snr,
            derive_seed(seed, "test_tile",
                        {(std::uint64_t)utt, fnv1a(kind),
                         (std::uint64_t)(snr * 16 + 1024)}));
        add_wav(utt_id() + "." + kind + "." + format_snr(snr), mixture,
                Role::mixture, Split::test, snr, kind);
      }
    }
  }

  manifest.validate();
  manifest.save(out_dir / "manifest.tsv");
  return manifest;
}

std::vector<ManifestEntry> ingest(const std::filesystem::path& dir,
                                  Role role) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) {
    throw IoError("ingest: not a directory: " + dir.string());
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".wav") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());

  std::vector<ManifestEntry> out;
  std::set<std::uint64_t> seen;
  for (const auto& f : files) {
    (void)read_wav(f);  // validates format; FormatError names the path
    std::ifstream is(f, std::ios::binary);
    const std::string bytes((std::istreambuf_iterator<char>(is)),
                            std::istreambuf_iterator<char>());
    const std::uint64_t hash = fnv1a(bytes);
    if (!seen.insert(hash).second) {
      std::cerr << "ingest: duplicate content skipped: " << f << "\n";
      continue;
    }
    std::ostringstream id;
    id << "ing" << std::hex << std::setw(16) << std::setfill('0') << hash;
    out.push_back(ManifestEntry{id.str(), f.string(), role, Split::none,
                                std::nullopt, ""});
  }
  return out;
}

}  // namespace cyclespec::data
