// Copyright 2026 CycleSpec Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cyclespec::data {

enum class Role { clean, noise, mixture };
enum class Split { fae, dae, test, none };

std::string to_string(Role role);
std::string to_string(Split split);

struct ManifestEntry {
  std::string id;    // unique; mixtures derive from "<source>.<suffix>"
  std::string path;
  Role role = Role::clean;
  Split split = Split::none;
  std::optional<double> snr_db;
  std::string noise_kind;  // empty unless mixture/noise
};

// Utterance id underlying an entry id (prefix before the first '.').
std::string source_id(const std::string& id);

// Tab-separated: id, path, role, split, snr_db, noise_kind ('-' for absent).
struct Manifest {
  std::vector<ManifestEntry> entries;

  // Enforces unique ids and the unpaired-training contract: the fae, dae
  // and test splits must not share any source utterance. DataError on
  // violation.
  void validate() const;

  std::vector<ManifestEntry> select(Split split) const;
  std::vector<ManifestEntry> select(Split split, Role role) const;
  const ManifestEntry* find(const std::string& id) const;

  void save(const std::filesystem::path& path) const;
  static Manifest load(const std::filesystem::path& path);
};

// Scales noise to hit the target SNR exactly and adds it to clean. Noise
// shorter than clean is tiled starting at a seed-controlled offset.
// InputError on zero-power operands.
std::vector<double> mix_at_snr(std::span<const double> clean,
                               std::span<const double> noise, double snr_db,
                               std::uint64_t tile_seed = 0);

inline const std::vector<double> kSnrGrid{-10.0, -5.0, 0.0, 5.0};
inline const std::vector<std::string> kNoiseKinds{"stationary", "babble",
                                                  "cafe"};

// Voice model for the synthetic clean signals. The default pitch classes
// sit on multiples of sample_rate/hop (500 Hz at 16 kHz, hop 32), which
// makes the harmonic phases hop-synchronous: the unwrapped phase planes
// stay small and structured, so the task is learnable at desk scale.
struct VoiceParams {
  std::vector<double> pitches{500.0, 1000.0};
  double vibrato_depth = 0.001;
  double vibrato_hz_min = 0.5;
  double vibrato_hz_max = 1.5;
};

struct CorpusConfig {
  int fae_clean = 12;
  int dae_sources = 188;
  int test_utterances = 30;
  double utterance_seconds = 0.5;
  double noise_seconds = 4.0;
  int sample_rate = 16000;
  std::vector<double> snr_grid = kSnrGrid;
  std::vector<std::string> noise_kinds = kNoiseKinds;
  VoiceParams voice;
};

// Synthetic speech-like corpus standing in for licensed datasets: harmonic
// stacks with pitch contours, formant-shaped spectra and syllabic
// envelopes, plus three noise kinds. Writes WAVs under out_dir and returns
// the manifest (also written as manifest.tsv). Bit-reproducible per seed.
Manifest synth_corpus(const CorpusConfig& config, std::uint64_t seed,
                      const std::filesystem::path& out_dir);

// Deterministic speech-like clean signal generator (exposed for tests).
std::vector<double> synth_speech(std::uint64_t seed, int samples,
                                 int sample_rate,
                                 const VoiceParams& voice = VoiceParams{});
std::vector<double> synth_noise(const std::string& kind, std::uint64_t seed,
                                int samples, int sample_rate);

// Registers PCM16 WAVs found in dir (content-hash ids, duplicates skipped
// with a warning on stderr). FormatError names the offending file.
std::vector<ManifestEntry> ingest(const std::filesystem::path& dir,
                                  Role role);

}  // namespace cyclespec::data
