// Copyright 2026 CycleSpec Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "cyclespec/data.hpp"
#include "cyclespec/dsp.hpp"

// Waveform-domain enhancement quality: SDR, scale-invariant SDR and
// log-spectral distance, plus batch evaluation over a manifest's test
// split. All metrics are clamped to [-60, +60] dB so reports never carry
// infinities.
namespace cyclespec::eval {

inline constexpr double kDbCap = 60.0;

// 10 log10(||s||^2 / ||s - s_hat||^2). InputError on a zero reference,
// ShapeError on length mismatch.
double sdr(std::span<const double> reference, std::span<const double> estimate);

// Projects the estimate onto the reference before scoring, so any rescaled
// copy of the reference hits the cap.
double si_sdr(std::span<const double> reference,
              std::span<const double> estimate);

// RMS over frames of the per-frame RMS over bins of the log-magnitude
// spectral difference (base 1024/32 STFT geometry, epsilon 1e-10).
double lsd(std::span<const double> reference,
           std::span<const double> estimate,
           double sample_rate = dsp::kDefaultSampleRate);

struct MetricRow {
  std::string id;
  double snr_db = 0.0;
  std::string noise_kind;
  double sdr_db = 0.0;
  double si_sdr_db = 0.0;
  double lsd_db = 0.0;
};

struct CellKey {
  double snr_db = 0.0;
  std::string noise_kind;
  bool operator<(const CellKey& o) const {
    return snr_db != o.snr_db ? snr_db < o.snr_db
                              : noise_kind < o.noise_kind;
  }
};

struct CellStats {
  int count = 0;
  double mean_sdr_db = 0.0;
  double mean_si_sdr_db = 0.0;
  double mean_lsd_db = 0.0;
};

struct MetricReport {
  std::vector<MetricRow> rows;
  std::map<CellKey, CellStats> cells;

  void add(MetricRow row);
  void finalize();  // turns accumulated sums into means

  double mean_sdr() const;
  double mean_sdr(double snr_db, const std::string& noise_kind) const;

  void save_csv(const std::filesystem::path& path) const;
  void save_cells_csv(const std::filesystem::path& path) const;
  void save_jsonl(const std::filesystem::path& path) const;
};

using Enhancer =
    std::function<std::vector<double>(std::span<const double> mixture)>;

// Enhances every test-split mixture, scores it against the clean reference
// found by source id, and aggregates per (snr, noise) cell. IoError lists
// the ids whose files are missing.
MetricReport evaluate_set(const data::Manifest& manifest,
                          const Enhancer& enhance,
                          int threads = 0);

}  // namespace cyclespec::eval
