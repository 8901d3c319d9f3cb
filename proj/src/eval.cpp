// Copyright 2026 CycleSpec Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "cyclespec/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cyclespec/errors.hpp"
#include "cyclespec/parallel.hpp"
#include "cyclespec/wav.hpp"

namespace cyclespec::eval {

namespace {

double clamp_db(double v) { return std::clamp(v, -kDbCap, kDbCap); }

void require_equal_length(std::span<const double> a,
                          std::span<const double> b, const char* op) {
  if (a.size() != b.size()) {
    throw ShapeError(std::string(op) + ": length mismatch (" +
                     std::to_string(a.size()) + " vs " +
                     std::to_string(b.size()) + ")");
  }
}

double energy(std::span<const double> x) {
  double e = 0.0;
  for (const double v : x) e += v * v;
  return e;
}

}  // namespace

double sdr(std::span<const double> reference,
           std::span<const double> estimate) {
  require_equal_length(reference, estimate, "sdr");
  const double ref_energy = energy(reference);
  if (ref_energy <= 0.0) throw InputError("sdr: zero reference");
  double residual = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const double d = reference[i] - estimate[i];
    residual += d * d;
  }
  if (residual <= 0.0) return kDbCap;
  return clamp_db(10.0 * std::log10(ref_energy / residual));
}

double si_sdr(std::span<const double> reference,
              std::span<const double> estimate) {
  require_equal_length(reference, estimate, "si_sdr");
  const double ref_energy = energy(reference);
  if (ref_energy <= 0.0) throw InputError("si_sdr: zero reference");
  if (energy(estimate) <= 0.0) throw InputError("si_sdr: zero estimate");
  double dot = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    dot += reference[i] * estimate[i];
  }
  const double alpha = dot / ref_energy;
  const double target_energy = alpha * alpha * ref_energy;
  double residual = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const double d = estimate[i] - alpha * reference[i];
    residual += d * d;
  }
  if (target_energy <= 0.0) return -kDbCap;
  if (residual <= 0.0) return kDbCap;
  return clamp_db(10.0 * std::log10(target_energy / residual));
}

double lsd(std::span<const double> reference,
           std::span<const double> estimate, double sample_rate) {
  require_equal_length(reference, estimate, "lsd");
  constexpr double kEps = 1e-10;
  dsp::StftGeometry g;
  g.sample_rate = sample_rate;
  const auto ref_spec = dsp::stft<double>(reference, g);
  const auto est_spec = dsp::stft<double>(estimate, g);
  const auto ref_amp =
      (ref_spec.real.square() + ref_spec.imag.square()).sqrt();
  const auto est_amp =
      (est_spec.real.square() + est_spec.imag.square()).sqrt();
  double frame_acc = 0.0;
  for (Eigen::Index n = 0; n < ref_spec.frames(); ++n) {
    double bin_acc = 0.0;
    for (Eigen::Index b = 0; b < ref_spec.bins(); ++b) {
      const double d = 20.0 * (std::log10(ref_amp(b, n) + kEps) -
                               std::log10(est_amp(b, n) + kEps));
      bin_acc += d * d;
    }
    frame_acc += bin_acc / static_cast<double>(ref_spec.bins());
  }
  return std::sqrt(frame_acc / static_cast<double>(ref_spec.frames()));
}

void MetricReport::add(MetricRow row) {
  auto& cell = cells[CellKey{row.snr_db, row.noise_kind}];
  cell.count += 1;
  cell.mean_sdr_db += row.sdr_db;
  cell.mean_si_sdr_db += row.si_sdr_db;
  cell.mean_lsd_db += row.lsd_db;
  rows.push_back(std::move(row));
}

void MetricReport::finalize() {
  for (auto& [key, cell] : cells) {
    if (cell.count > 0) {
      cell.mean_sdr_db /= cell.count;
      cell.mean_si_sdr_db /= cell.count;
      cell.mean_lsd_db /= cell.count;
    }
  }
}

double MetricReport::mean_sdr() const {
  if (rows.empty()) return 0.0;
  double acc = 0.0;
  for (const auto& r : rows) acc += r.sdr_db;
  return acc / static_cast<double>(rows.size());
}

double MetricReport::mean_sdr(double snr_db,
                              const std::string& noise_kind) const {
  const auto it = cells.find(CellKey{snr_db, noise_kind});
  if (it == cells.end()) return 0.0;
  return it->second.mean_sdr_db;
}

void MetricReport::save_csv(const std::filesystem::path& path) const {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot write metric report: " + path.string());
  os << std::setprecision(17);
  os << "id,snr_db,noise_kind,sdr_db,si_sdr_db,lsd_db\n";
  for (const auto& r : rows) {
    os << r.id << ',' << r.snr_db << ',' << r.noise_kind << ',' << r.sdr_db
       << ',' << r.si_sdr_db << ',' << r.lsd_db << '\n';
  }
}

void MetricReport::save_cells_csv(const std::filesystem::path& path) const {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot write cell report: " + path.string());
  os << std::setprecision(17);
  os << "snr_db,noise_kind,count,mean_sdr_db,mean_si_sdr_db,mean_lsd_db\n";
  for (const auto& [key, cell] : cells) {
    os << key.snr_db << ',' << key.noise_kind << ',' << cell.count << ','
       << cell.mean_sdr_db << ',' << cell.mean_si_sdr_db << ','
       << cell.mean_lsd_db << '\n';
  }
}

void MetricReport::save_jsonl(const std::filesystem::path& path) const {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot write JSONL report: " + path.string());
  for (const auto& r : rows) {
    nlohmann::json j{{"id", r.id},           {"snr_db", r.snr_db},
                     {"noise_kind", r.noise_kind}, {"sdr_db", r.sdr_db},
                     {"si_sdr_db", r.si_sdr_db},   {"lsd_db", r.lsd_db}};
    os << j.dump() << '\n';
  }
}

MetricReport evaluate_set(const data::Manifest& manifest,
                          const Enhancer& enhance, int threads) {
  manifest.validate();
  const auto mixtures = manifest.select(data::Split::test, data::Role::mixture);
  if (mixtures.empty()) {
    throw InputError("evaluate_set: manifest has no test mixtures");
  }

  // Resolve clean references up-front so missing files fail as a batch.
  std::vector<const data::ManifestEntry*> refs(mixtures.size(), nullptr);
  std::string missing;
  for (std::size_t i = 0; i < mixtures.size(); ++i) {
    const std::string src = data::source_id(mixtures[i].id);
    const data::ManifestEntry* ref = manifest.find(src);
    if (ref == nullptr || ref->role != data::Role::clean ||
        !std::filesystem::exists(ref->path) ||
        !std::filesystem::exists(mixtures[i].path)) {
      missing += missing.empty() ? src : (", " + src);
    }
    refs[i] = ref;
  }
  if (!missing.empty()) {
    throw IoError("evaluate_set: missing reference or mixture files for: " +
                  missing);
  }

  std::vector<MetricRow> computed(mixtures.size());
  const int workers = worker_count(static_cast<int>(mixtures.size()), threads);
  parallel_for(static_cast<int>(mixtures.size()), workers, [&](int i) {
    const auto& mix_entry = mixtures[static_cast<std::size_t>(i)];
    const WavData mix = read_wav(mix_entry.path);
    const WavData ref = read_wav(refs[static_cast<std::size_t>(i)]->path);
    const std::vector<double> est = enhance(mix.samples);
    MetricRow row;
    row.id = mix_entry.id;
    row.snr_db = mix_entry.snr_db.value_or(0.0);
    row.noise_kind = mix_entry.noise_kind;
    row.sdr_db = sdr(ref.samples, est);
    row.si_sdr_db = si_sdr(ref.samples, est);
    row.lsd_db = lsd(ref.samples, est, mix.sample_rate);
    computed[static_cast<std::size_t>(i)] = std::move(row);
  });

  MetricReport report;
  for (auto& row : computed) report.add(std::move(row));
  report.finalize();
  return report;
}

}  // namespace cyclespec::eval
