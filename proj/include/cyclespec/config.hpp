// Copyright 2026 CycleSpec Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "cyclespec/data.hpp"
#include "cyclespec/model.hpp"
#include "cyclespec/train.hpp"

// Plain-text configuration: "[section]" headers with key=value lines,
// '#' comments. Keys are addressed as "section.key". Command-line flags
// override file values; file values override the desk-scale defaults.
namespace cyclespec::config {

struct FileConfig {
  std::map<std::string, std::string> values;

  static FileConfig parse_file(const std::filesystem::path& path);
  static FileConfig parse_text(const std::string& text);

  bool has(const std::string& key) const { return values.count(key) > 0; }
  std::string get(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
};

struct Settings {
  train::TrainConfig train;
  model::ModelConfig model;
  data::CorpusConfig corpus;
  bool paper_scale = false;
};

// Desk-scale defaults (scaled channel schedules, 30/30 epochs), overridden
// by the file and then by explicit arguments. --paper-scale restores the
// published schedules and 700/1500 epochs.
Settings resolve(const FileConfig& file, bool paper_scale,
                 std::optional<std::uint64_t> seed_override,
                 std::optional<int> threads_override);

// Reproduction log: every resolved setting, grouped by section.
void write_resolved(const std::filesystem::path& path,
                    const Settings& settings);

}  // namespace cyclespec::config
