// Copyright 2026 CycleSpec Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <filesystem>
#include <span>
#include <vector>

namespace cyclespec {

struct WavData {
  std::vector<double> samples;  // mono, in [-1, 1]
  int sample_rate = 0;
};

// Reads a RIFF/WAVE file. Only 16-bit PCM is accepted; multichannel input
// is down-mixed by averaging. FormatError on anything else, IoError on
// filesystem problems.
WavData read_wav(const std::filesystem::path& path);

// Writes mono 16-bit PCM little-endian. Samples are clamped to [-1, 1].
void write_wav(const std::filesystem::path& path,
               std::span<const double> samples, int sample_rate);

}  // namespace cyclespec
