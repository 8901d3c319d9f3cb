// Copyright 2026 CycleSpec Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "cyclespec/tensor.hpp"

namespace cyclespec {

// Parameter checkpoint: magic "CSPC1", then per-parameter records of
// (name length, name bytes, rank, extents, raw doubles), all integers and
// floats 64-bit little-endian. Written atomically (temp file + rename).
void save_checkpoint(
    const std::filesystem::path& path,
    const std::vector<std::pair<std::string, const Tensor*>>& params);

std::map<std::string, Tensor> load_checkpoint(
    const std::filesystem::path& path);

}  // namespace cyclespec
