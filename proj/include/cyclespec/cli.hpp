// Copyright 2026 CycleSpec Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

namespace cyclespec::cli {

// Operator entry point. Exit codes: 0 success, 1 validation error
// (bad flags, config, data contracts, missing checkpoints), 2 runtime
// failure (I/O, numerics).
int run(int argc, const char* const* argv);

}  // namespace cyclespec::cli
