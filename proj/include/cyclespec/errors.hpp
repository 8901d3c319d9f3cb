// Copyright 2026 CycleSpec Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <stdexcept>

namespace cyclespec {

// Shape/extent disagreement between operands.
struct ShapeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A forward op produced NaN/Inf from finite inputs, or a loss went non-finite.
struct NumericsError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Backward requested through a value that does not live on the tape.
struct TapeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Caller-supplied data violates an operation precondition.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid configuration value or combination.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Operation requires state (checkpoint, prior epoch) that is absent.
struct StateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Dataset/manifest contract violation (e.g. overlapping splits).
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed input file (WAV, checkpoint, manifest).
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Filesystem failure.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace cyclespec
