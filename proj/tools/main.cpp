// Copyright 2026 CycleSpec Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "cyclespec/cli.hpp"

int main(int argc, char** argv) { return cyclespec::cli::run(argc, argv); }
