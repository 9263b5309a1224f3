// Copyright (c) 2026 cfesched contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace cfe {

// Bad or inconsistent configuration, corpus, or checkpoint input.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// No memory-feasible node exists for the current task.
struct SchedulingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace cfe
