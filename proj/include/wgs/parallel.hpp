// Copyright The wgs Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>

namespace wgs {

/// Worker cap: `WGS_THREADS` when set to a positive integer, else the
/// hardware concurrency. Results never depend on this value.
int worker_count();

/// Override the worker cap for the rest of the process (0 restores the
/// environment/hardware default).
void set_worker_count(int n);

/// Run `fn(i)` for i in [0, n). Tasks must write disjoint outputs.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace wgs
