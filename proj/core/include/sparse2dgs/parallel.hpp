// Copyright 2026 The sparse2dgs Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>

namespace s2dgs {

// Process-wide cap on worker threads. 0 means one per hardware thread.
void set_thread_count(int threads);
int thread_count();

// Calls body(begin, end) on disjoint contiguous chunks of [0, n). Chunks are
// processed concurrently; callers must only write to per-index state so the
// result does not depend on the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace s2dgs
