// Copyright 2026 The lofiq Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>

namespace lofiq {

/// Worker count: LOFIQ_THREADS if set to a positive integer, otherwise the
/// hardware concurrency (at least 1).
std::size_t thread_count();

/// Runs body(begin, end) over disjoint chunks covering [0, n). Chunks never
/// share an index, so kernels that write only their own slots produce the same
/// result under any schedule. Small ranges run inline.
void parallel_for(std::size_t n, std::size_t min_chunk,
                  const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace lofiq
