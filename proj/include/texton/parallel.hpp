// Copyright Contributors to the Texton Engine Project
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <functional>

namespace texton {

/// Worker count for `requested` (> 0 wins; 0 means TEXTON_THREADS, then hardware concurrency).
int resolveThreadCount(int requested = 0);

/// Splits [0, rows) into contiguous bands and runs fn(begin, end) on each band.
/// Band work must write disjoint outputs; results never depend on the split.
void parallelForBands(int rows, int threads, const std::function<void(int, int)> &fn);

} // namespace texton
