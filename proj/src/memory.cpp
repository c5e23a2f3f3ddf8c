// Copyright Contributors to the Texton Engine Project
// SPDX-License-Identifier: Apache-2.0
//
#include "texton/memory.hpp"

#include <sys/mman.h>

namespace texton::detail {

namespace {

constexpr std::size_t kMappedThreshold = std::size_t(4) << 20;

} // namespace

void *allocateBlock(std::size_t bytes) {
    if (bytes < kMappedThreshold) {
        return ::operator new(bytes);
    }
    void *p = ::mmap(nullptr, bytes, PROT_READ | PROT_WRITE, MAP_PRIVATE | MAP_ANONYMOUS, -1, 0);
    if (p == MAP_FAILED) {
        throw std::bad_alloc();
    }
#ifdef MADV_HUGEPAGE
    ::madvise(p, bytes, MADV_HUGEPAGE);
#endif
    return p;
}

void releaseBlock(void *p, std::size_t bytes) noexcept {
    if (!p) {
        return;
    }
    if (bytes < kMappedThreshold) {
        ::operator delete(p);
        return;
    }
    ::munmap(p, bytes);
}

} // namespace texton::detail
