// Copyright Contributors to the Texton Engine Project
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <cstddef>
#include <new>

namespace texton {

namespace detail {

/// Large blocks come from anonymous mappings with transparent huge pages
/// requested; small ones from operator new.
void *allocateBlock(std::size_t bytes);
void releaseBlock(void *p, std::size_t bytes) noexcept;

} // namespace detail

/// Allocator for big dense grids.
template <typename T> struct BlockAllocator {
    using value_type = T;

    BlockAllocator() = default;
    template <typename U> BlockAllocator(const BlockAllocator<U> &) noexcept {}

    T *allocate(std::size_t n) {
        if (n > std::size_t(-1) / sizeof(T)) {
            throw std::bad_array_new_length();
        }
        return static_cast<T *>(detail::allocateBlock(n * sizeof(T)));
    }
    void deallocate(T *p, std::size_t n) noexcept { detail::releaseBlock(p, n * sizeof(T)); }

    template <typename U> bool operator==(const BlockAllocator<U> &) const noexcept { return true; }
};

} // namespace texton
