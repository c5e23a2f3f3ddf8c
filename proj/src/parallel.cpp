// Copyright Contributors to the Texton Engine Project
// SPDX-License-Identifier: Apache-2.0
//
#include "texton/parallel.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace texton {

int resolveThreadCount(int requested) {
    if (requested > 0) {
        return requested;
    }
    if (const char *env = std::getenv("TEXTON_THREADS")) {
        try {
            const int n = std::stoi(env);
            if (n > 0) {
                return n;
            }
        } catch (const std::exception &) {
            // unparsable values fall through to auto
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallelForBands(int rows, int threads, const std::function<void(int, int)> &fn) {
    if (rows <= 0) {
        return;
    }
    const int n = std::clamp(threads, 1, rows);
    if (n == 1) {
        fn(0, rows);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
    pool.reserve(std::size_t(n));
    for (int t = 0; t < n; ++t) {
        const int begin = int(std::int64_t(rows) * t / n);
        const int end   = int(std::int64_t(rows) * (t + 1) / n);
        pool.emplace_back([&, t, begin, end] {
            try {
                fn(begin, end);
            } catch (...) {
                errors[std::size_t(t)] = std::current_exception();
            }
        });
    }
    for (auto &th : pool) {
        th.join();
    }
    for (auto &e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

} // namespace texton
