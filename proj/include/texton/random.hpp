// Copyright Contributors to the Texton Engine Project
// SPDX-License-Identifier: Apache-2.0
//
// Portable seeded randomness. std::mt19937_64 has a fully specified output
// sequence; the distribution adapters below are written out so that results
// do not depend on the standard library's distribution implementations.
#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace texton {

/// SplitMix64 finalizer; used to derive independent sub-seeds.
constexpr std::uint64_t mixSeed(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t deriveSeed(std::uint64_t seed, std::uint64_t stream) {
    return mixSeed(seed ^ mixSeed(stream + 0x632be59bd9b4e019ULL));
}

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : mEngine(mixSeed(seed)) {}

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return double(mEngine() >> 11) * 0x1.0p-53; }

    /// Uniform in the open interval (0, 1).
    double uniformOpen() {
        double u;
        do {
            u = uniform();
        } while (u == 0.0);
        return u;
    }

    /// Uniform integer in [0, n). Rejection sampling, no modulo bias.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = (~std::uint64_t(0)) - (~std::uint64_t(0)) % n;
        std::uint64_t x;
        do {
            x = mEngine();
        } while (x >= limit);
        return x % n;
    }

    /// Standard normal via Box-Muller (one value per call).
    double normal() {
        const double u1 = uniformOpen();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    bool bernoulli(double p) { return uniform() < p; }

  private:
    std::mt19937_64 mEngine;
};

} // namespace texton
