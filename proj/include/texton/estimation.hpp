// Copyright Contributors to the Texton Engine Project
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include "texton/types.hpp"

#include <cstdint>
#include <vector>

namespace texton {

/// n soft masks over an H x W grid; each mask is H rows by W columns.
struct SegmentationStack {
    ImageFrame frame;
    std::vector<Eigen::ArrayXXd> masks;

    std::size_t size() const { return masks.size(); }
    /// Empty stack sized for `n` masks, zero-filled.
    static SegmentationStack zeros(const ImageFrame &frame, std::size_t n);
};

/// Per-pixel appearance features and directions, one row per pixel (row = y*W + x).
struct DenseMaps {
    ImageFrame frame;
    Eigen::MatrixXd appearance; // (H*W) x d_a
    Eigen::MatrixXd direction;  // (H*W) x 2
};

struct SamplingMode {
    enum class Kind { Rounded, Relaxed };
    Kind kind          = Kind::Rounded;
    double temperature = 1.0;
    std::uint64_t seed = 0;

    static SamplingMode rounded() { return {}; }
    static SamplingMode relaxed(double temperature, std::uint64_t seed) {
        return {Kind::Relaxed, temperature, seed};
    }
};

/// Mask mass below which a segment is treated as empty.
inline constexpr double kEmptySegmentMass = 1e-8;

/// Mask-weighted moments of every segment: mean, covariance, existence
/// probability sum(S^2)/sum(S), pooled and unit-normalized feature and
/// direction, mask area. Weights are drawn per `sampling`.
/// Throws when masks and maps disagree on the frame.
GaussianSet estimateGaussians(const SegmentationStack &masks, const DenseMaps &maps,
                              const SamplingMode &sampling = SamplingMode::rounded());

/// Mask-weighted mean position of each segment (frame center for empty segments).
std::vector<Vec2> segmentMeans(const SegmentationStack &masks);

/// Binary-concrete relaxation of a Bernoulli(prob) draw. Concentrates on {0,1}
/// as temperature -> 0. Throws for temperature <= 0.
double gumbelBinarySample(double prob, double temperature, std::uint64_t seed);

/// Layout request for the synthetic ground-truth generator.
struct SynthLayout {
    enum class Arrangement { Grid, Random };
    ImageFrame frame{128, 128};
    int count          = 9;
    int featureDim     = 3;
    int capacity       = kDefaultCapacity;
    Arrangement arrangement = Arrangement::Grid;
    bool isotropic     = false;
};

/// Ground-truth Gaussians with the masks and maps an encoder would have produced.
/// masks[0] is the background segment; masks[i + 1] belongs to truth.gaussians[i].
struct SynthWorld {
    GaussianSet truth;
    SegmentationStack masks;
    DenseMaps maps;
};

/// Generates non-overlapping Gaussians, rasterizes hard masks (pixel goes to the
/// Mahalanobis-nearest Gaussian whose M^2 <= 4, else to the background) and
/// piecewise-constant maps whose per-segment means equal the truth features and
/// directions. Throws when count exceeds capacity.
SynthWorld synthWorld(const SynthLayout &layout, std::uint64_t seed);

} // namespace texton
