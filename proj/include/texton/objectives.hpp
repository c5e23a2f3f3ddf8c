// Copyright Contributors to the Texton Engine Project
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include "texton/estimation.hpp"
#include "texton/hungarian.hpp"
#include "texton/types.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace texton {

/// Mean per-pixel entropy -(1/HW) sum_p sum_i S log S, with 0 log 0 = 0.
double entropyLoss(const SegmentationStack &masks);

/// (1/HW) sum_p |sum_i mu_i S_i(p) - p|^2 with mu_i the segment means.
double compactnessLoss(const SegmentationStack &masks);

/// Perceptual-distance plug-in: (a, b, optional validity mask) -> distance.
using PerceptualDistance = std::function<double(const RgbImage &, const RgbImage &, const PixelMask *)>;

/// Default perceptual substitute: mean masked L1 over a `levels`-deep
/// 2x2 average-pooling pyramid (level 0 is full resolution).
double pyramidL1Distance(const RgbImage &a, const RgbImage &b, const PixelMask *mask = nullptr,
                         int levels = 3);

struct ReconstructionWeights {
    double l1         = 2.0;
    double perceptual = 0.2;
};

struct DistanceReport {
    double value        = 0.0;
    bool degenerateMask = false; // mask selected no pixels; value is 0
};

/// w1 * mean|a - b| + w_perc * P(a, b), both restricted to `mask` when given.
/// Throws on dimension mismatch.
DistanceReport reconstructionDistance(const RgbImage &a, const RgbImage &b, const PixelMask *mask = nullptr,
                                      const ReconstructionWeights &weights = {},
                                      const PerceptualDistance &perceptual = {});

/// Sliced 1-Wasserstein estimate between the distributions of non-overlapping
/// patch x patch tiles. Tiles are projected on `projections` shared random
/// directions with non-negative entries summing to one, so a uniform intensity
/// offset c moves every projection by exactly c. Throws when an image is
/// smaller than one patch.
double textureDistance(const RgbImage &a, const RgbImage &b, int patch = 4, int projections = 64,
                       std::uint64_t seed = 0);

struct MatchWeights {
    double mean           = 1.2;
    double cov            = 2.0;
    double dir            = 0.01;
    double feature        = 10.0;
    double existence      = 4.0;
    double segmentation   = 200.0;
    double boundaryMargin = 8.0; // px over which the boundary damping ramps to 1
    double betaFloor      = 0.1;
};

/// Boundary damping for a single center: max(betaFloor, min(1, d / margin)).
double boundaryDamping(const ImageFrame &frame, const Vec2 &mean, const MatchWeights &weights);

/// Matching cost between two textons (see MatchWeights). Mask terms are skipped
/// when either mask pointer is null.
double pairCost(const TextonGaussian &a, const TextonGaussian &b, const MatchWeights &weights,
                const ImageFrame &frame, const Eigen::ArrayXXd *maskA = nullptr,
                const Eigen::ArrayXXd *maskB = nullptr);

Eigen::MatrixXd costMatrix(const GaussianSet &a, const GaussianSet &b, const MatchWeights &weights,
                           const SegmentationStack *masksA = nullptr,
                           const SegmentationStack *masksB = nullptr);

/// Minimum-sum matching under pairCost. totalCost is the set matching (CC) cost.
Matching setMatchingCost(const GaussianSet &a, const GaussianSet &b, const MatchWeights &weights = {},
                         const SegmentationStack *masksA = nullptr,
                         const SegmentationStack *masksB = nullptr);

inline double cycleConsistency(const GaussianSet &a, const GaussianSet &b, const MatchWeights &weights = {}) {
    return setMatchingCost(a, b, weights).totalCost;
}

/// Individual training-objective values, supplied by the caller.
struct LossTerms {
    double reconstruction            = 0.0;
    double reconstructionTransformed = 0.0;
    double entropy                   = 0.0;
    double compactness               = 0.0;
    double consistency               = 0.0;
    double texture                   = 0.0;
    double gan                       = 0.0;
    double patchGan                  = 0.0;
};

/// w_T, w_GAN and w_PGAN are fixed; the other three are schedule-dependent.
struct LossWeights {
    double entropy     = 1.0;
    double compactness = 1.0;
    double consistency = 1.0;
    double texture     = 0.01;
    double gan         = 0.1;
    double patchGan    = 0.1;
};

double combinedLoss(const LossTerms &terms, const LossWeights &weights = {});

/// "key=value" lines, one per entry, in the given order.
std::string formatReport(const std::vector<std::pair<std::string, double>> &entries);

} // namespace texton
