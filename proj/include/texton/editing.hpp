// Copyright Contributors to the Texton Engine Project
// SPDX-License-Identifier: Apache-2.0
//
// Latent-space editing operators. All operators are pure: they take sets by
// const reference and return new sets. Randomness is always seeded explicitly.
#pragma once

#include "texton/hungarian.hpp"
#include "texton/types.hpp"

#include <cstdint>
#include <variant>
#include <vector>

namespace texton {

// --- reshuffling -----------------------------------------------------------

struct ReshufflePlan {
    enum class Mode { Hard, Soft };
    std::vector<std::size_t> permutation; // bijection on {0..n-1}
    double gamma       = 0.5;
    Mode mode          = Mode::Hard;
    std::uint64_t seed = 0;

    /// Uniform random permutation of n elements drawn from `seed`.
    static ReshufflePlan random(std::size_t n, std::uint64_t seed, Mode mode = Mode::Hard, double gamma = 0.5);
};

/// tau = min(max(A_i/A_j, p_i/p_j), 1)^gamma. Zero denominators count as +inf.
/// Textons without a mask area use the existence ratio alone.
double swapCoefficient(const TextonGaussian &from, const TextonGaussian &to, double gamma);

/// Permutes appearance features; geometry is never touched.
///  Hard: the permutation restricted to effective textons (cycle-walking), identity
///        elsewhere; features are moved bit-exactly.
///  Soft: f~_j = tau f_P(j) + (1 - tau) f_j with tau = swapCoefficient(g_P(j), g_j),
///        followed by unit renormalization.
/// Throws when the permutation is not a bijection of the set's indices.
GaussianSet reshuffle(const GaussianSet &set, const ReshufflePlan &plan);

// --- transfer --------------------------------------------------------------

/// Weight-averaged feature mean over effective textons. Throws when none are effective.
VecX effectiveFeatureMean(const GaussianSet &set);

/// mean(appearance) - mean(structure), both over effective textons.
VecX featureMeanShift(const GaussianSet &structure, const GaussianSet &appearance);

/// Adds `shift` to every effective texton's feature, optionally renormalizing.
GaussianSet shiftFeatures(const GaussianSet &set, const VecX &shift, bool renormalize = true);

/// Structure geometry with feature means aligned to the appearance set.
GaussianSet transferMeanAlign(const GaussianSet &structure, const GaussianSet &appearance);

/// Each effective structure feature replaced by a uniformly drawn effective appearance feature.
GaussianSet transferReplace(const GaussianSet &structure, const GaussianSet &appearance, std::uint64_t seed);

// --- variations ------------------------------------------------------------

struct VariationEdit {
    double featureScale    = 1.0; // Delta_f > 0
    double covarianceScale = 1.0; // Delta_U > 0
};

/// (L Lbar^-1)^delta Ubar ((L Lbar^-1)^delta)^T with L, Lbar the Cholesky factors of U, Ubar.
Mat2 morphCovariance(const Mat2 &cov, const Mat2 &meanCov, double delta);

/// Scales feature and covariance deviations from the effective means.
/// Ineffective textons are untouched. Throws on a non-PD mean covariance.
GaussianSet modifyVariations(const GaussianSet &set, const VariationEdit &edit);

// --- interpolation ---------------------------------------------------------

/// Hungarian correspondence minimizing |mu_i - mu'_j| + |delta_i - delta'_j|.
Matching interpolationCorrespondence(const GaussianSet &a, const GaussianSet &b);

/// Convex blend of corresponding textons; weights drawn Bernoulli((1-eta) d + eta d').
/// Output follows A's order; unmatched B textons are appended. An unmatched
/// texton keeps its own parameters with weight drawn against the absent partner
/// (d = 0) and is dropped at the far endpoint, so eta = 0 reproduces A and
/// eta = 1 reproduces B in A's correspondence order.
GaussianSet interpolate(const GaussianSet &a, const GaussianSet &b, double eta, std::uint64_t seed);

/// Blend factor as a function of position.
struct MorphRamp {
    enum class Kind { Constant, LeftToRight, TopToBottom, Map };
    Kind kind    = Kind::LeftToRight;
    double value = 0.0;  // Constant
    Eigen::ArrayXXd map; // Map: H x W, sampled at the nearest pixel

    static MorphRamp constant(double eta) { return {Kind::Constant, eta, {}}; }
    static MorphRamp leftToRight() { return {Kind::LeftToRight, 0.0, {}}; }
    static MorphRamp topToBottom() { return {Kind::TopToBottom, 0.0, {}}; }

    double at(const ImageFrame &frame, const Vec2 &p) const;
};

/// interpolate() with eta evaluated once per pair at the A-side center
/// (B-side center for unmatched B textons).
GaussianSet spatialMorph(const GaussianSet &a, const GaussianSet &b, const MorphRamp &ramp, std::uint64_t seed);

// --- per-texton transforms -------------------------------------------------

struct MoveOp {
    Vec2 delta = Vec2::Zero();
};
struct ScaleOp {
    Mat2 matrix  = Mat2::Identity();
    bool uniform = true;
    static ScaleOp by(double s) { return {s * Mat2::Identity(), true}; }
    static ScaleOp by(const Mat2 &m) { return {m, false}; }
};
struct RotateOp {
    double theta = 0.0; // radians, about the texton's own mean
};
using TextonOp = std::variant<MoveOp, ScaleOp, RotateOp>;

/// Throws IndexError for an out-of-range index.
GaussianSet transformTexton(const GaussianSet &set, std::size_t index, const TextonOp &op);

// --- edit propagation ------------------------------------------------------

inline constexpr double kDefaultEditThreshold = 2.0 / 255.0;

struct EditRegion {
    PixelMask mask;
    Vec2 centroid = Vec2::Zero();
    std::size_t pixelCount = 0;
};

/// Pixels whose largest per-channel |edited - original| exceeds `threshold`.
EditRegion detectEditRegion(const RgbImage &original, const RgbImage &edited,
                            double threshold = kDefaultEditThreshold);

/// Effective texton with the smallest Mahalanobis distance to p. Throws if none is effective.
std::size_t nearestGaussian(const GaussianSet &set, const Vec2 &p);

/// Affine map taking the source texton's frame (mean, Cholesky shape, direction) onto the target's.
AffineTransform2D textonAlignment(const TextonGaussian &source, const TextonGaussian &target);

/// Warps the difference image onto each target texton and adds it to the
/// original, clamped to [0,1]. Throws Error("no edit detected") for identical
/// images and IndexError for invalid targets.
RgbImage propagateEdit(const RgbImage &original, const RgbImage &edited, const GaussianSet &set,
                       const std::vector<std::size_t> &targets, double threshold = kDefaultEditThreshold);

// --- patches and scale -----------------------------------------------------

struct PatchPlacement {
    GaussianSet set;
    Vec2 offset = Vec2::Zero(); // position of the patch's pixel (0,0) in the target frame
};

/// Offsets every patch into a common frame and merges Gaussians inside
/// pairwise overlap rectangles via Hungarian matching on center distance.
/// Pairs further apart than `overlap` px are not merged. Matched pairs become
/// one Gaussian blended by position across the band; unmatched ones keep a
/// weight damped toward the far side of the band. overlap <= 0 disables merging.
/// Throws on mixed feature dimensions or an empty patch list.
GaussianSet mergePatchSets(const std::vector<PatchPlacement> &patches, double overlap);

/// Uniform scaling about `anchor`: mean' = anchor + s (mean - anchor), cov * s^2, area * s^2.
GaussianSet rescaleGaussians(const GaussianSet &set, double s, const Vec2 &anchor);

} // namespace texton
