// Copyright Contributors to the Texton Engine Project
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include "texton/memory.hpp"
#include "texton/types.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace texton {

/// Opacity is evaluated only where M^2 <= this bound (exp(-12.5) ~ 3.7e-6).
inline constexpr double kSupportCutoff = 12.5;

/// H x W x C grid, interleaved per pixel.
template <typename Scalar> struct FeatureGrid {
    ImageFrame frame;
    int channels = 0;
    std::vector<Scalar, BlockAllocator<Scalar>> data;

    FeatureGrid() = default;
    FeatureGrid(const ImageFrame &f, int c)
        : frame(f), channels(c), data(f.pixels() * std::size_t(c), Scalar(0)) {}

    Scalar *pixel(int x, int y) { return data.data() + (std::size_t(y) * frame.width + x) * channels; }
    const Scalar *pixel(int x, int y) const {
        return data.data() + (std::size_t(y) * frame.width + x) * channels;
    }
    Eigen::Map<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>> at(int x, int y) const {
        return {pixel(x, y), channels};
    }
};

/// Per-Gaussian compositional alphas plus F_input = max_i alpha_i.
struct AlphaStack {
    ImageFrame frame;
    std::vector<Eigen::ArrayXXd> alphas; // each H x W
    Eigen::ArrayXXd inputMap;            // H x W
};

struct SplatOptions {
    int threads = 0; // 0: TEXTON_THREADS or hardware concurrency
};

/// The covariance actually inverted: U, or U + eps I when U is numerically singular.
Mat2 regularizedCovariance(const Mat2 &cov);

/// weight * exp(-M^2(p)) inside the support cutoff, 0 outside. Note -M^2, not -M^2/2.
double opacityAt(const TextonGaussian &g, const Vec2 &p);

/// alpha_i(p) = o_i(p) * prod_{j>i} (1 - o_j(p)); the last Gaussian is front-most.
AlphaStack alphaMaps(const GaussianSet &set, const SplatOptions &options = {});

/// F(p) = sum_i alpha_i(p) concat(f_i, dir_i); C = n_f + 2.
template <typename Scalar = double>
FeatureGrid<Scalar> splat(const GaussianSet &set, const SplatOptions &options = {});

extern template FeatureGrid<float> splat<float>(const GaussianSet &, const SplatOptions &);
extern template FeatureGrid<double> splat<double>(const GaussianSet &, const SplatOptions &);

/// Linear feature -> RGB map. Without a matrix the first three channels are used.
struct Projection {
    std::optional<Eigen::MatrixXd> matrix; // C x 3

    static Projection first3() { return {}; }
    static Projection fromMatrix(Eigen::MatrixXd m) { return {std::move(m)}; }
    /// Gaussian entries scaled by 1/sqrt(C); deterministic per seed.
    static Projection random(int channels, std::uint64_t seed);
};

/// Projects each pixel to RGB and clamps to [0,1]. Throws on shape mismatch.
template <typename Scalar>
RgbImage renderPreview(const FeatureGrid<Scalar> &grid, const Projection &projection = Projection::first3());

extern template RgbImage renderPreview<float>(const FeatureGrid<float> &, const Projection &);
extern template RgbImage renderPreview<double>(const FeatureGrid<double> &, const Projection &);

/// Splat + preview in one pass. The projection is applied to every texton's
/// channel vector before compositing (equal to renderPreview(splat(set)) up to
/// floating-point summation order) so no full-width grid is materialized.
RgbImage renderSet(const GaussianSet &set, const Projection &projection = Projection::first3(),
                   const SplatOptions &options = {});

/// renderSet after mapping the frame onto width x height (pixel centers 0 and
/// W-1 map to 0 and width-1). The set's own frame renders unchanged.
RgbImage renderAtSize(const GaussianSet &set, int width, int height,
                      const Projection &projection = Projection::first3(), const SplatOptions &options = {});

} // namespace texton
