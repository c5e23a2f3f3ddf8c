// Copyright Contributors to the Texton Engine Project
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace texton {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using VecX = Eigen::VectorXd;

template <typename Scalar> using Vector2 = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar> using Matrix2 = Eigen::Matrix<Scalar, 2, 2>;

/// Default number of latent Gaussians (maximum set size).
inline constexpr int kDefaultCapacity = 100;
/// Default appearance feature dimension.
inline constexpr int kDefaultFeatureDim = 382;

class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A texton index that does not exist in the set it was applied to.
class IndexError : public Error {
  public:
    IndexError(const std::string &what, std::size_t index) : Error(what), mIndex(index) {}
    std::size_t index() const { return mIndex; }

  private:
    std::size_t mIndex;
};

/// Raised when a set fails validation; carries every violation found.
class ValidationError : public Error {
  public:
    explicit ValidationError(std::vector<std::string> violations);
    const std::vector<std::string> &violations() const { return mViolations; }

  private:
    std::vector<std::string> mViolations;
};

/// Pixel raster the Gaussians live in. x right, y down, pixel (0,0) center at the origin.
struct ImageFrame {
    int width  = 1;
    int height = 1;

    std::size_t pixels() const { return std::size_t(width) * std::size_t(height); }
    Vec2 center() const { return {0.5 * (width - 1), 0.5 * (height - 1)}; }
    bool operator==(const ImageFrame &) const = default;
};

/// One latent texton.
struct TextonGaussian {
    double weight    = 1.0; // delta: existence gate used by splatting
    double existence = 1.0; // p: Bernoulli existence probability
    Vec2 mean        = Vec2::Zero();
    Mat2 cov         = Mat2::Identity();
    Vec2 direction   = Vec2::UnitX();
    VecX feature;
    std::optional<double> maskArea;

    bool effective() const { return weight > 0.5; }
};

/// Ordered collection of textons. The last element is composited front-most.
struct GaussianSet {
    ImageFrame frame;
    int featureDim = kDefaultFeatureDim;
    int capacity   = kDefaultCapacity;
    std::vector<TextonGaussian> gaussians;

    std::size_t size() const { return gaussians.size(); }
    bool empty() const { return gaussians.empty(); }
    std::size_t effectiveCount() const;
};

struct AffineTransform2D {
    Mat2 linear      = Mat2::Identity();
    Vec2 translation = Vec2::Zero();

    static AffineTransform2D identity() { return {}; }
    static AffineTransform2D translate(const Vec2 &t) { return {Mat2::Identity(), t}; }
    /// Rotation by theta radians about `pivot`.
    static AffineTransform2D rotate(double theta, const Vec2 &pivot = Vec2::Zero());

    Vec2 apply(const Vec2 &p) const { return linear * p + translation; }
    AffineTransform2D inverse() const;
    /// (*this) after `inner`.
    AffineTransform2D compose(const AffineTransform2D &inner) const;
};

/// RGB image with channel values in [0,1], row-major, interleaved.
struct RgbImage {
    int width  = 0;
    int height = 0;
    std::vector<double> data;

    RgbImage() = default;
    RgbImage(int w, int h, double fill = 0.0)
        : width(w), height(h), data(std::size_t(w) * std::size_t(h) * 3, fill) {}

    double &at(int x, int y, int c) { return data[(std::size_t(y) * width + x) * 3 + c]; }
    double at(int x, int y, int c) const { return data[(std::size_t(y) * width + x) * 3 + c]; }
    bool operator==(const RgbImage &) const = default;
};

/// Boolean per-pixel mask; empty means "all valid".
struct PixelMask {
    int width  = 0;
    int height = 0;
    std::vector<unsigned char> data;

    bool at(int x, int y) const { return data[std::size_t(y) * width + x] != 0; }
};

} // namespace texton
