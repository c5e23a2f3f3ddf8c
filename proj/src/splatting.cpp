// Copyright Contributors to the Texton Engine Project
// SPDX-License-Identifier: Apache-2.0
//
#include "texton/splatting.hpp"

#include "texton/core.hpp"
#include "texton/linalg.hpp"
#include "texton/parallel.hpp"
#include "texton/random.hpp"

#include <algorithm>
#include <cmath>

namespace texton {

Mat2 regularizedCovariance(const Mat2 &cov) {
    const double eps = linalg::kCovarianceEpsilon;
    if (linalg::symmetricEigenvalues(cov)(0) < eps) {
        return cov + eps * Mat2::Identity();
    }
    return cov;
}

double opacityAt(const TextonGaussian &g, const Vec2 &p) {
    if (g.weight == 0.0) {
        return 0.0;
    }
    const Mat2 inv  = linalg::inverse2(regularizedCovariance(g.cov));
    const double m2 = linalg::mahalanobisSq<double>(p - g.mean, inv);
    return m2 <= kSupportCutoff ? g.weight * std::exp(-m2) : 0.0;
}

namespace {

struct Footprint {
    std::size_t index;
    Vec2 mean;
    Mat2 inverse;
    double weight;
    int x0, x1, y0, y1; // inclusive pixel bounds
};

/// Gaussians that can contribute, front-most first.
std::vector<Footprint> footprints(const GaussianSet &set) {
    std::vector<Footprint> out;
    const ImageFrame &frame = set.frame;
    for (std::size_t k = set.size(); k-- > 0;) {
        const TextonGaussian &g = set.gaussians[k];
        if (g.weight == 0.0) {
            continue;
        }
        const Mat2 cov  = regularizedCovariance(g.cov);
        const double hx = std::sqrt(kSupportCutoff * cov(0, 0));
        const double hy = std::sqrt(kSupportCutoff * cov(1, 1));
        Footprint f{k, g.mean, linalg::inverse2(cov), g.weight, 0, 0, 0, 0};
        const double fx0 = std::ceil(g.mean.x() - hx), fx1 = std::floor(g.mean.x() + hx);
        const double fy0 = std::ceil(g.mean.y() - hy), fy1 = std::floor(g.mean.y() + hy);
        if (fx1 < 0 || fy1 < 0 || fx0 > frame.width - 1 || fy0 > frame.height - 1) {
            continue;
        }
        f.x0 = int(std::max(fx0, 0.0));
        f.x1 = int(std::min(fx1, double(frame.width - 1)));
        f.y0 = int(std::max(fy0, 0.0));
        f.y1 = int(std::min(fy1, double(frame.height - 1)));
        out.push_back(f);
    }
    return out;
}

/// Front-to-back compositing over rows [r0, r1). Calls emit(gaussianIndex, x, y, alpha)
/// for every non-zero contribution.
template <typename Emit>
void compositeBand(const std::vector<Footprint> &prints, const ImageFrame &frame, int r0, int r1,
                   Emit &&emit) {
    const std::size_t w = std::size_t(frame.width);
    std::vector<double> transmittance(std::size_t(r1 - r0) * w, 1.0);
    for (const Footprint &f : prints) {
        const int y0 = std::max(f.y0, r0), y1 = std::min(f.y1, r1 - 1);
        for (int y = y0; y <= y1; ++y) {
            double *trow = transmittance.data() + std::size_t(y - r0) * w;
            for (int x = f.x0; x <= f.x1; ++x) {
                const Vec2 d    = Vec2(x, y) - f.mean;
                const double m2 = linalg::mahalanobisSq<double>(d, f.inverse);
                if (m2 > kSupportCutoff) {
                    continue;
                }
                const double o = f.weight * std::exp(-m2);
                if (o == 0.0) {
                    continue;
                }
                const double alpha = o * trow[x];
                trow[x] *= 1.0 - o;
                emit(f.index, x, y, alpha);
            }
        }
    }
}

} // namespace

AlphaStack alphaMaps(const GaussianSet &set, const SplatOptions &options) {
    AlphaStack out;
    out.frame = set.frame;
    const ImageFrame &frame = set.frame;
    out.alphas.assign(set.size(), Eigen::ArrayXXd::Zero(frame.height, frame.width));
    out.inputMap = Eigen::ArrayXXd::Zero(frame.height, frame.width);
    const auto prints = footprints(set);
    parallelForBands(frame.height, resolveThreadCount(options.threads), [&](int r0, int r1) {
        compositeBand(prints, frame, r0, r1, [&](std::size_t i, int x, int y, double a) {
            out.alphas[i](y, x) = a;
        });
    });
    for (const auto &a : out.alphas) {
        out.inputMap = out.inputMap.max(a);
    }
    return out;
}

template <typename Scalar>
FeatureGrid<Scalar> splat(const GaussianSet &set, const SplatOptions &options) {
    using Vector   = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    const int nf   = set.featureDim;
    const int chan = nf + 2;
    std::vector<Vector> channels(set.size());
    for (std::size_t i = 0; i < set.size(); ++i) {
        const TextonGaussian &g = set.gaussians[i];
        if (g.feature.size() != nf) {
            throw Error("splat: feature dimension mismatch within set");
        }
        Vector v(chan);
        v.head(nf) = g.feature.cast<Scalar>();
        v.tail(2)  = g.direction.cast<Scalar>();
        channels[i] = std::move(v);
    }

    FeatureGrid<Scalar> grid(set.frame, chan);
    const auto prints = footprints(set);
    parallelForBands(set.frame.height, resolveThreadCount(options.threads), [&](int r0, int r1) {
        compositeBand(prints, set.frame, r0, r1, [&](std::size_t i, int x, int y, double a) {
            Eigen::Map<Vector> px(grid.pixel(x, y), chan);
            px += Scalar(a) * channels[i];
        });
    });
    return grid;
}

template FeatureGrid<float> splat<float>(const GaussianSet &, const SplatOptions &);
template FeatureGrid<double> splat<double>(const GaussianSet &, const SplatOptions &);

Projection Projection::random(int channels, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd m(channels, 3);
    const double scale = 1.0 / std::sqrt(double(std::max(channels, 1)));
    for (int r = 0; r < channels; ++r) {
        for (int c = 0; c < 3; ++c) {
            m(r, c) = rng.normal() * scale;
        }
    }
    return fromMatrix(std::move(m));
}

namespace {

void checkProjection(const Projection &projection, int channels) {
    if (projection.matrix) {
        if (projection.matrix->rows() != channels || projection.matrix->cols() != 3) {
            throw Error("render: projection must be C x 3 with C = " + std::to_string(channels));
        }
    } else if (channels < 3) {
        throw Error("render: first3 projection needs at least 3 channels");
    }
}

} // namespace

template <typename Scalar>
RgbImage renderPreview(const FeatureGrid<Scalar> &grid, const Projection &projection) {
    checkProjection(projection, grid.channels);
    RgbImage img(grid.frame.width, grid.frame.height);
    for (int y = 0; y < grid.frame.height; ++y) {
        for (int x = 0; x < grid.frame.width; ++x) {
            const Scalar *px = grid.pixel(x, y);
            for (int c = 0; c < 3; ++c) {
                double v = 0.0;
                if (projection.matrix) {
                    for (int k = 0; k < grid.channels; ++k) {
                        v += double(px[k]) * (*projection.matrix)(k, c);
                    }
                } else {
                    v = double(px[c]);
                }
                img.at(x, y, c) = std::clamp(v, 0.0, 1.0);
            }
        }
    }
    return img;
}

template RgbImage renderPreview<float>(const FeatureGrid<float> &, const Projection &);
template RgbImage renderPreview<double>(const FeatureGrid<double> &, const Projection &);

RgbImage renderSet(const GaussianSet &set, const Projection &projection, const SplatOptions &options) {
    const int chan = set.featureDim + 2;
    checkProjection(projection, chan);
    std::vector<Eigen::Vector3d> colors(set.size());
    for (std::size_t i = 0; i < set.size(); ++i) {
        const TextonGaussian &g = set.gaussians[i];
        if (g.feature.size() != set.featureDim) {
            throw Error("render: feature dimension mismatch within set");
        }
        VecX full(chan);
        full << g.feature, g.direction;
        colors[i] = projection.matrix ? Eigen::Vector3d(projection.matrix->transpose() * full)
                                      : Eigen::Vector3d(full.head(3));
    }

    RgbImage img(set.frame.width, set.frame.height);
    const auto prints = footprints(set);
    parallelForBands(set.frame.height, resolveThreadCount(options.threads), [&](int r0, int r1) {
        compositeBand(prints, set.frame, r0, r1, [&](std::size_t i, int x, int y, double a) {
            for (int c = 0; c < 3; ++c) {
                img.at(x, y, c) += a * colors[i](c);
            }
        });
    });
    for (double &v : img.data) {
        v = std::clamp(v, 0.0, 1.0);
    }
    return img;
}

RgbImage renderAtSize(const GaussianSet &set, int width, int height, const Projection &projection,
                      const SplatOptions &options) {
    if (width < 1 || height < 1) {
        throw Error("render: size must be at least 1x1");
    }
    if (width == set.frame.width && height == set.frame.height) {
        return renderSet(set, projection, options);
    }
    auto ratio = [](int to, int from) { return from > 1 ? double(to - 1) / double(from - 1) : 1.0; };
    AffineTransform2D scale;
    scale.linear = Vec2(ratio(width, set.frame.width), ratio(height, set.frame.height)).asDiagonal();
    GaussianSet scaled = applyAffine(set, scale);
    scaled.frame       = {width, height};
    return renderSet(scaled, projection, options);
}

} // namespace texton
