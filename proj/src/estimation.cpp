// Copyright Contributors to the Texton Engine Project
// SPDX-License-Identifier: Apache-2.0
//
#include "texton/estimation.hpp"

#include "texton/core.hpp"
#include "texton/linalg.hpp"
#include "texton/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace texton {

SegmentationStack SegmentationStack::zeros(const ImageFrame &frame, std::size_t n) {
    SegmentationStack s;
    s.frame = frame;
    s.masks.assign(n, Eigen::ArrayXXd::Zero(frame.height, frame.width));
    return s;
}

namespace {

void checkStackShape(const SegmentationStack &masks) {
    for (const auto &m : masks.masks) {
        if (m.rows() != masks.frame.height || m.cols() != masks.frame.width) {
            throw Error("segmentation mask shape does not match its frame");
        }
    }
}

struct Moments {
    double mass = 0.0;
    double massSq = 0.0;
    Vec2 mean  = Vec2::Zero();
    Mat2 cov   = Mat2::Zero();
};

Moments momentsOf(const Eigen::ArrayXXd &mask) {
    Moments m;
    Vec2 first = Vec2::Zero();
    for (Eigen::Index y = 0; y < mask.rows(); ++y) {
        for (Eigen::Index x = 0; x < mask.cols(); ++x) {
            const double s = mask(y, x);
            m.mass += s;
            m.massSq += s * s;
            first += s * Vec2(double(x), double(y));
        }
    }
    if (m.mass < kEmptySegmentMass) {
        return m;
    }
    m.mean = first / m.mass;
    for (Eigen::Index y = 0; y < mask.rows(); ++y) {
        for (Eigen::Index x = 0; x < mask.cols(); ++x) {
            const double s = mask(y, x);
            if (s != 0.0) {
                const Vec2 d = Vec2(double(x), double(y)) - m.mean;
                m.cov += s * (d * d.transpose());
            }
        }
    }
    m.cov /= m.mass;
    m.cov = linalg::symmetrized(m.cov);
    return m;
}

} // namespace

std::vector<Vec2> segmentMeans(const SegmentationStack &masks) {
    checkStackShape(masks);
    std::vector<Vec2> out;
    out.reserve(masks.size());
    for (const auto &mask : masks.masks) {
        const Moments m = momentsOf(mask);
        out.push_back(m.mass < kEmptySegmentMass ? masks.frame.center() : m.mean);
    }
    return out;
}

double gumbelBinarySample(double prob, double temperature, std::uint64_t seed) {
    if (!(temperature > 0.0)) {
        throw Error("gumbel sample: temperature must be > 0");
    }
    if (prob >= 1.0) {
        return 1.0;
    }
    if (prob <= 0.0) {
        return 0.0;
    }
    Rng rng(seed);
    const double u     = rng.uniformOpen();
    const double logit = std::log(prob) - std::log1p(-prob) + std::log(u) - std::log1p(-u);
    return 1.0 / (1.0 + std::exp(-logit / temperature));
}

GaussianSet estimateGaussians(const SegmentationStack &masks, const DenseMaps &maps,
                              const SamplingMode &sampling) {
    if (!(masks.frame == maps.frame)) {
        throw Error("estimate: masks and maps frame mismatch");
    }
    checkStackShape(masks);
    const auto pixels = Eigen::Index(masks.frame.pixels());
    if (maps.appearance.rows() != pixels || maps.direction.rows() != pixels ||
        maps.direction.cols() != 2) {
        throw Error("estimate: dense map shape does not match the frame");
    }
    if (sampling.kind == SamplingMode::Kind::Relaxed && !(sampling.temperature > 0.0)) {
        throw Error("estimate: relaxed sampling needs temperature > 0");
    }

    GaussianSet out;
    out.frame      = masks.frame;
    out.featureDim = int(maps.appearance.cols());
    out.capacity   = std::max<int>(int(masks.size()), kDefaultCapacity);
    out.gaussians.reserve(masks.size());

    const int width = masks.frame.width;
    for (std::size_t i = 0; i < masks.size(); ++i) {
        const Eigen::ArrayXXd &mask = masks.masks[i];
        const Moments m             = momentsOf(mask);
        TextonGaussian g;
        if (m.mass < kEmptySegmentMass) {
            g.weight    = 0.0;
            g.existence = 0.0;
            g.mean      = masks.frame.center();
            g.cov       = Mat2::Identity() * linalg::kCovarianceEpsilon;
            g.direction = Vec2::UnitX();
            g.feature   = VecX::Zero(out.featureDim);
            g.maskArea  = m.mass;
            out.gaussians.push_back(std::move(g));
            continue;
        }

        VecX feature = VecX::Zero(out.featureDim);
        Vec2 dir     = Vec2::Zero();
        for (Eigen::Index y = 0; y < mask.rows(); ++y) {
            for (Eigen::Index x = 0; x < mask.cols(); ++x) {
                const double s = mask(y, x);
                if (s != 0.0) {
                    const Eigen::Index row = y * width + x;
                    feature += s * maps.appearance.row(row).transpose();
                    dir += s * maps.direction.row(row).transpose();
                }
            }
        }
        feature /= m.mass;
        dir /= m.mass;

        g.existence = std::clamp(m.massSq / m.mass, 0.0, 1.0);
        g.mean      = m.mean;
        g.cov       = m.cov;
        g.feature   = normalizedOrZero(feature);
        const double dirLen = dir.norm();
        g.direction         = dirLen > 0.0 ? Vec2(dir / dirLen) : Vec2::UnitX();
        g.maskArea          = m.mass;
        if (sampling.kind == SamplingMode::Kind::Rounded) {
            g.weight = g.existence >= 0.5 ? 1.0 : 0.0;
        } else {
            g.weight = gumbelBinarySample(g.existence, sampling.temperature,
                                          deriveSeed(sampling.seed, i));
        }
        out.gaussians.push_back(std::move(g));
    }
    return out;
}

namespace {

VecX synthFeature(Rng &rng, int dim) {
    VecX f(dim);
    for (int c = 0; c < dim; ++c) {
        f(c) = c < 3 ? 0.15 + 0.85 * rng.uniform() : 0.05 * rng.normal();
    }
    return normalizedOrZero(f);
}

VecX backgroundFeature(int dim) {
    VecX f = VecX::Constant(dim, 0.0);
    f.head(std::min(dim, 3)).setConstant(1.0);
    return normalizedOrZero(f);
}

TextonGaussian synthGaussian(Rng &rng, const Vec2 &center, double maxStd, bool isotropic,
                             int featureDim) {
    const double major = maxStd * (0.6 + 0.4 * rng.uniform());
    const double minor = isotropic ? major : maxStd * (0.35 + 0.65 * rng.uniform());
    const double theta = isotropic ? 0.0 : std::numbers::pi * rng.uniform();
    const Mat2 r       = linalg::rotation(theta);
    TextonGaussian g;
    g.mean      = center;
    g.cov       = linalg::symmetrized(Mat2(r * Vec2(major * major, minor * minor).asDiagonal() * r.transpose()));
    g.direction = Vec2(std::cos(theta), std::sin(theta));
    g.feature   = synthFeature(rng, featureDim);
    return g;
}

} // namespace

SynthWorld synthWorld(const SynthLayout &layout, std::uint64_t seed) {
    if (layout.count < 0) {
        throw Error("synth: count must be >= 0");
    }
    if (layout.count > layout.capacity) {
        throw Error("synth: count exceeds capacity");
    }
    if (layout.frame.width < 1 || layout.frame.height < 1 || layout.featureDim < 1) {
        throw Error("synth: invalid frame or feature dimension");
    }
    const ImageFrame frame = layout.frame;
    Rng rng(seed);

    SynthWorld world;
    world.truth.frame      = frame;
    world.truth.featureDim = layout.featureDim;
    world.truth.capacity   = layout.capacity;

    const int k = layout.count;
    if (k > 0 && layout.arrangement == SynthLayout::Arrangement::Grid) {
        const int cols      = int(std::ceil(std::sqrt(double(k))));
        const int rows      = (k + cols - 1) / cols;
        const double cellW  = double(frame.width) / cols;
        const double cellH  = double(frame.height) / rows;
        const double maxStd = std::min(cellW, cellH) / 6.0;
        for (int i = 0; i < k; ++i) {
            const double jx = (rng.uniform() - 0.5) * 0.2 * cellW;
            const double jy = (rng.uniform() - 0.5) * 0.2 * cellH;
            const Vec2 c((i % cols + 0.5) * cellW - 0.5 + jx, (i / cols + 0.5) * cellH - 0.5 + jy);
            world.truth.gaussians.push_back(synthGaussian(rng, c, maxStd, layout.isotropic, layout.featureDim));
        }
    } else if (k > 0) {
        double maxStd = std::min(frame.width, frame.height) / (6.0 * std::sqrt(double(k)));
        std::vector<Vec2> centers;
        for (int attempt = 0; int(centers.size()) < k; ++attempt) {
            if (attempt > 0 && attempt % 2000 == 0) {
                maxStd *= 0.9;
                centers.clear();
            }
            if (attempt > 100000) {
                throw Error("synth: could not place non-overlapping Gaussians");
            }
            const double margin = 2.0 * maxStd + 1.0;
            const Vec2 c(margin + rng.uniform() * std::max(0.0, frame.width - 1 - 2 * margin),
                         margin + rng.uniform() * std::max(0.0, frame.height - 1 - 2 * margin));
            const bool clear = std::all_of(centers.begin(), centers.end(), [&](const Vec2 &o) {
                return (o - c).norm() > 4.5 * maxStd;
            });
            if (clear) {
                centers.push_back(c);
            }
        }
        for (const Vec2 &c : centers) {
            world.truth.gaussians.push_back(synthGaussian(rng, c, maxStd, layout.isotropic, layout.featureDim));
        }
    }

    // Rasterize: mask 0 is background, mask i+1 is truth Gaussian i.
    world.masks = SegmentationStack::zeros(frame, std::size_t(k) + 1);
    world.maps.frame      = frame;
    world.maps.appearance = Eigen::MatrixXd(Eigen::Index(frame.pixels()), layout.featureDim);
    world.maps.direction  = Eigen::MatrixXd(Eigen::Index(frame.pixels()), 2);

    std::vector<Mat2> inverses;
    for (const auto &g : world.truth.gaussians) {
        inverses.push_back(linalg::inverse2(g.cov));
    }
    const VecX bgFeature = backgroundFeature(layout.featureDim);
    std::vector<double> areas(std::size_t(k), 0.0);
    for (int y = 0; y < frame.height; ++y) {
        for (int x = 0; x < frame.width; ++x) {
            int owner   = -1;
            double best = 4.0;
            for (int i = 0; i < k; ++i) {
                const Vec2 d    = Vec2(x, y) - world.truth.gaussians[i].mean;
                const double m2 = linalg::mahalanobisSq<double>(d, inverses[i]);
                if (m2 <= best) {
                    best  = m2;
                    owner = i;
                }
            }
            const Eigen::Index row = Eigen::Index(y) * frame.width + x;
            world.masks.masks[std::size_t(owner + 1)](y, x) = 1.0;
            if (owner >= 0) {
                const auto &g = world.truth.gaussians[owner];
                world.maps.appearance.row(row) = g.feature.transpose();
                world.maps.direction.row(row)  = g.direction.transpose();
                areas[owner] += 1.0;
            } else {
                world.maps.appearance.row(row) = bgFeature.transpose();
                world.maps.direction.row(row)  = Vec2::UnitX().transpose();
            }
        }
    }
    for (int i = 0; i < k; ++i) {
        world.truth.gaussians[i].maskArea = areas[i];
    }
    return world;
}

} // namespace texton
