// Copyright Contributors to the Texton Engine Project
// SPDX-License-Identifier: Apache-2.0
//
#include "texton/objectives.hpp"

#include "texton/core.hpp"
#include "texton/parallel.hpp"
#include "texton/random.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

namespace texton {

double entropyLoss(const SegmentationStack &masks) {
    const double pixels = double(masks.frame.pixels());
    double sum          = 0.0;
    for (const auto &m : masks.masks) {
        sum += (m > 0.0).select(m * m.log(), 0.0).sum();
    }
    return std::max(0.0, -sum / pixels);
}

double compactnessLoss(const SegmentationStack &masks) {
    const auto means  = segmentMeans(masks);
    const ImageFrame &frame = masks.frame;
    double sum        = 0.0;
    for (int y = 0; y < frame.height; ++y) {
        for (int x = 0; x < frame.width; ++x) {
            Vec2 projected = Vec2::Zero();
            for (std::size_t i = 0; i < masks.size(); ++i) {
                projected += means[i] * masks.masks[i](y, x);
            }
            sum += (projected - Vec2(x, y)).squaredNorm();
        }
    }
    return sum / double(frame.pixels());
}

namespace {

void requireSameShape(const RgbImage &a, const RgbImage &b, const PixelMask *mask) {
    if (a.width != b.width || a.height != b.height) {
        throw Error("image dimensions differ");
    }
    if (mask && !mask->data.empty() && (mask->width != a.width || mask->height != a.height)) {
        throw Error("mask dimensions differ from image");
    }
}

struct WeightedImage {
    int width = 0, height = 0;
    std::vector<double> a, b; // 3 channels each
    std::vector<double> w;    // per-pixel weight (0 = excluded)
};

double maskedL1(const WeightedImage &img) {
    double sum = 0.0, weight = 0.0;
    for (std::size_t p = 0; p < img.w.size(); ++p) {
        if (img.w[p] <= 0.0) {
            continue;
        }
        for (int c = 0; c < 3; ++c) {
            sum += std::abs(img.a[p * 3 + c] - img.b[p * 3 + c]);
        }
        weight += 3.0;
    }
    return weight > 0.0 ? sum / weight : 0.0;
}

WeightedImage pool(const WeightedImage &in) {
    WeightedImage out;
    out.width  = (in.width + 1) / 2;
    out.height = (in.height + 1) / 2;
    const std::size_t n = std::size_t(out.width) * out.height;
    out.a.assign(n * 3, 0.0);
    out.b.assign(n * 3, 0.0);
    out.w.assign(n, 0.0);
    for (int y = 0; y < out.height; ++y) {
        for (int x = 0; x < out.width; ++x) {
            const std::size_t o = std::size_t(y) * out.width + x;
            double mass         = 0.0;
            for (int dy = 0; dy < 2; ++dy) {
                for (int dx = 0; dx < 2; ++dx) {
                    const int sx = 2 * x + dx, sy = 2 * y + dy;
                    if (sx >= in.width || sy >= in.height) {
                        continue;
                    }
                    const std::size_t s = std::size_t(sy) * in.width + sx;
                    const double w      = in.w[s];
                    if (w <= 0.0) {
                        continue;
                    }
                    mass += w;
                    for (int c = 0; c < 3; ++c) {
                        out.a[o * 3 + c] += w * in.a[s * 3 + c];
                        out.b[o * 3 + c] += w * in.b[s * 3 + c];
                    }
                }
            }
            if (mass > 0.0) {
                for (int c = 0; c < 3; ++c) {
                    out.a[o * 3 + c] /= mass;
                    out.b[o * 3 + c] /= mass;
                }
                out.w[o] = mass;
            }
        }
    }
    return out;
}

WeightedImage weighted(const RgbImage &a, const RgbImage &b, const PixelMask *mask) {
    WeightedImage img{a.width, a.height, a.data, b.data, {}};
    img.w.assign(std::size_t(a.width) * a.height, 1.0);
    if (mask && !mask->data.empty()) {
        for (std::size_t p = 0; p < img.w.size(); ++p) {
            img.w[p] = mask->data[p] ? 1.0 : 0.0;
        }
    }
    return img;
}

} // namespace

double pyramidL1Distance(const RgbImage &a, const RgbImage &b, const PixelMask *mask, int levels) {
    requireSameShape(a, b, mask);
    WeightedImage level = weighted(a, b, mask);
    double sum          = 0.0;
    for (int l = 0; l < levels; ++l) {
        if (l > 0) {
            level = pool(level);
        }
        sum += maskedL1(level);
    }
    return levels > 0 ? sum / levels : 0.0;
}

DistanceReport reconstructionDistance(const RgbImage &a, const RgbImage &b, const PixelMask *mask,
                                      const ReconstructionWeights &weights,
                                      const PerceptualDistance &perceptual) {
    requireSameShape(a, b, mask);
    DistanceReport report;
    if (mask && !mask->data.empty() &&
        std::none_of(mask->data.begin(), mask->data.end(), [](unsigned char v) { return v != 0; })) {
        report.degenerateMask = true;
        return report;
    }
    const double l1   = maskedL1(weighted(a, b, mask));
    const double perc = perceptual ? perceptual(a, b, mask) : pyramidL1Distance(a, b, mask);
    report.value      = weights.l1 * l1 + weights.perceptual * perc;
    return report;
}

namespace {

std::vector<VecX> tiles(const RgbImage &img, int patch) {
    std::vector<VecX> out;
    for (int ty = 0; ty + patch <= img.height; ty += patch) {
        for (int tx = 0; tx + patch <= img.width; tx += patch) {
            VecX v(3 * patch * patch);
            int k = 0;
            for (int y = ty; y < ty + patch; ++y) {
                for (int x = tx; x < tx + patch; ++x) {
                    for (int c = 0; c < 3; ++c) {
                        v(k++) = img.at(x, y, c);
                    }
                }
            }
            out.push_back(std::move(v));
        }
    }
    return out;
}

// Linear-interpolated quantiles at (k + 0.5) / n.
std::vector<double> resampled(const std::vector<double> &sorted, std::size_t n) {
    if (sorted.size() == n) {
        return sorted;
    }
    std::vector<double> out(n);
    const double last = double(sorted.size() - 1);
    for (std::size_t k = 0; k < n; ++k) {
        const double pos = std::clamp((double(k) + 0.5) / double(n) * double(sorted.size()) - 0.5, 0.0, last);
        const auto lo    = std::size_t(std::floor(pos));
        const auto hi    = std::min(lo + 1, sorted.size() - 1);
        const double t   = pos - double(lo);
        out[k]           = (1.0 - t) * sorted[lo] + t * sorted[hi];
    }
    return out;
}

} // namespace

double textureDistance(const RgbImage &a, const RgbImage &b, int patch, int projections, std::uint64_t seed) {
    if (patch < 1 || projections < 1) {
        throw Error("texture distance: patch and projections must be >= 1");
    }
    if (a.width < patch || a.height < patch || b.width < patch || b.height < patch) {
        throw Error("texture distance: image smaller than patch");
    }
    const auto ta    = tiles(a, patch);
    const auto tb    = tiles(b, patch);
    const auto dim   = Eigen::Index(3 * patch * patch);
    const std::size_t n = std::min(ta.size(), tb.size());
    Rng rng(seed);
    double total = 0.0;
    std::vector<double> pa(ta.size()), pb(tb.size());
    for (int k = 0; k < projections; ++k) {
        VecX dir(dim);
        for (Eigen::Index i = 0; i < dim; ++i) {
            dir(i) = std::abs(rng.normal());
        }
        dir /= dir.sum();
        for (std::size_t i = 0; i < ta.size(); ++i) {
            pa[i] = dir.dot(ta[i]);
        }
        for (std::size_t i = 0; i < tb.size(); ++i) {
            pb[i] = dir.dot(tb[i]);
        }
        std::sort(pa.begin(), pa.end());
        std::sort(pb.begin(), pb.end());
        const auto qa = resampled(pa, n);
        const auto qb = resampled(pb, n);
        double s      = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            s += std::abs(qa[i] - qb[i]);
        }
        total += s / double(n);
    }
    return total / projections;
}

double boundaryDamping(const ImageFrame &frame, const Vec2 &mean, const MatchWeights &weights) {
    const double d    = distanceToFrameEdge(frame, mean);
    const double ramp = weights.boundaryMargin > 0.0 ? std::min(1.0, d / weights.boundaryMargin) : 1.0;
    return std::max(weights.betaFloor, ramp);
}

double pairCost(const TextonGaussian &a, const TextonGaussian &b, const MatchWeights &weights,
                const ImageFrame &frame, const Eigen::ArrayXXd *maskA, const Eigen::ArrayXXd *maskB) {
    if (a.feature.size() != b.feature.size()) {
        throw Error("pair cost: feature dimension mismatch");
    }
    const double w    = a.existence * b.existence;
    const double beta = std::min(boundaryDamping(frame, a.mean, weights), boundaryDamping(frame, b.mean, weights));
    double cost = 0.0;
    if (w != 0.0) {
        const double geometric = weights.mean * (a.mean - b.mean).norm() + weights.cov * (a.cov - b.cov).norm() +
                                 weights.dir * (a.direction - b.direction).norm() +
                                 weights.feature * (a.feature - b.feature).norm();
        cost = w * beta * geometric;
    }
    cost += weights.existence * std::abs(a.existence - b.existence);
    if (maskA && maskB) {
        if (maskA->rows() != maskB->rows() || maskA->cols() != maskB->cols()) {
            throw Error("pair cost: mask shapes differ");
        }
        cost += weights.segmentation * std::sqrt((*maskA - *maskB).square().sum());
    }
    return cost;
}

Eigen::MatrixXd costMatrix(const GaussianSet &a, const GaussianSet &b, const MatchWeights &weights,
                           const SegmentationStack *masksA, const SegmentationStack *masksB) {
    if (!a.empty() && !b.empty() && a.featureDim != b.featureDim) {
        throw Error("cost matrix: feature dimension mismatch");
    }
    const bool useMasks = masksA && masksB;
    if (useMasks && (masksA->size() != a.size() || masksB->size() != b.size())) {
        throw Error("cost matrix: mask count must equal Gaussian count");
    }
    Eigen::MatrixXd cost(Eigen::Index(a.size()), Eigen::Index(b.size()));
    parallelForBands(int(a.size()), resolveThreadCount(), [&](int r0, int r1) {
        for (int i = r0; i < r1; ++i) {
            for (std::size_t j = 0; j < b.size(); ++j) {
                cost(i, Eigen::Index(j)) =
                    pairCost(a.gaussians[std::size_t(i)], b.gaussians[j], weights, a.frame,
                             useMasks ? &masksA->masks[std::size_t(i)] : nullptr,
                             useMasks ? &masksB->masks[j] : nullptr);
            }
        }
    });
    return cost;
}

Matching setMatchingCost(const GaussianSet &a, const GaussianSet &b, const MatchWeights &weights,
                         const SegmentationStack *masksA, const SegmentationStack *masksB) {
    return hungarianMatch(costMatrix(a, b, weights, masksA, masksB));
}

double combinedLoss(const LossTerms &t, const LossWeights &w) {
    return t.reconstruction + t.reconstructionTransformed + w.entropy * t.entropy +
           w.compactness * t.compactness + w.consistency * t.consistency + w.texture * t.texture +
           w.gan * t.gan + w.patchGan * t.patchGan;
}

std::string formatReport(const std::vector<std::pair<std::string, double>> &entries) {
    std::string out;
    for (const auto &[key, value] : entries) {
        char buf[64];
        const auto res = std::to_chars(buf, buf + sizeof buf, value);
        out += key;
        out += '=';
        out.append(buf, res.ptr);
        out += '\n';
    }
    return out;
}

} // namespace texton
