// Copyright Contributors to the Texton Engine Project
// SPDX-License-Identifier: Apache-2.0
//
#include "texton/editing.hpp"

#include "texton/core.hpp"
#include "texton/linalg.hpp"
#include "texton/random.hpp"
#include "texton/splatting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace texton {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void requireSameFeatureDim(const GaussianSet &a, const GaussianSet &b, const char *op) {
    if (a.featureDim != b.featureDim) {
        throw Error(std::string(op) + ": feature dimension mismatch (" + std::to_string(a.featureDim) + " vs " +
                    std::to_string(b.featureDim) + ")");
    }
}

template <typename Derived>
typename Derived::PlainObject lerp(const Eigen::MatrixBase<Derived> &a, const Eigen::MatrixBase<Derived> &b,
                                   double t) {
    return a.binaryExpr(b, [t](double x, double y) { return std::lerp(x, y, t); });
}

Mat2 projectedIfNeeded(const Mat2 &m) {
    const Mat2 s = linalg::symmetrized(m);
    if (linalg::symmetricEigenvalues(s)(0) < 1e-9) {
        return linalg::psdProjected(s, 1e-9);
    }
    return s;
}

/// Blend of every continuous parameter; weight and existence handled by the caller.
TextonGaussian blendGeometry(const TextonGaussian &a, const TextonGaussian &b, double t) {
    TextonGaussian g;
    g.weight    = std::lerp(a.weight, b.weight, t);
    g.existence = std::lerp(a.existence, b.existence, t);
    g.mean      = lerp(a.mean, b.mean, t);
    g.cov       = projectedIfNeeded(lerp(a.cov, b.cov, t));
    g.direction = renormalized(lerp(a.direction, b.direction, t));
    g.feature   = renormalized(lerp(a.feature, b.feature, t));
    if (a.maskArea && b.maskArea) {
        g.maskArea = std::lerp(*a.maskArea, *b.maskArea, t);
    } else {
        g.maskArea = t < 0.5 ? a.maskArea : b.maskArea;
    }
    return g;
}

double safeRatio(double num, double den) { return den == 0.0 ? kInf : num / den; }

} // namespace

// --- reshuffling -----------------------------------------------------------

ReshufflePlan ReshufflePlan::random(std::size_t n, std::uint64_t seed, Mode mode, double gamma) {
    ReshufflePlan plan;
    plan.permutation.resize(n);
    std::iota(plan.permutation.begin(), plan.permutation.end(), std::size_t(0));
    Rng rng(seed);
    for (std::size_t i = n; i > 1; --i) {
        std::swap(plan.permutation[i - 1], plan.permutation[rng.below(i)]);
    }
    plan.gamma = gamma;
    plan.mode  = mode;
    plan.seed  = seed;
    return plan;
}

double swapCoefficient(const TextonGaussian &from, const TextonGaussian &to, double gamma) {
    double ratio = safeRatio(from.existence, to.existence);
    if (from.maskArea && to.maskArea) {
        ratio = std::max(ratio, safeRatio(*from.maskArea, *to.maskArea));
    }
    return std::pow(std::min(ratio, 1.0), gamma);
}

GaussianSet reshuffle(const GaussianSet &set, const ReshufflePlan &plan) {
    const std::size_t n = set.size();
    if (plan.permutation.size() != n) {
        throw Error("reshuffle: permutation size " + std::to_string(plan.permutation.size()) +
                    " does not match set size " + std::to_string(n));
    }
    std::vector<char> seen(n, 0);
    for (std::size_t v : plan.permutation) {
        if (v >= n || seen[v]) {
            throw Error("reshuffle: permutation is not a bijection");
        }
        seen[v] = 1;
    }
    if (!(plan.gamma >= 0.0)) {
        throw Error("reshuffle: gamma must be >= 0");
    }

    GaussianSet out = set;
    for (std::size_t j = 0; j < n; ++j) {
        const TextonGaussian &target = set.gaussians[j];
        if (!target.effective()) {
            continue;
        }
        // Walk the cycle until an effective source is reached.
        std::size_t i = plan.permutation[j];
        while (!set.gaussians[i].effective()) {
            i = plan.permutation[i];
        }
        const TextonGaussian &source = set.gaussians[i];
        if (plan.mode == ReshufflePlan::Mode::Hard) {
            out.gaussians[j].feature = source.feature;
        } else {
            const double tau         = swapCoefficient(source, target, plan.gamma);
            out.gaussians[j].feature = renormalized(VecX(tau * source.feature + (1.0 - tau) * target.feature));
        }
    }
    return out;
}

// --- transfer --------------------------------------------------------------

VecX effectiveFeatureMean(const GaussianSet &set) {
    VecX sum   = VecX::Zero(set.featureDim);
    double mass = 0.0;
    for (const TextonGaussian &g : set.gaussians) {
        if (g.effective()) {
            sum += g.weight * g.feature;
            mass += g.weight;
        }
    }
    if (mass == 0.0) {
        throw Error("no effective textons");
    }
    return sum / mass;
}

VecX featureMeanShift(const GaussianSet &structure, const GaussianSet &appearance) {
    requireSameFeatureDim(structure, appearance, "transfer");
    return effectiveFeatureMean(appearance) - effectiveFeatureMean(structure);
}

GaussianSet shiftFeatures(const GaussianSet &set, const VecX &shift, bool renormalize) {
    if (shift.size() != set.featureDim) {
        throw Error("shift: feature dimension mismatch");
    }
    GaussianSet out = set;
    for (TextonGaussian &g : out.gaussians) {
        if (g.effective()) {
            g.feature += shift;
            if (renormalize) {
                g.feature = renormalized(g.feature);
            }
        }
    }
    return out;
}

GaussianSet transferMeanAlign(const GaussianSet &structure, const GaussianSet &appearance) {
    return shiftFeatures(structure, featureMeanShift(structure, appearance));
}

GaussianSet transferReplace(const GaussianSet &structure, const GaussianSet &appearance, std::uint64_t seed) {
    requireSameFeatureDim(structure, appearance, "transfer");
    std::vector<std::size_t> pool;
    for (std::size_t i = 0; i < appearance.size(); ++i) {
        if (appearance.gaussians[i].effective()) {
            pool.push_back(i);
        }
    }
    if (pool.empty()) {
        throw Error("no effective textons");
    }
    Rng rng(seed);
    GaussianSet out = structure;
    for (TextonGaussian &g : out.gaussians) {
        if (g.effective()) {
            g.feature = appearance.gaussians[pool[rng.below(pool.size())]].feature;
        }
    }
    return out;
}

// --- variations ------------------------------------------------------------

Mat2 morphCovariance(const Mat2 &cov, const Mat2 &meanCov, double delta) {
    if (delta == 1.0) {
        return cov;
    }
    const Mat2 l    = linalg::cholesky2(regularizedCovariance(cov));
    const Mat2 lbar = linalg::cholesky2(meanCov);
    // Both factors are lower triangular, so W is too and its eigenvalues are its diagonal.
    Mat2 w = l * linalg::inverse2(lbar);
    w(0, 1) = 0.0;
    const Mat2 wp = linalg::fractionalPower(w, delta);
    return linalg::symmetrized(Mat2(wp * meanCov * wp.transpose()));
}

GaussianSet modifyVariations(const GaussianSet &set, const VariationEdit &edit) {
    if (!(edit.featureScale >= 0.0) || !(edit.covarianceScale >= 0.0)) {
        throw Error("vary: scales must be non-negative");
    }
    const VecX fbar = effectiveFeatureMean(set);
    Mat2 ubar       = Mat2::Zero();
    double mass     = 0.0;
    for (const TextonGaussian &g : set.gaussians) {
        if (g.effective()) {
            ubar += g.weight * g.cov;
            mass += g.weight;
        }
    }
    ubar = linalg::symmetrized(Mat2(ubar / mass));
    if (!(linalg::symmetricEigenvalues(ubar)(0) > 0.0)) {
        throw Error("degenerate mean covariance");
    }

    GaussianSet out = set;
    for (TextonGaussian &g : out.gaussians) {
        if (!g.effective()) {
            continue;
        }
        if (edit.featureScale != 1.0) {
            g.feature = renormalized(VecX(fbar + edit.featureScale * (g.feature - fbar)));
        }
        g.cov = morphCovariance(g.cov, ubar, edit.covarianceScale);
    }
    return out;
}

// --- interpolation ---------------------------------------------------------

Matching interpolationCorrespondence(const GaussianSet &a, const GaussianSet &b) {
    Eigen::MatrixXd cost(Eigen::Index(a.size()), Eigen::Index(b.size()));
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) {
            const TextonGaussian &ga = a.gaussians[i], &gb = b.gaussians[j];
            cost(Eigen::Index(i), Eigen::Index(j)) =
                (ga.mean - gb.mean).norm() + std::abs(ga.weight - gb.weight);
        }
    }
    return hungarianMatch(cost);
}

namespace {

template <typename EtaAt>
GaussianSet blendSets(const GaussianSet &a, const GaussianSet &b, std::uint64_t seed, EtaAt &&etaAt) {
    requireSameFeatureDim(a, b, "interpolate");
    const Matching matching = interpolationCorrespondence(a, b);
    std::vector<std::ptrdiff_t> partner(a.size(), -1);
    std::vector<char> bMatched(b.size(), 0);
    for (const auto &[i, j] : matching.pairs) {
        partner[i]  = std::ptrdiff_t(j);
        bMatched[j] = 1;
    }

    Rng rng(seed);
    GaussianSet out;
    out.frame      = a.frame;
    out.featureDim = a.featureDim;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const TextonGaussian &ga = a.gaussians[i];
        const double eta         = etaAt(ga.mean);
        if (partner[i] >= 0) {
            const TextonGaussian &gb = b.gaussians[std::size_t(partner[i])];
            TextonGaussian g         = blendGeometry(ga, gb, eta);
            g.weight                 = rng.bernoulli((1.0 - eta) * ga.weight + eta * gb.weight) ? 1.0 : 0.0;
            out.gaussians.push_back(std::move(g));
        } else {
            const bool keep = rng.bernoulli((1.0 - eta) * ga.weight);
            if (eta < 1.0) {
                TextonGaussian g = ga;
                g.weight         = keep ? 1.0 : 0.0;
                out.gaussians.push_back(std::move(g));
            }
        }
    }
    for (std::size_t j = 0; j < b.size(); ++j) {
        if (bMatched[j]) {
            continue;
        }
        const TextonGaussian &gb = b.gaussians[j];
        const double eta         = etaAt(gb.mean);
        const bool keep          = rng.bernoulli(eta * gb.weight);
        if (eta > 0.0) {
            TextonGaussian g = gb;
            g.weight         = keep ? 1.0 : 0.0;
            out.gaussians.push_back(std::move(g));
        }
    }
    out.capacity = std::max(a.capacity, int(out.size()));
    return out;
}

} // namespace

GaussianSet interpolate(const GaussianSet &a, const GaussianSet &b, double eta, std::uint64_t seed) {
    if (!(eta >= 0.0 && eta <= 1.0)) {
        throw Error("interpolate: eta must lie in [0, 1]");
    }
    return blendSets(a, b, seed, [eta](const Vec2 &) { return eta; });
}

double MorphRamp::at(const ImageFrame &frame, const Vec2 &p) const {
    switch (kind) {
    case Kind::Constant:
        return std::clamp(value, 0.0, 1.0);
    case Kind::LeftToRight:
        return frame.width > 1 ? std::clamp(p.x() / double(frame.width - 1), 0.0, 1.0) : 0.0;
    case Kind::TopToBottom:
        return frame.height > 1 ? std::clamp(p.y() / double(frame.height - 1), 0.0, 1.0) : 0.0;
    case Kind::Map: {
        if (map.rows() != frame.height || map.cols() != frame.width) {
            throw Error("morph: ramp map shape does not match frame");
        }
        const auto x = Eigen::Index(std::clamp(std::lround(p.x()), 0L, long(frame.width - 1)));
        const auto y = Eigen::Index(std::clamp(std::lround(p.y()), 0L, long(frame.height - 1)));
        return std::clamp(map(y, x), 0.0, 1.0);
    }
    }
    return 0.0;
}

GaussianSet spatialMorph(const GaussianSet &a, const GaussianSet &b, const MorphRamp &ramp, std::uint64_t seed) {
    return blendSets(a, b, seed, [&](const Vec2 &p) { return ramp.at(a.frame, p); });
}

// --- per-texton transforms -------------------------------------------------

GaussianSet transformTexton(const GaussianSet &set, std::size_t index, const TextonOp &op) {
    if (index >= set.size()) {
        throw IndexError("texton index " + std::to_string(index) + " out of range (size " +
                             std::to_string(set.size()) + ")",
                         index);
    }
    GaussianSet out   = set;
    TextonGaussian &g = out.gaussians[index];
    if (const auto *move = std::get_if<MoveOp>(&op)) {
        g.mean += move->delta;
    } else if (const auto *scale = std::get_if<ScaleOp>(&op)) {
        const Mat2 &m    = scale->matrix;
        const double det = linalg::determinant2(m);
        if (!(std::abs(det) > 1e-12)) {
            throw Error("degenerate scale");
        }
        g.cov = linalg::symmetrized(Mat2(m * g.cov * m.transpose()));
        if (!scale->uniform) {
            g.direction = renormalized(Vec2(m * g.direction));
        }
        if (g.maskArea) {
            *g.maskArea *= std::abs(det);
        }
    } else if (const auto *rotate = std::get_if<RotateOp>(&op)) {
        const Mat2 r = linalg::rotation(rotate->theta);
        g.cov        = linalg::symmetrized(Mat2(r * g.cov * r.transpose()));
        g.direction  = renormalized(Vec2(r * g.direction));
    }
    return out;
}

// --- edit propagation ------------------------------------------------------

EditRegion detectEditRegion(const RgbImage &original, const RgbImage &edited, double threshold) {
    if (original.width != edited.width || original.height != edited.height) {
        throw Error("propagate: original and edited images differ in size");
    }
    EditRegion region;
    region.mask.width  = original.width;
    region.mask.height = original.height;
    region.mask.data.assign(std::size_t(original.width) * original.height, 0);
    Vec2 sum = Vec2::Zero();
    for (int y = 0; y < original.height; ++y) {
        for (int x = 0; x < original.width; ++x) {
            double d = 0.0;
            for (int c = 0; c < 3; ++c) {
                d = std::max(d, std::abs(edited.at(x, y, c) - original.at(x, y, c)));
            }
            if (d > threshold) {
                region.mask.data[std::size_t(y) * original.width + x] = 1;
                sum += Vec2(x, y);
                ++region.pixelCount;
            }
        }
    }
    if (region.pixelCount > 0) {
        region.centroid = sum / double(region.pixelCount);
    }
    return region;
}

std::size_t nearestGaussian(const GaussianSet &set, const Vec2 &p) {
    std::size_t best = set.size();
    double bestDist  = kInf;
    for (std::size_t i = 0; i < set.size(); ++i) {
        const TextonGaussian &g = set.gaussians[i];
        if (!g.effective()) {
            continue;
        }
        const Mat2 inv = linalg::inverse2(regularizedCovariance(g.cov));
        const double d = linalg::mahalanobisSq<double>(p - g.mean, inv);
        if (d < bestDist) {
            bestDist = d;
            best     = i;
        }
    }
    if (best == set.size()) {
        throw Error("no effective textons");
    }
    return best;
}

namespace {

/// Cholesky shape followed by the rotation taking the x axis onto the direction.
Mat2 textonFrame(const TextonGaussian &g) {
    const Vec2 d = g.direction.norm() > 0.0 ? Vec2(g.direction.normalized()) : Vec2(Vec2::UnitX());
    Mat2 r;
    r << d.x(), -d.y(), d.y(), d.x();
    return linalg::cholesky2(regularizedCovariance(g.cov)) * r;
}

double sampleBilinear(const RgbImage &img, double x, double y, int c) {
    const double fx = std::floor(x), fy = std::floor(y);
    const int x0 = int(fx), y0 = int(fy);
    const double tx = x - fx, ty = y - fy;
    auto px = [&](int xi, int yi) {
        return (xi < 0 || yi < 0 || xi >= img.width || yi >= img.height) ? 0.0 : img.at(xi, yi, c);
    };
    const double top    = (1.0 - tx) * px(x0, y0) + tx * px(x0 + 1, y0);
    const double bottom = (1.0 - tx) * px(x0, y0 + 1) + tx * px(x0 + 1, y0 + 1);
    return (1.0 - ty) * top + ty * bottom;
}

} // namespace

AffineTransform2D textonAlignment(const TextonGaussian &source, const TextonGaussian &target) {
    AffineTransform2D t;
    t.linear      = textonFrame(target) * linalg::inverse2(textonFrame(source));
    t.translation = target.mean - t.linear * source.mean;
    return t;
}

RgbImage propagateEdit(const RgbImage &original, const RgbImage &edited, const GaussianSet &set,
                       const std::vector<std::size_t> &targets, double threshold) {
    if (original.width != set.frame.width || original.height != set.frame.height) {
        throw Error("propagate: image size does not match the set frame");
    }
    for (std::size_t t : targets) {
        if (t >= set.size()) {
            throw IndexError("target index " + std::to_string(t) + " out of range (size " +
                                 std::to_string(set.size()) + ")",
                             t);
        }
    }
    const EditRegion region = detectEditRegion(original, edited, threshold);
    if (region.pixelCount == 0) {
        throw Error("no edit detected");
    }
    const std::size_t source = nearestGaussian(set, region.centroid);

    RgbImage diff(original.width, original.height);
    for (std::size_t k = 0; k < diff.data.size(); ++k) {
        diff.data[k] = edited.data[k] - original.data[k];
    }

    RgbImage out = original;
    for (std::size_t t : targets) {
        const AffineTransform2D back = textonAlignment(set.gaussians[source], set.gaussians[t]).inverse();
        for (int y = 0; y < out.height; ++y) {
            for (int x = 0; x < out.width; ++x) {
                const Vec2 s = back.apply(Vec2(x, y));
                for (int c = 0; c < 3; ++c) {
                    out.at(x, y, c) += sampleBilinear(diff, s.x(), s.y(), c);
                }
            }
        }
    }
    for (double &v : out.data) {
        v = std::clamp(v, 0.0, 1.0);
    }
    return out;
}

// --- patches and scale -----------------------------------------------------

namespace {

struct Rect {
    double x0, y0, x1, y1; // half-open [x0, x1) x [y0, y1)
    bool contains(const Vec2 &p) const { return p.x() >= x0 && p.x() < x1 && p.y() >= y0 && p.y() < y1; }
};

struct PlacedPatch {
    Rect rect;
    std::vector<TextonGaussian> gaussians;
    std::vector<char> alive;
};

} // namespace

GaussianSet mergePatchSets(const std::vector<PatchPlacement> &patches, double overlap) {
    if (patches.empty()) {
        throw Error("merge: no patches");
    }
    const int nf = patches.front().set.featureDim;
    std::vector<PlacedPatch> placed;
    double width = 0.0, height = 0.0;
    int capacity = 0;
    for (const PatchPlacement &p : patches) {
        if (p.set.featureDim != nf) {
            throw Error("merge: inconsistent feature dimension (" + std::to_string(p.set.featureDim) + " vs " +
                        std::to_string(nf) + ")");
        }
        PlacedPatch pp;
        pp.rect = {p.offset.x(), p.offset.y(), p.offset.x() + p.set.frame.width, p.offset.y() + p.set.frame.height};
        for (TextonGaussian g : p.set.gaussians) {
            g.mean += p.offset;
            pp.gaussians.push_back(std::move(g));
        }
        pp.alive.assign(pp.gaussians.size(), 1);
        width  = std::max(width, pp.rect.x1);
        height = std::max(height, pp.rect.y1);
        capacity += p.set.capacity;
        placed.push_back(std::move(pp));
    }

    if (overlap > 0.0) {
        for (std::size_t j = 0; j < placed.size(); ++j) {
            for (std::size_t k = j + 1; k < placed.size(); ++k) {
                PlacedPatch &pj = placed[j], &pk = placed[k];
                const Rect band{std::max(pj.rect.x0, pk.rect.x0), std::max(pj.rect.y0, pk.rect.y0),
                                std::min(pj.rect.x1, pk.rect.x1), std::min(pj.rect.y1, pk.rect.y1)};
                const double bw = band.x1 - band.x0, bh = band.y1 - band.y0;
                if (bw <= 0.0 || bh <= 0.0) {
                    continue;
                }
                // The band runs across its thin side; t is the weight of patch k.
                const bool acrossX = bw <= bh;
                const double lo    = acrossX ? band.x0 : band.y0;
                const double span  = acrossX ? bw : bh;
                const double cj = acrossX ? pj.rect.x0 + pj.rect.x1 : pj.rect.y0 + pj.rect.y1;
                const double ck = acrossX ? pk.rect.x0 + pk.rect.x1 : pk.rect.y0 + pk.rect.y1;
                auto weightOfK = [&](const Vec2 &p) {
                    const double s = std::clamp(((acrossX ? p.x() : p.y()) - lo) / span, 0.0, 1.0);
                    return cj <= ck ? s : 1.0 - s;
                };

                std::vector<std::size_t> inJ, inK;
                for (std::size_t i = 0; i < pj.gaussians.size(); ++i) {
                    if (pj.alive[i] && band.contains(pj.gaussians[i].mean)) {
                        inJ.push_back(i);
                    }
                }
                for (std::size_t i = 0; i < pk.gaussians.size(); ++i) {
                    if (pk.alive[i] && band.contains(pk.gaussians[i].mean)) {
                        inK.push_back(i);
                    }
                }
                Eigen::MatrixXd cost(Eigen::Index(inJ.size()), Eigen::Index(inK.size()));
                for (std::size_t r = 0; r < inJ.size(); ++r) {
                    for (std::size_t c = 0; c < inK.size(); ++c) {
                        cost(Eigen::Index(r), Eigen::Index(c)) =
                            (pj.gaussians[inJ[r]].mean - pk.gaussians[inK[c]].mean).norm();
                    }
                }
                std::vector<char> mergedJ(inJ.size(), 0), mergedK(inK.size(), 0);
                for (const auto &[r, c] : hungarianMatch(cost).pairs) {
                    if (cost(Eigen::Index(r), Eigen::Index(c)) > overlap) {
                        continue;
                    }
                    TextonGaussian &a       = pj.gaussians[inJ[r]];
                    const TextonGaussian &b = pk.gaussians[inK[c]];
                    a             = blendGeometry(a, b, weightOfK(0.5 * (a.mean + b.mean)));
                    pk.alive[inK[c]] = 0;
                    mergedJ[r] = mergedK[c] = 1;
                }
                for (std::size_t r = 0; r < inJ.size(); ++r) {
                    if (!mergedJ[r]) {
                        TextonGaussian &g = pj.gaussians[inJ[r]];
                        g.weight *= 1.0 - weightOfK(g.mean);
                    }
                }
                for (std::size_t c = 0; c < inK.size(); ++c) {
                    if (!mergedK[c]) {
                        TextonGaussian &g = pk.gaussians[inK[c]];
                        g.weight *= weightOfK(g.mean);
                    }
                }
            }
        }
    }

    GaussianSet out;
    out.frame      = {int(std::ceil(width)), int(std::ceil(height))};
    out.featureDim = nf;
    for (PlacedPatch &pp : placed) {
        for (std::size_t i = 0; i < pp.gaussians.size(); ++i) {
            if (pp.alive[i]) {
                out.gaussians.push_back(std::move(pp.gaussians[i]));
            }
        }
    }
    out.capacity = std::max({capacity, kDefaultCapacity, int(out.size())});
    return out;
}

GaussianSet rescaleGaussians(const GaussianSet &set, double s, const Vec2 &anchor) {
    if (!(s > 0.0)) {
        throw Error("rescale: scale must be > 0");
    }
    GaussianSet out = set;
    for (TextonGaussian &g : out.gaussians) {
        g.mean = anchor + s * (g.mean - anchor);
        g.cov *= s * s;
        if (g.maskArea) {
            *g.maskArea *= s * s;
        }
    }
    return out;
}

} // namespace texton
