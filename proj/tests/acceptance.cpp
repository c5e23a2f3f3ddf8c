// Copyright Contributors to the Texton Engine Project
// SPDX-License-Identifier: Apache-2.0
//
// Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on any FAIL.
#include "support.hpp"

#include "texton/animation.hpp"
#include "texton/core.hpp"
#include "texton/editing.hpp"
#include "texton/estimation.hpp"
#include "texton/hungarian.hpp"
#include "texton/io.hpp"
#include "texton/linalg.hpp"
#include "texton/objectives.hpp"
#include "texton/splatting.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <chrono>
#include <cstdio>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>

using namespace texton;
using namespace texton::test;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double msSince(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::string fmt(const char *f, double v) {
    char buf[96];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

DenseMaps constantMaps(const ImageFrame &frame) {
    DenseMaps maps;
    maps.frame      = frame;
    maps.appearance = Eigen::MatrixXd::Constant(Eigen::Index(frame.pixels()), 2, 1.0);
    maps.direction  = Eigen::MatrixXd::Zero(Eigen::Index(frame.pixels()), 2);
    maps.direction.col(0).setConstant(1.0);
    return maps;
}

Outcome momentOracle() {
    const auto masks = fixedMasks();
    const auto t0    = Clock::now();
    double worst     = 0.0;
    bool example     = false;
    for (std::size_t k = 0; k < masks.size(); ++k) {
        SegmentationStack s;
        s.frame = {int(masks[k].cols()), int(masks[k].rows())};
        s.masks = {masks[k]};
        const TextonGaussian g = estimateGaussians(s, constantMaps(s.frame)).gaussians[0];
        const auto ref         = handMoments(masks[k]);
        worst = std::max({worst, (g.mean - ref.mean).cwiseAbs().maxCoeff(), (g.cov - ref.cov).cwiseAbs().maxCoeff(),
                          std::abs(g.existence - ref.prob)});
        if (k == 0) {
            example = (g.mean - Vec2(1.5, 1.5)).cwiseAbs().maxCoeff() <= 1e-9 &&
                      (g.cov - 0.25 * Mat2::Identity()).cwiseAbs().maxCoeff() <= 1e-9 &&
                      std::abs(g.existence - 1.0) <= 1e-9;
        }
    }
    const double ms = msSince(t0);
    return {masks.size() >= 20 && worst <= 1e-9 && example && ms < 1000.0,
            std::to_string(masks.size()) + " masks, max err " + fmt("%.2e", worst) + ", 4-pixel example " +
                (example ? "ok" : "wrong") + ", " + fmt("%.1f ms", ms)};
}

Outcome compositingOracle() {
    Engine rng(1001);
    double worstAlpha = 0.0, worstSplat = 0.0, maxSum = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        GaussianSet set = randomSet(rng, {32, 32}, 2 + trial % 7, 3);
        for (auto &g : set.gaussians) {
            g.weight = uniform(rng, 0.0, 1.0);
        }
        const AlphaStack a = alphaMaps(set);
        const auto ref     = bruteForceAlphas(set);
        const auto grid    = splat<double>(set);
        Eigen::ArrayXXd sum = Eigen::ArrayXXd::Zero(32, 32);
        for (std::size_t i = 0; i < set.size(); ++i) {
            worstAlpha = std::max(worstAlpha, (a.alphas[i] - ref[i]).abs().maxCoeff());
            sum += ref[i];
        }
        maxSum = std::max(maxSum, sum.maxCoeff());
        for (int y = 0; y < 32; ++y) {
            for (int x = 0; x < 32; ++x) {
                VecX expect = VecX::Zero(5);
                for (std::size_t i = 0; i < set.size(); ++i) {
                    VecX full(5);
                    full << set.gaussians[i].feature, set.gaussians[i].direction;
                    expect += ref[i](y, x) * full;
                }
                worstSplat = std::max(worstSplat, (grid.at(x, y) - expect).cwiseAbs().maxCoeff());
            }
        }
    }
    return {worstAlpha <= 1e-9 && worstSplat <= 1e-9 && maxSum <= 1.0 + 1e-12,
            "1000 sets, alpha err " + fmt("%.2e", worstAlpha) + ", splat err " + fmt("%.2e", worstSplat) +
                ", max sum alpha " + fmt("%.15f", maxSum)};
}

Outcome opacityConstant() {
    TextonGaussian g;
    double worst = 0.0;
    for (double a = 0.0; a < 2.0 * std::numbers::pi; a += 0.1) {
        worst = std::max(worst, std::abs(opacityAt(g, Vec2(std::cos(a), std::sin(a))) - std::exp(-1.0)));
    }
    return {worst <= 1e-12, "|o - e^-1| = " + fmt("%.2e", worst)};
}

Outcome hungarianOracle() {
    Engine rng(1004);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const auto rows = Eigen::Index(1 + rng() % 7), cols = Eigen::Index(1 + rng() % 7);
        Eigen::MatrixXd c(rows, cols);
        for (Eigen::Index i = 0; i < c.size(); ++i) {
            c(i) = trial % 4 == 0 ? double(rng() % 3) : uniform(rng, 0.0, 100.0);
        }
        worst = std::max(worst, std::abs(hungarianMatch(c).totalCost - bruteForceAssignment(c)));
    }
    double cc = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const GaussianSet s = randomSet(rng, {64, 64}, 2 + trial % 20, 8);
        Mat2 a;
        a << uniform(rng, 0.5, 1.5), uniform(rng, -0.3, 0.3), uniform(rng, -0.3, 0.3), uniform(rng, 0.5, 1.5);
        const AffineTransform2D t{a, Vec2(uniform(rng, -5, 5), uniform(rng, -5, 5))};
        cc = std::max({cc, std::abs(cycleConsistency(s, s)),
                       std::abs(cycleConsistency(applyAffine(s, t), applyAffine(s, t)))});
    }
    return {worst <= 1e-9 && cc == 0.0,
            "1000 matrices, max |hungarian - brute| " + fmt("%.2e", worst) + ", CC on copies " + fmt("%g", cc)};
}

double bilinear(const RgbImage &img, double x, double y, int c) {
    const int x0 = int(std::floor(x)), y0 = int(std::floor(y));
    const double fx = x - x0, fy = y - y0;
    auto at = [&](int xx, int yy) { return img.at(xx, yy, c); };
    return (1 - fx) * (1 - fy) * at(x0, y0) + fx * (1 - fy) * at(x0 + 1, y0) + (1 - fx) * fy * at(x0, y0 + 1) +
           fx * fy * at(x0 + 1, y0 + 1);
}

Outcome equivariance() {
    Engine rng(1005);
    // Integer translation: renders agree bit-for-bit on the overlap.
    bool translationExact = true;
    for (int trial = 0; trial < 50; ++trial) {
        GaussianSet set = randomSet(rng, {48, 40}, 2 + trial % 12, 3);
        for (auto &g : set.gaussians) {
            g.mean = (g.mean * 64.0).array().round() / 64.0;
        }
        const int dx = int(rng() % 13) - 6, dy = int(rng() % 13) - 6;
        const RgbImage a = renderSet(set);
        const RgbImage b = renderSet(applyAffine(set, AffineTransform2D::translate(Vec2(dx, dy))));
        for (int y = std::max(0, dy); y < std::min(40, 40 + dy); ++y) {
            for (int x = std::max(0, dx); x < std::min(48, 48 + dx); ++x) {
                for (int c = 0; c < 3; ++c) {
                    translationExact = translationExact && b.at(x, y, c) == a.at(x - dx, y - dy, c);
                }
            }
        }
    }

    // Rigid transform: render of the moved set against the bilinearly warped render.
    double worstMae = 0.0;
    for (int trial = 0; trial < 6; ++trial) {
        SynthLayout layout;
        layout.frame      = {96, 96};
        layout.count      = 9;
        layout.featureDim = 3;
        const GaussianSet set = synthWorld(layout, 100 + trial).truth;
        const auto t = AffineTransform2D::translate(Vec2(uniform(rng, -4, 4), uniform(rng, -4, 4)))
                           .compose(AffineTransform2D::rotate(uniform(rng, -1.5, 1.5), set.frame.center()));
        const RgbImage base  = renderSet(set);
        const RgbImage moved = renderSet(applyAffine(set, t));
        const auto inv       = t.inverse();
        double sum           = 0.0;
        std::size_t n        = 0;
        for (int y = 0; y < 96; ++y) {
            for (int x = 0; x < 96; ++x) {
                const Vec2 src = inv.apply(Vec2(x, y));
                if (src.x() < 0 || src.y() < 0 || src.x() > 94.999 || src.y() > 94.999) {
                    continue;
                }
                for (int c = 0; c < 3; ++c) {
                    sum += std::abs(moved.at(x, y, c) - bilinear(base, src.x(), src.y(), c));
                    ++n;
                }
            }
        }
        worstMae = std::max(worstMae, sum / double(n));
    }

    // Estimation commutes with the transform: CC(T(E(world)), E(T(world))).
    double worstCc = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
        SynthLayout layout;
        layout.frame       = {48, 48};
        layout.count       = 3 + trial;
        layout.featureDim  = 4;
        layout.arrangement = trial % 2 ? SynthLayout::Arrangement::Random : SynthLayout::Arrangement::Grid;
        const SynthWorld w    = synthWorld(layout, 200 + trial);
        const GaussianSet est = estimateGaussians(w.masks, w.maps);

        const int dx = 3 + trial, dy = 7 - trial;
        const ImageFrame big{48 + 10, 48 + 10};
        SegmentationStack masks = SegmentationStack::zeros(big, w.masks.size());
        DenseMaps maps;
        maps.frame      = big;
        maps.appearance = Eigen::MatrixXd::Zero(Eigen::Index(big.pixels()), 4);
        maps.direction  = Eigen::MatrixXd::Zero(Eigen::Index(big.pixels()), 2);
        SegmentationStack turned = SegmentationStack::zeros(w.masks.frame, w.masks.size());
        DenseMaps turnedMaps     = w.maps;
        for (std::size_t i = 0; i < masks.size(); ++i) {
            masks.masks[i].block(dy, dx, 48, 48) = w.masks.masks[i];
        }
        for (int y = 0; y < 48; ++y) {
            for (int x = 0; x < 48; ++x) {
                const Eigen::Index src = y * 48 + x, dst = (y + dy) * big.width + (x + dx);
                maps.appearance.row(dst) = w.maps.appearance.row(src);
                maps.direction.row(dst)  = w.maps.direction.row(src);
                const int nx = 47 - y, ny = x;
                const Eigen::Index rot = ny * 48 + nx;
                for (std::size_t i = 0; i < masks.size(); ++i) {
                    turned.masks[i](ny, nx) = w.masks.masks[i](y, x);
                }
                turnedMaps.appearance.row(rot) = w.maps.appearance.row(src);
                turnedMaps.direction(rot, 0)   = -w.maps.direction(src, 1);
                turnedMaps.direction(rot, 1)   = w.maps.direction(src, 0);
            }
        }
        GaussianSet shifted = applyAffine(est, AffineTransform2D::translate(Vec2(dx, dy)));
        shifted.frame       = big;
        worstCc = std::max(worstCc, std::abs(cycleConsistency(shifted, estimateGaussians(masks, maps))));
        Mat2 quarter;
        quarter << 0.0, -1.0, 1.0, 0.0;
        const GaussianSet rotated = applyAffine(est, AffineTransform2D{quarter, Vec2(47.0, 0.0)});
        worstCc = std::max(worstCc, std::abs(cycleConsistency(rotated, estimateGaussians(turned, turnedMaps))));
    }
    return {translationExact && worstMae <= 0.02 && worstCc <= 1e-9,
            std::string("translation ") + (translationExact ? "exact" : "differs") + ", rigid MAE " +
                fmt("%.4f", worstMae) + ", estimation CC " + fmt("%.2e", worstCc)};
}

Outcome reshuffling() {
    Engine rng(1006);
    bool exact = true;
    for (int trial = 0; trial < 200; ++trial) {
        GaussianSet s = randomSet(rng, {48, 48}, 2 + trial % 20, 6);
        const GaussianSet r = reshuffle(s, ReshufflePlan::random(s.size(), std::uint64_t(trial)));
        std::multiset<std::vector<double>> before, after;
        for (std::size_t i = 0; i < s.size(); ++i) {
            const auto &f = s.gaussians[i].feature, &h = r.gaussians[i].feature;
            before.insert(std::vector<double>(f.data(), f.data() + f.size()));
            after.insert(std::vector<double>(h.data(), h.data() + h.size()));
            exact = exact && sameGeometry(s.gaussians[i], r.gaussians[i]);
        }
        exact = exact && before == after;
    }
    double worst = 0.0;
    const double gammas[] = {0.0, 0.5, 1.0};
    for (int k = 0; k < 1000; ++k) {
        TextonGaussian from, to;
        from.existence = uniform(rng, 0.01, 1.0);
        to.existence   = uniform(rng, 0.01, 1.0);
        from.maskArea  = uniform(rng, 1.0, 1000.0);
        to.maskArea    = uniform(rng, 1.0, 1000.0);
        const double gamma = gammas[k % 3];
        const double r     = std::max(*from.maskArea / *to.maskArea, from.existence / to.existence);
        const double tau   = std::pow(std::min(r, 1.0), gamma);
        worst              = std::max(worst, std::abs(swapCoefficient(from, to, gamma) - tau));
    }
    return {exact && worst <= 1e-12, std::string("hard reshuffle ") + (exact ? "bit-exact" : "altered") +
                                         ", tau max err " + fmt("%.2e", worst) + " over 1000 triples"};
}

Outcome variationEdit() {
    Engine rng(1007);
    double identity = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const GaussianSet s = randomSet(rng, {64, 64}, 2 + trial % 12, 6);
        const GaussianSet r = modifyVariations(s, {1.0, 1.0});
        for (std::size_t i = 0; i < s.size(); ++i) {
            identity = std::max({identity, (r.gaussians[i].cov - s.gaussians[i].cov).cwiseAbs().maxCoeff(),
                                 (r.gaussians[i].feature - s.gaussians[i].feature).cwiseAbs().maxCoeff()});
        }
    }
    Mat2 u = Mat2::Zero();
    u.diagonal() << 4.0, 1.0;
    Mat2 expect = Mat2::Zero();
    expect.diagonal() << 2.0, 1.0;
    const double example = (morphCovariance(u, Mat2::Identity(), 0.5) - expect).cwiseAbs().maxCoeff();

    double minEig = std::numeric_limits<double>::infinity(), oracle = 0.0;
    for (int k = 0; k < 1000; ++k) {
        const Mat2 a = randomSpd(rng, 0.05, 20.0), mean = randomSpd(rng, 0.05, 20.0);
        const double d = uniform(rng, 0.25, 4.0);
        const Mat2 got = morphCovariance(a, mean, d);
        minEig         = std::min(minEig, linalg::symmetricEigenvalues(got)(0));
        const Mat2 w   = Mat2(a.llt().matrixL()) * Mat2(mean.llt().matrixL()).inverse();
        const Mat2 wp  = w.pow(d);
        const Mat2 ref = wp * mean * wp.transpose();
        oracle         = std::max(oracle, (got - ref).norm() / (1.0 + ref.norm()));
    }
    return {identity <= 1e-9 && example <= 1e-9 && minEig >= 0.0 && oracle <= 1e-8,
            "identity err " + fmt("%.2e", identity) + ", diag(4,1)^0.5 err " + fmt("%.2e", example) +
                ", min eigenvalue " + fmt("%.3e", minEig) + ", matrix-power oracle " + fmt("%.2e", oracle)};
}

Outcome interpolation() {
    Engine rng(1008);
    bool endpoints = true;
    for (int trial = 0; trial < 100; ++trial) {
        GaussianSet a = randomSet(rng, {40, 40}, 1 + trial % 8, 4);
        GaussianSet b = randomSet(rng, {40, 40}, 1 + (trial / 8) % 8, 4);
        for (auto *s : {&a, &b}) {
            for (auto &g : s->gaussians) {
                g.weight = rng() % 5 == 0 ? 0.0 : 1.0;
            }
        }
        endpoints = endpoints && identical(interpolate(a, b, 0.0, std::uint64_t(trial)), a);
        const GaussianSet atB = interpolate(a, b, 1.0, std::uint64_t(trial));
        std::vector<std::size_t> order;
        std::vector<char> used(b.size(), 0);
        for (const auto &[i, j] : interpolationCorrespondence(a, b).pairs) {
            order.push_back(j);
            used[j] = 1;
        }
        for (std::size_t j = 0; j < b.size(); ++j) {
            if (!used[j]) {
                order.push_back(j);
            }
        }
        endpoints = endpoints && atB.size() == b.size();
        for (std::size_t k = 0; endpoints && k < order.size(); ++k) {
            endpoints = identical(atB.gaussians[k], b.gaussians[order[k]]);
        }
    }
    GaussianSet a;
    a.frame      = {4, 4};
    a.featureDim = 2;
    TextonGaussian g;
    g.feature = Vec2(1.0, 0.0);
    a.gaussians.push_back(g);
    GaussianSet b = a;
    b.gaussians[0].mean = Vec2(2.0, 2.0);
    const double mid    = (interpolate(a, b, 0.5, 0).gaussians[0].mean - Vec2(1.0, 1.0)).cwiseAbs().maxCoeff();
    return {endpoints && mid <= 1e-12, std::string("endpoints ") + (endpoints ? "exact" : "differ") +
                                           ", midpoint err " + fmt("%.2e", mid)};
}

Outcome lossFormulas() {
    const ImageFrame frame{6, 5};
    SegmentationStack hard = SegmentationStack::zeros(frame, 3);
    for (int y = 0; y < 5; ++y) {
        for (int x = 0; x < 6; ++x) {
            hard.masks[std::size_t((2 * x + y) % 3)](y, x) = 1.0;
        }
    }
    SegmentationStack uniformStack = SegmentationStack::zeros(frame, 4);
    for (auto &m : uniformStack.masks) {
        m.setConstant(0.25);
    }
    SegmentationStack perPixel = SegmentationStack::zeros(frame, frame.pixels());
    for (int y = 0; y < 5; ++y) {
        for (int x = 0; x < 6; ++x) {
            perPixel.masks[std::size_t(y * 6 + x)](y, x) = 1.0;
        }
    }
    SegmentationStack line = SegmentationStack::zeros({4, 1}, 1);
    line.masks[0].setConstant(1.0);
    const double eHard = entropyLoss(hard), eUni = entropyLoss(uniformStack);
    const double cPix = compactnessLoss(perPixel), cLine = compactnessLoss(line);
    return {eHard == 0.0 && std::abs(eUni - 1.386294) <= 1e-6 && cPix == 0.0 && std::abs(cLine - 1.25) <= 1e-12,
            "entropy hard " + fmt("%g", eHard) + ", uniform n=4 " + fmt("%.7f", eUni) + ", compactness per-pixel " +
                fmt("%g", cPix) + ", 1x4 " + fmt("%.12g", cLine)};
}

Outcome flows() {
    Engine rng(1010);
    double radius = 0.0;
    for (int k = 0; k < 50; ++k) {
        const Vec2 p(uniform(rng, -1, 1), uniform(rng, -1, 1));
        const VortexFlow flow{uniform(rng, -3, 3)};
        for (int step = 1; step <= 1000; ++step) {
            radius = std::max(radius, std::abs(vortexPosition(p, 0.01 * step, flow).norm() - p.norm()));
        }
    }
    ShearFlow shear;
    shear.velocity = 0.2;
    const double upper = shearPosition(Vec2(0.1, 0.5), 1.0, shear).x() - 0.1;
    const double lower = shearPosition(Vec2(0.1, -0.5), 1.0, shear).x() - 0.1;
    const bool middle  = shearPosition(Vec2(0.1, 0.2), 1.0, shear) == Vec2(0.1, 0.2);
    const double wrapped = shearPosition(Vec2(0.9, 0.5), 1.0, shear).x();
    const double wrappedLow = shearPosition(Vec2(-0.9, -0.5), 1.0, shear).x();
    const bool bands = std::abs(upper - 0.2) <= 1e-12 && std::abs(lower + 0.2) <= 1e-12 && middle;
    const bool wrap  = std::abs(wrapped + 0.9) <= 1e-12 && std::abs(wrappedLow - 0.9) <= 1e-12;
    return {radius <= 1e-9 && bands && wrap,
            "vortex radius drift " + fmt("%.2e", radius) + ", shear bands " + (bands ? "ok" : "wrong") +
                ", wraparound " + (wrap ? "ok" : "wrong")};
}

std::string pipelineBytes(std::uint64_t seed) {
    std::ostringstream out;
    SynthLayout layout;
    layout.frame      = {40, 40};
    layout.count      = 6;
    layout.featureDim = 5;
    const SynthWorld w = synthWorld(layout, seed);
    SynthLayout other  = layout;
    other.arrangement  = SynthLayout::Arrangement::Random;
    const GaussianSet b = synthWorld(other, seed + 1).truth;
    const GaussianSet est = estimateGaussians(w.masks, w.maps, SamplingMode::relaxed(0.5, seed));
    out << serializeDocument({w.truth, Provenance{seed, "synth"}});
    out << serializeDocument({est, std::nullopt});
    out << encodeTensor(tensorFromMasks(w.masks)) << encodeTensor(tensorFromMaps(w.maps));
    out << encodeTensor(tensorFromGrid(splat<float>(w.truth)));
    out << serializeDocument({reshuffle(w.truth, ReshufflePlan::random(6, seed, ReshufflePlan::Mode::Soft)), {}});
    out << serializeDocument({transferReplace(w.truth, b, seed), {}});
    out << serializeDocument({interpolate(w.truth, b, 0.4, seed), {}});
    out << serializeDocument({spatialMorph(w.truth, b, MorphRamp::leftToRight(), seed), {}});
    out << encodePpm(renderSet(w.truth, Projection::random(7, seed)));
    for (const auto &img : animate(w.truth, makeShearFlow(0.2, 1.0, seed), 3, 0.3)) {
        out << encodePng(img);
    }
    out << textureDistance(renderSet(w.truth), renderSet(b), 4, 16, seed);
    return out.str();
}

Outcome determinismAndRoundTrips() {
    const bool seeded = pipelineBytes(11) == pipelineBytes(11) && pipelineBytes(11) != pipelineBytes(12);
    Engine rng(1011);
    bool docs = true, ppm = true;
    for (int trial = 0; trial < 100; ++trial) {
        TextonDocument doc{randomSet(rng, {64, 64}, 1 + trial % 10, 1 + trial % 8), std::nullopt};
        if (trial % 3 == 0) {
            doc.provenance = Provenance{rng(), "edit"};
        }
        const std::string text = serializeDocument(doc);
        docs = docs && serializeDocument(parseDocument(text)) == text;
        RgbImage img(1 + int(rng() % 20), 1 + int(rng() % 20));
        for (double &v : img.data) {
            v = double(rng() % 256) / 255.0;
        }
        const std::string bytes = encodePpm(img);
        ppm = ppm && encodePpm(decodePpm(bytes)) == bytes && decodePpm(bytes) == img;
    }
    return {seeded && docs && ppm, std::string("seeded pipeline ") + (seeded ? "identical" : "differs") +
                                       ", document round trip " + (docs ? "identical" : "differs") +
                                       ", PPM round trip " + (ppm ? "identical" : "differs")};
}

Outcome performance() {
    SynthLayout layout;
    layout.frame      = {256, 256};
    layout.count      = 100;
    layout.featureDim = 382;
    const GaussianSet set = synthWorld(layout, 5).truth;
    std::vector<double> times;
    std::size_t channels = 0;
    for (int k = 0; k < 7; ++k) {
        const auto t0 = Clock::now();
        const auto grid = splat<float>(set, {1});
        times.push_back(msSince(t0));
        channels = std::size_t(grid.channels);
    }
    std::sort(times.begin(), times.end());
    const double median = times[times.size() / 2];
    return {median <= 50.0 && channels == 384,
            "100 Gaussians -> 256x256x" + std::to_string(channels) + ", single thread, median " +
                fmt("%.1f ms", median) + " (best " + fmt("%.1f ms", times.front()) + ")"};
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"moment oracle", momentOracle},
        {"compositing oracle", compositingOracle},
        {"opacity constant", opacityConstant},
        {"hungarian vs brute force", hungarianOracle},
        {"transformation equivariance", equivariance},
        {"reshuffling", reshuffling},
        {"variation edit", variationEdit},
        {"interpolation", interpolation},
        {"loss formulas", lossFormulas},
        {"flow closed forms", flows},
        {"determinism and round trips", determinismAndRoundTrips},
        {"splat performance", performance},
    };
    int failed = 0;
    for (const auto &[name, check] : criteria) {
        Outcome o;
        try {
            o = check();
        } catch (const std::exception &e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        failed += o.pass ? 0 : 1;
        std::printf("%s  %-30s %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", int(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
