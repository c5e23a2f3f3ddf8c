// Copyright Contributors to the Texton Engine Project
// SPDX-License-Identifier: Apache-2.0
//
#include "texton/animation.hpp"

#include "texton/core.hpp"
#include "texton/linalg.hpp"
#include "texton/random.hpp"

#include <algorithm>
#include <cmath>

namespace texton {

double ShearFlow::perturbation(double t) const {
    if (!(duration > 0.0) || t <= 0.0) {
        return keyframes.front();
    }
    if (t >= duration) {
        return keyframes.back();
    }
    const double pos = t / duration * double(kShearKeyframes - 1);
    const auto k     = std::min(std::size_t(pos), std::size_t(kShearKeyframes - 2));
    return std::lerp(keyframes[k], keyframes[k + 1], pos - double(k));
}

ShearFlow makeShearFlow(double velocity, double duration, std::uint64_t seed) {
    ShearFlow flow;
    flow.velocity = velocity;
    flow.duration = duration;
    Rng rng(seed);
    for (double &k : flow.keyframes) {
        k = kShearPerturbationStd * rng.normal();
    }
    return flow;
}

namespace {

double wrapUnit(double x) {
    double w = std::fmod(x + 1.0, 2.0);
    if (w < 0.0) {
        w += 2.0;
    }
    return w - 1.0;
}

} // namespace

Vec2 shearPosition(const Vec2 &init, double t, const ShearFlow &flow) {
    const double y = init.y();
    if (y < -1.0 / 3.0) {
        return {wrapUnit(init.x() - flow.velocity * t + flow.perturbation(t)), y};
    }
    if (y > 1.0 / 3.0) {
        return {wrapUnit(init.x() + flow.velocity * t + flow.perturbation(t)), y};
    }
    return init;
}

Vec2 vortexPosition(const Vec2 &init, double t, const VortexFlow &flow) {
    const double phi = flow.angularVelocity * t;
    if (phi == 0.0) {
        return init;
    }
    return linalg::rotation(phi) * init;
}

Vec2 toNormalized(const ImageFrame &frame, const Vec2 &p) {
    const double sx = frame.width > 1 ? 2.0 / double(frame.width - 1) : 0.0;
    const double sy = frame.height > 1 ? 2.0 / double(frame.height - 1) : 0.0;
    return {p.x() * sx - 1.0, p.y() * sy - 1.0};
}

Vec2 fromNormalized(const ImageFrame &frame, const Vec2 &n) {
    return {(n.x() + 1.0) * 0.5 * double(frame.width - 1), (n.y() + 1.0) * 0.5 * double(frame.height - 1)};
}

GaussianSet advect(const GaussianSet &set, const Flow &flow, double t) {
    GaussianSet out = set;
    const Vec2 half(0.5 * double(std::max(set.frame.width - 1, 1)), 0.5 * double(std::max(set.frame.height - 1, 1)));
    for (TextonGaussian &g : out.gaussians) {
        const Vec2 n = toNormalized(set.frame, g.mean);
        Vec2 moved;
        if (const auto *shear = std::get_if<ShearFlow>(&flow)) {
            moved = shearPosition(n, t, *shear);
        } else {
            const auto &vortex = std::get<VortexFlow>(flow);
            moved              = vortexPosition(n, t, vortex);
            const double phi   = vortex.angularVelocity * t;
            if (phi != 0.0) {
                // Pixel-space Jacobian of the normalized rotation.
                const Mat2 s    = half.asDiagonal();
                const Mat2 jac  = s * linalg::rotation(phi) * linalg::inverse2(s);
                g.cov           = linalg::symmetrized(Mat2(jac * g.cov * jac.transpose()));
                g.direction     = renormalized(Vec2(jac * g.direction));
            }
        }
        g.mean += (moved - n).cwiseProduct(half);
    }
    return out;
}

std::vector<RgbImage> animate(const GaussianSet &set, const Flow &flow, int frames, double dt,
                              const Projection &projection, const SplatOptions &options) {
    if (frames < 1) {
        throw Error("animate: frames must be >= 1");
    }
    std::vector<RgbImage> out;
    out.reserve(std::size_t(frames));
    for (int k = 0; k < frames; ++k) {
        out.push_back(renderSet(advect(set, flow, double(k) * dt), projection, options));
    }
    return out;
}

} // namespace texton
