// Copyright Contributors to the Texton Engine Project
// SPDX-License-Identifier: Apache-2.0
//
// Flow-field animation of Gaussian centers. Positions are evaluated in closed
// form at every time, in normalized coordinates x_n = 2x/(W-1) - 1.
#pragma once

#include "texton/splatting.hpp"
#include "texton/types.hpp"

#include <array>
#include <cstdint>
#include <variant>
#include <vector>

namespace texton {

inline constexpr int kShearKeyframes = 10;
inline constexpr double kShearPerturbationStd = 1.0 / 30.0;

struct ShearFlow {
    double velocity = 0.2;
    double duration = 1.0; // keyframes span [0, duration]
    std::array<double, kShearKeyframes> keyframes{}; // perturbation values, all zero by default

    /// Perturbation at time t: piecewise-linear through uniformly spaced keyframes,
    /// held constant outside [0, duration].
    double perturbation(double t) const;
};

/// Keyframes drawn from Normal(0, 1/30) with `seed`.
ShearFlow makeShearFlow(double velocity, double duration, std::uint64_t seed);

struct VortexFlow {
    double angularVelocity = 0.0;
};

using Flow = std::variant<ShearFlow, VortexFlow>;

/// Bands y < -1/3 move by -vt + eps(t), y > 1/3 by +vt + eps(t), the middle band
/// is stationary. y is unchanged; moving x is wrapped into [-1, 1).
Vec2 shearPosition(const Vec2 &init, double t, const ShearFlow &flow);

/// Rotation by omega t about the origin.
Vec2 vortexPosition(const Vec2 &init, double t, const VortexFlow &flow);

Vec2 toNormalized(const ImageFrame &frame, const Vec2 &p);
Vec2 fromNormalized(const ImageFrame &frame, const Vec2 &n);

/// The set advected to time t. Vortex flow also turns U and the direction by
/// the local flow Jacobian (a rotation for square frames).
GaussianSet advect(const GaussianSet &set, const Flow &flow, double t);

/// Frames at t = k dt, k = 0..frames-1. Throws when frames < 1.
std::vector<RgbImage> animate(const GaussianSet &set, const Flow &flow, int frames, double dt,
                              const Projection &projection = {}, const SplatOptions &options = {});

} // namespace texton
