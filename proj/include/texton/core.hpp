// Copyright Contributors to the Texton Engine Project
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include "texton/types.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace texton {

/// Checks every texton and set invariant. Never throws; each entry names the
/// offending Gaussian index and the invariant, e.g. "not PSD at index 0".
std::vector<std::string> validateSet(const GaussianSet &set);

/// Throws ValidationError when validateSet reports anything.
void requireValid(const GaussianSet &set);

/// mean' = A mean + t, cov' = A cov A^T, dir' = A dir / |A dir|, area scaled by |det A|.
/// Throws Error("degenerate transform") for singular A.
GaussianSet applyAffine(const GaussianSet &set, const AffineTransform2D &transform);

/// Keeps Gaussians whose means lie in [margin, W-1-margin] x [margin, H-1-margin].
GaussianSet filterInBounds(const GaussianSet &set, double margin = 0.0);

/// Distance from p to the nearest frame edge (pixel-center extents), clamped at zero.
double distanceToFrameEdge(const ImageFrame &frame, const Vec2 &p);

/// Unit-normalizes v; zero vectors are returned unchanged.
VecX normalizedOrZero(const VecX &v);

/// Unit-length copy of v. Zero vectors and vectors already unit to within a few
/// ulp are returned unchanged, so renormalizing is idempotent bit-for-bit.
template <typename Derived> typename Derived::PlainObject renormalized(const Eigen::MatrixBase<Derived> &v) {
    const double n = double(v.norm());
    if (n == 0.0 || std::abs(n - 1.0) <= 4.0 * std::numeric_limits<double>::epsilon()) {
        return v;
    }
    return v / n;
}

} // namespace texton
