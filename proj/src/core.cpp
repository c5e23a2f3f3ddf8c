// Copyright Contributors to the Texton Engine Project
// SPDX-License-Identifier: Apache-2.0
//
#include "texton/core.hpp"

#include "texton/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace texton {

ValidationError::ValidationError(std::vector<std::string> violations)
    : Error([&] {
          std::string msg = "invalid Gaussian set";
          for (const auto &v : violations) {
              msg += "; " + v;
          }
          return msg;
      }()),
      mViolations(std::move(violations)) {}

std::size_t GaussianSet::effectiveCount() const {
    std::size_t n = 0;
    for (const auto &g : gaussians) {
        n += g.effective() ? 1 : 0;
    }
    return n;
}

AffineTransform2D AffineTransform2D::rotate(double theta, const Vec2 &pivot) {
    const Mat2 r = linalg::rotation(theta);
    return {r, pivot - r * pivot};
}

AffineTransform2D AffineTransform2D::inverse() const {
    if (std::abs(linalg::determinant2(linear)) <= 1e-12) {
        throw Error("degenerate transform");
    }
    const Mat2 inv = linalg::inverse2(linear);
    return {inv, -(inv * translation)};
}

AffineTransform2D AffineTransform2D::compose(const AffineTransform2D &inner) const {
    return {linear * inner.linear, linear * inner.translation + translation};
}

namespace {

std::string at(const char *what, std::size_t i) {
    std::ostringstream os;
    os << what << " at index " << i;
    return os.str();
}

bool finite(const TextonGaussian &g) {
    return std::isfinite(g.weight) && std::isfinite(g.existence) && g.mean.allFinite() &&
           g.cov.allFinite() && g.direction.allFinite() && g.feature.allFinite() &&
           (!g.maskArea || std::isfinite(*g.maskArea));
}

} // namespace

std::vector<std::string> validateSet(const GaussianSet &set) {
    std::vector<std::string> out;
    if (set.frame.width < 1 || set.frame.height < 1) {
        out.emplace_back("frame dimensions must be >= 1");
    }
    if (set.featureDim < 1) {
        out.emplace_back("feature_dim must be >= 1");
    }
    if (set.capacity < 1) {
        out.emplace_back("capacity must be >= 1");
    }
    if (set.gaussians.size() > std::size_t(std::max(set.capacity, 0))) {
        std::ostringstream os;
        os << "set size " << set.gaussians.size() << " exceeds capacity " << set.capacity;
        out.push_back(os.str());
    }
    for (std::size_t i = 0; i < set.gaussians.size(); ++i) {
        const TextonGaussian &g = set.gaussians[i];
        if (!finite(g)) {
            out.push_back(at("non-finite value", i));
            continue;
        }
        if (g.feature.size() != set.featureDim) {
            out.push_back(at("feature_dim mismatch", i));
        }
        if (std::abs(g.cov(0, 1) - g.cov(1, 0)) > 1e-9) {
            out.push_back(at("covariance not symmetric", i));
        } else if (linalg::symmetricEigenvalues(g.cov)(0) < -1e-9) {
            out.push_back(at("not PSD", i));
        }
        if (std::abs(g.direction.norm() - 1.0) > 1e-6) {
            out.push_back(at("direction not unit length", i));
        }
        if (g.feature.size() > 0) {
            const double n = g.feature.norm();
            if (n == 0.0) {
                if (g.effective()) {
                    out.push_back(at("zero feature on effective texton", i));
                }
            } else if (std::abs(n - 1.0) > 1e-6) {
                out.push_back(at("feature not unit length", i));
            }
        }
        if (g.weight < 0.0 || g.weight > 1.0) {
            out.push_back(at("weight outside [0,1]", i));
        }
        if (g.existence < 0.0 || g.existence > 1.0) {
            out.push_back(at("existence probability outside [0,1]", i));
        }
        if (g.maskArea && *g.maskArea < 0.0) {
            out.push_back(at("negative mask area", i));
        }
    }
    return out;
}

void requireValid(const GaussianSet &set) {
    auto violations = validateSet(set);
    if (!violations.empty()) {
        throw ValidationError(std::move(violations));
    }
}

GaussianSet applyAffine(const GaussianSet &set, const AffineTransform2D &transform) {
    const Mat2 &a    = transform.linear;
    const double det = linalg::determinant2(a);
    if (!(std::abs(det) > 1e-12)) {
        throw Error("degenerate transform");
    }
    GaussianSet out = set;
    for (TextonGaussian &g : out.gaussians) {
        g.mean           = transform.apply(g.mean);
        g.cov            = a * g.cov * a.transpose();
        g.direction      = renormalized(Vec2(a * g.direction));
        if (g.maskArea) {
            *g.maskArea *= std::abs(det);
        }
    }
    return out;
}

GaussianSet filterInBounds(const GaussianSet &set, double margin) {
    GaussianSet out = set;
    out.gaussians.clear();
    const double x1 = set.frame.width - 1 - margin;
    const double y1 = set.frame.height - 1 - margin;
    for (const TextonGaussian &g : set.gaussians) {
        if (g.mean.x() >= margin && g.mean.x() <= x1 && g.mean.y() >= margin && g.mean.y() <= y1) {
            out.gaussians.push_back(g);
        }
    }
    return out;
}

double distanceToFrameEdge(const ImageFrame &frame, const Vec2 &p) {
    const double d = std::min({p.x(), frame.width - 1 - p.x(), p.y(), frame.height - 1 - p.y()});
    return std::max(d, 0.0);
}

VecX normalizedOrZero(const VecX &v) {
    const double n = v.norm();
    return n > 0.0 ? VecX(v / n) : v;
}

} // namespace texton
