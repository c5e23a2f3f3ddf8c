// Copyright Contributors to the Texton Engine Project
// SPDX-License-Identifier: Apache-2.0
//
// Independent reference implementations and generators shared by the tests.
// Nothing here calls into the library's numerical code paths.
#pragma once

#include "texton/estimation.hpp"
#include "texton/types.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

namespace texton::test {

using Engine = std::mt19937_64;

inline double uniform(Engine &rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// Random SPD matrix with eigenvalues in [lo, hi] and a random orientation.
inline Mat2 randomSpd(Engine &rng, double lo, double hi) {
    const double theta = uniform(rng, 0.0, 3.14159265358979);
    Mat2 r;
    r << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
    const Eigen::Vector2d ev(uniform(rng, lo, hi), uniform(rng, lo, hi));
    Mat2 m = r * ev.asDiagonal() * r.transpose();
    m(1, 0) = m(0, 1);
    return m;
}

inline VecX randomUnit(Engine &rng, int dim) {
    std::normal_distribution<double> n;
    VecX v(dim);
    for (int i = 0; i < dim; ++i) {
        v(i) = n(rng);
    }
    return v / v.norm();
}

inline Vec2 randomDirection(Engine &rng) {
    const double a = uniform(rng, -3.14159265358979, 3.14159265358979);
    return {std::cos(a), std::sin(a)};
}

inline TextonGaussian randomGaussian(Engine &rng, const ImageFrame &frame, int nf, double covLo = 0.5,
                                     double covHi = 20.0) {
    TextonGaussian g;
    g.weight    = 1.0;
    g.existence = uniform(rng, 0.5, 1.0);
    g.mean      = Vec2(uniform(rng, -2.0, frame.width + 1.0), uniform(rng, -2.0, frame.height + 1.0));
    g.cov       = randomSpd(rng, covLo, covHi);
    g.direction = randomDirection(rng);
    g.feature   = randomUnit(rng, nf);
    g.maskArea  = uniform(rng, 1.0, 200.0);
    return g;
}

inline GaussianSet randomSet(Engine &rng, const ImageFrame &frame, int count, int nf, double covLo = 0.5,
                             double covHi = 20.0) {
    GaussianSet s;
    s.frame      = frame;
    s.featureDim = nf;
    s.capacity   = std::max(count, kDefaultCapacity);
    for (int i = 0; i < count; ++i) {
        s.gaussians.push_back(randomGaussian(rng, frame, nf, covLo, covHi));
    }
    return s;
}

/// Per-pixel alpha compositing straight from the definition:
/// alpha_i = o_i prod_{j > i} (1 - o_j), o = delta exp(-M^2) for M^2 <= 12.5.
/// Returns alphas[i] as H x W.
inline std::vector<Eigen::ArrayXXd> bruteForceAlphas(const GaussianSet &set) {
    const int w = set.frame.width, h = set.frame.height;
    const std::size_t n = set.size();
    std::vector<Eigen::ArrayXXd> alphas(n, Eigen::ArrayXXd::Zero(h, w));
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            std::vector<double> o(n);
            for (std::size_t i = 0; i < n; ++i) {
                const TextonGaussian &g = set.gaussians[i];
                const Eigen::Vector2d d(double(x) - g.mean.x(), double(y) - g.mean.y());
                const double m2 = d.dot(g.cov.inverse() * d);
                o[i]            = m2 <= 12.5 ? g.weight * std::exp(-m2) : 0.0;
            }
            for (std::size_t i = 0; i < n; ++i) {
                double a = o[i];
                for (std::size_t j = i + 1; j < n; ++j) {
                    a *= 1.0 - o[j];
                }
                alphas[i](y, x) = a;
            }
        }
    }
    return alphas;
}

/// Hand-summed mask moments in long double.
struct MomentOracle {
    double mass = 0.0;
    Vec2 mean   = Vec2::Zero();
    Mat2 cov    = Mat2::Zero();
    double prob = 0.0;
};

inline MomentOracle handMoments(const Eigen::ArrayXXd &mask) {
    long double m = 0, m2 = 0, sx = 0, sy = 0;
    for (Eigen::Index y = 0; y < mask.rows(); ++y) {
        for (Eigen::Index x = 0; x < mask.cols(); ++x) {
            const long double s = mask(y, x);
            m += s;
            m2 += s * s;
            sx += s * x;
            sy += s * y;
        }
    }
    MomentOracle out;
    out.mass = double(m);
    if (m == 0) {
        return out;
    }
    const long double mx = sx / m, my = sy / m;
    long double cxx = 0, cxy = 0, cyy = 0;
    for (Eigen::Index y = 0; y < mask.rows(); ++y) {
        for (Eigen::Index x = 0; x < mask.cols(); ++x) {
            const long double s = mask(y, x);
            cxx += s * (x - mx) * (x - mx);
            cxy += s * (x - mx) * (y - my);
            cyy += s * (y - my) * (y - my);
        }
    }
    out.mean = Vec2(double(mx), double(my));
    out.cov << double(cxx / m), double(cxy / m), double(cxy / m), double(cyy / m);
    out.prob = double(m2 / m);
    return out;
}

/// Fixed small masks with hand-checkable moments. The first is the 2 x 2 block
/// at (1..2, 1..2) of a 4 x 4 frame: mean (1.5, 1.5), cov 0.25 I, p = 1.
inline std::vector<Eigen::ArrayXXd> fixedMasks() {
    std::vector<Eigen::ArrayXXd> out;
    Eigen::ArrayXXd m = Eigen::ArrayXXd::Zero(4, 4);
    m.block(1, 1, 2, 2) = 1.0;
    out.push_back(m);

    m = Eigen::ArrayXXd::Zero(1, 1);
    m(0, 0) = 1.0;
    out.push_back(m);
    m = Eigen::ArrayXXd::Zero(1, 4);
    m.setConstant(1.0);
    out.push_back(m);
    m = Eigen::ArrayXXd::Zero(5, 1);
    m.setConstant(0.5);
    out.push_back(m);
    m = Eigen::ArrayXXd::Zero(3, 3);
    m << 0, 1, 0, 1, 1, 1, 0, 1, 0;
    out.push_back(m);
    m = Eigen::ArrayXXd::Zero(3, 3);
    m << 1, 0, 0, 0, 1, 0, 0, 0, 1;
    out.push_back(m);
    m = Eigen::ArrayXXd::Zero(3, 3);
    m << 0, 0, 1, 0, 1, 0, 1, 0, 0;
    out.push_back(m);
    m = Eigen::ArrayXXd::Zero(4, 6);
    m.block(0, 0, 2, 6) = 1.0;
    out.push_back(m);
    m = Eigen::ArrayXXd::Zero(6, 4);
    m.col(2).setConstant(1.0);
    out.push_back(m);
    m = Eigen::ArrayXXd::Zero(5, 5);
    m.setConstant(0.25);
    out.push_back(m);
    m = Eigen::ArrayXXd::Zero(5, 5);
    for (int y = 0; y < 5; ++y) {
        for (int x = 0; x < 5; ++x) {
            m(y, x) = (x + y) % 2 == 0 ? 1.0 : 0.0;
        }
    }
    out.push_back(m);
    m = Eigen::ArrayXXd::Zero(4, 4);
    for (int y = 0; y < 4; ++y) {
        for (int x = 0; x < 4; ++x) {
            m(y, x) = 0.1 * (x + 1) + 0.05 * y;
        }
    }
    out.push_back(m);
    m = Eigen::ArrayXXd::Zero(2, 2);
    m << 0.2, 0.8, 0.6, 0.4;
    out.push_back(m);
    m = Eigen::ArrayXXd::Zero(7, 3);
    m(0, 0) = 1.0;
    m(6, 2) = 1.0;
    out.push_back(m);
    m = Eigen::ArrayXXd::Zero(3, 8);
    m.row(1).setConstant(0.9);
    m(0, 3) = 0.1;
    out.push_back(m);
    m = Eigen::ArrayXXd::Zero(6, 6);
    for (int y = 0; y < 6; ++y) {
        for (int x = 0; x < 6; ++x) {
            const double dx = x - 2.5, dy = y - 2.0;
            m(y, x)         = dx * dx + dy * dy <= 5.0 ? 1.0 : 0.0;
        }
    }
    out.push_back(m);
    m = Eigen::ArrayXXd::Zero(6, 6);
    for (int k = 0; k < 6; ++k) {
        m(k, k) = 1.0;
        if (k + 1 < 6) {
            m(k, k + 1) = 0.5;
        }
    }
    out.push_back(m);
    m = Eigen::ArrayXXd::Zero(4, 5);
    m << 0, 0, 0, 0, 0, 0, 1, 1, 1, 0, 0, 1, 1, 1, 0, 0, 0, 0, 0, 0;
    out.push_back(m);
    m = Eigen::ArrayXXd::Zero(3, 3);
    m << 1, 1, 1, 1, 0, 1, 1, 1, 1;
    out.push_back(m);
    m = Eigen::ArrayXXd::Zero(8, 8);
    m.block(2, 5, 3, 2) = 0.75;
    m.block(6, 0, 2, 2) = 0.3;
    out.push_back(m);
    m = Eigen::ArrayXXd::Zero(2, 9);
    m(0, 0) = 0.01;
    m(1, 8) = 0.99;
    out.push_back(m);
    m = Eigen::ArrayXXd::Zero(5, 7);
    for (int y = 0; y < 5; ++y) {
        for (int x = 0; x < 7; ++x) {
            m(y, x) = (3 * x + 5 * y) % 7 / 6.0;
        }
    }
    out.push_back(m);
    return out;
}

/// Minimum assignment cost by enumerating every injective map of the smaller side.
inline double bruteForceAssignment(const Eigen::MatrixXd &cost) {
    const bool transpose    = cost.rows() > cost.cols();
    const Eigen::MatrixXd c = transpose ? Eigen::MatrixXd(cost.transpose()) : cost;
    const int rows = int(c.rows()), cols = int(c.cols());
    if (rows == 0) {
        return 0.0;
    }
    std::vector<int> perm(static_cast<std::size_t>(cols));
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
        double s = 0.0;
        for (int r = 0; r < rows; ++r) {
            s += c(r, perm[std::size_t(r)]);
        }
        best = std::min(best, s);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

inline double maxAbsDiff(const RgbImage &a, const RgbImage &b) {
    double m = 0.0;
    for (std::size_t k = 0; k < a.data.size(); ++k) {
        m = std::max(m, std::abs(a.data[k] - b.data[k]));
    }
    return m;
}

inline bool sameGeometry(const TextonGaussian &a, const TextonGaussian &b) {
    return a.weight == b.weight && a.existence == b.existence && a.mean == b.mean && a.cov == b.cov &&
           a.direction == b.direction && a.maskArea == b.maskArea;
}

inline bool identical(const TextonGaussian &a, const TextonGaussian &b) {
    return sameGeometry(a, b) && a.feature.size() == b.feature.size() && a.feature == b.feature;
}

inline bool identical(const GaussianSet &a, const GaussianSet &b) {
    if (a.frame != b.frame || a.featureDim != b.featureDim || a.capacity != b.capacity || a.size() != b.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!identical(a.gaussians[i], b.gaussians[i])) {
            return false;
        }
    }
    return true;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string &tag) {
        static int counter = 0;
        mPath = std::filesystem::temp_directory_path() /
                ("texton_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(mPath);
        std::filesystem::create_directories(mPath);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(mPath, ec);
    }
    const std::filesystem::path &path() const { return mPath; }
    std::filesystem::path operator/(const std::string &name) const { return mPath / name; }

private:
    std::filesystem::path mPath;
};

} // namespace texton::test
