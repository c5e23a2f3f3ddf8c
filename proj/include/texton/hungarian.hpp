// Copyright Contributors to the Texton Engine Project
// SPDX-License-Identifier: Apache-2.0
//
// Minimum-cost assignment (Kuhn-Munkres with row potentials, O(n^2 m)).
#pragma once

#include "texton/types.hpp"

#include <algorithm>
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

namespace texton {

/// An injective assignment between two index sets.
struct Matching {
    std::vector<std::pair<std::size_t, std::size_t>> pairs; // (row, col), sorted by row
    std::vector<double> pairCosts;
    double totalCost = 0.0;
};

namespace detail {

// Square-or-wide case: rows <= cols. Returns assigned column per row.
template <typename Derived>
std::vector<std::size_t> assignRows(const Eigen::MatrixBase<Derived> &cost) {
    using Scalar   = double;
    const auto n   = std::size_t(cost.rows());
    const auto m   = std::size_t(cost.cols());
    const Scalar inf = std::numeric_limits<Scalar>::infinity();
    std::vector<Scalar> u(n + 1, 0.0), v(m + 1, 0.0), minv(m + 1);
    std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
    std::vector<char> used(m + 1);
    for (std::size_t i = 1; i <= n; ++i) {
        p[0]           = i;
        std::size_t j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0]             = 1;
            const std::size_t i0 = p[j0];
            Scalar delta         = inf;
            std::size_t j1       = 0;
            for (std::size_t j = 1; j <= m; ++j) {
                if (used[j]) {
                    continue;
                }
                const Scalar cur = Scalar(cost(Eigen::Index(i0 - 1), Eigen::Index(j - 1))) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j]  = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1    = j;
                }
            }
            for (std::size_t j = 0; j <= m; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            p[j0]                = p[j1];
            j0                   = j1;
        } while (j0 != 0);
    }
    std::vector<std::size_t> colOfRow(n);
    for (std::size_t j = 1; j <= m; ++j) {
        if (p[j] != 0) {
            colOfRow[p[j] - 1] = j - 1;
        }
    }
    return colOfRow;
}

} // namespace detail

/// Minimum-total-cost injective assignment of min(rows, cols) pairs.
/// Entries must be finite. Deterministic: ties resolve by scan order (lowest
/// row first, then lowest column). An empty matrix gives an empty matching.
template <typename Derived> Matching hungarianMatch(const Eigen::MatrixBase<Derived> &cost) {
    Matching out;
    if (cost.rows() == 0 || cost.cols() == 0) {
        return out;
    }
    if (!cost.allFinite()) {
        throw Error("hungarian: cost matrix has non-finite entries");
    }
    if (cost.rows() <= cost.cols()) {
        const auto cols = detail::assignRows(cost);
        for (std::size_t r = 0; r < cols.size(); ++r) {
            out.pairs.emplace_back(r, cols[r]);
        }
    } else {
        const auto rows = detail::assignRows(cost.transpose());
        for (std::size_t c = 0; c < rows.size(); ++c) {
            out.pairs.emplace_back(rows[c], c);
        }
        std::sort(out.pairs.begin(), out.pairs.end());
    }
    for (const auto &[r, c] : out.pairs) {
        const double v = double(cost(Eigen::Index(r), Eigen::Index(c)));
        out.pairCosts.push_back(v);
        out.totalCost += v;
    }
    return out;
}

} // namespace texton
