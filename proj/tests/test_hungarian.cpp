// Copyright Contributors to the Texton Engine Project
// SPDX-License-Identifier: Apache-2.0
//
#include "support.hpp"

#include "texton/hungarian.hpp"

#include <doctest.h>

#include <set>

using namespace texton;
using namespace texton::test;

namespace {

void checkInjective(const Matching &m, Eigen::Index rows, Eigen::Index cols) {
    std::set<std::size_t> r, c;
    for (const auto &[i, j] : m.pairs) {
        CHECK(i < std::size_t(rows));
        CHECK(j < std::size_t(cols));
        r.insert(i);
        c.insert(j);
    }
    CHECK(r.size() == m.pairs.size());
    CHECK(c.size() == m.pairs.size());
    CHECK(m.pairs.size() == std::size_t(std::min(rows, cols)));
    CHECK(std::is_sorted(m.pairs.begin(), m.pairs.end()));
}

} // namespace

TEST_CASE("minimum cost equals brute force on random matrices") {
    Engine rng(20);
    for (int trial = 0; trial < 400; ++trial) {
        const auto rows = Eigen::Index(1 + rng() % 7), cols = Eigen::Index(1 + rng() % 7);
        Eigen::MatrixXd c(rows, cols);
        for (Eigen::Index i = 0; i < c.size(); ++i) {
            c(i) = trial % 3 == 0 ? double(rng() % 4) : uniform(rng, -5.0, 10.0);
        }
        const Matching m = hungarianMatch(c);
        checkInjective(m, rows, cols);
        CHECK(std::abs(m.totalCost - bruteForceAssignment(c)) <= 1e-9);
        double s = 0.0;
        for (std::size_t k = 0; k < m.pairs.size(); ++k) {
            CHECK(m.pairCosts[k] == c(Eigen::Index(m.pairs[k].first), Eigen::Index(m.pairs[k].second)));
            s += m.pairCosts[k];
        }
        CHECK(s == m.totalCost);
    }
}

TEST_CASE("known assignment") {
    Eigen::MatrixXd c(3, 3);
    c << 4, 1, 3, 2, 0, 5, 3, 2, 2;
    const Matching m = hungarianMatch(c);
    CHECK(m.totalCost == 5.0);
    CHECK(m.pairs[0] == std::pair<std::size_t, std::size_t>(0, 1));
    CHECK(m.pairs[1] == std::pair<std::size_t, std::size_t>(1, 0));
    CHECK(m.pairs[2] == std::pair<std::size_t, std::size_t>(2, 2));
}

TEST_CASE("ties resolve deterministically") {
    const Eigen::MatrixXd c = Eigen::MatrixXd::Ones(4, 4);
    const Matching a        = hungarianMatch(c);
    const Matching b        = hungarianMatch(c);
    CHECK(a.pairs == b.pairs);
    CHECK(a.totalCost == 4.0);
}

TEST_CASE("empty and non-finite inputs") {
    CHECK(hungarianMatch(Eigen::MatrixXd(0, 3)).pairs.empty());
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(2, 2);
    c(0, 1)           = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(hungarianMatch(c), Error);
}

TEST_CASE("float matrices and expressions are accepted") {
    Eigen::MatrixXf c(2, 3);
    c << 3, 1, 2, 1, 5, 0;
    const Matching m = hungarianMatch(c);
    CHECK(m.totalCost == 1.0);
    const Matching t = hungarianMatch(c.transpose());
    CHECK(t.totalCost == 1.0);
}
