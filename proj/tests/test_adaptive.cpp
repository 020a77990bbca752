#include "morley/adaptive.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

using namespace morley;

TEST_CASE("doerfler marking picks the largest indicators")
{
    const std::vector<double> eta = {9.0, 4.0, 1.0, 1.0};
    CHECK(doerfler_mark(eta, 0.5) == std::vector<Index>{0});
    CHECK(doerfler_mark(eta, 0.6) == std::vector<Index>{0});
    CHECK(doerfler_mark(eta, 0.61) == std::vector<Index>{0, 1});
    // ties fall to the lower id
    CHECK(doerfler_mark(eta, 0.9) == std::vector<Index>{0, 1, 2});
    CHECK(doerfler_mark(eta, 0.999999).size() == 4);
    CHECK_THROWS_AS(doerfler_mark(eta, 0.0), MarkingError);
    CHECK_THROWS_AS(doerfler_mark(eta, 1.5), MarkingError);
}

TEST_CASE("doerfler marking is minimal and permutation equivariant")
{
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> eta(40);
        for (double& v : eta) {
            v = u(rng);
        }
        const double theta = 0.1 + 0.8 * u(rng);
        const double total = std::accumulate(eta.begin(), eta.end(), 0.0);
        const auto marked = doerfler_mark(eta, theta);
        double sum = 0.0;
        double smallest = 1.0;
        for (Index t : marked) {
            sum += eta[t];
            smallest = std::min(smallest, eta[t]);
        }
        CHECK(sum >= theta * total);
        CHECK(sum - smallest < theta * total);
        CHECK(std::is_sorted(marked.begin(), marked.end()));

        std::vector<Index> perm(eta.size());
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        std::vector<double> shuffled(eta.size());
        for (std::size_t i = 0; i < eta.size(); ++i) {
            shuffled[i] = eta[perm[i]];
        }
        std::vector<Index> back;
        for (Index t : doerfler_mark(shuffled, theta)) {
            back.push_back(perm[t]);
        }
        std::sort(back.begin(), back.end());
        CHECK(back == marked);
    }
}

TEST_CASE("least-squares slopes")
{
    std::vector<double> dofs;
    std::vector<double> half;
    std::vector<double> flat;
    std::vector<double> one;
    for (int k = 0; k < 8; ++k) {
        const double n = 100.0 * std::pow(2.0, k);
        dofs.push_back(n);
        half.push_back(3.0 / std::sqrt(n));
        flat.push_back(7.0);
        one.push_back(1.0 / n);
    }
    CHECK(fit_slope(dofs, half, 6) == doctest::Approx(-0.5));
    CHECK(std::abs(fit_slope(dofs, flat, 6)) < 1e-14);
    CHECK(fit_slope(dofs, one, 8) == doctest::Approx(-1.0));
}

TEST_CASE("adaptive loop limits")
{
    AdaptConfig config;
    config.max_iterations = 1;
    const AdaptiveResult one = adaptive_solve(example(1), config);
    CHECK(one.records.size() == 1);

    config.max_iterations = 100;
    config.max_dofs = 800;
    int calls = 0;
    const AdaptiveResult r = adaptive_solve(example(1), config, {}, [&](const IterationRecord&) { ++calls; });
    CHECK(calls == static_cast<int>(r.records.size()));
    CHECK(r.records.back().dofs >= 800);
    for (std::size_t k = 1; k < r.records.size(); ++k) {
        CHECK(r.records[k].dofs > r.records[k - 1].dofs);
        CHECK(r.records[k - 1].dofs < 800);
    }
    for (const auto& rec : r.records) {
        CHECK(rec.kkt.certified());
        CHECK(rec.energy_error.has_value());
        CHECK_FALSE(rec.wall_ms.has_value());
    }

    AdaptConfig bad;
    bad.theta = 1.0;
    CHECK_THROWS(bad.validate());
}

TEST_CASE("uniform refinement bisects every element")
{
    AdaptConfig config;
    config.uniform = true;
    config.max_iterations = 3;
    const AdaptiveResult r = adaptive_solve(example(3), config);
    REQUIRE(r.records.size() == 3);
    CHECK(r.records[1].elements == 2 * r.records[0].elements);
    CHECK(r.records[2].elements == 2 * r.records[1].elements);
}
