#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "jsde/coeffs.hpp"
#include "jsde/noise.hpp"
#include "jsde/parallel.hpp"
#include "jsde/solver.hpp"
#include "jsde/system.hpp"

using namespace jsde;

namespace {

const SchemeConfig kExplicit{Scheme::explicit_euler_clipped, 0.0, true};
const SchemeConfig kImplicit{Scheme::drift_implicit, 0.0, true};

Example21Params mean_field(std::size_t n, double sigma, double sigma0, double sz, double sz0) {
    Example21Params p;
    p.n = n;
    p.a = {2.0};
    p.sigma = {sigma};
    p.sigma0 = sigma0;
    p.sigma_z = {sz};
    p.sigma_z0 = sz0;
    p.alpha = {1.5};
    p.alpha0 = 1.7;
    p.initial = {1.0};
    return p;
}

}  // namespace

TEST_CASE("one-component system matches the one-dimensional solver") {
    const auto spec = preset_root({1.3, 0.8, 0.6, 0.4, 1.5, 1.2, 1.0});
    const auto g = TimeGrid::uniform(1.0, 64);
    for (auto cfg : {kExplicit, kImplicit}) {
        const auto noise = make_noise(spec.layout, g, SeedLineage{4, 1});
        const auto sys = solve_system(spec, noise, cfg);
        const auto one = solve_onedim(spec.components[0], spec.drifts[0], 1.2, noise, cfg);
        REQUIRE(sys.size() == 1);
        CHECK(std::ranges::equal(sys[0].values(), one.values()));
    }
}

TEST_CASE("noiseless mean-field system relaxes to the conserved average") {
    auto p = mean_field(4, 0.0, 0.0, 0.0, 0.0);
    p.initial = {0.5, 1.0, 2.0, 4.5};
    const auto spec = preset_example21(p);
    const auto g = TimeGrid::uniform(1.0, 40);
    const auto paths = solve_system(spec, make_noise(spec.layout, g, SeedLineage{}), kExplicit);
    const double m = 2.0;
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t k = 0; k < g.size(); ++k) {
            const double expected = m + (p.initial[i] - m) * std::pow(1.0 - 2.0 * 0.025, static_cast<double>(k));
            REQUIRE(paths[i][k] == Catch::Approx(expected).epsilon(1e-12));
        }
    }
}

TEST_CASE("drifts see the pre-step state of every component") {
    SystemSpec spec;
    for (int i = 0; i < 2; ++i) {
        CoefficientSet c;
        c.a = 1.0;
        spec.components.push_back(c);
    }
    // b_1 = x_2, b_2 = x_1
    spec.drifts = {DriftSpec::weighted_sum(0.0, {0.0, 1.0}), DriftSpec::weighted_sum(0.0, {1.0, 0.0})};
    spec.initial = {1.0, 3.0};
    spec.layout.brownian_factors = 1;
    const auto g = TimeGrid::uniform(0.5, 1);
    const auto paths = solve_system(spec, make_noise(spec.layout, g, SeedLineage{}), kExplicit);
    CHECK(paths[0][1] == Catch::Approx(1.0 + 0.5 * (3.0 - 1.0)));
    CHECK(paths[1][1] == Catch::Approx(3.0 + 0.5 * (1.0 - 3.0)));
}

TEST_CASE("relabelling exchangeable components permutes the paths exactly") {
    // Only common noise, so components differ by their initial values alone.
    auto p = mean_field(4, 0.0, 0.7, 0.0, 0.3);
    p.initial = {0.3, 1.7, 0.9, 2.4};
    const auto spec = preset_example21(p);
    auto q = p;
    const std::vector<std::size_t> perm{2, 0, 3, 1};
    for (std::size_t i = 0; i < 4; ++i) {
        q.initial[i] = p.initial[perm[i]];
    }
    const auto spec_q = preset_example21(q);
    const auto g = TimeGrid::uniform(1.0, 64);
    for (std::uint64_t s = 0; s < 20; ++s) {
        const auto noise = make_noise(spec.layout, g, SeedLineage{6, s});
        const auto a = solve_system(spec, noise, kImplicit);
        const auto b = solve_system(spec_q, noise, kImplicit);
        for (std::size_t i = 0; i < 4; ++i) {
            REQUIRE(std::ranges::equal(b[i].values(), a[perm[i]].values()));
        }
    }
}

TEST_CASE("mean-field aggregate mean stays at its initial value") {
    // With a common a and the average drift, d E[mean] = 0; the noise is compensated.
    const auto spec = preset_example21(mean_field(3, 0.3, 0.2, 0.2, 0.1));
    const auto g = TimeGrid::uniform(1.0, 32);
    MomentEstimator est(3, {0.5, 1.0});
    for (std::uint64_t s = 0; s < 3000; ++s) {
        est.add(solve_system(spec, make_noise(spec.layout, g, SeedLineage{12, s}), kImplicit));
    }
    const auto sum = est.summary();
    for (std::size_t j = 0; j < 2; ++j) {
        CHECK(std::abs(sum.aggregate.mean[j] - 1.0) < 4.0 * sum.aggregate.stderr_mean[j] + 1e-3);
    }
}

TEST_CASE("moment estimator on known trajectories") {
    const auto g = TimeGrid::uniform(1.0, 4);
    std::vector<std::vector<CadlagPath>> ens;
    for (int p = 0; p < 5; ++p) {
        ens.push_back({CadlagPath::constant(g, p), CadlagPath::constant(g, 2.0 * p)});
    }
    const auto s = estimate_moments(ens, {0.0, 1.0});
    CHECK(s.paths == 5);
    CHECK(s.components[0].mean[1] == 2.0);
    CHECK(s.components[1].mean[0] == 4.0);
    CHECK(s.aggregate.mean[0] == 3.0);
    CHECK(s.components[0].stderr_mean[0] == Catch::Approx(std::sqrt(2.5 / 5.0)));
    CHECK(s.components[1].integral_mean == Catch::Approx(4.0));
    CHECK(s.components[0].q50[0] == 2.0);
    CHECK(s.components[0].q05[0] >= 0.0);
    CHECK(s.components[0].q95[0] <= 4.0);
    CHECK_THROWS_AS(estimate_moments({ens[0]}, {0.0}), InvalidInput);
    MomentEstimator est(2, {0.0});
    CHECK_THROWS_AS(est.add(std::vector<CadlagPath>{CadlagPath::constant(g, 1.0)}), InvalidInput);
}

TEST_CASE("ordered parallel consumes in order for any job count") {
    for (std::size_t jobs : {1, 2, 3, 8}) {
        std::vector<std::size_t> seen;
        ordered_parallel(
            500, jobs, [](std::size_t i) { return i * i; },
            [&](std::size_t i, std::size_t v) {
                REQUIRE(v == i * i);
                seen.push_back(i);
            },
            37);
        REQUIRE(seen.size() == 500);
        CHECK(std::is_sorted(seen.begin(), seen.end()));
    }
}

TEST_CASE("ordered parallel rethrows the lowest failing index") {
    std::vector<std::size_t> seen;
    try {
        ordered_parallel(
            100, 4,
            [](std::size_t i) -> int {
                if (i == 13 || i == 57) {
                    throw std::runtime_error(std::to_string(i));
                }
                return 0;
            },
            [&](std::size_t i, int) { seen.push_back(i); }, 20);
        FAIL("expected an exception");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()) == "13");
    }
    CHECK(seen.size() == 13);
}

TEST_CASE("system rejects noise without its factors") {
    const auto spec = preset_example21(mean_field(2, 0.3, 0.2, 0.2, 0.1));
    const auto g = TimeGrid::uniform(1.0, 8);
    NoiseLayout small;
    small.brownian_factors = 1;
    CHECK_THROWS_AS(solve_system(spec, make_noise(small, g, SeedLineage{}), kExplicit), InvalidInput);
}
