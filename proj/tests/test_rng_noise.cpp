#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "jsde/noise.hpp"
#include "jsde/rng.hpp"
#include "jsde/stats.hpp"
#include "jsde/time_grid.hpp"
#include "oracles.hpp"

using namespace jsde;

TEST_CASE("time grid construction and lookup") {
    const auto g = TimeGrid::uniform(1.0, 4);
    CHECK(g.size() == 5);
    CHECK(g.steps() == 4);
    CHECK(g.horizon() == 1.0);
    CHECK(g[2] == 0.5);
    CHECK(g.index_at_or_before(0.6) == 2);
    CHECK(g.index_at_or_before(1.0) == 4);
    CHECK_THROWS_AS(g.index_at_or_before(1.5), InvalidInput);
    CHECK(g.coarsen(2) == TimeGrid(std::vector<double>{0.0, 0.5, 1.0}));
    CHECK(g.refines(g.coarsen(2)));
    CHECK_THROWS_AS(TimeGrid(std::vector<double>{0.0, 0.5, 0.5}), InvalidInput);
    CHECK_THROWS_AS(TimeGrid(std::vector<double>{0.1, 0.5}), InvalidInput);
    CHECK_THROWS_AS(TimeGrid::uniform(1.0, 0), InvalidInput);
}

TEST_CASE("streams are keyed by lineage and stream id") {
    Stream a(SeedLineage{7, 3}, kBrownianStream);
    Stream b(SeedLineage{7, 3}, kBrownianStream);
    Stream c(SeedLineage{7, 4}, kBrownianStream);
    Stream d(SeedLineage{7, 3}, kBrownianStream + 1);
    const double xa = a.uniform();
    CHECK(xa == b.uniform());
    CHECK(xa != c.uniform());
    CHECK(xa != d.uniform());
    CHECK(branch_lineage(SeedLineage{7, 3}, 1).path == 3);
    CHECK(!(branch_lineage(SeedLineage{7, 3}, 1) == branch_lineage(SeedLineage{7, 3}, 2)));
}

TEST_CASE("uniform draws stay in the open unit interval") {
    Stream s(123);
    for (int i = 0; i < 100000; ++i) {
        const double u = s.uniform();
        REQUIRE(u > 0.0);
        REQUIRE(u < 1.0);
    }
}

TEST_CASE("brownian increments with unit step have unit variance") {
    const auto g = TimeGrid::uniform(100000.0, 100000);
    const auto w = gen_brownian(g, 1, SeedLineage{1, 0});
    RunningStats rs;
    for (double x : w[0]) {
        rs.add(x);
    }
    CHECK(rs.variance() > 0.99);
    CHECK(rs.variance() < 1.01);
}

TEST_CASE("brownian generation is deterministic") {
    const auto g = TimeGrid::uniform(1.0, 64);
    CHECK(gen_brownian(g, 3, SeedLineage{5, 9}) == gen_brownian(g, 3, SeedLineage{5, 9}));
    CHECK_THROWS_AS(gen_brownian(TimeGrid{}, 1, SeedLineage{}), InvalidInput);
    CHECK_THROWS_AS(gen_brownian(g, 0, SeedLineage{}), InvalidInput);
}

TEST_CASE("brownian endpoint is normal with variance T") {
    const auto g = TimeGrid::uniform(2.0, 16);
    std::vector<double> ends;
    for (std::uint64_t p = 0; p < 10000; ++p) {
        const auto w = gen_brownian(g, 1, SeedLineage{11, p});
        double s = 0.0;
        for (double x : w[0]) {
            s += x;
        }
        ends.push_back(s);
    }
    const auto ks = oracle::ks_one_sample(ends, [](double x) { return oracle::normal_cdf(x, 0.0, std::sqrt(2.0)); });
    CHECK(ks.p_value > 0.01);
}

TEST_CASE("brownian factors and paths are uncorrelated") {
    const auto g = TimeGrid::uniform(1.0, 100000);
    const auto w = gen_brownian(g, 2, SeedLineage{3, 0});
    const auto v = gen_brownian(g, 1, SeedLineage{3, 1});
    auto corr = [](const std::vector<double>& a, const std::vector<double>& b) {
        double sab = 0.0;
        double saa = 0.0;
        double sbb = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            sab += a[i] * b[i];
            saa += a[i] * a[i];
            sbb += b[i] * b[i];
        }
        return sab / std::sqrt(saa * sbb);
    };
    const double bound = 4.0 / std::sqrt(100000.0);
    CHECK(std::abs(corr(w[0], w[1])) < bound);
    CHECK(std::abs(corr(w[0], v[0])) < bound);
}

TEST_CASE("alpha = 2 stable increments are N(0, 2 dt)") {
    const auto g = TimeGrid::uniform(1000.0, 100000);  // dt = 0.01
    const auto z = gen_stable_increments(g, 2.0, SeedLineage{2, 0});
    RunningStats rs;
    RunningStats sq;
    for (double x : z) {
        rs.add(x);
        sq.add(x * x);
    }
    CHECK(std::abs(rs.variance() - 0.02) < 3.0 * sq.stderr_mean());
    const auto ks =
        oracle::ks_one_sample(z, [](double x) { return oracle::normal_cdf(x, 0.0, std::sqrt(0.02)); });
    CHECK(ks.p_value > 0.01);
}

TEST_CASE("stable characteristic function matches the closed form") {
    for (double alpha : {1.2, 1.5, 1.8}) {
        const auto g = TimeGrid::uniform(100000.0, 100000);
        const auto z = gen_stable_increments(g, alpha, SeedLineage{17, 0});
        for (double theta : {-2.0, -1.0, -0.5, 0.5, 1.0, 2.0}) {
            std::complex<double> acc = 0.0;
            for (double x : z) {
                acc += std::exp(std::complex<double>(0.0, theta * x));
            }
            acc /= static_cast<double>(z.size());
            INFO("alpha " << alpha << " theta " << theta);
            CHECK(std::abs(acc - oracle::stable_cf(alpha, theta)) <= 5e-2);
        }
    }
}

TEST_CASE("stable increments are self-similar") {
    const double alpha = 1.5;
    const auto fine = gen_stable_increments(TimeGrid::uniform(5000.0, 20000), alpha, SeedLineage{4, 0});
    const auto coarse = gen_stable_increments(TimeGrid::uniform(20000.0, 20000), alpha, SeedLineage{4, 1});
    std::vector<double> scaled;
    for (double x : fine) {
        scaled.push_back(std::pow(4.0, 1.0 / alpha) * x);
    }
    CHECK(oracle::ks_two_sample(scaled, coarse).p_value > 0.01);
}

TEST_CASE("stable increments are centred") {
    // The sample mean of n unit draws is n^{1/alpha - 1} times a unit draw, so
    // a fixed quantile of |S| scaled by n^{1/alpha - 1} bounds it. P(|S| > 20)
    // is below 0.5% at alpha = 1.5.
    const double alpha = 1.5;
    const auto z = gen_stable_increments(TimeGrid::uniform(100000.0, 100000), alpha, SeedLineage{8, 0});
    double mean = 0.0;
    for (double x : z) {
        mean += x / static_cast<double>(z.size());
    }
    CHECK(std::abs(mean) <= 20.0 * std::pow(static_cast<double>(z.size()), 1.0 / alpha - 1.0));
}

TEST_CASE("stable index outside (1, 2] is rejected") {
    CHECK_THROWS_AS(StableSampler(1.0), InvalidInput);
    CHECK_THROWS_AS(StableSampler(2.1), InvalidInput);
    CHECK_NOTHROW(StableSampler(2.0));
}

TEST_CASE("finite-activity events") {
    const auto g = TimeGrid::uniform(2.0, 8);
    const MarkSampler mark = [](Stream& s) { return Mark{s.uniform(), 0.0}; };
    CHECK(gen_finite_activity_events(0.0, mark, g, SeedLineage{}).empty());
    CHECK_THROWS_AS(gen_finite_activity_events(std::nan(""), mark, g, SeedLineage{}), InvalidInput);
    CHECK_THROWS_AS(gen_finite_activity_events(INFINITY, mark, g, SeedLineage{}), InvalidInput);

    RunningStats count;
    for (std::uint64_t p = 0; p < 10000; ++p) {
        const auto ev = gen_finite_activity_events(3.0, mark, g, SeedLineage{21, p});
        count.add(static_cast<double>(ev.size()));
        for (std::size_t i = 0; i < ev.size(); ++i) {
            REQUIRE(ev[i].time > 0.0);
            REQUIRE(ev[i].time <= 2.0);
            if (i) {
                REQUIRE(ev[i - 1].time <= ev[i].time);
            }
        }
    }
    CHECK(std::abs(count.mean() - 6.0) < 3.0 * count.stderr_mean());

    const auto a = gen_finite_activity_events(3.0, mark, g, SeedLineage{1, 1});
    const auto b = gen_finite_activity_events(3.0, mark, g, SeedLineage{1, 1});
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].time == b[i].time);
        CHECK(a[i].mark.size == b[i].mark.size);
    }
}

TEST_CASE("noise bundles replay and coarsen by aggregation") {
    NoiseLayout layout;
    layout.brownian_factors = 2;
    layout.stable_alphas = {1.5};
    layout.event_sources.push_back({2.0, [](Stream& s) { return Mark{s.exponential(), 0.0}; }});
    const auto g = TimeGrid::uniform(1.0, 16);
    const auto n1 = make_noise(layout, g, SeedLineage{3, 2});
    const auto n2 = make_noise(layout, g, SeedLineage{3, 2});
    CHECK(n1.brownian == n2.brownian);
    CHECK(n1.stable == n2.stable);
    CHECK(n1.events[0].size() == n2.events[0].size());

    const auto c = n1.coarsen(4);
    REQUIRE(c.grid.steps() == 4);
    double fine = 0.0;
    for (int k = 4; k < 8; ++k) {
        fine += n1.brownian[1][k];
    }
    CHECK(c.brownian[1][1] == Catch::Approx(fine).epsilon(1e-15));
    CHECK(c.events[0].size() == n1.events[0].size());
}

TEST_CASE("windowed noise is zero outside its window") {
    NoiseLayout layout;
    layout.brownian_factors = 1;
    layout.stable_alphas = {1.7};
    layout.event_sources.push_back({50.0, [](Stream& s) { return Mark{s.exponential(), 0.0}; }});
    const auto g = TimeGrid::uniform(1.0, 20);
    const auto n = make_noise_window(layout, g, SeedLineage{1, 0}, 5, 9);
    for (std::size_t k = 0; k < 20; ++k) {
        const bool inside = k >= 5 && k < 9;
        CHECK((n.brownian[0][k] != 0.0) == inside);
        CHECK((n.stable[0][k] != 0.0) == inside);
    }
    for (const auto& e : n.events[0]) {
        CHECK(e.time > g[5]);
        CHECK(e.time < g[9]);
    }
    CHECK_THROWS_AS(make_noise_window(layout, g, SeedLineage{}, 9, 5), InvalidInput);
}
