#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "jsde/paths.hpp"
#include "jsde/staircase.hpp"
#include "oracles.hpp"

using namespace jsde;

namespace {

// Direct transcription of the restart rule on grid samples: from t, the next
// restart is the first grid time where b crosses the level, or the last grid
// time within `width` of t (at least the next grid time), or T.
std::vector<double> staircase_levels_at_grid(const CadlagPath& b, double shift, double width, bool below) {
    const auto& g = b.grid();
    std::vector<double> out(g.size());
    std::size_t start = 0;
    while (start + 1 < g.size()) {
        const double level = b[start] + shift;
        std::size_t stop = start + 1;
        while (stop + 1 < g.size() && g[stop + 1] <= g[start] + width) {
            ++stop;
        }
        if (g[start] + width >= g.horizon()) {
            stop = g.size() - 1;
        }
        for (std::size_t j = start + 1; j < stop; ++j) {
            if (below ? b[j] < level : b[j] > level) {
                stop = j;
                break;
            }
        }
        for (std::size_t j = start; j < stop; ++j) {
            out[j] = level;
        }
        start = stop;
    }
    out.back() = b.values().back() + shift;
    return out;
}

CadlagPath linear(double slope, double intercept, std::size_t steps) {
    const auto g = TimeGrid::uniform(1.0, steps);
    std::vector<double> v;
    for (std::size_t k = 0; k < g.size(); ++k) {
        v.push_back(intercept + slope * g[k]);
    }
    return CadlagPath(g, v);
}

}  // namespace

TEST_CASE("lower staircase of an increasing line") {
    const auto s = lower_staircase(linear(1.0, 0.0, 4), 2);
    CHECK(std::vector<double>(s.breakpoints().begin(), s.breakpoints().end()) == std::vector<double>{0.0, 0.5, 1.0});
    CHECK(std::vector<double>(s.levels().begin(), s.levels().end()) == std::vector<double>{-0.5, 0.0});
    CHECK(s.terminal() == 0.5);
}

TEST_CASE("lower staircase restarts at the time cap on a decreasing line") {
    // b = 1 - t: with n = 4 the level 0.75 would hold until t = 0.3, but the
    // window 1/4 snaps down to the grid point 0.2.
    const auto s = lower_staircase(linear(-1.0, 1.0, 10), 4);
    REQUIRE(s.breakpoints().size() >= 2);
    CHECK(s.breakpoints()[1] == Catch::Approx(0.2));
    CHECK(s.levels()[0] == 0.75);
    CHECK(s.levels()[1] == Catch::Approx(0.55));
}

TEST_CASE("staircases agree with a direct transcription of the rule") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 40; ++trial) {
        const auto b = oracle::random_cadlag(rng, TimeGrid::uniform(1.0, 200), 2.0, 0.05);
        for (unsigned n : {1u, 2u, 3u, 7u, 16u}) {
            const auto lower = lower_staircase(b, n);
            const auto ref = staircase_levels_at_grid(b, -1.0 / n, 1.0 / n, true);
            for (std::size_t k = 0; k < b.size(); ++k) {
                REQUIRE(lower.evaluate(b.grid()[k]) == ref[k]);
            }
        }
        const auto upper = upper_staircase(b);
        const auto ref_up = staircase_levels_at_grid(b, 1.0, 1.0, false);
        for (std::size_t k = 0; k < b.size(); ++k) {
            REQUIRE(upper.evaluate(b.grid()[k]) == ref_up[k]);
        }
    }
}

TEST_CASE("envelope stays below the path, grows in n and closes the gap") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const auto b = oracle::random_cadlag(rng, TimeGrid::uniform(2.0, 256), 1.5, 0.02);
        const auto d = staircase_diagnostics(b, 8);
        CHECK(d.upper_shortfall <= 0.0);
        CHECK(d.envelope_monotone);
        for (const auto& lvl : d.levels) {
            INFO("n = " << lvl.n);
            CHECK(lvl.envelope_excess <= 0.0);
            CHECK(lvl.lower_excess <= 0.0);
            CHECK(lvl.gap_within_bound);
        }
    }
}

TEST_CASE("envelope of a smooth path converges") {
    // b(t) = 1 + sin(2 pi t)/2 on a fine grid: the gap is at most 1/n plus
    // the oscillation pi/n of b over a window 1/n.
    const auto g = TimeGrid::uniform(1.0, 4096);
    std::vector<double> v;
    for (std::size_t k = 0; k < g.size(); ++k) {
        v.push_back(1.0 + 0.5 * std::sin(2.0 * std::numbers::pi * g[k]));
    }
    const CadlagPath b(g, v);
    for (unsigned n : {4u, 16u, 64u}) {
        const auto env = envelope(b, n);
        double gap = 0.0;
        for (std::size_t k = 0; k < g.size(); ++k) {
            gap = std::max(gap, v[k] - env.evaluate(g[k]));
        }
        CHECK(gap <= (1.0 + std::numbers::pi) / n + 1e-12);
    }
}

TEST_CASE("grid modulus ignores registered jumps") {
    const auto g = TimeGrid::uniform(1.0, 4);
    const CadlagPath b(g, {0.0, 0.1, 5.0, 5.1, 5.3}, {{0.5, 0.1, 5.0}});
    CHECK(grid_modulus(b, 0.25) == Catch::Approx(0.2));
    CHECK(grid_modulus(b, 1.0) == Catch::Approx(0.3));
    const CadlagPath c(g, {0.0, 0.1, 5.0, 5.1, 5.3});
    CHECK(grid_modulus(c, 0.25) == Catch::Approx(4.9));
}

TEST_CASE("staircase arguments are checked") {
    const auto b = linear(1.0, 0.0, 4);
    CHECK_THROWS_AS(lower_staircase(b, 0), InvalidInput);
    CHECK_THROWS_AS(envelope(b, 0), InvalidInput);
    CHECK_THROWS_AS(staircase_diagnostics(b, 0), InvalidInput);
}
