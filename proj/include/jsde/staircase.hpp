#pragma once

// Piecewise-constant approximations of a sampled cadlag drift b from below
// (b(t_k) - 1/n, restarted whenever b drops below that level or 1/n time has
// passed) and from above (b(s_k) + 1, restarted when b exceeds it or after 1
// unit of time). Infima over continuous time are taken over grid samples, so
// every breakpoint is a grid point of b.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "jsde/errors.hpp"
#include "jsde/paths.hpp"

namespace jsde {

namespace detail {

/// Largest grid index j > cur with t_j <= t_cur + width; cur + 1 when the
/// next grid point already lies beyond.
inline std::size_t cap_index(const TimeGrid& grid, std::size_t cur, double width) {
    const double limit = grid[cur] + width;
    if (limit >= grid.horizon()) {
        return grid.size() - 1;
    }
    const std::size_t j = grid.index_at_or_before(limit);
    return std::max(j, cur + 1);
}

template <class Fires>
StaircasePath build_staircase(const CadlagPath& b, double shift, double width, Fires&& fires) {
    const auto& grid = b.grid();
    if (grid.empty()) {
        throw InvalidInput("staircase: empty path");
    }
    const std::size_t last = grid.size() - 1;
    std::vector<double> breaks{0.0};
    std::vector<double> levels;
    std::size_t cur = 0;
    while (cur < last) {
        const double level = b[cur] + shift;
        const std::size_t cap = cap_index(grid, cur, width);
        std::size_t next = cap;
        for (std::size_t j = cur + 1; j < cap; ++j) {
            if (fires(level, b[j])) {
                next = j;
                break;
            }
        }
        levels.push_back(level);
        breaks.push_back(grid[next]);
        cur = next;
    }
    // The recursion restarts at T itself.
    return StaircasePath(std::move(breaks), std::move(levels), b[last] + shift);
}

}  // namespace detail

/// Level b(t_k) - 1/n on [t_k, t_{k+1}), t_{k+1} = first grid time with
/// b < b(t_k) - 1/n, capped at t_k + 1/n (snapped down to the grid) and T.
inline StaircasePath lower_staircase(const CadlagPath& b, unsigned n) {
    if (n < 1) {
        throw InvalidInput("lower_staircase: n must be >= 1");
    }
    const double inv = 1.0 / static_cast<double>(n);
    return detail::build_staircase(b, -inv, inv, [](double level, double v) { return level > v; });
}

/// Level b(s_k) + 1 on [s_k, s_{k+1}), s_{k+1} = first grid time with
/// b > b(s_k) + 1, capped at s_k + 1 and T.
inline StaircasePath upper_staircase(const CadlagPath& b) {
    return detail::build_staircase(b, 1.0, 1.0, [](double level, double v) { return level < v; });
}

/// max(0, lower_staircase(b, 1), ..., lower_staircase(b, n)).
inline StaircasePath envelope(const CadlagPath& b, unsigned n) {
    if (n < 1) {
        throw InvalidInput("envelope: n must be >= 1");
    }
    std::vector<StaircasePath> parts;
    parts.reserve(n + 1);
    parts.push_back(StaircasePath::constant(b.horizon(), 0.0));
    for (unsigned m = 1; m <= n; ++m) {
        parts.push_back(lower_staircase(b, m));
    }
    return pointwise_max(parts);
}

/// Largest |b(t_j) - b(t_i)| over grid pairs with t_j - t_i <= width and no
/// registered jump in (t_i, t_j].
inline double grid_modulus(const CadlagPath& b, double width) {
    const auto& grid = b.grid();
    double w = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        for (std::size_t j = i + 1; j < grid.size() && grid[j] <= grid[i] + width; ++j) {
            if (b.jumps_in(grid[i], grid[j]) > 0) {
                break;
            }
            w = std::max(w, std::abs(b[j] - b[i]));
        }
    }
    return w;
}

struct StaircaseLevelDiagnostics {
    unsigned n = 0;
    std::size_t lower_breakpoints = 0;
    std::size_t envelope_breakpoints = 0;
    /// max over grid of (envelope - b)+.
    double envelope_excess = 0.0;
    /// max over grid of (lower - b)+.
    double lower_excess = 0.0;
    /// sup of b - envelope at grid points with no registered jump within 1/n.
    double continuity_gap = 0.0;
    /// 1/n + grid modulus of b at width 1/n.
    double gap_bound = 0.0;
    bool gap_within_bound = true;
};

struct StaircaseDiagnostics {
    std::vector<StaircaseLevelDiagnostics> levels;
    std::size_t upper_breakpoints = 0;
    double upper_shortfall = 0.0;  // max over grid of (b - upper)+
    bool envelope_monotone = true;
};

inline StaircaseDiagnostics staircase_diagnostics(const CadlagPath& b, unsigned n_max) {
    if (n_max < 1) {
        throw InvalidInput("staircase_diagnostics: nMax must be >= 1");
    }
    const auto& grid = b.grid();
    StaircaseDiagnostics out;
    const auto upper = upper_staircase(b);
    out.upper_breakpoints = upper.breakpoints().size();
    for (std::size_t k = 0; k < grid.size(); ++k) {
        out.upper_shortfall = std::max(out.upper_shortfall, b[k] - upper.evaluate(grid[k]));
    }

    double scale = 0.0;
    for (double v : b.values()) {
        scale = std::max(scale, std::abs(v));
    }
    std::vector<double> prev_env;
    for (unsigned n = 1; n <= n_max; ++n) {
        const double inv = 1.0 / static_cast<double>(n);
        const auto lower = lower_staircase(b, n);
        const auto env = envelope(b, n);
        StaircaseLevelDiagnostics d;
        d.n = n;
        d.lower_breakpoints = lower.breakpoints().size();
        d.envelope_breakpoints = env.breakpoints().size();
        const double modulus = grid_modulus(b, inv);
        d.gap_bound = inv + modulus;
        // The only inexact step is the rounding of the level b(t_k) - 1/n and
        // of the gap subtraction; allow for those, nothing else.
        const double bound = d.gap_bound + 4.0 * std::numeric_limits<double>::epsilon() * (scale + inv);
        std::vector<double> env_vals(grid.size());
        for (std::size_t k = 0; k < grid.size(); ++k) {
            const double t = grid[k];
            env_vals[k] = env.evaluate(t);
            d.envelope_excess = std::max(d.envelope_excess, env_vals[k] - b[k]);
            d.lower_excess = std::max(d.lower_excess, lower.evaluate(t) - b[k]);
            if (b.jumps_in(std::max(0.0, t - inv), t) == 0 && !b.has_jump_at(std::max(0.0, t - inv))) {
                const double gap = b[k] - env_vals[k];
                d.continuity_gap = std::max(d.continuity_gap, gap);
                if (gap > bound) {
                    d.gap_within_bound = false;
                }
            }
        }
        if (!prev_env.empty()) {
            for (std::size_t k = 0; k < grid.size(); ++k) {
                if (env_vals[k] < prev_env[k]) {
                    out.envelope_monotone = false;
                }
            }
        }
        prev_env = std::move(env_vals);
        out.levels.push_back(d);
    }
    return out;
}

}  // namespace jsde
