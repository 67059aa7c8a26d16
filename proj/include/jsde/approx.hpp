#pragma once

// Iterative construction of the system by frozen drifts: level 1 has drift
// target 0, level n+1 uses on each dyadic interval of [0,T] (2^(n-1) pieces)
// the infimum of b_i(s, lambda^n_s) over that interval. All levels share one
// noise realisation, so the whole hierarchy is a pathwise object.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "jsde/coeffs.hpp"
#include "jsde/errors.hpp"
#include "jsde/noise.hpp"
#include "jsde/paths.hpp"
#include "jsde/rng.hpp"
#include "jsde/solver.hpp"
#include "jsde/stats.hpp"
#include "jsde/system.hpp"

namespace jsde {

/// Partition with 2^(n-1) intervals, built by repeated midpoint refinement.
inline TimeGrid dyadic_partition(unsigned n, double horizon) {
    if (n < 1) {
        throw InvalidInput("dyadic_partition: n must be >= 1");
    }
    if (n > 40) {
        throw InvalidInput("dyadic_partition: n too large");
    }
    std::vector<double> pts{0.0, horizon};
    for (unsigned level = 1; level < n; ++level) {
        std::vector<double> finer;
        finer.reserve(2 * pts.size() - 1);
        for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
            finer.push_back(pts[k]);
            finer.push_back(0.5 * (pts[k] + pts[k + 1]));
        }
        finer.push_back(horizon);
        pts = std::move(finer);
    }
    return TimeGrid(std::move(pts));
}

/// Grid index of every partition point. Points must coincide with grid points
/// up to rounding (1e-12 T); otherwise the solution grid is too coarse.
inline std::vector<std::size_t> partition_indices(const TimeGrid& partition, const TimeGrid& grid) {
    if (partition.horizon() != grid.horizon()) {
        throw InvalidInput("partition and grid have different horizons");
    }
    const double tol = 1e-12 * grid.horizon();
    std::vector<std::size_t> idx;
    idx.reserve(partition.size());
    for (double t : partition.points()) {
        std::size_t k = grid.index_at_or_before(std::min(t + tol, grid.horizon()));
        if (std::abs(grid[k] - t) > tol) {
            throw InvalidInput("partition point " + format_number(t) + " is not on the solution grid");
        }
        idx.push_back(k);
    }
    return idx;
}

enum class DriftMode { realized, nested_mc, deterministic };

inline const char* to_string(DriftMode m) {
    switch (m) {
        case DriftMode::realized: return "realized";
        case DriftMode::nested_mc: return "nested-mc";
        case DriftMode::deterministic: return "deterministic";
    }
    return "?";
}

struct ApproxConfig {
    unsigned levels = 5;
    DriftMode mode = DriftMode::realized;
    /// Inner continuations per step in nested-mc mode.
    std::size_t inner = 8;
    /// Extra samples per grid step when taking infima of time-only drifts.
    std::size_t subsamples = 8;
    SchemeConfig scheme{Scheme::drift_implicit, 0.0, true};
};

struct ApproxLevel {
    unsigned n = 0;
    TimeGrid partition;
    std::vector<std::size_t> partition_index;
    /// Per component and grid step: the drift target this level was solved with.
    std::vector<std::vector<double>> forcing;
    /// Per component and partition interval: infimum of b_i over the interval
    /// along this level's paths. Feeds level n+1.
    std::vector<std::vector<double>> infimum_drifts;
    std::vector<CadlagPath> paths;
};

/// Infimum of b_i(s, lambda(s)) over grid points s in each closed interval
/// [t_k, t_{k+1}] of the partition.
inline std::vector<std::vector<double>> infimum_drift(const SystemSpec& spec, const std::vector<CadlagPath>& paths,
                                                      const std::vector<std::size_t>& pidx) {
    const std::size_t n = spec.size();
    if (paths.size() != n) {
        throw InvalidInput("infimum_drift: path count differs from the system size");
    }
    const auto& grid = paths.front().grid();
    std::vector<std::vector<double>> out(n, std::vector<double>(pidx.size() - 1));
    std::vector<std::vector<double>> b(n, std::vector<double>(grid.size()));
    std::vector<double> state(n);
    for (std::size_t j = 0; j < grid.size(); ++j) {
        for (std::size_t i = 0; i < n; ++i) {
            state[i] = paths[i][j];
        }
        for (std::size_t i = 0; i < n; ++i) {
            b[i][j] = spec.drifts[i](grid[j], state);
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k + 1 < pidx.size(); ++k) {
            out[i][k] = *std::min_element(b[i].begin() + static_cast<std::ptrdiff_t>(pidx[k]),
                                          b[i].begin() + static_cast<std::ptrdiff_t>(pidx[k + 1]) + 1);
        }
    }
    return out;
}

namespace detail {

inline std::vector<std::vector<double>> time_only_infima(const SystemSpec& spec, const TimeGrid& grid,
                                                         const std::vector<std::size_t>& pidx, std::size_t sub) {
    const std::size_t n = spec.size();
    std::vector<std::vector<double>> out(n, std::vector<double>(pidx.size() - 1));
    const std::vector<double> none(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (spec.drifts[i].depends_on_state()) {
            throw InvalidInput("deterministic drift mode needs drifts that do not depend on the state");
        }
        for (std::size_t k = 0; k + 1 < pidx.size(); ++k) {
            double m = std::numeric_limits<double>::infinity();
            for (std::size_t j = pidx[k]; j <= pidx[k + 1]; ++j) {
                m = std::min(m, spec.drifts[i](grid[j], none));
                if (j < pidx[k + 1]) {
                    for (std::size_t q = 1; q <= sub; ++q) {
                        const double s = grid[j] + grid.dt(j) * static_cast<double>(q) / static_cast<double>(sub + 1);
                        m = std::min(m, spec.drifts[i](s, none));
                    }
                }
            }
            out[i][k] = m;
        }
    }
    return out;
}

inline std::vector<std::vector<double>> spread_over_steps(const std::vector<std::vector<double>>& per_interval,
                                                          const std::vector<std::size_t>& pidx, std::size_t steps) {
    std::vector<std::vector<double>> out(per_interval.size(), std::vector<double>(steps));
    for (std::size_t i = 0; i < per_interval.size(); ++i) {
        for (std::size_t k = 0; k + 1 < pidx.size(); ++k) {
            std::fill(out[i].begin() + static_cast<std::ptrdiff_t>(pidx[k]),
                      out[i].begin() + static_cast<std::ptrdiff_t>(pidx[k + 1]), per_interval[i][k]);
        }
    }
    return out;
}

inline std::uint64_t continuation_tag(unsigned level, std::size_t step, std::size_t m) {
    return splitmix64_mix((static_cast<std::uint64_t>(level) << 56) ^ (static_cast<std::uint64_t>(step) << 20) ^
                          static_cast<std::uint64_t>(m));
}

/// Forcing for level n+1 at every grid step: average over `inner` fresh
/// continuations of the level-n system, started from lambda^n(t_j), of the
/// interval infimum of b_i. The part of the interval before t_j uses the
/// realised level-n path, the rest uses the continuation.
inline std::vector<std::vector<double>> nested_forcing(const SystemSpec& spec, const NoiseBundle& noise,
                                                       const ApproxLevel& prev, const ApproxConfig& cfg) {
    const std::size_t n = spec.size();
    const auto& grid = noise.grid;
    const auto& pidx = prev.partition_index;
    std::vector<std::vector<double>> out(n, std::vector<double>(grid.steps()));
    std::vector<double> state(n);
    auto drifts_at = [&](std::size_t j, const std::vector<double>& x, std::vector<double>& into) {
        for (std::size_t i = 0; i < n; ++i) {
            into[i] = spec.drifts[i](grid[j], x);
        }
    };
    std::vector<double> b(n);
    std::vector<double> realized_min(n);
    std::vector<double> acc(n);
    std::vector<double> cont_min(n);
    std::vector<double> y(n);
    for (std::size_t k = 0; k + 1 < pidx.size(); ++k) {
        const std::size_t k0 = pidx[k];
        const std::size_t k1 = pidx[k + 1];
        std::fill(realized_min.begin(), realized_min.end(), std::numeric_limits<double>::infinity());
        for (std::size_t j = k0; j < k1; ++j) {
            for (std::size_t i = 0; i < n; ++i) {
                state[i] = prev.paths[i][j];
            }
            drifts_at(j, state, b);
            for (std::size_t i = 0; i < n; ++i) {
                realized_min[i] = std::min(realized_min[i], b[i]);
            }
            std::fill(acc.begin(), acc.end(), 0.0);
            for (std::size_t m = 0; m < cfg.inner; ++m) {
                const auto inner_noise = make_noise_window(
                    spec.layout, grid, branch_lineage(noise.lineage, continuation_tag(prev.n, j, m)), j, k1);
                std::vector<ComponentStepper> steppers;
                steppers.reserve(n);
                for (std::size_t i = 0; i < n; ++i) {
                    steppers.emplace_back(spec.components[i], inner_noise, cfg.scheme, i);
                }
                y = state;
                cont_min = realized_min;
                for (std::size_t s = j; s < k1; ++s) {
                    for (std::size_t i = 0; i < n; ++i) {
                        y[i] = steppers[i].advance(s, y[i], prev.forcing[i][s]);
                    }
                    drifts_at(s + 1, y, b);
                    for (std::size_t i = 0; i < n; ++i) {
                        cont_min[i] = std::min(cont_min[i], b[i]);
                    }
                }
                for (std::size_t i = 0; i < n; ++i) {
                    acc[i] += cont_min[i];
                }
            }
            for (std::size_t i = 0; i < n; ++i) {
                out[i][j] = acc[i] / static_cast<double>(cfg.inner);
            }
        }
    }
    return out;
}

}  // namespace detail

/// Solves one level from per-step forcing, chaining interval by interval:
/// each interval starts from the previous interval's terminal state.
inline ApproxLevel solve_level(const SystemSpec& spec, const NoiseBundle& noise, const SchemeConfig& scheme,
                               unsigned n, std::vector<std::vector<double>> forcing) {
    const auto& grid = noise.grid;
    ApproxLevel level;
    level.n = n;
    level.partition = dyadic_partition(n, grid.horizon());
    level.partition_index = partition_indices(level.partition, grid);
    level.forcing = std::move(forcing);
    for (std::size_t i = 0; i < spec.size(); ++i) {
        ComponentStepper stepper(spec.components[i], noise, scheme, i);
        const auto& f = level.forcing[i];
        const Forcing by_step = [&f](std::size_t k, double, double) { return f[k]; };
        std::vector<double> values(grid.size());
        std::vector<JumpRecord> jumps;
        double y = spec.initial[i];
        values[0] = y;
        for (std::size_t k = 0; k + 1 < level.partition_index.size(); ++k) {
            y = stepper.advance_segment(level.partition_index[k], level.partition_index[k + 1], y, by_step, values,
                                        jumps);
        }
        level.paths.emplace_back(grid, std::move(values), std::move(jumps));
    }
    level.infimum_drifts = infimum_drift(spec, level.paths, level.partition_index);
    return level;
}

/// Level n+1 from level n.
inline ApproxLevel build_next_level(const SystemSpec& spec, const NoiseBundle& noise, const ApproxLevel& prev,
                                    const ApproxConfig& cfg) {
    const auto& grid = noise.grid;
    std::vector<std::vector<double>> forcing;
    switch (cfg.mode) {
        case DriftMode::realized:
            forcing = detail::spread_over_steps(prev.infimum_drifts, prev.partition_index, grid.steps());
            break;
        case DriftMode::deterministic:
            forcing = detail::spread_over_steps(
                detail::time_only_infima(spec, grid, prev.partition_index, cfg.subsamples), prev.partition_index,
                grid.steps());
            break;
        case DriftMode::nested_mc:
            if (cfg.inner < 1) {
                throw InvalidInput("nested-mc mode needs at least one inner path");
            }
            forcing = detail::nested_forcing(spec, noise, prev, cfg);
            break;
    }
    return solve_level(spec, noise, cfg.scheme, prev.n + 1, std::move(forcing));
}

struct LevelOrdering {
    unsigned n = 0;  // compares level n+1 against level n
    double max_violation = 0.0;
    double violating_fraction = 0.0;
    bool ordered() const noexcept { return max_violation == 0.0; }
};

/// Pathwise ordering lambda^{i,n} <= lambda^{i,n+1} on the grid, worst over components.
inline std::vector<LevelOrdering> check_monotone(const std::vector<ApproxLevel>& levels) {
    std::vector<LevelOrdering> out;
    for (std::size_t l = 0; l + 1 < levels.size(); ++l) {
        LevelOrdering o;
        o.n = levels[l].n;
        std::size_t bad = 0;
        std::size_t total = 0;
        for (std::size_t i = 0; i < levels[l].paths.size(); ++i) {
            const auto r = ordering_between(levels[l].paths[i], levels[l + 1].paths[i]);
            o.max_violation = std::max(o.max_violation, r.max_violation);
            bad += r.violating_points;
            total += levels[l].paths[i].size();
        }
        o.violating_fraction = total ? static_cast<double>(bad) / static_cast<double>(total) : 0.0;
        out.push_back(o);
    }
    return out;
}

/// Infimum over a child dyadic interval is at least the infimum over its
/// parent when the finer level dominates the coarser one there. Only intervals
/// where the level paths are ordered (all components) are checked.
struct SubsetInfimumCheck {
    std::size_t checked = 0;
    std::size_t skipped = 0;
    std::size_t violations = 0;
    double worst = 0.0;
};

inline SubsetInfimumCheck check_subset_infima(const std::vector<ApproxLevel>& levels) {
    SubsetInfimumCheck out;
    for (std::size_t l = 0; l + 1 < levels.size(); ++l) {
        const auto& coarse = levels[l];
        const auto& fine = levels[l + 1];
        const auto& pidx = coarse.partition_index;
        for (std::size_t k = 0; k + 1 < pidx.size(); ++k) {
            bool ordered = true;
            for (std::size_t i = 0; i < coarse.paths.size() && ordered; ++i) {
                for (std::size_t j = pidx[k]; j <= pidx[k + 1]; ++j) {
                    if (fine.paths[i][j] < coarse.paths[i][j]) {
                        ordered = false;
                        break;
                    }
                }
            }
            if (!ordered) {
                out.skipped += 2;
                continue;
            }
            for (std::size_t i = 0; i < coarse.paths.size(); ++i) {
                for (std::size_t child = 2 * k; child <= 2 * k + 1; ++child) {
                    ++out.checked;
                    const double deficit = coarse.infimum_drifts[i][k] - fine.infimum_drifts[i][child];
                    if (deficit > 0.0) {
                        ++out.violations;
                        out.worst = std::max(out.worst, deficit);
                    }
                }
            }
        }
    }
    return out;
}

struct Hierarchy {
    std::vector<ApproxLevel> levels;
    /// [n-1]: max_i sup_t |lambda^{i,n+1} - lambda^{i,n}|.
    std::vector<double> successive_gap;
    /// [n-1]: max_i sup_t (lambda^{i,nMax} - lambda^{i,n}).
    std::vector<double> limit_gap;
    std::vector<LevelOrdering> ordering;
    SubsetInfimumCheck subset;

    const std::vector<CadlagPath>& limit() const { return levels.back().paths; }
};

inline Hierarchy run_hierarchy(const SystemSpec& spec, const NoiseBundle& noise, const ApproxConfig& cfg,
                               RunReport* report = nullptr) {
    if (cfg.levels < 2) {
        throw InvalidInput("approx: need at least two levels");
    }
    validate_spec(spec);
    const NoiseBundle resolved = resolve_noise(noise, cfg.scheme);
    check_noise_covers(spec, resolved);
    for (const auto& c : spec.components) {
        check_scheme(c, resolved.grid, cfg.scheme, report);
    }
    Hierarchy h;
    h.levels.reserve(cfg.levels);
    h.levels.push_back(solve_level(spec, resolved, cfg.scheme, 1,
                                   std::vector<std::vector<double>>(spec.size(),
                                                                    std::vector<double>(resolved.grid.steps(), 0.0))));
    for (unsigned n = 2; n <= cfg.levels; ++n) {
        h.levels.push_back(build_next_level(spec, resolved, h.levels.back(), cfg));
    }
    const auto& top = h.levels.back();
    for (std::size_t l = 0; l + 1 < h.levels.size(); ++l) {
        double succ = 0.0;
        double lim = 0.0;
        for (std::size_t i = 0; i < spec.size(); ++i) {
            const auto& a = h.levels[l].paths[i];
            const auto& b = h.levels[l + 1].paths[i];
            for (std::size_t k = 0; k < a.size(); ++k) {
                succ = std::max(succ, std::abs(b[k] - a[k]));
                lim = std::max(lim, top.paths[i][k] - a[k]);
            }
        }
        h.successive_gap.push_back(succ);
        h.limit_gap.push_back(lim);
    }
    h.ordering = check_monotone(h.levels);
    h.subset = check_subset_infima(h.levels);
    return h;
}

/// Per level, component and grid point: running mean of lambda^{i,n}_t over paths.
class LevelMoments {
  public:
    LevelMoments(unsigned levels, std::size_t components, TimeGrid grid)
        : grid_(std::move(grid)),
          stats_(levels, std::vector<std::vector<RunningStats>>(components, std::vector<RunningStats>(grid_.size()))) {}

    void add(const Hierarchy& h) {
        if (h.levels.size() != stats_.size()) {
            throw InvalidInput("level moments: hierarchy depth differs");
        }
        for (std::size_t l = 0; l < stats_.size(); ++l) {
            const auto& paths = h.levels[l].paths;
            if (paths.size() != stats_[l].size() || !(paths.front().grid() == grid_)) {
                throw InvalidInput("level moments: hierarchy shape differs");
            }
            for (std::size_t i = 0; i < paths.size(); ++i) {
                for (std::size_t k = 0; k < grid_.size(); ++k) {
                    stats_[l][i][k].add(paths[i][k]);
                }
            }
        }
    }

    const TimeGrid& grid() const noexcept { return grid_; }
    unsigned levels() const noexcept { return static_cast<unsigned>(stats_.size()); }
    std::size_t components() const noexcept { return stats_.empty() ? 0 : stats_.front().size(); }
    const RunningStats& at(unsigned level, std::size_t component, std::size_t k) const {
        return stats_.at(level - 1).at(component).at(k);
    }

  private:
    TimeGrid grid_;
    std::vector<std::vector<std::vector<RunningStats>>> stats_;
};

struct MomentBoundCheck {
    double M = 0.0;
    double B_prime = 0.0;
    double L_prime = 0.0;
    /// Times, sup_i mean and bound for the worst level at each grid time.
    std::vector<double> times;
    std::vector<double> sup_mean;
    std::vector<double> sup_stderr;
    std::vector<double> bound;
    /// Largest sup_i mean - bound over levels and times (<= 0 means strictly inside).
    double worst_excess = 0.0;
    /// sup_i mean <= bound + 3 stderr at every level and time.
    bool holds = true;
};

/// Checks sup_i E lambda^{i,n}_t <= M exp(L' t) for every level with
/// B' = a_max B + K, L' = a_max L N + K and
/// M = max(sup lambda_0, sup_t sup_i E lambda^{i,1}_t, sup lambda_0 + B' T) plus a relative margin.
inline MomentBoundCheck moment_bound_check(const LevelMoments& lm, const SystemSpec& spec) {
    MomentBoundCheck out;
    const double a = spec.max_a();
    const auto N = static_cast<double>(spec.size());
    out.B_prime = a * spec.lipschitz_B() + spec.K;
    out.L_prime = a * spec.lipschitz_L() * N + spec.K;
    const auto& grid = lm.grid();
    const double sup0 = *std::max_element(spec.initial.begin(), spec.initial.end());
    double level1 = 0.0;
    for (std::size_t i = 0; i < lm.components(); ++i) {
        for (std::size_t k = 0; k < grid.size(); ++k) {
            level1 = std::max(level1, lm.at(1, i, k).mean());
        }
    }
    const double base = std::max({sup0, level1, sup0 + out.B_prime * grid.horizon()});
    out.M = base * (1.0 + 1e-9) + 1e-12;
    out.worst_excess = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double t = grid[k];
        const double bound = out.M * std::exp(out.L_prime * t);
        double worst_mean = -std::numeric_limits<double>::infinity();
        double worst_se = 0.0;
        for (unsigned l = 1; l <= lm.levels(); ++l) {
            for (std::size_t i = 0; i < lm.components(); ++i) {
                const auto& s = lm.at(l, i, k);
                if (s.mean() > worst_mean) {
                    worst_mean = s.mean();
                    worst_se = s.stderr_mean();
                }
                if (s.mean() > bound + 3.0 * s.stderr_mean()) {
                    out.holds = false;
                }
            }
        }
        out.times.push_back(t);
        out.sup_mean.push_back(worst_mean);
        out.sup_stderr.push_back(worst_se);
        out.bound.push_back(bound);
        out.worst_excess = std::max(out.worst_excess, worst_mean - bound);
    }
    return out;
}

}  // namespace jsde
