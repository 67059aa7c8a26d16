#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "jsde/errors.hpp"
#include "jsde/format.hpp"
#include "jsde/time_grid.hpp"

namespace jsde {

/// A discontinuity registered while a path was built.
struct JumpRecord {
    double time = 0.0;
    double left = 0.0;
    double right = 0.0;

    friend bool operator==(const JumpRecord&, const JumpRecord&) = default;
};

/// Right-continuous sampled path.
///
/// `values[k]` is the value at grid point t_k. Between grid points the path is
/// constant on [t_k, t_{k+1}), except that a registered jump at tau in
/// (t_k, t_{k+1}) switches the value to the jump's right value from tau on.
/// Left limits at registered jump times are the values recorded when the jump
/// was inserted; elsewhere the path has no registered discontinuity and the
/// left limit equals the value.
class CadlagPath {
  public:
    CadlagPath() = default;

    CadlagPath(TimeGrid grid, std::vector<double> values, std::vector<JumpRecord> jumps = {})
        : grid_(std::move(grid)), values_(std::move(values)), jumps_(std::move(jumps)) {
        if (values_.size() != grid_.size()) {
            throw InvalidInput("CadlagPath: value count must equal grid size");
        }
        for (std::size_t j = 0; j < jumps_.size(); ++j) {
            const auto& jr = jumps_[j];
            if (!(jr.time > 0.0) || jr.time > grid_.horizon()) {
                throw InvalidInput("CadlagPath: jump time outside (0, T]");
            }
            if (j > 0 && jr.time < jumps_[j - 1].time) {
                throw InvalidInput("CadlagPath: jumps must be sorted by time");
            }
        }
        // Right continuity at on-grid jumps: the last jump at t_k lands on values[k].
        for (std::size_t j = 0; j < jumps_.size(); ++j) {
            const bool last_at_time = j + 1 == jumps_.size() || jumps_[j + 1].time != jumps_[j].time;
            if (!last_at_time) {
                continue;
            }
            if (auto k = grid_.find(jumps_[j].time); k && values_[*k] != jumps_[j].right) {
                throw InvalidInput("CadlagPath: value at an on-grid jump must equal its right value");
            }
        }
    }

    static CadlagPath constant(TimeGrid grid, double c) {
        std::vector<double> v(grid.size(), c);
        return CadlagPath(std::move(grid), std::move(v));
    }

    const TimeGrid& grid() const noexcept { return grid_; }
    std::span<const double> values() const noexcept { return values_; }
    std::span<const JumpRecord> jumps() const noexcept { return jumps_; }
    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t k) const { return values_[k]; }
    double horizon() const { return grid_.horizon(); }

    double evaluate(double t) const {
        const std::size_t k = grid_.index_at_or_before(t);
        if (!jumps_.empty()) {
            auto it = std::upper_bound(jumps_.begin(), jumps_.end(), t,
                                       [](double x, const JumpRecord& j) { return x < j.time; });
            if (it != jumps_.begin()) {
                const auto& last = *std::prev(it);
                if (last.time > grid_[k]) {
                    return last.right;
                }
            }
        }
        return values_[k];
    }

    double left_limit(double t) const {
        auto it = std::lower_bound(jumps_.begin(), jumps_.end(), t,
                                   [](const JumpRecord& j, double x) { return j.time < x; });
        if (it != jumps_.end() && it->time == t) {
            return it->left;
        }
        return evaluate(t);
    }

    bool has_jump_at(double t) const {
        auto it = std::lower_bound(jumps_.begin(), jumps_.end(), t,
                                   [](const JumpRecord& j, double x) { return j.time < x; });
        return it != jumps_.end() && it->time == t;
    }

    /// Registered jumps with time in (lo, hi].
    std::size_t jumps_in(double lo, double hi) const {
        return static_cast<std::size_t>(std::count_if(
            jumps_.begin(), jumps_.end(), [&](const JumpRecord& j) { return j.time > lo && j.time <= hi; }));
    }

  private:
    TimeGrid grid_;
    std::vector<double> values_;
    std::vector<JumpRecord> jumps_;
};

/// Piecewise constant, right continuous: level[k] on [breakpoint_k, breakpoint_{k+1}).
/// The value at T is `terminal`, by default the last level.
class StaircasePath {
  public:
    StaircasePath() = default;

    StaircasePath(std::vector<double> breakpoints, std::vector<double> levels,
                  std::optional<double> terminal = std::nullopt)
        : breakpoints_(std::move(breakpoints)), levels_(std::move(levels)) {
        if (breakpoints_.size() < 2 || levels_.size() + 1 != breakpoints_.size()) {
            throw InvalidInput("StaircasePath: need m+1 breakpoints for m levels, m >= 1");
        }
        if (breakpoints_.front() != 0.0) {
            throw InvalidInput("StaircasePath: first breakpoint must be 0");
        }
        for (std::size_t k = 1; k < breakpoints_.size(); ++k) {
            if (!(breakpoints_[k] > breakpoints_[k - 1])) {
                throw InvalidInput("StaircasePath: breakpoints must be strictly increasing");
            }
        }
        terminal_ = terminal ? *terminal : levels_.back();
    }

    static StaircasePath constant(double horizon, double level) { return StaircasePath({0.0, horizon}, {level}); }

    std::span<const double> breakpoints() const noexcept { return breakpoints_; }
    std::span<const double> levels() const noexcept { return levels_; }
    double terminal() const noexcept { return terminal_; }
    double horizon() const { return breakpoints_.back(); }
    std::size_t intervals() const noexcept { return levels_.size(); }

    double evaluate(double t) const {
        if (t < 0.0 || t > horizon()) {
            throw InvalidInput("StaircasePath: time outside [0, T]");
        }
        if (t == horizon()) {
            return terminal_;
        }
        auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t);
        auto k = static_cast<std::size_t>(it - breakpoints_.begin()) - 1;
        return levels_[k];
    }

    friend bool operator==(const StaircasePath&, const StaircasePath&) = default;

  private:
    std::vector<double> breakpoints_;
    std::vector<double> levels_;
    double terminal_ = 0.0;
};

/// Pointwise maximum on the union of breakpoints.
inline StaircasePath pointwise_max(std::span<const StaircasePath> paths) {
    if (paths.empty()) {
        throw InvalidInput("pointwise_max: empty input");
    }
    const double horizon = paths.front().horizon();
    std::vector<double> cuts;
    for (const auto& p : paths) {
        if (p.horizon() != horizon) {
            throw InvalidInput("pointwise_max: paths must share the horizon");
        }
        cuts.insert(cuts.end(), p.breakpoints().begin(), p.breakpoints().end());
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    // Cut k + 1 is the right end of piece k; evaluating at its left end is exact.
    std::vector<double> levels(cuts.size());
    for (std::size_t k = 0; k < cuts.size(); ++k) {
        double m = paths.front().evaluate(cuts[k]);
        for (const auto& p : paths.subspan(1)) {
            m = std::max(m, p.evaluate(cuts[k]));
        }
        levels[k] = m;
    }
    const double terminal = levels.back();
    levels.pop_back();
    return StaircasePath(std::move(cuts), std::move(levels), terminal);
}

inline StaircasePath pointwise_max(const std::vector<StaircasePath>& paths) {
    return pointwise_max(std::span<const StaircasePath>(paths));
}

// ---------------------------------------------------------------------------
// CSV emission

inline void write_path_csv_header(std::ostream& os, bool with_id) {
    if (with_id) {
        os << "path_id,";
    }
    os << "time,value,is_jump,left_limit\n";
}

/// Rows at every grid point, plus one row per registered off-grid jump.
inline void write_path_csv_rows(std::ostream& os, const CadlagPath& path, const std::string& id = {}) {
    const auto& grid = path.grid();
    auto jumps = path.jumps();
    std::size_t j = 0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double t = grid[k];
        for (; j < jumps.size() && jumps[j].time < t; ++j) {
            CsvRow row(os);
            if (!id.empty()) {
                row << id;
            }
            row << jumps[j].time << jumps[j].right << 1 << jumps[j].left;
        }
        const bool jump_here = j < jumps.size() && jumps[j].time == t;
        CsvRow row(os);
        if (!id.empty()) {
            row << id;
        }
        row << t << path[k] << (jump_here ? 1 : 0) << path.left_limit(t);
        while (j < jumps.size() && jumps[j].time == t) {
            ++j;
        }
    }
}

inline void write_path_csv(std::ostream& os, const CadlagPath& path) {
    write_path_csv_header(os, false);
    write_path_csv_rows(os, path);
}

inline void write_staircase_csv(std::ostream& os, const StaircasePath& s) {
    os << "start,end,level\n";
    auto b = s.breakpoints();
    auto l = s.levels();
    for (std::size_t k = 0; k < l.size(); ++k) {
        CsvRow(os) << b[k] << b[k + 1] << l[k];
    }
    CsvRow(os) << s.horizon() << s.horizon() << s.terminal();
}

}  // namespace jsde
