#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "jsde/coeffs.hpp"
#include "jsde/errors.hpp"
#include "jsde/noise.hpp"
#include "jsde/paths.hpp"

namespace jsde {

enum class Scheme { explicit_euler_clipped, drift_implicit };

inline const char* to_string(Scheme s) {
    return s == Scheme::explicit_euler_clipped ? "explicit-euler-clipped" : "drift-implicit";
}

struct SchemeConfig {
    Scheme scheme = Scheme::explicit_euler_clipped;
    /// Step size; 0 means "use the noise grid as is".
    double step = 0.0;
    bool clip_at_zero = true;
};

struct RunReport {
    std::vector<std::string> warnings;

    void warn(std::string w) {
        if (std::find(warnings.begin(), warnings.end(), w) == warnings.end()) {
            warnings.push_back(std::move(w));
        }
    }
};

/// Drift target b applied over step k, given the step's left time and state.
using Forcing = std::function<double(std::size_t step, double t, double y)>;

inline Forcing constant_forcing(double b) {
    return [b](std::size_t, double, double) { return b; };
}

/// Per-step values, one per grid step.
inline Forcing stepwise_forcing(std::vector<double> values) {
    return [v = std::move(values)](std::size_t k, double, double) { return v[k]; };
}

/// One-dimensional use of a DriftSpec: the state argument is the component itself.
inline Forcing drift_forcing(const DriftSpec& d) {
    return [d](std::size_t, double t, double y) {
        const double x[1] = {y};
        return d(t, std::span<const double>(x, 1));
    };
}

/// b(t_k) sampled along a path.
inline Forcing path_forcing(const CadlagPath& b) {
    return [b](std::size_t, double t, double) { return b.evaluate(t); };
}

/// Noise on the step the config asks for. A positive step must be a whole
/// multiple of the (uniform) noise step; increments are then aggregated.
inline NoiseBundle resolve_noise(const NoiseBundle& noise, const SchemeConfig& cfg) {
    require_grid(noise.grid);
    if (!(cfg.step >= 0.0) || !std::isfinite(cfg.step)) {
        throw InvalidInput("scheme: step must be finite and >= 0");
    }
    if (cfg.step == 0.0) {
        return noise;
    }
    const double dt = noise.grid.dt(0);
    const double ratio = cfg.step / dt;
    const auto factor = static_cast<std::size_t>(std::llround(ratio));
    if (factor == 0 || std::abs(ratio - static_cast<double>(factor)) > 1e-9 * ratio ||
        noise.grid.steps() % factor != 0) {
        throw InvalidInput("scheme: step " + format_number(cfg.step) + " is not a multiple of the noise step " +
                           format_number(dt));
    }
    if (std::abs(noise.grid.mesh() - dt) > 1e-12 * dt) {
        throw InvalidInput("scheme: a positive step needs a uniform noise grid");
    }
    return factor == 1 ? noise : noise.coarsen(factor);
}

inline void check_scheme(const CoefficientSet& c, const TimeGrid& grid, const SchemeConfig& cfg, RunReport* report) {
    if (report && cfg.scheme == Scheme::explicit_euler_clipped && c.a * grid.mesh() > 1.0) {
        report->warn("explicit scheme with a*dt = " + format_number(c.a * grid.mesh()) +
                     " > 1: monotonicity in the drift is not preserved");
    }
}

/// Advances one component over grid steps with a fixed composition order:
/// drift, Brownian and stable terms and the thinning compensator from the
/// pre-step state, clipping, then the finite-activity events of the step in
/// time order, each from the running state.
class ComponentStepper {
  public:
    ComponentStepper(const CoefficientSet& c, const NoiseBundle& noise, const SchemeConfig& cfg,
                     std::size_t component = 0)
        : c_(&c), noise_(&noise), cfg_(cfg), component_(component) {
        for (const auto& w : c.brownian) {
            if (w.factor >= noise.brownian.size()) {
                throw InvalidInput("solver: noise lacks Brownian factor " + std::to_string(w.factor));
            }
        }
        for (const auto& s : c.stable) {
            if (s.factor >= noise.stable.size()) {
                throw InvalidInput("solver: noise lacks stable factor " + std::to_string(s.factor));
            }
            if (noise.stable_alphas[s.factor] != s.alpha) {
                throw InvalidInput("solver: stable factor alpha differs from the loading's alpha");
            }
        }
        auto take = [&](std::size_t measure, Source src) {
            if (measure == kNoMeasure) {
                return;
            }
            if (measure >= noise.events.size()) {
                throw InvalidInput("solver: noise lacks event measure " + std::to_string(measure));
            }
            for (const auto& e : noise.events[measure]) {
                events_.push_back({e.time, e.mark, src});
            }
        };
        if (c.thinning) {
            take(c.thinning_measure, Source::thinning);
        }
        if (c.g1) {
            take(c.g1_measure, Source::g1);
        }
        std::stable_sort(events_.begin(), events_.end(),
                         [](const Event& a, const Event& b) { return a.time < b.time; });
        if (cfg.scheme == Scheme::drift_implicit) {
            decay_.resize(noise.grid.steps());
            for (std::size_t k = 0; k < decay_.size(); ++k) {
                decay_[k] = std::exp(-c.a * noise.grid.dt(k));
            }
        }
    }

    const TimeGrid& grid() const { return noise_->grid; }

    /// State at t_{k+1} from state y at t_k under drift target b.
    double advance(std::size_t k, double y, double b, std::vector<JumpRecord>* jumps = nullptr) const {
        const auto& grid = noise_->grid;
        const double dt = grid.dt(k);
        const auto& c = *c_;

        double next;
        if (cfg_.scheme == Scheme::drift_implicit) {
            next = y * decay_[k] + b * (1.0 - decay_[k]);
        } else {
            next = y + c.a * (b - y) * dt;
        }
        if (!c.brownian.empty()) {
            double dw = 0.0;
            for (const auto& w : c.brownian) {
                dw += w.weight * noise_->brownian[w.factor][k];
            }
            next += c.sigma(y) * dw;
        }
        for (const auto& s : c.stable) {
            next += s.scale_at(y) * noise_->stable[s.factor][k];
        }
        if (c.thinning) {
            next -= c.thinning->compensator(y) * dt;
        }
        next = finish(next, k);

        if (!events_.empty()) {
            const double lo = grid[k];
            const double hi = grid[k + 1];
            auto it = std::upper_bound(events_.begin(), events_.end(), lo,
                                       [](double t, const Event& e) { return t < e.time; });
            for (; it != events_.end() && it->time <= hi; ++it) {
                const double jump = it->source == Source::thinning ? c.thinning->jump(next, it->mark)
                                                                   : c.g1->jump(next, it->mark);
                if (jump == 0.0) {
                    continue;
                }
                const double left = next;
                next = finish(next + jump, k);
                if (jumps) {
                    jumps->push_back({it->time, left, next});
                }
            }
        }
        return next;
    }

    /// Runs steps [k_begin, k_end) from y, writing values[k+1] for each step.
    double advance_segment(std::size_t k_begin, std::size_t k_end, double y, const Forcing& forcing,
                           std::vector<double>& values, std::vector<JumpRecord>& jumps) const {
        const auto& grid = noise_->grid;
        for (std::size_t k = k_begin; k < k_end; ++k) {
            const double b = forcing(k, grid[k], y);
            y = advance(k, y, b, &jumps);
            values[k + 1] = y;
        }
        return y;
    }

  private:
    enum class Source { thinning, g1 };
    struct Event {
        double time;
        Mark mark;
        Source source;
    };

    double finish(double y, std::size_t k) const {
        if (!std::isfinite(y)) {
            throw NumericError("non-finite state", k, component_);
        }
        return cfg_.clip_at_zero && y < 0.0 ? 0.0 : y;
    }

    const CoefficientSet* c_;
    const NoiseBundle* noise_;
    SchemeConfig cfg_;
    std::size_t component_;
    std::vector<Event> events_;
    std::vector<double> decay_;
};

/// Solves dY = a(b - Y)dt + sigma(Y)dW + g0 terms + g1 jumps from y0 with the given forcing.
inline CadlagPath solve_onedim(const CoefficientSet& c, const Forcing& forcing, double y0, const NoiseBundle& noise,
                               const SchemeConfig& cfg, RunReport* report = nullptr) {
    require_nonnegative(y0, "initial value");
    const NoiseBundle resolved = resolve_noise(noise, cfg);
    check_scheme(c, resolved.grid, cfg, report);
    ComponentStepper stepper(c, resolved, cfg);
    std::vector<double> values(resolved.grid.size());
    std::vector<JumpRecord> jumps;
    values[0] = y0;
    stepper.advance_segment(0, resolved.grid.steps(), y0, forcing, values, jumps);
    return CadlagPath(resolved.grid, std::move(values), std::move(jumps));
}

inline CadlagPath solve_onedim(const CoefficientSet& c, const DriftSpec& drift, double y0, const NoiseBundle& noise,
                               const SchemeConfig& cfg, RunReport* report = nullptr) {
    return solve_onedim(c, drift_forcing(drift), y0, noise, cfg, report);
}

inline CadlagPath solve_onedim(const CoefficientSet& c, const CadlagPath& drift, double y0, const NoiseBundle& noise,
                               const SchemeConfig& cfg, RunReport* report = nullptr) {
    if (drift.grid().empty() || drift.horizon() != noise.grid.horizon()) {
        throw InvalidInput("solve_onedim: drift path horizon differs from the noise horizon");
    }
    return solve_onedim(c, path_forcing(drift), y0, noise, cfg, report);
}

struct OrderingReport {
    double max_violation = 0.0;
    double violating_fraction = 0.0;
    std::size_t violating_points = 0;
    CadlagPath low;
    CadlagPath high;
};

/// Largest (low - high)+ over grid points and the fraction of points above `tol`.
inline OrderingReport ordering_between(const CadlagPath& low, const CadlagPath& high, double tol = 0.0) {
    if (!(low.grid() == high.grid())) {
        throw InvalidInput("compare: paths live on different grids");
    }
    OrderingReport r;
    for (std::size_t k = 0; k < low.size(); ++k) {
        const double v = low[k] - high[k];
        if (v > 0.0) {
            r.max_violation = std::max(r.max_violation, v);
        }
        if (v > tol) {
            ++r.violating_points;
        }
    }
    r.violating_fraction = static_cast<double>(r.violating_points) / static_cast<double>(low.size());
    return r;
}

/// Solves with two drift forcings on the same noise and reports ordering violations.
inline OrderingReport compare_ordered(const CoefficientSet& c, const Forcing& low, const Forcing& high,
                                      const NoiseBundle& noise, const SchemeConfig& cfg, double y0_low,
                                      double y0_high, double tol = 0.0, RunReport* report = nullptr) {
    if (y0_low > y0_high) {
        throw InvalidInput("compare_ordered: initial values must satisfy low <= high");
    }
    auto pl = solve_onedim(c, low, y0_low, noise, cfg, report);
    auto ph = solve_onedim(c, high, y0_high, noise, cfg, report);
    auto r = ordering_between(pl, ph, tol);
    r.low = std::move(pl);
    r.high = std::move(ph);
    return r;
}

inline OrderingReport compare_ordered(const CoefficientSet& c, const CadlagPath& low, const CadlagPath& high,
                                      const NoiseBundle& noise, const SchemeConfig& cfg, double y0_low,
                                      double y0_high, double tol = 0.0, RunReport* report = nullptr) {
    if (!(low.grid() == high.grid())) {
        throw InvalidInput("compare_ordered: drift paths live on different grids");
    }
    for (std::size_t k = 0; k < low.size(); ++k) {
        if (low[k] > high[k]) {
            throw InvalidInput("compare_ordered: low drift exceeds high drift at t=" + format_number(low.grid()[k]));
        }
    }
    if (low.horizon() != noise.grid.horizon()) {
        throw InvalidInput("compare_ordered: drift paths and noise have different horizons");
    }
    return compare_ordered(c, path_forcing(low), path_forcing(high), noise, cfg, y0_low, y0_high, tol, report);
}

}  // namespace jsde
