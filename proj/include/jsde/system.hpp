#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "jsde/coeffs.hpp"
#include "jsde/errors.hpp"
#include "jsde/noise.hpp"
#include "jsde/paths.hpp"
#include "jsde/solver.hpp"
#include "jsde/stats.hpp"

namespace jsde {

inline void check_noise_covers(const SystemSpec& spec, const NoiseBundle& noise) {
    if (noise.brownian.size() < spec.layout.brownian_factors) {
        throw InvalidInput("system: noise has fewer Brownian factors than the system needs");
    }
    if (noise.stable.size() < spec.layout.stable_alphas.size()) {
        throw InvalidInput("system: noise has fewer stable factors than the system needs");
    }
    if (noise.events.size() < spec.layout.event_sources.size()) {
        throw InvalidInput("system: noise has fewer event measures than the system needs");
    }
}

/// Joint stepping of all components. Drifts b_i are evaluated at the pre-step
/// state vector for every i before any component moves (Jacobi update).
inline std::vector<CadlagPath> solve_system(const SystemSpec& spec, const NoiseBundle& noise, const SchemeConfig& cfg,
                                            RunReport* report = nullptr) {
    validate_spec(spec);
    const NoiseBundle resolved = resolve_noise(noise, cfg);
    check_noise_covers(spec, resolved);
    const auto& grid = resolved.grid;
    const std::size_t n = spec.size();

    std::vector<ComponentStepper> steppers;
    steppers.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        check_scheme(spec.components[i], grid, cfg, report);
        steppers.emplace_back(spec.components[i], resolved, cfg, i);
    }

    std::vector<std::vector<double>> values(n, std::vector<double>(grid.size()));
    std::vector<std::vector<JumpRecord>> jumps(n);
    std::vector<double> state = spec.initial;
    std::vector<double> target(n);
    for (std::size_t i = 0; i < n; ++i) {
        values[i][0] = state[i];
    }
    for (std::size_t k = 0; k < grid.steps(); ++k) {
        const double t = grid[k];
        for (std::size_t i = 0; i < n; ++i) {
            target[i] = spec.drifts[i](t, state);
        }
        for (std::size_t i = 0; i < n; ++i) {
            state[i] = steppers[i].advance(k, state[i], target[i], &jumps[i]);
            values[i][k + 1] = state[i];
        }
    }
    std::vector<CadlagPath> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.emplace_back(grid, std::move(values[i]), std::move(jumps[i]));
    }
    return out;
}

/// Per-time summary of one observable.
struct MomentCurve {
    std::vector<double> mean;
    std::vector<double> stderr_mean;
    std::vector<double> q05;
    std::vector<double> q50;
    std::vector<double> q95;
    /// Estimate of E[int_0^T X_t dt] (left Riemann sum on the path grid).
    double integral_mean = 0.0;
    double integral_stderr = 0.0;
};

struct MomentSummary {
    std::vector<double> times;
    std::size_t paths = 0;
    std::vector<MomentCurve> components;
    /// (1/N) sum_i lambda^i.
    MomentCurve aggregate;
};

/// Streaming estimator; feed trajectories in a fixed order for reproducible output.
class MomentEstimator {
  public:
    MomentEstimator(std::size_t components, std::vector<double> times)
        : n_(components), times_(std::move(times)), samples_(components + 1), integrals_(components + 1) {
        if (components == 0) {
            throw InvalidInput("moments: need at least one component");
        }
        for (auto& s : samples_) {
            s.assign(times_.size(), {});
        }
    }

    void add(std::span<const CadlagPath> paths) {
        if (paths.size() != n_) {
            throw InvalidInput("moments: trajectory has the wrong component count");
        }
        std::vector<double> agg(times_.size(), 0.0);
        double agg_integral = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
            const auto& p = paths[i];
            for (std::size_t j = 0; j < times_.size(); ++j) {
                const double v = p.evaluate(times_[j]);
                samples_[i][j].push_back(v);
                agg[j] += v;
            }
            double integral = 0.0;
            for (std::size_t k = 0; k + 1 < p.size(); ++k) {
                integral += p[k] * p.grid().dt(k);
            }
            integrals_[i].add(integral);
            agg_integral += integral;
        }
        for (std::size_t j = 0; j < times_.size(); ++j) {
            samples_[n_][j].push_back(agg[j] / static_cast<double>(n_));
        }
        integrals_[n_].add(agg_integral / static_cast<double>(n_));
        ++count_;
    }

    std::size_t count() const noexcept { return count_; }

    MomentSummary summary() const {
        if (count_ < 2) {
            throw InvalidInput("moments: need at least two trajectories");
        }
        MomentSummary out;
        out.times = times_;
        out.paths = count_;
        for (std::size_t i = 0; i <= n_; ++i) {
            MomentCurve c;
            for (std::size_t j = 0; j < times_.size(); ++j) {
                RunningStats rs;
                for (double v : samples_[i][j]) {
                    rs.add(v);
                }
                auto copy = samples_[i][j];
                c.mean.push_back(rs.mean());
                c.stderr_mean.push_back(rs.stderr_mean());
                c.q05.push_back(quantile(copy, 0.05));
                c.q50.push_back(quantile(copy, 0.50));
                c.q95.push_back(quantile(copy, 0.95));
            }
            c.integral_mean = integrals_[i].mean();
            c.integral_stderr = integrals_[i].stderr_mean();
            if (i < n_) {
                out.components.push_back(std::move(c));
            } else {
                out.aggregate = std::move(c);
            }
        }
        return out;
    }

  private:
    std::size_t n_;
    std::vector<double> times_;
    std::vector<std::vector<std::vector<double>>> samples_;  // [component or aggregate][time][path]
    std::vector<RunningStats> integrals_;
    std::size_t count_ = 0;
};

/// Convenience wrapper over an in-memory ensemble: ensemble[path][component].
inline MomentSummary estimate_moments(const std::vector<std::vector<CadlagPath>>& ensemble,
                                      const std::vector<double>& times) {
    if (ensemble.size() < 2) {
        throw InvalidInput("moments: need at least two trajectories");
    }
    MomentEstimator est(ensemble.front().size(), times);
    for (const auto& traj : ensemble) {
        est.add(traj);
    }
    return est.summary();
}

}  // namespace jsde
