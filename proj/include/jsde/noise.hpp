#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numbers>
#include <vector>

#include "jsde/errors.hpp"
#include "jsde/rng.hpp"
#include "jsde/time_grid.hpp"

namespace jsde {

/// Point of a mark space. Scalar marks use `size` only; the thinning kernel
/// uses (position, size) = (v, zeta).
struct Mark {
    double size = 0.0;
    double position = 0.0;

    friend bool operator==(const Mark&, const Mark&) = default;
};

struct JumpEvent {
    double time = 0.0;
    Mark mark;
    std::size_t measure = 0;

    friend bool operator==(const JumpEvent&, const JumpEvent&) = default;
};

using MarkSampler = std::function<Mark(Stream&)>;

inline void require_grid(const TimeGrid& grid) {
    if (grid.empty()) {
        throw InvalidInput("noise: empty time grid");
    }
}

/// Independent N(0, dt_k) increments, one array per factor.
inline std::vector<std::vector<double>> gen_brownian(const TimeGrid& grid, std::size_t factors,
                                                     SeedLineage lineage) {
    require_grid(grid);
    if (factors == 0) {
        throw InvalidInput("gen_brownian: need at least one factor");
    }
    std::vector<std::vector<double>> out(factors, std::vector<double>(grid.steps()));
    for (std::size_t f = 0; f < factors; ++f) {
        Stream stream(lineage, kBrownianStream + f);
        for (std::size_t k = 0; k < grid.steps(); ++k) {
            out[f][k] = std::sqrt(grid.dt(k)) * stream.normal();
        }
    }
    return out;
}

/// Chambers-Mallows-Stuck sampler for the totally right-skewed stable law
/// S_alpha(1, 1, 0) (Samorodnitsky-Taqqu parametrization), alpha in (1, 2].
///
/// Characteristic function: exp(-|t|^alpha (1 - i tan(pi alpha / 2) sign t)).
/// At alpha = 2 this is N(0, 2).
class StableSampler {
  public:
    explicit StableSampler(double alpha) : alpha_(alpha) {
        if (!(alpha > 1.0 && alpha <= 2.0)) {
            throw InvalidInput("stable: alpha must lie in (1, 2]");
        }
        if (alpha_ < 2.0) {
            const double t = std::tan(std::numbers::pi * alpha_ / 2.0);
            shift_ = std::atan(t) / alpha_;
            scale_ = std::pow(1.0 + t * t, 1.0 / (2.0 * alpha_));
        }
    }

    double alpha() const noexcept { return alpha_; }

    double operator()(Stream& stream) const {
        const double v = stream.uniform(-std::numbers::pi / 2.0, std::numbers::pi / 2.0);
        const double w = stream.exponential();
        if (alpha_ == 2.0) {
            return 2.0 * std::sin(v) * std::sqrt(w);
        }
        const double av = alpha_ * (v + shift_);
        return scale_ * std::sin(av) / std::pow(std::cos(v), 1.0 / alpha_) *
               std::pow(std::cos(v - av) / w, (1.0 - alpha_) / alpha_);
    }

  private:
    double alpha_;
    double shift_ = 0.0;
    double scale_ = 1.0;
};

/// Increments of a compensated spectrally positive alpha-stable process:
/// the step-k increment is dt_k^{1/alpha} times a unit S_alpha(1, 1, 0) draw.
inline std::vector<double> gen_stable_increments(const TimeGrid& grid, double alpha,
                                                 SeedLineage lineage, std::size_t factor = 0) {
    require_grid(grid);
    const StableSampler sampler(alpha);
    Stream stream(lineage, kStableStream + factor);
    std::vector<double> out(grid.steps());
    for (std::size_t k = 0; k < grid.steps(); ++k) {
        out[k] = std::pow(grid.dt(k), 1.0 / alpha) * sampler(stream);
    }
    return out;
}

/// Atoms of a Poisson random measure with intensity rate * dt * law(mark) on
/// (0, T], sorted by time.
inline std::vector<JumpEvent> gen_finite_activity_events(double rate, const MarkSampler& sampler,
                                                         const TimeGrid& grid, SeedLineage lineage,
                                                         std::size_t measure = 0) {
    require_grid(grid);
    if (!std::isfinite(rate) || rate < 0.0) {
        throw InvalidInput("gen_finite_activity_events: rate must be finite and >= 0");
    }
    std::vector<JumpEvent> events;
    if (rate == 0.0) {
        return events;
    }
    Stream stream(lineage, kEventStream + measure);
    const double horizon = grid.horizon();
    const auto count = stream.poisson(rate * horizon);
    events.resize(count);
    for (auto& e : events) {
        e.time = horizon * (1.0 - stream.uniform());
        e.measure = measure;
    }
    std::sort(events.begin(), events.end(),
              [](const JumpEvent& a, const JumpEvent& b) { return a.time < b.time; });
    for (auto& e : events) {
        e.mark = sampler(stream);
    }
    return events;
}

struct EventSource {
    double rate = 0.0;
    MarkSampler sampler;
};

/// What a system needs from its driving noise.
struct NoiseLayout {
    std::size_t brownian_factors = 0;
    std::vector<double> stable_alphas;
    std::vector<EventSource> event_sources;
};

/// All driving randomness of one trajectory.
struct NoiseBundle {
    TimeGrid grid;
    std::vector<std::vector<double>> brownian;  // [factor][step]
    std::vector<std::vector<double>> stable;    // [factor][step]
    std::vector<double> stable_alphas;
    std::vector<std::vector<JumpEvent>> events;  // [measure]
    SeedLineage lineage;

    /// Aggregates increments over blocks of `factor` steps. Events are kept.
    NoiseBundle coarsen(std::size_t factor) const {
        NoiseBundle out;
        out.grid = grid.coarsen(factor);
        auto sum_blocks = [&](const std::vector<double>& fine) {
            std::vector<double> coarse(out.grid.steps(), 0.0);
            for (std::size_t k = 0; k < fine.size(); ++k) {
                coarse[k / factor] += fine[k];
            }
            return coarse;
        };
        for (const auto& b : brownian) {
            out.brownian.push_back(sum_blocks(b));
        }
        for (const auto& z : stable) {
            out.stable.push_back(sum_blocks(z));
        }
        out.stable_alphas = stable_alphas;
        out.events = events;
        out.lineage = lineage;
        return out;
    }
};

inline NoiseBundle make_noise(const NoiseLayout& layout, const TimeGrid& grid, SeedLineage lineage) {
    require_grid(grid);
    NoiseBundle bundle;
    bundle.grid = grid;
    bundle.lineage = lineage;
    if (layout.brownian_factors > 0) {
        bundle.brownian = gen_brownian(grid, layout.brownian_factors, lineage);
    }
    bundle.stable_alphas = layout.stable_alphas;
    for (std::size_t f = 0; f < layout.stable_alphas.size(); ++f) {
        bundle.stable.push_back(gen_stable_increments(grid, layout.stable_alphas[f], lineage, f));
    }
    for (std::size_t m = 0; m < layout.event_sources.size(); ++m) {
        const auto& src = layout.event_sources[m];
        bundle.events.push_back(gen_finite_activity_events(src.rate, src.sampler, grid, lineage, m));
    }
    return bundle;
}

/// Noise with increments only on steps [k_begin, k_end) and events only in
/// (t_{k_begin}, t_{k_end}); everything else is zero. Used for continuations
/// branched from an existing trajectory.
inline NoiseBundle make_noise_window(const NoiseLayout& layout, const TimeGrid& grid, SeedLineage lineage,
                                     std::size_t k_begin, std::size_t k_end) {
    require_grid(grid);
    if (k_begin > k_end || k_end > grid.steps()) {
        throw InvalidInput("make_noise_window: step window outside the grid");
    }
    NoiseBundle bundle;
    bundle.grid = grid;
    bundle.lineage = lineage;
    bundle.stable_alphas = layout.stable_alphas;
    bundle.brownian.assign(layout.brownian_factors, std::vector<double>(grid.steps(), 0.0));
    for (std::size_t f = 0; f < layout.brownian_factors; ++f) {
        Stream stream(lineage, kBrownianStream + f);
        for (std::size_t k = k_begin; k < k_end; ++k) {
            bundle.brownian[f][k] = std::sqrt(grid.dt(k)) * stream.normal();
        }
    }
    for (std::size_t f = 0; f < layout.stable_alphas.size(); ++f) {
        const StableSampler sampler(layout.stable_alphas[f]);
        Stream stream(lineage, kStableStream + f);
        std::vector<double> z(grid.steps(), 0.0);
        for (std::size_t k = k_begin; k < k_end; ++k) {
            z[k] = std::pow(grid.dt(k), 1.0 / layout.stable_alphas[f]) * sampler(stream);
        }
        bundle.stable.push_back(std::move(z));
    }
    const double t0 = grid[k_begin];
    const double t1 = grid[k_end];
    for (std::size_t m = 0; m < layout.event_sources.size(); ++m) {
        const auto& src = layout.event_sources[m];
        std::vector<JumpEvent> events;
        if (src.rate > 0.0 && t1 > t0) {
            Stream stream(lineage, kEventStream + m);
            events.resize(stream.poisson(src.rate * (t1 - t0)));
            for (auto& e : events) {
                e.time = t0 + (t1 - t0) * (1.0 - stream.uniform());
                e.measure = m;
            }
            std::sort(events.begin(), events.end(),
                      [](const JumpEvent& a, const JumpEvent& b) { return a.time < b.time; });
            for (auto& e : events) {
                e.mark = src.sampler(stream);
            }
        }
        bundle.events.push_back(std::move(events));
    }
    return bundle;
}

}  // namespace jsde
