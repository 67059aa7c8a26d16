#pragma once

// Yamada-Watanabe test functions phi_k (smooth, even, convex approximations
// of |x| with phi'' <= (2/k)/rho^2) and a refinement-based self-consistency
// diagnostic for the simulated system. The diagnostic is evidence, not proof.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include "jsde/coeffs.hpp"
#include "jsde/errors.hpp"
#include "jsde/noise.hpp"
#include "jsde/parallel.hpp"
#include "jsde/solver.hpp"
#include "jsde/stats.hpp"
#include "jsde/system.hpp"

namespace jsde {

/// int_lo^hi dz / rho(z)^2. Closed form for power laws and tables, otherwise adaptive
/// Gauss-Kronrod in log z.
inline double inverse_square_integral(const Modulus& rho, double lo, double hi) {
    if (!(lo > 0.0) || !(hi >= lo)) {
        throw InvalidInput("inverse_square_integral: need 0 < lo <= hi");
    }
    if (lo == hi) {
        return 0.0;
    }
    if (rho.is_power()) {
        const double s2 = rho.scale() * rho.scale();
        const double e = 1.0 - 2.0 * rho.exponent();
        if (e == 0.0) {
            return std::log(hi / lo) / s2;
        }
        return (std::pow(hi, e) - std::pow(lo, e)) / (e * s2);
    }
    if (rho.kind() == Modulus::Kind::tabulated) {
        // Linear on each piece: int dz / (c + d z)^2 = (z2 - z1) / (rho(z1) rho(z2)).
        double total = 0.0;
        double z1 = lo;
        const auto& xs = rho.nodes();
        auto it = std::upper_bound(xs.begin(), xs.end(), lo);
        while (z1 < hi) {
            const double z2 = it == xs.end() ? hi : std::min(*it++, hi);
            total += (z2 - z1) / (rho(z1) * rho(z2));
            z1 = z2;
        }
        return total;
    }
    auto f = [&](double w) {
        const double z = std::exp(w);
        const double r = rho(z);
        return z / (r * r);
    };
    double err = 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, std::log(lo), std::log(hi), 15, 1e-13,
                                                                         &err);
}

/// a_0 = x_m > a_1 > ... with int_{a_k}^{a_{k-1}} dz/rho^2 = k.
inline std::vector<double> yw_sequence(const Modulus& rho, double xm, unsigned k_max) {
    if (!(xm > 0.0) || !std::isfinite(xm)) {
        throw InvalidInput("yw_sequence: x_m must be positive and finite");
    }
    std::vector<double> a{xm};
    if (rho.is_power()) {
        const double s = rho.scale();
        const double g = rho.exponent();
        if (!(s > 0.0)) {
            throw InvalidInput("yw_sequence: modulus scale must be positive");
        }
        if (g < 0.5) {
            throw InvalidInput("yw_sequence: int dz/rho^2 converges at 0 for exponent " + format_number(g) +
                               " < 1/2");
        }
        const double s2 = s * s;
        for (unsigned k = 1; k <= k_max; ++k) {
            const double kk = static_cast<double>(k);
            const double prev = a.back();
            double next;
            if (g == 0.5) {
                next = prev * std::exp(-kk * s2);
            } else {
                const double e = 1.0 - 2.0 * g;
                next = std::pow(std::pow(prev, e) + kk * s2 * (2.0 * g - 1.0), 1.0 / e);
            }
            if (!(next > 0.0)) {
                throw NumericError("yw_sequence: a_k underflowed", k, 0);
            }
            a.push_back(next);
        }
        return a;
    }
    for (unsigned k = 1; k <= k_max; ++k) {
        const double prev = a.back();
        const double target = static_cast<double>(k);
        // Solve in w = log(prev / a): F(w) = int_{prev e^-w}^{prev} - k, increasing in w.
        auto F = [&](double w) { return inverse_square_integral(rho, prev * std::exp(-w), prev) - target; };
        double hi = 1.0;
        while (F(hi) < 0.0) {
            hi *= 2.0;
            if (prev * std::exp(-hi) < 1e-300) {
                throw InvalidInput("yw_sequence: int dz/rho^2 does not reach " + format_number(target) +
                                   " near 0; the modulus does not satisfy the divergence condition");
            }
        }
        std::uintmax_t iters = 200;
        const auto r = boost::math::tools::toms748_solve(F, 0.0, hi, F(0.0), F(hi),
                                                         boost::math::tools::eps_tolerance<double>(50), iters);
        a.push_back(prev * std::exp(-0.5 * (r.first + r.second)));
    }
    return a;
}

namespace detail {

/// Smooth step: 0 for v <= 0, 1 for v >= 1, s(v) + s(1-v) = 1.
inline double smooth_step(double v) {
    if (v <= 0.0) {
        return 0.0;
    }
    if (v >= 1.0) {
        return 1.0;
    }
    const double f = std::exp(-1.0 / v);
    const double g = std::exp(-1.0 / (1.0 - v));
    return f / (f + g);
}

/// Flat-top bump on (0,1): rises over (0, delta), falls over (1-delta, 1).
inline double flat_bump(double v, double delta) {
    if (v <= 0.0 || v >= 1.0) {
        return 0.0;
    }
    return smooth_step(v / delta) * smooth_step((1.0 - v) / delta);
}

}  // namespace detail

/// phi_k with phi(0) = 0, phi'' = psi supported in (a_k, a_{k-1}), int psi = 1.
/// psi = c h(u(x)/k) / rho(x)^2 with u(x) = int_{a_k}^x dz/rho^2 in [0, k],
/// so int psi = c k int_0^1 h and the bound psi <= (2/k)/rho^2 reads
/// max h <= 2 int_0^1 h.
class TestFunction {
  public:
    struct Value {
        double phi;
        double d1;
        double d2;
    };

    TestFunction(Modulus rho, double a_lo, double a_hi, unsigned k) : rho_(std::move(rho)), lo_(a_lo), hi_(a_hi), k_(k) {
        if (!(a_lo > 0.0) || !(a_hi > a_lo) || k < 1) {
            throw InvalidInput("TestFunction: need 0 < a_k < a_{k-1} and k >= 1");
        }
        double delta = 0.25;
        for (int attempt = 0; attempt < 8; ++attempt, delta *= 0.5) {
            build_profile(delta);
            if (bump_ratio_ <= 2.0) {
                break;
            }
        }
        if (bump_ratio_ > 2.0) {
            throw NumericError("TestFunction: psi <= (2/k)/rho^2 cannot be met", k, 0);
        }
        build_table();
    }

    unsigned k() const noexcept { return k_; }
    double support_lo() const noexcept { return lo_; }
    double support_hi() const noexcept { return hi_; }
    double delta() const noexcept { return delta_; }
    /// x - phi(x) for x >= a_{k-1}; in [0, a_{k-1}].
    double deficit() const noexcept { return deficit_; }
    /// max h / (k int h), the constant c * max h; <= 2/k required.
    double psi_constant() const noexcept { return bump_ratio_ / static_cast<double>(k_); }

    Value operator()(double x) const {
        const double ax = std::abs(x);
        const double sgn = x < 0.0 ? -1.0 : 1.0;
        if (ax <= lo_) {
            return {0.0, 0.0, 0.0};
        }
        if (ax >= hi_) {
            return {ax - deficit_, sgn, 0.0};
        }
        const double u = inverse_square_integral(rho_, lo_, ax);
        const double d1 = first_derivative(u);
        const double r = rho_(ax);
        const double d2 = profile_h(u / static_cast<double>(k_)) / (static_cast<double>(k_) * mass_ * r * r);
        auto it = std::upper_bound(xs_.begin(), xs_.end(), ax);
        const auto j = static_cast<std::size_t>(it - xs_.begin()) - 1;
        double phi = phis_[j] + 0.5 * (ax - xs_[j]) * (d1s_[j] + d1);
        phi = std::clamp(phi, std::max(0.0, ax - hi_), ax - lo_);
        return {phi, sgn * d1, d2};
    }

    double phi(double x) const { return (*this)(x).phi; }

  private:
    static constexpr std::size_t kProfileNodes = 1 << 13;
    static constexpr std::size_t kTableNodes = 1 << 12;

    double profile_h(double v) const { return detail::flat_bump(v, delta_); }

    void build_profile(double delta) {
        delta_ = delta;
        cum_.assign(kProfileNodes + 1, 0.0);
        double hmax = 0.0;
        const double dv = 1.0 / static_cast<double>(kProfileNodes);
        for (std::size_t j = 0; j < kProfileNodes; ++j) {
            const double v0 = dv * static_cast<double>(j);
            const double h0 = profile_h(v0);
            const double hm = profile_h(v0 + 0.5 * dv);
            const double h1 = profile_h(v0 + dv);
            cum_[j + 1] = cum_[j] + dv * (h0 + 4.0 * hm + h1) / 6.0;
            hmax = std::max({hmax, h0, hm});
        }
        mass_ = cum_.back();
        bump_ratio_ = hmax / mass_;
    }

    /// phi'(x) = (int_0^{u/k} h) / int_0^1 h.
    double first_derivative(double u) const {
        const double v = std::clamp(u / static_cast<double>(k_), 0.0, 1.0);
        const double pos = v * static_cast<double>(kProfileNodes);
        const auto j = std::min(static_cast<std::size_t>(pos), kProfileNodes - 1);
        const double w = pos - static_cast<double>(j);
        return std::min(1.0, ((1.0 - w) * cum_[j] + w * cum_[j + 1]) / mass_);
    }

    void build_table() {
        xs_.resize(kTableNodes + 1);
        d1s_.resize(kTableNodes + 1);
        phis_.resize(kTableNodes + 1);
        const double ratio = std::log(hi_ / lo_);
        for (std::size_t j = 0; j <= kTableNodes; ++j) {
            xs_[j] = j == kTableNodes ? hi_
                                      : lo_ * std::exp(ratio * static_cast<double>(j) / static_cast<double>(kTableNodes));
            d1s_[j] = j == 0 ? 0.0 : j == kTableNodes ? 1.0 : first_derivative(inverse_square_integral(rho_, lo_, xs_[j]));
        }
        phis_[0] = 0.0;
        for (std::size_t j = 1; j <= kTableNodes; ++j) {
            phis_[j] = phis_[j - 1] + 0.5 * (xs_[j] - xs_[j - 1]) * (d1s_[j - 1] + d1s_[j]);
        }
        deficit_ = std::clamp(hi_ - phis_.back(), 0.0, hi_);
    }

    Modulus rho_;
    double lo_;
    double hi_;
    unsigned k_;
    double delta_ = 0.25;
    double mass_ = 0.0;
    double bump_ratio_ = 0.0;
    double deficit_ = 0.0;
    std::vector<double> cum_;
    std::vector<double> xs_;
    std::vector<double> d1s_;
    std::vector<double> phis_;
};

struct TestFunctionFamily {
    Modulus rho;
    double xm = 1.0;
    std::vector<double> a;

    TestFunctionFamily(Modulus r, double x_m, unsigned k_max) : rho(std::move(r)), xm(x_m), a(yw_sequence(rho, xm, k_max)) {}

    unsigned k_max() const noexcept { return static_cast<unsigned>(a.size() - 1); }
};

inline TestFunction build_phi(const TestFunctionFamily& family, unsigned k) {
    if (k < 1 || k > family.k_max()) {
        throw InvalidInput("build_phi: k outside the computed a_k sequence");
    }
    return TestFunction(family.rho, family.a[k], family.a[k - 1], k);
}

struct UniquenessConfig {
    /// Step sizes, coarse to fine; each must be an integer multiple of the next.
    std::vector<double> ladder;
    std::size_t paths = 1000;
    std::uint64_t seed = 0;
    Scheme scheme = Scheme::explicit_euler_clipped;
    bool clip_at_zero = true;
    /// Trajectories that exceed this value on any rung are discarded.
    double ceiling = std::numeric_limits<double>::infinity();
    std::vector<unsigned> phi_levels{1, 2, 5, 10};
    double xm = 1.0;
    std::size_t jobs = 1;
};

struct DivergenceRow {
    double coarse_step = 0.0;
    double fine_step = 0.0;
    /// sup over components and coarse-grid times of |coarse - fine|.
    RunningStats sup_abs;
    /// Per report time, averaged over components.
    std::vector<RunningStats> mean_abs;
    /// [phi level][time].
    std::vector<std::vector<RunningStats>> phi_mean;
};

struct UniquenessReport {
    std::vector<double> times;
    std::vector<unsigned> phi_levels;
    std::vector<double> a;
    std::vector<DivergenceRow> rows;
    std::size_t accepted = 0;
    std::size_t discarded = 0;
};

namespace detail {

inline std::vector<std::size_t> ladder_factors(const std::vector<double>& ladder, double horizon) {
    if (ladder.empty()) {
        throw InvalidInput("uniqueness: empty refinement ladder");
    }
    const double finest = ladder.back();
    const double steps = horizon / finest;
    if (!(finest > 0.0) || std::abs(steps - std::round(steps)) > 1e-9 * steps) {
        throw InvalidInput("uniqueness: finest step does not divide the horizon");
    }
    std::vector<std::size_t> factors;
    for (std::size_t r = 0; r < ladder.size(); ++r) {
        if (r + 1 < ladder.size()) {
            const double q = ladder[r] / ladder[r + 1];
            if (!(q >= 1.0) || std::abs(q - std::round(q)) > 1e-9 * q) {
                throw InvalidInput("uniqueness: ladder grids are not nested (" + format_number(ladder[r]) + " vs " +
                                   format_number(ladder[r + 1]) + ")");
            }
        }
        factors.push_back(static_cast<std::size_t>(std::llround(ladder[r] / finest)));
    }
    return factors;
}

struct TrialSample {
    bool accepted = true;
    std::vector<double> sup_abs;                            // [row]
    std::vector<std::vector<double>> mean_abs;              // [row][time]
    std::vector<std::vector<std::vector<double>>> phi_mean;  // [row][level][time]
};

}  // namespace detail

/// Solves the system on every rung of the ladder with one noise realisation
/// per trial (generated on the finest rung and aggregated) and reports the
/// divergence between consecutive rungs at the coarsest grid's times.
inline UniquenessReport uniqueness_trial(const SystemSpec& spec, double horizon, const UniquenessConfig& cfg,
                                         RunReport* report = nullptr) {
    validate_spec(spec);
    if (cfg.paths < 2) {
        throw InvalidInput("uniqueness: need at least two paths");
    }
    const auto factors = detail::ladder_factors(cfg.ladder, horizon);
    const std::size_t fine_steps = static_cast<std::size_t>(std::llround(horizon / cfg.ladder.back()));
    const auto fine_grid = TimeGrid::uniform(horizon, fine_steps);
    const auto coarse_grid = fine_grid.coarsen(factors.front());
    TestFunctionFamily family(spec.components.front().rho, cfg.xm,
                              cfg.phi_levels.empty() ? 1 : *std::max_element(cfg.phi_levels.begin(), cfg.phi_levels.end()));
    std::vector<TestFunction> phis;
    for (unsigned k : cfg.phi_levels) {
        phis.push_back(build_phi(family, k));
    }
    const std::size_t rungs = cfg.ladder.size();
    const std::size_t n_rows = rungs == 1 ? 1 : rungs - 1;
    const std::size_t n_times = coarse_grid.size();
    const auto N = static_cast<double>(spec.size());

    if (report) {
        for (std::size_t r = 0; r < rungs; ++r) {
            for (const auto& c : spec.components) {
                check_scheme(c, fine_grid.coarsen(factors[r]), SchemeConfig{cfg.scheme, 0.0, cfg.clip_at_zero}, report);
            }
        }
    }

    auto produce = [&](std::size_t p) {
        const auto noise = make_noise(spec.layout, fine_grid, SeedLineage{cfg.seed, p});
        std::vector<std::vector<CadlagPath>> sol;
        detail::TrialSample s;
        for (std::size_t r = 0; r < rungs; ++r) {
            SchemeConfig sc{cfg.scheme, 0.0, cfg.clip_at_zero};
            sol.push_back(solve_system(spec, factors[r] == 1 ? noise : noise.coarsen(factors[r]), sc));
            for (const auto& path : sol.back()) {
                for (double v : path.values()) {
                    if (v > cfg.ceiling) {
                        s.accepted = false;
                    }
                }
                for (const auto& j : path.jumps()) {
                    if (j.left > cfg.ceiling || j.right > cfg.ceiling) {
                        s.accepted = false;
                    }
                }
            }
        }
        if (!s.accepted) {
            return s;
        }
        for (std::size_t row = 0; row < n_rows; ++row) {
            const auto& a = sol[row];
            const auto& b = sol[rungs == 1 ? row : row + 1];
            double sup = 0.0;
            std::vector<double> mabs(n_times, 0.0);
            std::vector<std::vector<double>> mphi(phis.size(), std::vector<double>(n_times, 0.0));
            for (std::size_t i = 0; i < a.size(); ++i) {
                for (std::size_t j = 0; j < n_times; ++j) {
                    const double t = coarse_grid[j];
                    const double d = a[i].evaluate(t) - b[i].evaluate(t);
                    sup = std::max(sup, std::abs(d));
                    mabs[j] += std::abs(d) / N;
                    for (std::size_t q = 0; q < phis.size(); ++q) {
                        mphi[q][j] += phis[q].phi(d) / N;
                    }
                }
            }
            s.sup_abs.push_back(sup);
            s.mean_abs.push_back(std::move(mabs));
            s.phi_mean.push_back(std::move(mphi));
        }
        return s;
    };

    UniquenessReport out;
    out.times.assign(coarse_grid.points().begin(), coarse_grid.points().end());
    out.phi_levels = cfg.phi_levels;
    out.a = family.a;
    for (std::size_t row = 0; row < n_rows; ++row) {
        DivergenceRow r;
        r.coarse_step = cfg.ladder[row];
        r.fine_step = cfg.ladder[rungs == 1 ? row : row + 1];
        r.mean_abs.assign(n_times, {});
        r.phi_mean.assign(phis.size(), std::vector<RunningStats>(n_times));
        out.rows.push_back(std::move(r));
    }
    ordered_parallel(cfg.paths, cfg.jobs, produce, [&](std::size_t, detail::TrialSample s) {
        if (!s.accepted) {
            ++out.discarded;
            return;
        }
        ++out.accepted;
        for (std::size_t row = 0; row < n_rows; ++row) {
            auto& r = out.rows[row];
            r.sup_abs.add(s.sup_abs[row]);
            for (std::size_t j = 0; j < n_times; ++j) {
                r.mean_abs[j].add(s.mean_abs[row][j]);
                for (std::size_t q = 0; q < phis.size(); ++q) {
                    r.phi_mean[q][j].add(s.phi_mean[row][q][j]);
                }
            }
        }
    });
    return out;
}

}  // namespace jsde
