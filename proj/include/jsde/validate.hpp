#pragma once

// Sampled checks of the coefficient conditions. A sampled check can only
// falsify; "pass" means no counterexample was found on the sample.

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "jsde/coeffs.hpp"
#include "jsde/errors.hpp"
#include "jsde/format.hpp"
#include "jsde/rng.hpp"

namespace jsde {

enum class Verdict { pass, fail, unchecked };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::pass:
            return "pass";
        case Verdict::fail:
            return "fail";
        case Verdict::unchecked:
            return "unchecked";
    }
    return "?";
}

struct Finding {
    std::string condition;
    Verdict verdict = Verdict::pass;
    std::string detail;
    std::vector<double> witness;
};

struct ValidationReport {
    std::string subject;
    std::vector<Finding> findings;

    bool passed() const {
        return std::none_of(findings.begin(), findings.end(),
                            [](const Finding& f) { return f.verdict == Verdict::fail; });
    }

    const Finding* find(const std::string& condition) const {
        for (const auto& f : findings) {
            if (f.condition == condition) {
                return &f;
            }
        }
        return nullptr;
    }

    Verdict verdict_of(const std::string& condition) const {
        const auto* f = find(condition);
        if (!f) {
            throw InvalidInput("no finding named " + condition);
        }
        return f->verdict;
    }
};

struct SamplingConfig {
    std::size_t samples = 2000;
    double state_max = 10.0;
    /// Truncation level m of the rho_m / r_m conditions.
    double truncation = 1.0;
    std::uint64_t seed = 0x5eedULL;
};

namespace detail {

// Rounding allowance for inequalities that hold with equality in exact arithmetic.
inline constexpr double kRelTol = 1e-12;

inline bool exceeds(double lhs, double rhs) { return lhs > rhs * (1.0 + kRelTol) + 1e-300; }

inline double checked(double v, const std::string& what, double at) {
    if (!std::isfinite(v)) {
        throw InvalidInput(what + " is not evaluable at x=" + format_number(at));
    }
    return v;
}

/// Uniform grid, geometric points near `lo`, and random points, sorted.
inline std::vector<double> sample_points(double lo, double hi, std::size_t n, Stream& s) {
    std::vector<double> pts;
    const std::size_t third = std::max<std::size_t>(n / 3, 2);
    for (std::size_t k = 0; k < third; ++k) {
        pts.push_back(lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(third - 1));
    }
    for (std::size_t k = 0; k < third; ++k) {
        const double e = -12.0 * static_cast<double>(k) / static_cast<double>(third - 1);
        pts.push_back(lo + (hi - lo) * std::pow(10.0, e));
    }
    while (pts.size() < n) {
        pts.push_back(s.uniform(lo, hi));
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
}

/// Random pairs plus near-diagonal pairs with geometric separations.
inline std::vector<std::pair<double, double>> sample_pairs(double lo, double hi, std::size_t n, Stream& s) {
    std::vector<std::pair<double, double>> pairs;
    const std::size_t half = std::max<std::size_t>(n / 2, 1);
    for (std::size_t k = 0; k < half; ++k) {
        pairs.emplace_back(s.uniform(lo, hi), s.uniform(lo, hi));
    }
    for (std::size_t k = 0; pairs.size() < n; ++k) {
        const double d = (hi - lo) * std::pow(10.0, -10.0 * s.uniform());
        const double x = s.uniform(lo, hi - d);
        pairs.emplace_back(x, x + d);
        if (k % 8 == 0) {
            pairs.emplace_back(lo, lo + d);
        }
    }
    return pairs;
}

/// Marks u > 0 on a log scale, for the stable kernels.
inline std::vector<double> stable_marks() {
    std::vector<double> u;
    for (int e = -6; e <= 6; ++e) {
        u.push_back(std::pow(10.0, e));
        u.push_back(3.0 * std::pow(10.0, e));
    }
    return u;
}

}  // namespace detail

/// int |min(g(x,u), m) - min(g(y,u), m)|^2 against the Levy measure of one
/// stable loading, g(x, u) = coef (x+)^{1/alpha} u. Alpha = 2 counts the
/// Gaussian variance 2 coef^2 (sqrt x - sqrt y)^2.
inline double stable_truncated_l2(const StableLoading& s, double x, double y, double m) {
    double p = s.scale_at(x);
    double q = s.scale_at(y);
    if (p < q) {
        std::swap(p, q);
    }
    if (p == q) {
        return 0.0;
    }
    if (s.alpha == 2.0) {
        return 2.0 * (p - q) * (p - q);
    }
    const double a = s.alpha;
    const double c = stable_levy_constant(a);
    // u < m/p: both untruncated.
    const double lo = m / p;
    double total = (p - q) * (p - q) * std::pow(lo, 2.0 - a) / (2.0 - a);
    if (q == 0.0) {
        total += m * m * std::pow(lo, -a) / a;
    } else {
        // m/p <= u < m/q: only the larger one truncated. With w = q u / m this is
        // m^{2-a} q^a int_r^1 (1-w)^2 w^{-1-a} dw, r = q/p.
        const double r = q / p;
        double inner = 0.0;
        if (r > 0.5) {
            // Closed form cancels badly near r = 1; the integrand is smooth here.
            auto f = [&](double w) { return (1.0 - w) * (1.0 - w) * std::pow(w, -1.0 - a); };
            inner = boost::math::quadrature::gauss<double, 30>::integrate(f, r, 1.0);
        } else {
            auto F = [&](double w) {
                return -std::pow(w, -a) / a - 2.0 * std::pow(w, 1.0 - a) / (1.0 - a) + std::pow(w, 2.0 - a) / (2.0 - a);
            };
            inner = F(1.0) - F(r);
        }
        total += std::pow(m, 2.0 - a) * std::pow(q, a) * inner;
    }
    return c * total;
}

/// int |min(g0(x,.), m) - min(g0(y,.), m)|^2 dmu0 over all g0 terms of c.
inline double g0_truncated_l2(const CoefficientSet& c, double x, double y, double m) {
    double total = 0.0;
    for (const auto& s : c.stable) {
        total += stable_truncated_l2(s, x, y, m);
    }
    if (c.thinning) {
        const double v = c.thinning->v_range;
        total += std::abs(std::min(positive_part(x), v) - std::min(positive_part(y), v)) *
                 c.thinning->levy.truncated_second_moment(m);
    }
    return total;
}

/// int |g0(x,.)| ^ |g0(x,.)|^2 dmu0.
inline double g0_local_integral(const CoefficientSet& c, double x) {
    double total = 0.0;
    for (const auto& s : c.stable) {
        const double p = s.scale_at(x);
        if (p == 0.0) {
            continue;
        }
        if (s.alpha == 2.0) {
            total += 2.0 * p * p;
            continue;
        }
        total += stable_levy_constant(s.alpha) * std::pow(p, s.alpha) *
                 (1.0 / (2.0 - s.alpha) + 1.0 / (s.alpha - 1.0));
    }
    if (c.thinning) {
        total += std::min(positive_part(x), c.thinning->v_range) * c.thinning->levy.min_linear_square();
    }
    return total;
}

/// int |min(g1(x,.), m) - min(g1(y,.), m)| dmu1.
inline double g1_truncated_l1(const JumpKernel& g1, double x, double y, double m) {
    return std::abs(g1.measure.truncated_mean(g1.h(x), m) - g1.measure.truncated_mean(g1.h(y), m));
}

namespace detail {

inline Finding divergence_finding(const std::string& name, const Modulus& rho, double power) {
    Finding f{name, Verdict::unchecked, {}, {}};
    const auto div = rho.integral_diverges(power);
    if (!div) {
        f.detail = "modulus " + rho.describe() + " has no symbolic form";
        return f;
    }
    f.verdict = *div ? Verdict::pass : Verdict::fail;
    f.detail = "modulus " + rho.describe() + (*div ? ": integral diverges" : ": integral converges");
    return f;
}

}  // namespace detail

inline ValidationReport validate_assum1(const CoefficientSet& c, const SamplingConfig& cfg) {
    if (cfg.samples < 1) {
        throw InvalidInput("validate: sample budget must be >= 1");
    }
    if (!(cfg.state_max > 0.0) || !(cfg.truncation > 0.0)) {
        throw InvalidInput("validate: state range and truncation level must be positive");
    }
    ValidationReport rep;
    rep.subject = "assum1";
    Stream s(cfg.seed);
    const auto xs = detail::sample_points(0.0, cfg.state_max, cfg.samples, s);

    {
        Finding f{"sigma_zero_nonpositive", Verdict::pass, "sigma(x) = 0 on sampled x <= 0", {}};
        for (double x : xs) {
            const double v = detail::checked(c.sigma(-x), "sigma", -x);
            if (v != 0.0) {
                f = {f.condition, Verdict::fail, "sigma(" + format_number(-x) + ") = " + format_number(v), {-x, v}};
                break;
            }
        }
        rep.findings.push_back(f);
    }
    {
        Finding f{"sigma_modulus", Verdict::pass, "|sigma(x)-sigma(y)| <= rho(|x-y|) on sampled pairs", {}};
        double worst = 0.0;
        for (auto [x, y] : detail::sample_pairs(0.0, cfg.state_max, cfg.samples, s)) {
            const double lhs = std::abs(detail::checked(c.sigma(x), "sigma", x) - detail::checked(c.sigma(y), "sigma", y));
            const double rhs = detail::checked(c.rho(std::abs(x - y)), "rho", std::abs(x - y));
            if (detail::exceeds(lhs, rhs) && lhs - rhs > worst) {
                worst = lhs - rhs;
                f.verdict = Verdict::fail;
                f.witness = {x, y, lhs, rhs};
                f.detail = "pair (" + format_number(x) + ", " + format_number(y) + "): " + format_number(lhs) +
                           " > " + format_number(rhs);
            }
        }
        rep.findings.push_back(f);
    }
    rep.findings.push_back(detail::divergence_finding("rho_divergence", c.rho, 2.0));

    const bool has_g0 = !c.stable.empty() || c.thinning.has_value();
    {
        Finding f{"g0_increasing", Verdict::pass, has_g0 ? "g0(., u) nondecreasing on sampled x" : "no g0 term", {}};
        auto probe = [&](auto&& g, double u) {
            double prev = g(-1.0);
            double prev_x = -1.0;
            for (double x : xs) {
                const double v = g(x);
                if (v < prev) {
                    f = {f.condition, Verdict::fail,
                         "g0 decreases between x=" + format_number(prev_x) + " and x=" + format_number(x),
                         {prev_x, x, u}};
                    return false;
                }
                prev = v;
                prev_x = x;
            }
            return true;
        };
        for (const auto& sl : c.stable) {
            for (double u : detail::stable_marks()) {
                if (!probe([&](double x) { return sl.scale_at(x) * u; }, u)) {
                    break;
                }
            }
        }
        if (c.thinning && f.verdict == Verdict::pass) {
            for (int k = 0; k < 64; ++k) {
                Mark m{c.thinning->levy.sample(s), s.uniform(0.0, c.thinning->v_range)};
                if (!probe([&](double x) { return c.thinning->jump(x, m); }, m.position)) {
                    break;
                }
            }
        }
        rep.findings.push_back(f);
    }
    {
        Finding f{"g0_sign", Verdict::pass, has_g0 ? "g0 + x >= 0 for x >= 0 and g0 = 0 for x <= 0" : "no g0 term", {}};
        // Marks are nonnegative, so g0 >= 0 on x >= 0; the remaining content is g0 = 0 on x <= 0.
        for (double x : xs) {
            for (const auto& sl : c.stable) {
                const double v = sl.scale_at(-x);
                if (v != 0.0) {
                    f = {f.condition, Verdict::fail, "stable g0 nonzero at x=" + format_number(-x), {-x, v}};
                }
                if (sl.scale_at(x) * 1.0 + x < 0.0) {
                    f = {f.condition, Verdict::fail, "g0 + x < 0 at x=" + format_number(x), {x}};
                }
            }
            if (c.thinning) {
                Mark m{c.thinning->levy.sample(s), s.uniform(0.0, c.thinning->v_range)};
                if (c.thinning->jump(-x, m) != 0.0) {
                    f = {f.condition, Verdict::fail, "thinned g0 nonzero at x=" + format_number(-x), {-x}};
                }
            }
        }
        rep.findings.push_back(f);
    }
    {
        Finding f{"g0_local_bound", Verdict::pass, has_g0 ? "" : "no g0 term", {}};
        double sup = 0.0;
        for (double x : xs) {
            sup = std::max(sup, g0_local_integral(c, x));
        }
        if (!std::isfinite(sup)) {
            f.verdict = Verdict::fail;
            f.detail = "integral of |g0| ^ |g0|^2 is infinite on [0, state_max]";
        } else if (has_g0) {
            f.detail = "sup over sampled x of int |g0| ^ |g0|^2 = " + format_number(sup);
        }
        rep.findings.push_back(f);
    }
    {
        Finding f{"g0_truncated_l2_modulus", Verdict::pass,
                  has_g0 ? "int |g0(x)^m - g0(y)^m|^2 <= rho_m^2(|x-y|) on sampled pairs in [0, m]" : "no g0 term",
                  {}};
        double worst = 0.0;
        if (has_g0) {
            for (auto [x, y] : detail::sample_pairs(0.0, cfg.truncation, cfg.samples, s)) {
                const double lhs = g0_truncated_l2(c, x, y, cfg.truncation);
                const double r = c.rho_m(std::abs(x - y));
                const double rhs = r * r;
                if (detail::exceeds(lhs, rhs) && lhs - rhs > worst) {
                    worst = lhs - rhs;
                    f.verdict = Verdict::fail;
                    f.witness = {x, y, lhs, rhs};
                    f.detail = "pair (" + format_number(x) + ", " + format_number(y) + "): " + format_number(lhs) +
                               " > " + format_number(rhs);
                }
            }
        }
        rep.findings.push_back(f);
    }
    rep.findings.push_back(detail::divergence_finding("rho_m_divergence", c.rho_m, 2.0));

    const bool has_g1 = c.g1.has_value();
    {
        Finding f{"g1_sign", Verdict::pass, has_g1 ? "g1 + x >= 0 on sampled x >= 0" : "no g1 term", {}};
        if (has_g1) {
            for (double x : xs) {
                Mark m{c.g1->measure.sample(s), 0.0};
                if (c.g1->jump(x, m) + x < 0.0) {
                    f = {f.condition, Verdict::fail, "g1 + x < 0 at x=" + format_number(x), {x, m.size}};
                    break;
                }
            }
        }
        rep.findings.push_back(f);
    }
    {
        Finding f{"g1_linear_growth", Verdict::pass, has_g1 ? "" : "no g1 term", {}};
        if (has_g1) {
            const double K = c.g1->linear_growth_constant();
            const double m1 = c.g1->measure.first_moment();
            for (double x : xs) {
                const double lhs = c.g1->h(x) * m1;
                if (detail::exceeds(lhs, K * (1.0 + x))) {
                    f = {f.condition, Verdict::fail, "int |g1| exceeds K(1+x) at x=" + format_number(x), {x, lhs}};
                    break;
                }
            }
            if (f.verdict == Verdict::pass) {
                f.detail = "int |g1(x,.)| dmu1 <= " + format_number(K) + " (1 + x)";
            }
        }
        rep.findings.push_back(f);
    }
    {
        Finding f{"g1_finite_remainder", Verdict::pass, has_g1 ? "" : "no g1 term", {}};
        if (has_g1) {
            const double mass = c.g1->measure.mass();
            f.verdict = std::isfinite(mass) ? Verdict::pass : Verdict::fail;
            f.detail = "mu1 has total mass " + format_number(mass) + "; U2 = U1";
        }
        rep.findings.push_back(f);
    }
    {
        Finding f{"g1_truncated_l1_modulus", Verdict::pass,
                  has_g1 ? "int |g1(x)^m - g1(y)^m| <= r_m(|x-y|) on sampled pairs in [0, m]" : "no g1 term", {}};
        double worst = 0.0;
        if (has_g1) {
            for (auto [x, y] : detail::sample_pairs(0.0, cfg.truncation, cfg.samples, s)) {
                const double lhs = g1_truncated_l1(*c.g1, x, y, cfg.truncation);
                const double rhs = c.r_m(std::abs(x - y));
                if (detail::exceeds(lhs, rhs) && lhs - rhs > worst) {
                    worst = lhs - rhs;
                    f.verdict = Verdict::fail;
                    f.witness = {x, y, lhs, rhs};
                    f.detail = "pair (" + format_number(x) + ", " + format_number(y) + "): " + format_number(lhs) +
                               " > " + format_number(rhs);
                }
            }
        }
        rep.findings.push_back(f);
    }
    {
        auto f = detail::divergence_finding("r_m_divergence", c.r_m, 1.0);
        if (c.r_m.is_power() && c.r_m.exponent() > 1.0 && c.r_m.scale() > 0.0) {
            f.verdict = Verdict::fail;
            f.detail = "modulus " + c.r_m.describe() + " is not concave";
        }
        rep.findings.push_back(f);
    }
    return rep;
}

inline ValidationReport validate_assum2(const CoefficientSet& c, const SamplingConfig& cfg) {
    if (cfg.samples < 1) {
        throw InvalidInput("validate: sample budget must be >= 1");
    }
    ValidationReport rep;
    rep.subject = "assum2";
    Stream s(cfg.seed ^ 0xA55A2ULL);
    const auto xs = detail::sample_points(0.0, cfg.state_max, cfg.samples, s);

    {
        Finding f{"sigma_bounded_or_increasing", Verdict::pass, {}, {}};
        std::optional<std::pair<double, double>> drop;
        double prev = detail::checked(c.sigma(xs.front()), "sigma", xs.front());
        for (std::size_t k = 1; k < xs.size() && !drop; ++k) {
            const double v = detail::checked(c.sigma(xs[k]), "sigma", xs[k]);
            if (v < prev * (1.0 - detail::kRelTol) - 1e-300) {
                drop = {xs[k - 1], xs[k]};
            }
            prev = v;
        }
        if (!drop) {
            f.detail = "increasing on sampled x >= 0";
        } else if (auto bound = c.sigma.declared_bound()) {
            double sup = 0.0;
            for (double x : xs) {
                sup = std::max(sup, std::abs(c.sigma(x)));
            }
            if (sup <= *bound) {
                f.detail = "not monotone; bounded by " + format_number(*bound);
            } else {
                f = {f.condition, Verdict::fail, "exceeds its declared bound", {sup, *bound}};
            }
        } else {
            f = {f.condition, Verdict::fail,
                 "decreases between x=" + format_number(drop->first) + " and x=" + format_number(drop->second) +
                     " and no bound is declared",
                 {drop->first, drop->second}};
        }
        rep.findings.push_back(f);
    }

    // Left-continuity probes: g(x - eps) -> g(x) as eps -> 0.
    auto left_continuous = [&](auto&& g, double x) {
        const double gx = g(x);
        const double scale = 1.0 + std::abs(x);
        const double tol = 1e-6 * (1.0 + std::abs(gx));
        return std::abs(g(x - scale * 0x1.0p-40) - gx) <= tol;
    };
    {
        Finding f{"g0_left_continuous", Verdict::pass,
                  (c.stable.empty() && !c.thinning) ? "no g0 term" : "left-continuity probes in x", {}};
        for (const auto& sl : c.stable) {
            for (double x : xs) {
                if (!left_continuous([&](double y) { return sl.scale_at(y); }, x)) {
                    f = {f.condition, Verdict::fail, "jump from the left at x=" + format_number(x), {x}};
                }
            }
        }
        if (c.thinning) {
            for (int k = 0; k < 256; ++k) {
                Mark m{c.thinning->levy.sample(s), s.uniform(0.0, c.thinning->v_range)};
                // Probe at the threshold itself and at a generic state.
                for (double x : {m.position, s.uniform(0.0, cfg.state_max)}) {
                    if (!left_continuous([&](double y) { return c.thinning->jump(y, m); }, x)) {
                        f = {f.condition, Verdict::fail, "jump from the left at x=" + format_number(x),
                             {x, m.position, m.size}};
                    }
                }
            }
        }
        rep.findings.push_back(f);
    }
    {
        Finding f{"g1_left_continuous", Verdict::pass, c.g1 ? "left-continuity probes in x" : "no g1 term", {}};
        if (c.g1) {
            for (double x : xs) {
                if (!left_continuous([&](double y) { return c.g1->h(y); }, x)) {
                    f = {f.condition, Verdict::fail, "jump from the left at x=" + format_number(x), {x}};
                }
            }
        }
        rep.findings.push_back(f);
    }
    {
        Finding f{"g1_increasing_or_dominated", Verdict::pass, c.g1 ? "" : "no g1 term", {}};
        if (c.g1) {
            bool increasing = true;
            for (std::size_t k = 1; k < xs.size(); ++k) {
                if (c.g1->h(xs[k]) < c.g1->h(xs[k - 1])) {
                    increasing = false;
                    break;
                }
            }
            if (increasing) {
                f.detail = "increasing in x";
            } else if (std::isfinite(c.g1->sup_h())) {
                const double gh = c.g1->sup_h();
                const double m1 = gh * c.g1->measure.first_moment();
                const double m2 = gh * gh * c.g1->measure.second_moment();
                f.verdict = std::isfinite(m1) && std::isfinite(m2) ? Verdict::pass : Verdict::fail;
                f.detail = "dominated by G(u) = " + format_number(gh) + " u with moments " + format_number(m1) +
                           ", " + format_number(m2);
            } else {
                f = {f.condition, Verdict::fail, "neither increasing nor dominated", {}};
            }
        }
        rep.findings.push_back(f);
    }
    return rep;
}

/// rho_m(x) <= rho(x) on a dense sample of (0, x_m].
inline ValidationReport validate_assum_uniq(const Modulus& rho, const Modulus& rho_m, double xm,
                                            std::size_t samples = 4096) {
    if (!(xm > 0.0) || !std::isfinite(xm)) {
        throw InvalidInput("validate_assum_uniq: x_m must be positive");
    }
    ValidationReport rep;
    rep.subject = "assum_uniq";
    Finding f{"rho_m_below_rho", Verdict::pass, "rho_m <= rho on (0, x_m], x_m = " + format_number(xm), {}};
    double worst = 0.0;
    const std::size_t half = std::max<std::size_t>(samples / 2, 2);
    auto probe = [&](double x) {
        const double a = detail::checked(rho_m(x), "rho_m", x);
        const double b = detail::checked(rho(x), "rho", x);
        if (detail::exceeds(a, b) && a - b > worst) {
            worst = a - b;
            f.verdict = Verdict::fail;
            f.witness = {x, a, b};
            f.detail = "rho_m(" + format_number(x) + ") = " + format_number(a) + " > rho = " + format_number(b);
        }
    };
    for (std::size_t k = 1; k <= half; ++k) {
        probe(xm * static_cast<double>(k) / static_cast<double>(half));
        probe(xm * std::pow(10.0, -12.0 * static_cast<double>(k - 1) / static_cast<double>(half - 1)));
    }
    rep.findings.push_back(f);
    return rep;
}

/// Nonnegativity, monotonicity in the state, and b <= B + L sum x on sampled tuples.
inline ValidationReport validate_drift(const SystemSpec& spec, double horizon, const SamplingConfig& cfg) {
    ValidationReport rep;
    rep.subject = "drift";
    Stream s(cfg.seed ^ 0xD41F7ULL);
    const std::size_t n = spec.size();
    Finding nonneg{"drift_nonnegative", Verdict::pass, "b_i >= 0 on sampled (s, x)", {}};
    Finding mono{"drift_increasing", Verdict::pass, "x <= y componentwise implies b_i(s,x) <= b_i(s,y)", {}};
    Finding lip{"drift_linear_bound", Verdict::pass,
                "b_i <= B + L sum x_j with B = " + format_number(spec.lipschitz_B()) +
                    ", L = " + format_number(spec.lipschitz_L()),
                {}};
    std::vector<double> x(n), y(n);
    for (std::size_t k = 0; k < cfg.samples; ++k) {
        const double t = s.uniform(0.0, horizon);
        double sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            x[j] = s.uniform(0.0, cfg.state_max);
            y[j] = x[j] + s.uniform(0.0, 1.0) * (s.uniform() < 0.5 ? 0.0 : cfg.state_max);
            sum += x[j];
        }
        for (std::size_t i = 0; i < n; ++i) {
            const auto& d = spec.drifts[i];
            const double bx = detail::checked(d(t, x), "drift", t);
            const double by = detail::checked(d(t, y), "drift", t);
            if (bx < 0.0 && nonneg.verdict == Verdict::pass) {
                nonneg = {nonneg.condition, Verdict::fail, "negative drift at s=" + format_number(t), {t, bx}};
            }
            if (bx > by && mono.verdict == Verdict::pass) {
                mono = {mono.condition, Verdict::fail, "drift decreases in the state at s=" + format_number(t),
                        {t, bx, by}};
            }
            const double bound = d.lipschitz_B() + d.lipschitz_L() * sum;
            if (detail::exceeds(bx, bound) && lip.verdict == Verdict::pass) {
                lip = {lip.condition, Verdict::fail, "b_i exceeds B + L sum x at s=" + format_number(t),
                       {t, bx, bound}};
            }
        }
    }
    rep.findings = {nonneg, mono, lip};
    return rep;
}

}  // namespace jsde
