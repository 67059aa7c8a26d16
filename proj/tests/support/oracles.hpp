#pragma once

// Independent reference computations for the tests. Nothing here calls into
// the library's numerics; only its data types are used.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include "jsde/paths.hpp"
#include "jsde/time_grid.hpp"

namespace oracle {

/// Asymptotic Kolmogorov tail P(K > lambda), Stephens' small-sample correction
/// applied by the callers below.
inline double kolmogorov_tail(double lambda) {
    if (lambda < 0.2) {
        return 1.0;
    }
    double sum = 0.0;
    for (int j = 1; j <= 100; ++j) {
        const double term = std::exp(-2.0 * j * j * lambda * lambda);
        sum += (j % 2 ? 1.0 : -1.0) * term;
        if (term < 1e-16) {
            break;
        }
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

struct KsResult {
    double statistic;
    double p_value;
};

inline KsResult ks_one_sample(std::vector<double> x, const std::function<double(double)>& cdf) {
    std::sort(x.begin(), x.end());
    const double n = static_cast<double>(x.size());
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double f = cdf(x[i]);
        d = std::max({d, (i + 1) / n - f, f - i / n});
    }
    const double sn = std::sqrt(n);
    return {d, kolmogorov_tail((sn + 0.12 + 0.11 / sn) * d)};
}

inline KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == v) {
            ++i;
        }
        while (j < b.size() && b[j] == v) {
            ++j;
        }
        d = std::max(d, std::abs(i / na - j / nb));
    }
    const double ne = std::sqrt(na * nb / (na + nb));
    return {d, kolmogorov_tail((ne + 0.12 + 0.11 / ne) * d)};
}

inline double normal_cdf(double x, double mean, double sd) {
    return 0.5 * std::erfc(-(x - mean) / (sd * std::numbers::sqrt2));
}

/// E exp(i theta X) for X ~ S_alpha(1, 1, 0), alpha != 1.
inline std::complex<double> stable_cf(double alpha, double theta) {
    const double a = std::pow(std::abs(theta), alpha);
    const double sgn = theta > 0 ? 1.0 : (theta < 0 ? -1.0 : 0.0);
    return std::exp(std::complex<double>(-a, a * sgn * std::tan(std::numbers::pi * alpha / 2.0)));
}

/// Composite Simpson in log-space: int_lo^hi f(z) dz with z = e^w.
inline double log_simpson(const std::function<double(double)>& f, double lo, double hi, int n = 20000) {
    if (n % 2) {
        ++n;
    }
    const double a = std::log(lo);
    const double b = std::log(hi);
    const double h = (b - a) / n;
    double s = 0.0;
    for (int k = 0; k <= n; ++k) {
        const double w = a + k * h;
        const double z = std::exp(w);
        const double c = (k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0);
        s += c * f(z) * z;
    }
    return s * h / 3.0;
}

/// Closed-form Levy constant c_alpha of the S_alpha(1,1,0) Levy density c z^{-1-alpha}.
inline double levy_constant(double alpha) {
    return -1.0 / (std::tgamma(-alpha) * std::cos(std::numbers::pi * alpha / 2.0));
}

/// Random nonnegative cadlag path on a uniform grid: a reflected random walk
/// with occasional upward or downward jumps registered at grid points.
inline jsde::CadlagPath random_cadlag(std::mt19937_64& rng, const jsde::TimeGrid& grid, double vol = 1.0,
                                      double jump_prob = 0.03) {
    std::normal_distribution<double> z(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> v(grid.size());
    std::vector<jsde::JumpRecord> jumps;
    v[0] = 2.0 * u(rng);
    for (std::size_t k = 1; k < grid.size(); ++k) {
        double next = std::abs(v[k - 1] + vol * std::sqrt(grid.dt(k - 1)) * z(rng));
        if (u(rng) < jump_prob) {
            const double left = next;
            next = std::abs(next + 3.0 * (u(rng) - 0.4));
            if (next != left) {
                jumps.push_back({grid[k], left, next});
            }
        }
        v[k] = next;
    }
    return jsde::CadlagPath(grid, std::move(v), std::move(jumps));
}

}  // namespace oracle
