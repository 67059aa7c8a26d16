#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "jsde/errors.hpp"
#include "jsde/noise.hpp"
#include "jsde/paths.hpp"

namespace jsde {

inline constexpr std::size_t kNoMeasure = std::numeric_limits<std::size_t>::max();

inline double positive_part(double x) { return x > 0.0 ? x : 0.0; }

inline void require_finite(double v, const std::string& what) {
    if (!std::isfinite(v)) {
        throw InvalidInput(what + " must be finite");
    }
}

inline void require_nonnegative(double v, const std::string& what) {
    if (!std::isfinite(v) || v < 0.0) {
        throw InvalidInput(what + " must be finite and >= 0");
    }
}

inline void require_alpha(double alpha, const std::string& what) {
    if (!(alpha > 1.0 && alpha <= 2.0)) {
        throw InvalidInput(what + " must lie in (1, 2]");
    }
}

/// Constant c in the Levy density c u^{-1-alpha} du (u > 0) of the unit
/// spectrally positive stable law S_alpha(1, 1, 0), alpha in (1, 2).
inline double stable_levy_constant(double alpha) {
    return -1.0 / (std::tgamma(-alpha) * std::cos(std::numbers::pi * alpha / 2.0));
}

// ---------------------------------------------------------------------------
// Moduli

/// Nonnegative increasing function on R+ bounding coefficient increments.
class Modulus {
  public:
    enum class Kind { power, tabulated, custom };

    Modulus() = default;

    /// scale * z^exponent
    static Modulus power(double scale, double exponent) {
        require_nonnegative(scale, "modulus scale");
        if (!(exponent > 0.0) || !std::isfinite(exponent)) {
            throw InvalidInput("modulus exponent must be positive");
        }
        Modulus m;
        m.kind_ = Kind::power;
        m.scale_ = scale;
        m.exponent_ = exponent;
        return m;
    }

    /// Piecewise linear through (xs, ys), flat beyond the last node.
    static Modulus tabulated(std::vector<double> xs, std::vector<double> ys) {
        if (xs.size() < 2 || xs.size() != ys.size()) {
            throw InvalidInput("tabulated modulus: need >= 2 nodes with matching values");
        }
        if (xs.front() != 0.0) {
            throw InvalidInput("tabulated modulus: first node must be 0");
        }
        for (std::size_t k = 0; k < xs.size(); ++k) {
            require_nonnegative(ys[k], "tabulated modulus value");
            if (k > 0 && !(xs[k] > xs[k - 1])) {
                throw InvalidInput("tabulated modulus: nodes must be strictly increasing");
            }
            if (k > 0 && ys[k] < ys[k - 1]) {
                throw InvalidInput("tabulated modulus: values must be nondecreasing");
            }
        }
        Modulus m;
        m.kind_ = Kind::tabulated;
        m.xs_ = std::move(xs);
        m.ys_ = std::move(ys);
        return m;
    }

    static Modulus custom(std::function<double(double)> fn, std::string label) {
        if (!fn) {
            throw InvalidInput("custom modulus: empty function");
        }
        Modulus m;
        m.kind_ = Kind::custom;
        m.fn_ = std::move(fn);
        m.label_ = std::move(label);
        return m;
    }

    Kind kind() const noexcept { return kind_; }
    double scale() const noexcept { return scale_; }
    double exponent() const noexcept { return exponent_; }
    bool is_power() const noexcept { return kind_ == Kind::power; }
    /// Interpolation nodes of a tabulated modulus (empty otherwise).
    const std::vector<double>& nodes() const noexcept { return xs_; }

    double operator()(double z) const {
        z = positive_part(z);
        switch (kind_) {
            case Kind::power:
                return scale_ == 0.0 ? 0.0 : scale_ * std::pow(z, exponent_);
            case Kind::tabulated: {
                if (z >= xs_.back()) {
                    return ys_.back();
                }
                auto it = std::upper_bound(xs_.begin(), xs_.end(), z);
                const auto k = static_cast<std::size_t>(it - xs_.begin()) - 1;
                const double w = (z - xs_[k]) / (xs_[k + 1] - xs_[k]);
                return ys_[k] + w * (ys_[k + 1] - ys_[k]);
            }
            case Kind::custom:
                return fn_(z);
        }
        return 0.0;
    }

    /// Whether the integral of 1/rho^{power} near 0 diverges; nullopt when the
    /// modulus has no symbolic form.
    std::optional<bool> integral_diverges(double power) const {
        if (kind_ != Kind::power) {
            return std::nullopt;
        }
        if (scale_ == 0.0) {
            return true;
        }
        return exponent_ * power >= 1.0;
    }

    std::string describe() const {
        switch (kind_) {
            case Kind::power:
                return format_number(scale_) + "*z^" + format_number(exponent_);
            case Kind::tabulated:
                return "tabulated(" + std::to_string(xs_.size()) + " nodes)";
            case Kind::custom:
                return label_.empty() ? std::string("custom") : label_;
        }
        return {};
    }

  private:
    Kind kind_ = Kind::power;
    double scale_ = 0.0;
    double exponent_ = 1.0;
    std::vector<double> xs_;
    std::vector<double> ys_;
    std::function<double(double)> fn_;
    std::string label_;
};

// ---------------------------------------------------------------------------
// Diffusion coefficient sigma

class Diffusion {
  public:
    enum class Kind { zero, power, clipped_sine, custom };

    static Diffusion zero() { return Diffusion(); }

    /// scale * (x+)^exponent. Exponent 1/2 is the square-root diffusion.
    static Diffusion power(double scale, double exponent) {
        require_nonnegative(scale, "diffusion scale");
        if (!(exponent > 0.0) || !std::isfinite(exponent)) {
            throw InvalidInput("diffusion exponent must be positive");
        }
        Diffusion d;
        d.kind_ = Kind::power;
        d.scale_ = scale;
        d.exponent_ = exponent;
        return d;
    }

    static Diffusion sqrt(double scale) { return power(scale, 0.5); }

    /// amplitude * |sin(frequency * x+)|; bounded by amplitude.
    static Diffusion clipped_sine(double amplitude, double frequency) {
        require_nonnegative(amplitude, "diffusion amplitude");
        require_finite(frequency, "diffusion frequency");
        Diffusion d;
        d.kind_ = Kind::clipped_sine;
        d.scale_ = amplitude;
        d.frequency_ = frequency;
        d.bound_ = amplitude;
        return d;
    }

    static Diffusion custom(std::function<double(double)> fn, std::string label,
                            std::optional<double> bound = std::nullopt) {
        if (!fn) {
            throw InvalidInput("custom diffusion: empty function");
        }
        Diffusion d;
        d.kind_ = Kind::custom;
        d.fn_ = std::move(fn);
        d.label_ = std::move(label);
        d.bound_ = bound;
        return d;
    }

    Kind kind() const noexcept { return kind_; }
    double scale() const noexcept { return scale_; }
    double exponent() const noexcept { return exponent_; }
    std::optional<double> declared_bound() const noexcept { return bound_; }
    bool is_zero() const noexcept { return kind_ == Kind::zero || (kind_ == Kind::power && scale_ == 0.0); }

    double operator()(double x) const {
        switch (kind_) {
            case Kind::zero:
                return 0.0;
            case Kind::power:
                return x > 0.0 ? scale_ * std::pow(x, exponent_) : 0.0;
            case Kind::clipped_sine:
                return scale_ * std::abs(std::sin(frequency_ * positive_part(x)));
            case Kind::custom:
                return fn_(x);
        }
        return 0.0;
    }

    std::string describe() const {
        switch (kind_) {
            case Kind::zero:
                return "0";
            case Kind::power:
                return format_number(scale_) + "*(x+)^" + format_number(exponent_);
            case Kind::clipped_sine:
                return format_number(scale_) + "*|sin(" + format_number(frequency_) + "*x+)|";
            case Kind::custom:
                return label_.empty() ? std::string("custom") : label_;
        }
        return {};
    }

    friend bool operator==(const Diffusion& a, const Diffusion& b) {
        if (a.kind_ == Kind::custom || b.kind_ == Kind::custom) {
            return false;
        }
        return a.kind_ == b.kind_ && a.scale_ == b.scale_ && a.exponent_ == b.exponent_ &&
               a.frequency_ == b.frequency_ && a.bound_ == b.bound_;
    }

  private:
    Kind kind_ = Kind::zero;
    double scale_ = 0.0;
    double exponent_ = 0.5;
    double frequency_ = 0.0;
    std::optional<double> bound_;
    std::function<double(double)> fn_;
    std::string label_;
};

/// One Brownian factor entering W^i with the given weight.
struct FactorWeight {
    std::size_t factor = 0;
    double weight = 0.0;

    friend bool operator==(const FactorWeight&, const FactorWeight&) = default;
};

/// Compensated stable jump term coef * (x+)^{1/alpha} dZ^factor.
struct StableLoading {
    std::size_t factor = 0;
    double coef = 0.0;
    double alpha = 2.0;

    double scale_at(double x) const { return x > 0.0 ? coef * std::pow(x, 1.0 / alpha) : 0.0; }

    friend bool operator==(const StableLoading&, const StableLoading&) = default;
};

// ---------------------------------------------------------------------------
// Finite measures on R+

/// Finite measure on R+ given by atoms or an exponential density.
class FiniteMeasure {
  public:
    FiniteMeasure() = default;

    static FiniteMeasure atoms(std::vector<double> sizes, std::vector<double> weights) {
        if (sizes.empty() || sizes.size() != weights.size()) {
            throw InvalidInput("finite measure: need matching, nonempty sizes and weights");
        }
        for (std::size_t k = 0; k < sizes.size(); ++k) {
            require_nonnegative(sizes[k], "finite measure atom");
            if (std::isinf(weights[k])) {
                throw InvalidInput("finite measure: infinite total mass is not supported");
            }
            require_nonnegative(weights[k], "finite measure weight");
        }
        FiniteMeasure m;
        m.kind_ = Kind::atoms;
        m.sizes_ = std::move(sizes);
        m.weights_ = std::move(weights);
        m.mass_ = 0.0;
        for (double w : m.weights_) {
            m.mass_ += w;
        }
        return m;
    }

    static FiniteMeasure point(double size, double mass) { return atoms({size}, {mass}); }

    /// mass * Exp(mean) law.
    static FiniteMeasure exponential(double mass, double mean) {
        if (std::isinf(mass)) {
            throw InvalidInput("finite measure: infinite total mass is not supported");
        }
        require_nonnegative(mass, "finite measure mass");
        if (!(mean > 0.0) || !std::isfinite(mean)) {
            throw InvalidInput("finite measure: exponential mean must be positive");
        }
        FiniteMeasure m;
        m.kind_ = Kind::exponential;
        m.mass_ = mass;
        m.mean_ = mean;
        return m;
    }

    double mass() const noexcept { return mass_; }

    /// Integral of z.
    double first_moment() const {
        if (kind_ == Kind::exponential) {
            return mass_ * mean_;
        }
        double s = 0.0;
        for (std::size_t k = 0; k < sizes_.size(); ++k) {
            s += weights_[k] * sizes_[k];
        }
        return s;
    }

    /// Integral of z^2.
    double second_moment() const {
        if (kind_ == Kind::exponential) {
            return 2.0 * mass_ * mean_ * mean_;
        }
        double s = 0.0;
        for (std::size_t k = 0; k < sizes_.size(); ++k) {
            s += weights_[k] * sizes_[k] * sizes_[k];
        }
        return s;
    }

    /// Integral of min(z, m)^2.
    double truncated_second_moment(double m) const {
        if (kind_ == Kind::exponential) {
            const double r = m / mean_;
            return 2.0 * mass_ * mean_ * mean_ * (1.0 - std::exp(-r) * (1.0 + r));
        }
        double s = 0.0;
        for (std::size_t k = 0; k < sizes_.size(); ++k) {
            const double z = std::min(sizes_[k], m);
            s += weights_[k] * z * z;
        }
        return s;
    }

    /// Integral of min(scale * z, m).
    double truncated_mean(double scale, double m) const {
        if (scale <= 0.0) {
            return 0.0;
        }
        if (kind_ == Kind::exponential) {
            const double s = scale * mean_;
            return mass_ * s * (1.0 - std::exp(-m / s));
        }
        double acc = 0.0;
        for (std::size_t k = 0; k < sizes_.size(); ++k) {
            acc += weights_[k] * std::min(scale * sizes_[k], m);
        }
        return acc;
    }

    /// Integral of min(z, z^2).
    double min_linear_square() const {
        if (kind_ == Kind::exponential) {
            const double mu = mean_;
            return mass_ * (2.0 * mu * mu - std::exp(-1.0 / mu) * (mu + 2.0 * mu * mu));
        }
        double acc = 0.0;
        for (std::size_t k = 0; k < sizes_.size(); ++k) {
            acc += weights_[k] * std::min(sizes_[k], sizes_[k] * sizes_[k]);
        }
        return acc;
    }

    double max_atom() const {
        if (kind_ == Kind::exponential) {
            return std::numeric_limits<double>::infinity();
        }
        return *std::max_element(sizes_.begin(), sizes_.end());
    }

    /// Draw from the normalized law.
    double sample(Stream& s) const {
        if (kind_ == Kind::exponential) {
            return mean_ * s.exponential();
        }
        double u = s.uniform() * mass_;
        for (std::size_t k = 0; k < sizes_.size(); ++k) {
            if (u < weights_[k]) {
                return sizes_[k];
            }
            u -= weights_[k];
        }
        return sizes_.back();
    }

    FiniteMeasure scaled(double factor) const {
        FiniteMeasure out = *this;
        out.mass_ *= factor;
        for (double& w : out.weights_) {
            w *= factor;
        }
        return out;
    }

    std::string describe() const {
        if (kind_ == Kind::exponential) {
            return format_number(mass_) + "*Exp(mean " + format_number(mean_) + ")";
        }
        return "atoms(" + std::to_string(sizes_.size()) + ", mass " + format_number(mass_) + ")";
    }

  private:
    enum class Kind { atoms, exponential };
    Kind kind_ = Kind::atoms;
    std::vector<double> sizes_;
    std::vector<double> weights_;
    double mass_ = 0.0;
    double mean_ = 1.0;
};

/// g0(x, (v, zeta)) = 1{v < x} zeta with mu0 = Leb(dv) on (0, V) times levy(dzeta).
///
/// The v-range V caps the intensity at V * mass; above x = V the kernel
/// saturates, so V should dominate the states the simulation visits.
struct ThinningKernel {
    FiniteMeasure levy;
    double v_range = 1.0;

    double jump(double x, const Mark& mark) const { return mark.position < x ? mark.size : 0.0; }

    /// Integral of g0(x, .) against mu0: min(x+, V) * first moment.
    double compensator(double x) const { return std::min(positive_part(x), v_range) * levy.first_moment(); }

    double rate() const { return v_range * levy.mass(); }

    MarkSampler sampler() const {
        return [levy = levy, v = v_range](Stream& s) {
            Mark m;
            m.position = s.uniform(0.0, v);
            m.size = levy.sample(s);
            return m;
        };
    }
};

/// g1(x, u) = h(x) * u with a finite measure mu1 of marks u >= 0.
struct JumpKernel {
    enum class Shape { capped, proportional };

    FiniteMeasure measure;
    Shape shape = Shape::capped;
    double cap = 1.0;

    double h(double x) const {
        const double xp = positive_part(x);
        return shape == Shape::capped ? std::min(xp, cap) : xp;
    }

    double jump(double x, const Mark& mark) const { return h(x) * mark.size; }

    double rate() const { return measure.mass(); }

    MarkSampler sampler() const {
        return [m = measure](Stream& s) {
            Mark mk;
            mk.size = m.sample(s);
            return mk;
        };
    }

    /// Smallest K with int |g1(x, u)| mu1(du) <= K (1 + x) for x >= 0.
    double linear_growth_constant() const {
        const double m1 = measure.first_moment();
        return shape == Shape::capped ? m1 * cap / (1.0 + cap) : m1;
    }

    /// Lipschitz constant of h.
    double lipschitz() const { return 1.0; }

    /// sup |h| (infinite for the proportional shape).
    double sup_h() const {
        return shape == Shape::capped ? cap : std::numeric_limits<double>::infinity();
    }

    std::string describe() const {
        return (shape == Shape::capped ? "min(x+," + format_number(cap) + ")" : std::string("x+")) + "*u, u~" +
               measure.describe();
    }
};

// ---------------------------------------------------------------------------
// Component coefficients

struct CoefficientSet {
    double a = 0.0;
    Diffusion sigma;
    std::vector<FactorWeight> brownian;
    std::vector<StableLoading> stable;
    std::optional<ThinningKernel> thinning;
    std::optional<JumpKernel> g1;
    Modulus rho = Modulus::power(0.0, 0.5);
    Modulus rho_m = Modulus::power(0.0, 0.5);
    Modulus r_m = Modulus::power(0.0, 1.0);
    std::size_t thinning_measure = kNoMeasure;
    std::size_t g1_measure = kNoMeasure;

    /// Integral of g0(x, .) against mu0 over all compensated measures.
    double g0_compensator(double x) const { return thinning ? thinning->compensator(x) : 0.0; }
};

// ---------------------------------------------------------------------------
// Drifts

/// b_i(s, x_1..x_N). Evaluated along paths by the solver and the approximation harness.
class DriftSpec {
  public:
    enum class Kind { constant, time_function, mean_field, external_path };
    enum class MeanField { average, weighted_sum, custom };

    static DriftSpec constant(double value) {
        require_nonnegative(value, "constant drift");
        DriftSpec d;
        d.kind_ = Kind::constant;
        d.value_ = value;
        d.B_ = value;
        d.L_ = 0.0;
        return d;
    }

    /// Deterministic b(s); `sup` is its supremum over [0, T] (the constant B).
    static DriftSpec time_function(std::function<double(double)> fn, std::string label, double sup) {
        if (!fn) {
            throw InvalidInput("time drift: empty function");
        }
        DriftSpec d;
        d.kind_ = Kind::time_function;
        d.time_fn_ = std::move(fn);
        d.label_ = std::move(label);
        d.B_ = sup;
        d.L_ = 0.0;
        return d;
    }

    /// intercept + slope * s on [0, horizon]; must stay nonnegative there.
    static DriftSpec time_linear(double intercept, double slope, double horizon) {
        require_finite(intercept, "drift intercept");
        require_finite(slope, "drift slope");
        if (intercept < 0.0 || intercept + slope * horizon < 0.0) {
            throw InvalidInput("time_linear drift must be nonnegative on [0, T]");
        }
        auto d = time_function([=](double s) { return intercept + slope * s; },
                               format_number(intercept) + "+" + format_number(slope) + "*s",
                               std::max(intercept, intercept + slope * horizon));
        return d;
    }

    /// (1/N) sum_j x_j, summed in ascending order so the value does not depend on labels.
    static DriftSpec mean_field_average(std::size_t n) {
        if (n == 0) {
            throw InvalidInput("mean-field drift: N must be >= 1");
        }
        DriftSpec d;
        d.kind_ = Kind::mean_field;
        d.mf_ = MeanField::average;
        d.B_ = 0.0;
        d.L_ = 1.0 / static_cast<double>(n);
        return d;
    }

    /// offset + sum_j w_j x_j+, w_j >= 0.
    static DriftSpec weighted_sum(double offset, std::vector<double> weights) {
        require_nonnegative(offset, "drift offset");
        if (weights.empty()) {
            throw InvalidInput("weighted_sum drift: need weights");
        }
        double L = 0.0;
        for (double w : weights) {
            require_nonnegative(w, "drift weight");
            L = std::max(L, w);
        }
        DriftSpec d;
        d.kind_ = Kind::mean_field;
        d.mf_ = MeanField::weighted_sum;
        d.value_ = offset;
        d.weights_ = std::move(weights);
        d.B_ = offset;
        d.L_ = L;
        return d;
    }

    static DriftSpec mean_field_custom(std::function<double(double, std::span<const double>)> fn, std::string label,
                                       double B, double L) {
        if (!fn) {
            throw InvalidInput("mean-field drift: empty function");
        }
        DriftSpec d;
        d.kind_ = Kind::mean_field;
        d.mf_ = MeanField::custom;
        d.mf_fn_ = std::move(fn);
        d.label_ = std::move(label);
        d.B_ = B;
        d.L_ = L;
        return d;
    }

    static DriftSpec external_path(CadlagPath path) {
        DriftSpec d;
        d.kind_ = Kind::external_path;
        double sup = 0.0;
        for (double v : path.values()) {
            sup = std::max(sup, v);
        }
        for (const auto& j : path.jumps()) {
            sup = std::max({sup, j.left, j.right});
        }
        d.path_ = std::move(path);
        d.B_ = sup;
        d.L_ = 0.0;
        return d;
    }

    Kind kind() const noexcept { return kind_; }
    MeanField mean_field_kind() const noexcept { return mf_; }
    double lipschitz_B() const noexcept { return B_; }
    double lipschitz_L() const noexcept { return L_; }
    bool depends_on_state() const noexcept { return kind_ == Kind::mean_field; }
    double constant_value() const noexcept { return value_; }
    const std::vector<double>& weights() const noexcept { return weights_; }
    const CadlagPath& path() const noexcept { return path_; }

    double operator()(double s, std::span<const double> state) const {
        switch (kind_) {
            case Kind::constant:
                return value_;
            case Kind::time_function:
                return time_fn_(s);
            case Kind::external_path:
                return path_.evaluate(s);
            case Kind::mean_field:
                break;
        }
        switch (mf_) {
            case MeanField::average: {
                // Order statistics are monotone in each argument and symmetric
                // in labels; summing them in order keeps both properties exact
                // in floating point.
                std::vector<double> sorted(state.begin(), state.end());
                std::sort(sorted.begin(), sorted.end());
                double s_ = 0.0;
                for (double x : sorted) {
                    s_ += positive_part(x);
                }
                return s_ / static_cast<double>(sorted.size());
            }
            case MeanField::weighted_sum: {
                if (state.size() != weights_.size()) {
                    throw InvalidInput("weighted_sum drift: state size differs from weight count");
                }
                double acc = value_;
                for (std::size_t j = 0; j < state.size(); ++j) {
                    acc += weights_[j] * positive_part(state[j]);
                }
                return acc;
            }
            case MeanField::custom:
                return mf_fn_(s, state);
        }
        return 0.0;
    }

    std::string describe() const {
        switch (kind_) {
            case Kind::constant:
                return "constant " + format_number(value_);
            case Kind::time_function:
                return "time function " + label_;
            case Kind::external_path:
                return "external path";
            case Kind::mean_field:
                break;
        }
        switch (mf_) {
            case MeanField::average:
                return "mean-field average";
            case MeanField::weighted_sum:
                return "mean-field weighted sum";
            case MeanField::custom:
                return "mean-field " + label_;
        }
        return {};
    }

  private:
    Kind kind_ = Kind::constant;
    MeanField mf_ = MeanField::average;
    double value_ = 0.0;
    std::vector<double> weights_;
    std::function<double(double)> time_fn_;
    std::function<double(double, std::span<const double>)> mf_fn_;
    CadlagPath path_;
    std::string label_;
    double B_ = 0.0;
    double L_ = 0.0;
};

// ---------------------------------------------------------------------------
// Systems

struct SystemSpec {
    std::string name;
    std::vector<CoefficientSet> components;
    std::vector<DriftSpec> drifts;
    std::vector<double> initial;
    NoiseLayout layout;
    /// Linear-growth constant of x -> int |g1| mu1 used by the moment bound.
    double K = 0.0;
    std::string K_source;

    std::size_t size() const noexcept { return components.size(); }

    double max_a() const {
        double a = 0.0;
        for (const auto& c : components) {
            a = std::max(a, c.a);
        }
        return a;
    }

    double lipschitz_B() const {
        double B = 0.0;
        for (const auto& d : drifts) {
            B = std::max(B, d.lipschitz_B());
        }
        return B;
    }

    double lipschitz_L() const {
        double L = 0.0;
        for (const auto& d : drifts) {
            L = std::max(L, d.lipschitz_L());
        }
        return L;
    }

    bool drift_depends_on_state() const {
        return std::any_of(drifts.begin(), drifts.end(), [](const DriftSpec& d) { return d.depends_on_state(); });
    }
};

/// Assigns event-measure indices (thinning first, then g1, component by
/// component) and rebuilds the event sources of the layout.
inline void assign_event_measures(SystemSpec& spec) {
    spec.layout.event_sources.clear();
    for (auto& c : spec.components) {
        c.thinning_measure = kNoMeasure;
        c.g1_measure = kNoMeasure;
        if (c.thinning) {
            c.thinning_measure = spec.layout.event_sources.size();
            spec.layout.event_sources.push_back({c.thinning->rate(), c.thinning->sampler()});
        }
        if (c.g1) {
            c.g1_measure = spec.layout.event_sources.size();
            spec.layout.event_sources.push_back({c.g1->rate(), c.g1->sampler()});
        }
    }
}

/// Structural checks on a system description.
inline void validate_spec(const SystemSpec& spec) {
    const std::size_t n = spec.components.size();
    if (n == 0) {
        throw InvalidInput("system: need at least one component");
    }
    if (spec.drifts.size() != n || spec.initial.size() != n) {
        throw InvalidInput("system: drift and initial-value counts must equal the component count");
    }
    for (std::size_t i = 0; i < n; ++i) {
        const auto& c = spec.components[i];
        const std::string tag = "component " + std::to_string(i + 1);
        require_nonnegative(spec.initial[i], tag + " initial value");
        require_nonnegative(c.a, tag + " mean reversion a");
        for (const auto& w : c.brownian) {
            if (w.factor >= spec.layout.brownian_factors) {
                throw InvalidInput(tag + ": Brownian factor index out of range");
            }
            require_nonnegative(w.weight, tag + " Brownian weight");
        }
        for (const auto& s : c.stable) {
            if (s.factor >= spec.layout.stable_alphas.size()) {
                throw InvalidInput(tag + ": stable factor index out of range");
            }
            require_alpha(s.alpha, tag + " stable alpha");
            if (spec.layout.stable_alphas[s.factor] != s.alpha) {
                throw InvalidInput(tag + ": stable loading alpha differs from its factor's alpha");
            }
            require_nonnegative(s.coef, tag + " stable loading");
        }
        if (c.thinning && c.thinning_measure >= spec.layout.event_sources.size()) {
            throw InvalidInput(tag + ": thinning kernel has no event source");
        }
        if (c.g1 && c.g1_measure >= spec.layout.event_sources.size()) {
            throw InvalidInput(tag + ": g1 kernel has no event source");
        }
    }
    for (double a : spec.layout.stable_alphas) {
        require_alpha(a, "stable factor alpha");
    }
    require_nonnegative(spec.K, "linear-growth constant K");
}

// ---------------------------------------------------------------------------
// Presets

/// Truncated L^2 constant of a stable loading: for 0 <= y <= x,
/// int |g(x,u) ^ m - g(y,u) ^ m|^2 mu(du) <= constant * (x - y).
/// For alpha = 2 the loading is a Gaussian term with variance rate 2 coef^2 x.
inline double stable_truncated_l2_constant(const StableLoading& s, double m) {
    if (s.coef == 0.0) {
        return 0.0;
    }
    if (s.alpha == 2.0) {
        return 2.0 * s.coef * s.coef;
    }
    const double c = stable_levy_constant(s.alpha);
    return c * std::pow(m, 2.0 - s.alpha) * std::pow(s.coef, s.alpha) * (1.0 / (2.0 - s.alpha) + 1.0 / s.alpha);
}

/// One-dimensional square-root process with constant target b and a
/// compensated stable term: factor 0 drives both the Brownian and stable parts.
struct RootParams {
    double a = 1.0;
    double b = 1.0;
    double sigma = 1.0;
    double sigma_z = 0.0;
    double alpha = 2.0;
    double initial = 1.0;
    double truncation = 1.0;
};

inline SystemSpec preset_root(const RootParams& p) {
    require_nonnegative(p.a, "a");
    require_nonnegative(p.sigma, "sigma");
    require_nonnegative(p.sigma_z, "sigma_z");
    require_alpha(p.alpha, "alpha");
    SystemSpec spec;
    spec.name = "cir";
    CoefficientSet c;
    c.a = p.a;
    c.sigma = Diffusion::sqrt(p.sigma);
    if (p.sigma > 0.0) {
        c.brownian.push_back({0, 1.0});
    }
    StableLoading loading{0, p.sigma_z, p.alpha};
    if (p.sigma_z > 0.0) {
        c.stable.push_back(loading);
    }
    const double km = stable_truncated_l2_constant(loading, p.truncation);
    c.rho = Modulus::power(std::max(p.sigma, std::sqrt(km)), 0.5);
    c.rho_m = Modulus::power(std::sqrt(km), 0.5);
    c.r_m = Modulus::power(0.0, 1.0);
    spec.components.push_back(std::move(c));
    spec.drifts.push_back(DriftSpec::constant(p.b));
    spec.initial.push_back(p.initial);
    spec.layout.brownian_factors = 1;
    spec.layout.stable_alphas = {p.alpha};
    spec.K = 0.0;
    spec.K_source = "g1 = 0";
    assign_event_measures(spec);
    validate_spec(spec);
    return spec;
}

struct Example21Params {
    std::size_t n = 2;
    std::vector<double> a;         // per component
    std::vector<double> sigma;     // idiosyncratic Brownian loadings
    double sigma0 = 0.0;           // common Brownian loading
    std::vector<double> sigma_z;   // idiosyncratic stable loadings
    double sigma_z0 = 0.0;         // common stable loading
    std::vector<double> alpha;     // idiosyncratic stable indices
    double alpha0 = 2.0;           // common stable index
    std::vector<double> initial;
    double truncation = 1.0;       // level m of the truncated moduli
};

/// Expands scalar-or-vector parameter lists to length n.
inline std::vector<double> broadcast(const std::vector<double>& v, std::size_t n, const std::string& what) {
    if (v.size() == n) {
        return v;
    }
    if (v.size() == 1) {
        return std::vector<double>(n, v.front());
    }
    throw InvalidInput(what + ": expected 1 or " + std::to_string(n) + " values");
}

/// Mean-field square-root system with common and idiosyncratic Brownian and
/// stable factors. Brownian factor 0 and stable factor 0 are the common ones;
/// factor i belongs to component i.
///
/// W^i = (sigma_i B^i + sigma_0 B^0) / sqrt(sigma_i^2 + sigma_0^2),
/// sigma_i(x) = sqrt(sigma_i^2 + sigma_0^2) sqrt(x+),
/// g_{i,0}(x, u) = sigma_{Z,0} u_0 (x+)^{1/alpha_0} + sigma_{Z,i} u_i (x+)^{1/alpha_i},
/// b_i(s, x) = (1/N) sum_j x_j unless `drift` overrides it.
inline SystemSpec preset_example21(const Example21Params& p, std::optional<DriftSpec> drift = std::nullopt) {
    const std::size_t n = p.n;
    if (n == 0) {
        throw InvalidInput("example21: N must be >= 1");
    }
    const auto a = broadcast(p.a, n, "a");
    const auto sig = broadcast(p.sigma, n, "sigma");
    const auto sz = broadcast(p.sigma_z, n, "sigma_z");
    const auto al = broadcast(p.alpha, n, "alpha");
    const auto init = broadcast(p.initial, n, "initial");
    require_nonnegative(p.sigma0, "sigma0");
    require_nonnegative(p.sigma_z0, "sigma_z0");
    require_alpha(p.alpha0, "alpha0");
    if (!(p.truncation > 0.0)) {
        throw InvalidInput("example21: truncation level must be positive");
    }

    SystemSpec spec;
    spec.name = "example21";
    spec.layout.brownian_factors = n + 1;
    spec.layout.stable_alphas.push_back(p.alpha0);
    for (std::size_t i = 0; i < n; ++i) {
        require_nonnegative(a[i], "a");
        require_nonnegative(sig[i], "sigma");
        require_nonnegative(sz[i], "sigma_z");
        require_alpha(al[i], "alpha");
        spec.layout.stable_alphas.push_back(al[i]);
    }

    for (std::size_t i = 0; i < n; ++i) {
        CoefficientSet c;
        c.a = a[i];
        const double s = std::sqrt(sig[i] * sig[i] + p.sigma0 * p.sigma0);
        c.sigma = Diffusion::sqrt(s);
        if (s > 0.0) {
            if (sig[i] > 0.0) {
                c.brownian.push_back({i + 1, sig[i] / s});
            }
            if (p.sigma0 > 0.0) {
                c.brownian.push_back({0, p.sigma0 / s});
            }
        }
        double km = 0.0;
        if (p.sigma_z0 > 0.0) {
            c.stable.push_back({0, p.sigma_z0, p.alpha0});
            km += stable_truncated_l2_constant(c.stable.back(), p.truncation);
        }
        if (sz[i] > 0.0) {
            c.stable.push_back({i + 1, sz[i], al[i]});
            km += stable_truncated_l2_constant(c.stable.back(), p.truncation);
        }
        c.rho = Modulus::power(std::max(s, std::sqrt(km)), 0.5);
        c.rho_m = Modulus::power(std::sqrt(km), 0.5);
        c.r_m = Modulus::power(0.0, 1.0);
        spec.components.push_back(std::move(c));
        spec.initial.push_back(init[i]);
    }
    spec.drifts.assign(n, drift ? *drift : DriftSpec::mean_field_average(n));
    spec.K = 0.0;
    spec.K_source = "g1 = 0";
    assign_event_measures(spec);
    validate_spec(spec);
    return spec;
}

/// Square-root diffusion with thinned compound-Poisson jumps
/// g0(x, v, zeta) = 1{v < x} zeta, compensated.
inline CoefficientSet preset_cbi_thinning(const FiniteMeasure& levy, double v_range, double a, double sigma,
                                          double truncation = 1.0) {
    if (!std::isfinite(levy.mass())) {
        throw InvalidInput("cbi_thinning: infinite total mass is out of scope");
    }
    if (!std::isfinite(levy.first_moment())) {
        throw InvalidInput("cbi_thinning: Levy measure needs a finite first moment");
    }
    if (!(v_range > 0.0) || !std::isfinite(v_range)) {
        throw InvalidInput("cbi_thinning: v-range must be positive and finite");
    }
    require_nonnegative(a, "a");
    require_nonnegative(sigma, "sigma");
    CoefficientSet c;
    c.a = a;
    c.sigma = Diffusion::sqrt(sigma);
    if (sigma > 0.0) {
        c.brownian.push_back({0, 1.0});
    }
    c.thinning = ThinningKernel{levy, v_range};
    const double t2 = levy.truncated_second_moment(truncation);
    c.rho = Modulus::power(std::max(sigma, std::sqrt(t2)), 0.5);
    c.rho_m = Modulus::power(std::sqrt(t2), 0.5);
    c.r_m = Modulus::power(0.0, 1.0);
    return c;
}

/// One-component system around preset_cbi_thinning with a constant target b.
inline SystemSpec preset_cbi_system(const FiniteMeasure& levy, double v_range, double a, double b, double sigma,
                                    double initial, double truncation = 1.0) {
    SystemSpec spec;
    spec.name = "cbi_thinning";
    spec.components.push_back(preset_cbi_thinning(levy, v_range, a, sigma, truncation));
    spec.drifts.push_back(DriftSpec::constant(b));
    spec.initial.push_back(initial);
    spec.layout.brownian_factors = 1;
    spec.K = 0.0;
    spec.K_source = "g1 = 0";
    assign_event_measures(spec);
    validate_spec(spec);
    return spec;
}

}  // namespace jsde
