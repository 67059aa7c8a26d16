#pragma once

// Scenario files (JSON, schema_version 1). Unknown fields are errors; every
// schema error carries the line of the offending key.

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "jsde/approx.hpp"
#include "jsde/coeffs.hpp"
#include "jsde/errors.hpp"
#include "jsde/solver.hpp"
#include "jsde/validate.hpp"

namespace jsde {

inline constexpr int kScenarioSchemaVersion = 1;

class SchemaError : public InvalidInput {
  public:
    SchemaError(const std::string& source, std::size_t line, const std::string& what)
        : InvalidInput(source + ":" + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

  private:
    std::size_t line_;
};

namespace detail {

/// JSON pointer -> 1-based line where the key (or array element) starts.
/// Assumes the text already parsed successfully.
class JsonLineIndex {
  public:
    explicit JsonLineIndex(const std::string& text) : s_(text) {
        skip_ws();
        value("");
    }

    std::size_t line_of(const std::string& pointer) const {
        auto it = lines_.find(pointer);
        return it == lines_.end() ? 1 : it->second;
    }

  private:
    void skip_ws() {
        while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t' || s_[pos_] == '\r' || s_[pos_] == '\n')) {
            if (s_[pos_] == '\n') {
                ++line_;
            }
            ++pos_;
        }
    }

    std::string string_token() {
        std::string out;
        ++pos_;  // opening quote
        while (pos_ < s_.size() && s_[pos_] != '"') {
            if (s_[pos_] == '\\') {
                ++pos_;
            }
            out.push_back(s_[pos_]);
            ++pos_;
        }
        ++pos_;
        return out;
    }

    static std::string escape(const std::string& key) {
        std::string out;
        for (char c : key) {
            if (c == '~') {
                out += "~0";
            } else if (c == '/') {
                out += "~1";
            } else {
                out.push_back(c);
            }
        }
        return out;
    }

    void value(const std::string& ptr) {
        lines_.emplace(ptr, line_);
        if (pos_ >= s_.size()) {
            return;
        }
        const char c = s_[pos_];
        if (c == '{') {
            ++pos_;
            skip_ws();
            while (pos_ < s_.size() && s_[pos_] != '}') {
                const std::size_t key_line = line_;
                const std::string key = string_token();
                skip_ws();
                ++pos_;  // ':'
                skip_ws();
                const std::string child = ptr + "/" + escape(key);
                lines_.emplace(child, key_line);
                value(child);
                skip_ws();
                if (pos_ < s_.size() && s_[pos_] == ',') {
                    ++pos_;
                    skip_ws();
                }
            }
            ++pos_;
        } else if (c == '[') {
            ++pos_;
            skip_ws();
            std::size_t idx = 0;
            while (pos_ < s_.size() && s_[pos_] != ']') {
                value(ptr + "/" + std::to_string(idx++));
                skip_ws();
                if (pos_ < s_.size() && s_[pos_] == ',') {
                    ++pos_;
                    skip_ws();
                }
            }
            ++pos_;
        } else if (c == '"') {
            string_token();
        } else {
            while (pos_ < s_.size() && s_[pos_] != ',' && s_[pos_] != '}' && s_[pos_] != ']' && s_[pos_] != ' ' &&
                   s_[pos_] != '\n' && s_[pos_] != '\t' && s_[pos_] != '\r') {
                ++pos_;
            }
        }
    }

    const std::string& s_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::map<std::string, std::size_t> lines_;
};

struct SchemaContext {
    std::string source;
    const JsonLineIndex* index;

    [[noreturn]] void fail(const std::string& ptr, const std::string& what) const {
        throw SchemaError(source, index->line_of(ptr), (ptr.empty() ? std::string("/") : ptr) + ": " + what);
    }
};

/// Object reader that remembers which keys were read; finish() rejects the rest.
class Obj {
  public:
    Obj(const nlohmann::json& j, std::string ptr, const SchemaContext& ctx) : j_(j), ptr_(std::move(ptr)), ctx_(ctx) {
        if (!j_.is_object()) {
            ctx_.fail(ptr_, "expected an object");
        }
    }

    Obj(const Obj&) = delete;
    Obj& operator=(const Obj&) = delete;

    bool has(const std::string& key) const { return j_.contains(key); }
    std::string at_ptr(const std::string& key) const { return ptr_ + "/" + key; }
    const SchemaContext& ctx() const { return ctx_; }

    const nlohmann::json& raw(const std::string& key) {
        if (!j_.contains(key)) {
            ctx_.fail(ptr_, "missing required field '" + key + "'");
        }
        seen_.insert(key);
        return j_.at(key);
    }

    double number(const std::string& key) {
        const auto& v = raw(key);
        if (!v.is_number()) {
            ctx_.fail(at_ptr(key), "expected a number");
        }
        return v.get<double>();
    }
    double number(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

    std::uint64_t unsigned_int(const std::string& key) {
        const auto& v = raw(key);
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
            ctx_.fail(at_ptr(key), "expected a non-negative integer");
        }
        return v.get<std::uint64_t>();
    }
    std::uint64_t unsigned_int(const std::string& key, std::uint64_t fallback) {
        return has(key) ? unsigned_int(key) : fallback;
    }

    bool boolean(const std::string& key, bool fallback) {
        if (!has(key)) {
            return fallback;
        }
        const auto& v = raw(key);
        if (!v.is_boolean()) {
            ctx_.fail(at_ptr(key), "expected true or false");
        }
        return v.get<bool>();
    }

    std::string string(const std::string& key) {
        const auto& v = raw(key);
        if (!v.is_string()) {
            ctx_.fail(at_ptr(key), "expected a string");
        }
        return v.get<std::string>();
    }
    std::string string(const std::string& key, const std::string& fallback) {
        return has(key) ? string(key) : fallback;
    }

    /// A number or an array of numbers.
    std::vector<double> numbers(const std::string& key) {
        const auto& v = raw(key);
        if (v.is_number()) {
            return {v.get<double>()};
        }
        if (!v.is_array()) {
            ctx_.fail(at_ptr(key), "expected a number or an array of numbers");
        }
        std::vector<double> out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number()) {
                ctx_.fail(at_ptr(key) + "/" + std::to_string(i), "expected a number");
            }
            out.push_back(v[i].get<double>());
        }
        return out;
    }

    const nlohmann::json& array(const std::string& key) {
        const auto& v = raw(key);
        if (!v.is_array()) {
            ctx_.fail(at_ptr(key), "expected an array");
        }
        return v;
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (!seen_.count(it.key())) {
                ctx_.fail(at_ptr(it.key()), "unknown field '" + it.key() + "'");
            }
        }
    }

  private:
    const nlohmann::json& j_;
    std::string ptr_;
    const SchemaContext& ctx_;
    std::set<std::string> seen_;
};

}  // namespace detail

struct GridSettings {
    double horizon = 1.0;
    std::size_t steps = 256;
    /// Steps of the noise grid; a multiple of `steps`.
    std::size_t noise_steps = 256;
};

struct MonteCarloSettings {
    std::size_t paths = 1000;
    std::uint64_t seed = 1;
    std::vector<double> sample_times;
};

struct ApproxSettings {
    unsigned levels = 5;
    std::optional<DriftMode> mode;
    std::size_t inner = 8;
};

struct UniquenessSettings {
    std::vector<double> ladder;
    double ceiling = std::numeric_limits<double>::infinity();
    std::vector<unsigned> phi_levels{1, 2, 5, 10};
    double xm = 1.0;
};

struct Scenario {
    std::string source;
    std::string name;
    std::string preset;
    std::string drift_kind;
    SystemSpec spec;
    GridSettings grid;
    SchemeConfig scheme;
    MonteCarloSettings monte_carlo;
    ApproxSettings approx;
    UniquenessSettings uniqueness;
    SamplingConfig validation;
    double truncation = 1.0;

    TimeGrid noise_grid() const { return TimeGrid::uniform(grid.horizon, grid.noise_steps); }
    /// Scheme config with the simulation step made explicit.
    SchemeConfig scheme_config() const {
        SchemeConfig c = scheme;
        c.step = grid.horizon / static_cast<double>(grid.steps);
        return c;
    }
};

namespace detail {

inline Modulus read_modulus(const nlohmann::json& j, const std::string& ptr, const SchemaContext& ctx) {
    Obj o(j, ptr, ctx);
    const auto kind = o.string("kind");
    Modulus m = Modulus::power(0.0, 1.0);
    try {
        if (kind == "power") {
            m = Modulus::power(o.number("scale"), o.number("exponent"));
        } else if (kind == "tabulated") {
            m = Modulus::tabulated(o.numbers("xs"), o.numbers("ys"));
        } else {
            ctx.fail(o.at_ptr("kind"), "unknown modulus kind '" + kind + "' (power, tabulated)");
        }
    } catch (const SchemaError&) {
        throw;
    } catch (const InvalidInput& e) {
        ctx.fail(ptr, e.what());
    }
    o.finish();
    return m;
}

inline FiniteMeasure read_measure(const nlohmann::json& j, const std::string& ptr, const SchemaContext& ctx) {
    Obj o(j, ptr, ctx);
    const auto kind = o.string("kind");
    FiniteMeasure m = FiniteMeasure::point(0.0, 0.0);
    try {
        if (kind == "exponential") {
            m = FiniteMeasure::exponential(o.number("mass"), o.number("mean"));
        } else if (kind == "point") {
            m = FiniteMeasure::point(o.number("size"), o.number("mass"));
        } else if (kind == "atoms") {
            m = FiniteMeasure::atoms(o.numbers("sizes"), o.numbers("weights"));
        } else {
            ctx.fail(o.at_ptr("kind"), "unknown measure kind '" + kind + "' (exponential, point, atoms)");
        }
    } catch (const SchemaError&) {
        throw;
    } catch (const InvalidInput& e) {
        ctx.fail(ptr, e.what());
    }
    o.finish();
    return m;
}

inline Diffusion read_diffusion(const nlohmann::json& j, const std::string& ptr, const SchemaContext& ctx) {
    Obj o(j, ptr, ctx);
    const auto kind = o.string("kind");
    Diffusion d;
    try {
        if (kind == "zero") {
            d = Diffusion::zero();
        } else if (kind == "sqrt") {
            d = Diffusion::sqrt(o.number("scale"));
        } else if (kind == "power") {
            d = Diffusion::power(o.number("scale"), o.number("exponent"));
        } else if (kind == "clipped_sine") {
            d = Diffusion::clipped_sine(o.number("amplitude"), o.number("frequency"));
        } else {
            ctx.fail(o.at_ptr("kind"), "unknown diffusion kind '" + kind + "' (zero, sqrt, power, clipped_sine)");
        }
    } catch (const SchemaError&) {
        throw;
    } catch (const InvalidInput& e) {
        ctx.fail(ptr, e.what());
    }
    o.finish();
    return d;
}

inline CoefficientSet read_component(const nlohmann::json& j, const std::string& ptr, const SchemaContext& ctx,
                                     double& initial) {
    Obj o(j, ptr, ctx);
    CoefficientSet c;
    c.a = o.number("a");
    initial = o.number("initial");
    c.sigma = o.has("sigma") ? read_diffusion(o.raw("sigma"), o.at_ptr("sigma"), ctx) : Diffusion::zero();
    if (o.has("brownian")) {
        const auto& arr = o.array("brownian");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            Obj w(arr[i], o.at_ptr("brownian") + "/" + std::to_string(i), ctx);
            c.brownian.push_back({static_cast<std::size_t>(w.unsigned_int("factor")), w.number("weight")});
            w.finish();
        }
    }
    if (o.has("stable")) {
        const auto& arr = o.array("stable");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            Obj w(arr[i], o.at_ptr("stable") + "/" + std::to_string(i), ctx);
            c.stable.push_back(
                {static_cast<std::size_t>(w.unsigned_int("factor")), w.number("coef"), w.number("alpha")});
            w.finish();
        }
    }
    if (o.has("thinning")) {
        Obj t(o.raw("thinning"), o.at_ptr("thinning"), ctx);
        const auto levy = read_measure(t.raw("levy"), t.at_ptr("levy"), ctx);
        c.thinning = ThinningKernel{levy, t.number("v_range")};
        t.finish();
    }
    if (o.has("g1")) {
        Obj g(o.raw("g1"), o.at_ptr("g1"), ctx);
        JumpKernel k;
        k.measure = read_measure(g.raw("measure"), g.at_ptr("measure"), ctx);
        const auto shape = g.string("shape", "capped");
        if (shape == "capped") {
            k.shape = JumpKernel::Shape::capped;
        } else if (shape == "proportional") {
            k.shape = JumpKernel::Shape::proportional;
        } else {
            ctx.fail(g.at_ptr("shape"), "unknown g1 shape '" + shape + "' (capped, proportional)");
        }
        k.cap = g.number("cap", 1.0);
        c.g1 = k;
        g.finish();
    }
    c.rho = read_modulus(o.raw("rho"), o.at_ptr("rho"), ctx);
    if (o.has("rho_m")) {
        c.rho_m = read_modulus(o.raw("rho_m"), o.at_ptr("rho_m"), ctx);
    }
    if (o.has("r_m")) {
        c.r_m = read_modulus(o.raw("r_m"), o.at_ptr("r_m"), ctx);
    }
    o.finish();
    return c;
}

inline DriftSpec read_drift(Obj& o, std::size_t n, double horizon, std::string& kind) {
    kind = o.string("kind");
    const auto& ctx = o.ctx();
    if (kind == "mean_field_average") {
        return DriftSpec::mean_field_average(n);
    }
    if (kind == "constant") {
        return DriftSpec::constant(o.number("value"));
    }
    if (kind == "time_linear") {
        return DriftSpec::time_linear(o.number("intercept"), o.number("slope"), horizon);
    }
    if (kind == "weighted_sum") {
        auto w = o.numbers("weights");
        if (w.size() != n) {
            ctx.fail(o.at_ptr("weights"), "expected " + std::to_string(n) + " weights");
        }
        return DriftSpec::weighted_sum(o.number("offset", 0.0), std::move(w));
    }
    ctx.fail(o.at_ptr("kind"), "unknown drift kind '" + kind + "' (mean_field_average, constant, time_linear, weighted_sum)");
}

inline SystemSpec read_system(const std::string& preset, Obj& p, std::optional<DriftSpec> drift, double truncation,
                              std::optional<double> k_override) {
    const auto& ctx = p.ctx();
    SystemSpec spec;
    if (preset == "cir") {
        RootParams r;
        r.a = p.number("a");
        r.b = p.number("b", 0.0);
        r.sigma = p.number("sigma");
        r.sigma_z = p.number("sigma_z", 0.0);
        r.alpha = p.number("alpha", 2.0);
        r.initial = p.number("initial");
        r.truncation = truncation;
        spec = preset_root(r);
        if (drift) {
            spec.drifts.assign(1, *drift);
        }
    } else if (preset == "example21") {
        Example21Params e;
        e.n = static_cast<std::size_t>(p.unsigned_int("n"));
        e.a = p.numbers("a");
        e.sigma = p.numbers("sigma");
        e.sigma0 = p.number("sigma0", 0.0);
        e.sigma_z = p.has("sigma_z") ? p.numbers("sigma_z") : std::vector<double>{0.0};
        e.sigma_z0 = p.number("sigma_z0", 0.0);
        e.alpha = p.has("alpha") ? p.numbers("alpha") : std::vector<double>{2.0};
        e.alpha0 = p.number("alpha0", 2.0);
        e.initial = p.numbers("initial");
        e.truncation = truncation;
        spec = preset_example21(e, drift);
    } else if (preset == "cbi_thinning") {
        const auto levy = read_measure(p.raw("levy"), p.at_ptr("levy"), ctx);
        spec = preset_cbi_system(levy, p.number("v_range"), p.number("a"), p.number("b", 0.0), p.number("sigma"),
                                 p.number("initial"), truncation);
        if (drift) {
            spec.drifts.assign(1, *drift);
        }
    } else if (preset == "custom") {
        spec.name = "custom";
        spec.layout.brownian_factors = static_cast<std::size_t>(p.unsigned_int("brownian_factors", 0));
        if (p.has("stable_alphas")) {
            spec.layout.stable_alphas = p.numbers("stable_alphas");
        }
        const auto& comps = p.array("components");
        if (comps.empty()) {
            ctx.fail(p.at_ptr("components"), "need at least one component");
        }
        for (std::size_t i = 0; i < comps.size(); ++i) {
            double init = 0.0;
            spec.components.push_back(read_component(comps[i], p.at_ptr("components") + "/" + std::to_string(i), ctx, init));
            spec.initial.push_back(init);
        }
        spec.drifts.assign(spec.size(), drift ? *drift : DriftSpec::mean_field_average(spec.size()));
        double K = 0.0;
        for (const auto& c : spec.components) {
            if (c.g1) {
                K = std::max(K, c.g1->linear_growth_constant());
            }
        }
        spec.K = K;
        spec.K_source = K > 0.0 ? "largest linear-growth constant of the g1 kernels" : "g1 = 0";
        assign_event_measures(spec);
        validate_spec(spec);
    } else {
        ctx.fail("/preset", "unknown preset '" + preset + "' (cir, example21, cbi_thinning, custom)");
    }
    if (k_override) {
        spec.K = *k_override;
        spec.K_source = "scenario theory.linear_growth_k";
    }
    return spec;
}

inline std::optional<DriftMode> parse_mode(const std::string& s) {
    if (s == "realized") {
        return DriftMode::realized;
    }
    if (s == "nested-mc") {
        return DriftMode::nested_mc;
    }
    if (s == "deterministic") {
        return DriftMode::deterministic;
    }
    return std::nullopt;
}

inline std::optional<Scheme> parse_scheme(const std::string& s) {
    if (s == "explicit-euler-clipped") {
        return Scheme::explicit_euler_clipped;
    }
    if (s == "drift-implicit") {
        return Scheme::drift_implicit;
    }
    return std::nullopt;
}

}  // namespace detail

/// Parses scenario text. `source` names the input in error messages.
inline Scenario parse_scenario(const std::string& text, const std::string& source = "<scenario>") {
    nlohmann::json root;
    try {
        root = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        std::size_t line = 1;
        for (std::size_t i = 0; i < std::min<std::size_t>(e.byte, text.size()); ++i) {
            if (text[i] == '\n') {
                ++line;
            }
        }
        throw SchemaError(source, line, std::string("malformed JSON: ") + e.what());
    }
    const detail::JsonLineIndex index(text);
    const detail::SchemaContext ctx{source, &index};
    detail::Obj top(root, "", ctx);

    Scenario sc;
    sc.source = source;
    const auto version = top.unsigned_int("schema_version");
    if (version != kScenarioSchemaVersion) {
        ctx.fail("/schema_version", "unsupported schema_version " + std::to_string(version) + " (expected " +
                                        std::to_string(kScenarioSchemaVersion) + ")");
    }
    sc.name = top.string("name");
    sc.preset = top.string("preset");

    if (top.has("grid")) {
        detail::Obj g(top.raw("grid"), "/grid", ctx);
        sc.grid.horizon = g.number("horizon", 1.0);
        sc.grid.steps = static_cast<std::size_t>(g.unsigned_int("steps", 256));
        sc.grid.noise_steps = static_cast<std::size_t>(g.unsigned_int("noise_steps", sc.grid.steps));
        g.finish();
    }
    if (!(sc.grid.horizon > 0.0) || !std::isfinite(sc.grid.horizon)) {
        ctx.fail("/grid/horizon", "horizon must be positive and finite");
    }
    if (sc.grid.steps == 0 || sc.grid.noise_steps == 0 || sc.grid.noise_steps % sc.grid.steps != 0) {
        ctx.fail("/grid", "steps must be >= 1 and divide noise_steps");
    }

    if (top.has("scheme")) {
        detail::Obj s(top.raw("scheme"), "/scheme", ctx);
        const auto kind = s.string("kind", "explicit-euler-clipped");
        const auto parsed = detail::parse_scheme(kind);
        if (!parsed) {
            ctx.fail("/scheme/kind", "unknown scheme '" + kind + "' (explicit-euler-clipped, drift-implicit)");
        }
        sc.scheme.scheme = *parsed;
        sc.scheme.clip_at_zero = s.boolean("clip_at_zero", true);
        s.finish();
    }

    std::optional<double> k_override;
    if (top.has("theory")) {
        detail::Obj t(top.raw("theory"), "/theory", ctx);
        sc.truncation = t.number("truncation_level", 1.0);
        if (t.has("linear_growth_k")) {
            k_override = t.number("linear_growth_k");
            if (!(*k_override >= 0.0)) {
                ctx.fail("/theory/linear_growth_k", "must be >= 0");
            }
        }
        t.finish();
    }
    if (!(sc.truncation > 0.0)) {
        ctx.fail("/theory/truncation_level", "must be positive");
    }

    std::size_t n_components = 1;
    if (sc.preset == "example21" && root.contains("parameters") && root["parameters"].contains("n") &&
        root["parameters"]["n"].is_number_unsigned()) {
        n_components = root["parameters"]["n"].get<std::size_t>();
    } else if (sc.preset == "custom" && root.contains("parameters") && root["parameters"].contains("components") &&
               root["parameters"]["components"].is_array()) {
        n_components = root["parameters"]["components"].size();
    }

    std::optional<DriftSpec> drift;
    if (top.has("drift")) {
        detail::Obj d(top.raw("drift"), "/drift", ctx);
        try {
            drift = detail::read_drift(d, n_components, sc.grid.horizon, sc.drift_kind);
        } catch (const SchemaError&) {
            throw;
        } catch (const InvalidInput& e) {
            ctx.fail("/drift", e.what());
        }
        d.finish();
    }

    {
        detail::Obj p(top.raw("parameters"), "/parameters", ctx);
        try {
            sc.spec = detail::read_system(sc.preset, p, drift, sc.truncation, k_override);
        } catch (const SchemaError&) {
            throw;
        } catch (const InvalidInput& e) {
            ctx.fail("/parameters", e.what());
        }
        p.finish();
    }
    if (sc.drift_kind.empty()) {
        sc.drift_kind = sc.preset == "cir" || sc.preset == "cbi_thinning" ? "constant" : "mean_field_average";
    }

    if (top.has("monte_carlo")) {
        detail::Obj m(top.raw("monte_carlo"), "/monte_carlo", ctx);
        sc.monte_carlo.paths = static_cast<std::size_t>(m.unsigned_int("paths", sc.monte_carlo.paths));
        sc.monte_carlo.seed = m.unsigned_int("seed", sc.monte_carlo.seed);
        if (m.has("sample_times")) {
            sc.monte_carlo.sample_times = m.numbers("sample_times");
        }
        m.finish();
    }
    for (double t : sc.monte_carlo.sample_times) {
        if (!(t >= 0.0 && t <= sc.grid.horizon)) {
            ctx.fail("/monte_carlo/sample_times", "sample time " + format_number(t) + " outside [0, horizon]");
        }
    }

    if (top.has("approx")) {
        detail::Obj a(top.raw("approx"), "/approx", ctx);
        sc.approx.levels = static_cast<unsigned>(a.unsigned_int("levels", sc.approx.levels));
        if (a.has("mode")) {
            const auto mode = a.string("mode");
            sc.approx.mode = detail::parse_mode(mode);
            if (!sc.approx.mode) {
                ctx.fail("/approx/mode", "unknown mode '" + mode + "' (realized, nested-mc, deterministic)");
            }
        }
        sc.approx.inner = static_cast<std::size_t>(a.unsigned_int("inner", sc.approx.inner));
        a.finish();
    }

    if (top.has("uniqueness")) {
        detail::Obj u(top.raw("uniqueness"), "/uniqueness", ctx);
        if (u.has("ladder")) {
            sc.uniqueness.ladder = u.numbers("ladder");
        }
        sc.uniqueness.ceiling = u.number("ceiling", sc.uniqueness.ceiling);
        if (u.has("phi_levels")) {
            sc.uniqueness.phi_levels.clear();
            for (double k : u.numbers("phi_levels")) {
                if (!(k >= 1.0) || k != std::floor(k)) {
                    ctx.fail("/uniqueness/phi_levels", "levels must be integers >= 1");
                }
                sc.uniqueness.phi_levels.push_back(static_cast<unsigned>(k));
            }
        }
        sc.uniqueness.xm = u.number("x_m", sc.uniqueness.xm);
        u.finish();
    }

    if (top.has("validation")) {
        detail::Obj v(top.raw("validation"), "/validation", ctx);
        sc.validation.samples = static_cast<std::size_t>(v.unsigned_int("samples", sc.validation.samples));
        sc.validation.state_max = v.number("state_max", sc.validation.state_max);
        sc.validation.seed = v.unsigned_int("seed", sc.validation.seed);
        v.finish();
    }
    sc.validation.truncation = sc.truncation;
    top.finish();
    return sc;
}

inline Scenario load_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InvalidInput("cannot open scenario file '" + path + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str(), path);
}

}  // namespace jsde
