#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "jsde/coeffs.hpp"
#include "jsde/validate.hpp"
#include "oracles.hpp"

using namespace jsde;

namespace {

SamplingConfig small_cfg() {
    SamplingConfig cfg;
    cfg.samples = 400;
    cfg.state_max = 5.0;
    return cfg;
}

CoefficientSet root_component(double sigma = 0.8, double sigma_z = 0.3, double alpha = 1.5) {
    return preset_root({1.0, 1.0, sigma, sigma_z, alpha, 1.0, 1.0}).components[0];
}

// Quadrature of int |min(p u, m) - min(q u, m)|^2 c u^{-1-alpha} du with an exact small-u tail.
double stable_l2_oracle(double p, double q, double m, double alpha) {
    const double c = oracle::levy_constant(alpha);
    const double eps = 1e-6;
    auto f = [&](double u) {
        const double d = std::min(p * u, m) - std::min(q * u, m);
        return d * d * c * std::pow(u, -1.0 - alpha);
    };
    return oracle::log_simpson(f, eps, 1e6, 80000) + c * (p - q) * (p - q) * std::pow(eps, 2.0 - alpha) / (2.0 - alpha);
}

}  // namespace

TEST_CASE("presets satisfy both coefficient conditions") {
    const auto cfg = small_cfg();
    for (const auto& c : {root_component(), root_component(0.5, 0.0, 2.0),
                          preset_cbi_thinning(FiniteMeasure::exponential(1.0, 0.5), 20.0, 1.0, 0.6)}) {
        const auto r1 = validate_assum1(c, cfg);
        const auto r2 = validate_assum2(c, cfg);
        for (const auto& f : r1.findings) {
            INFO(f.condition << ": " << f.detail);
            CHECK(f.verdict == Verdict::pass);
        }
        for (const auto& f : r2.findings) {
            INFO(f.condition << ": " << f.detail);
            CHECK(f.verdict == Verdict::pass);
        }
    }
}

TEST_CASE("square diffusion breaks the square-root modulus with a genuine witness") {
    auto c = root_component();
    c.sigma = Diffusion::power(1.0, 2.0);
    const auto rep = validate_assum1(c, small_cfg());
    CHECK(!rep.passed());
    const auto* f = rep.find("sigma_modulus");
    REQUIRE(f);
    REQUIRE(f->verdict == Verdict::fail);
    REQUIRE(f->witness.size() == 4);
    const double x = f->witness[0];
    const double y = f->witness[1];
    CHECK(std::abs(x * x - y * y) > c.rho(std::abs(x - y)));
    CHECK(validate_assum2(c, small_cfg()).verdict_of("sigma_bounded_or_increasing") == Verdict::pass);
}

TEST_CASE("modulus divergence verdicts") {
    auto c = root_component();
    c.rho = Modulus::power(1.0, 0.4);
    CHECK(validate_assum1(c, small_cfg()).verdict_of("rho_divergence") == Verdict::fail);
    c.rho = Modulus::tabulated({0.0, 1.0, 100.0}, {0.0, 1.0, 10.0});
    CHECK(validate_assum1(c, small_cfg()).verdict_of("rho_divergence") == Verdict::unchecked);
    c = root_component();
    c.r_m = Modulus::power(1.0, 2.0);
    CHECK(validate_assum1(c, small_cfg()).verdict_of("r_m_divergence") == Verdict::fail);
}

TEST_CASE("stable truncated l2 integral matches quadrature") {
    for (double alpha : {1.2, 1.5, 1.8}) {
        const StableLoading s{0, 0.9, alpha};
        for (auto [x, y] : std::vector<std::pair<double, double>>{{1.0, 0.0}, {2.0, 0.5}, {4.0, 3.9}, {0.2, 0.3}}) {
            const double p = 0.9 * std::pow(x, 1.0 / alpha);
            const double q = 0.9 * std::pow(y, 1.0 / alpha);
            INFO("alpha " << alpha << " x " << x << " y " << y);
            CHECK(stable_truncated_l2(s, x, y, 1.0) == Catch::Approx(stable_l2_oracle(p, q, 1.0, alpha)).epsilon(1e-6));
        }
    }
    // alpha = 2: Gaussian variance 2 coef^2 (sqrt x - sqrt y)^2.
    CHECK(stable_truncated_l2(StableLoading{0, 0.5, 2.0}, 4.0, 1.0, 1.0) == Catch::Approx(0.5));
}

TEST_CASE("local g0 integral matches quadrature") {
    const double alpha = 1.6;
    CoefficientSet c;
    c.stable.push_back({0, 0.7, alpha});
    c.thinning = ThinningKernel{FiniteMeasure::exponential(2.0, 0.8), 3.0};
    const double cst = oracle::levy_constant(alpha);
    for (double x : {0.5, 2.0, 4.0}) {
        const double p = 0.7 * std::pow(x, 1.0 / alpha);
        // |g| ^ |g|^2 = min(g, g^2): g^2 below 1, g above.
        const double split = 1.0 / p;
        const double stable = cst * p * p * std::pow(split, 2.0 - alpha) / (2.0 - alpha) +
                              oracle::log_simpson([&](double u) { return p * u * cst * std::pow(u, -1.0 - alpha); },
                                                  split, 1e9, 60000) +
                              cst * p * std::pow(1e9, 1.0 - alpha) / (alpha - 1.0);
        const double thin = std::min(x, 3.0) * oracle::log_simpson(
                                                   [](double z) {
                                                       return std::min(z, z * z) * 2.0 / 0.8 * std::exp(-z / 0.8);
                                                   },
                                                   1e-12, 60.0, 40000);
        INFO("x " << x);
        CHECK(g0_local_integral(c, x) == Catch::Approx(stable + thin).epsilon(1e-6));
    }
}

TEST_CASE("thinning kernel beyond its v-range") {
    // g0 stays nondecreasing but saturates; the truncated L2 increment is
    // exactly |min(x,V) - min(y,V)| int min(zeta, m)^2.
    CoefficientSet c;
    c.thinning = ThinningKernel{FiniteMeasure::atoms({0.5, 3.0}, {1.0, 1.0}), 2.0};
    CHECK(g0_truncated_l2(c, 1.5, 0.5, 1.0) == Catch::Approx(1.0 * (0.25 + 1.0)));
    CHECK(g0_truncated_l2(c, 5.0, 3.0, 1.0) == 0.0);
}

TEST_CASE("g1 checks") {
    auto c = root_component();
    c.g1 = JumpKernel{FiniteMeasure::exponential(1.0, 0.5), JumpKernel::Shape::capped, 2.0};
    c.r_m = Modulus::power(1.0, 1.0);
    const auto r1 = validate_assum1(c, small_cfg());
    CHECK(r1.verdict_of("g1_sign") == Verdict::pass);
    CHECK(r1.verdict_of("g1_linear_growth") == Verdict::pass);
    CHECK(r1.verdict_of("g1_truncated_l1_modulus") == Verdict::pass);
    CHECK(validate_assum2(c, small_cfg()).verdict_of("g1_increasing_or_dominated") == Verdict::pass);

    // A modulus too small for the increments.
    c.r_m = Modulus::power(1e-3, 1.0);
    CHECK(validate_assum1(c, small_cfg()).verdict_of("g1_truncated_l1_modulus") == Verdict::fail);

    // Truncated L1 increment against a direct weighted sum.
    const JumpKernel g{FiniteMeasure::atoms({1.0, 4.0}, {0.5, 0.25}), JumpKernel::Shape::proportional, 1.0};
    const double lhs = 0.5 * (std::min(2.0, 3.0) - std::min(1.0, 3.0)) + 0.25 * (std::min(8.0, 3.0) - std::min(4.0, 3.0));
    CHECK(g1_truncated_l1(g, 2.0, 1.0, 3.0) == Catch::Approx(lhs));
}

TEST_CASE("non-monotone diffusion needs a declared bound") {
    auto c = root_component();
    c.sigma = Diffusion::clipped_sine(0.5, 3.0);
    CHECK(validate_assum2(c, small_cfg()).verdict_of("sigma_bounded_or_increasing") == Verdict::pass);
    c.sigma = Diffusion::custom([](double x) { return x > 0 ? std::abs(std::sin(x)) * 3.0 : 0.0; }, "3|sin x|");
    CHECK(validate_assum2(c, small_cfg()).verdict_of("sigma_bounded_or_increasing") == Verdict::fail);
    c.sigma = Diffusion::custom([](double x) { return x > 0 ? std::abs(std::sin(x)) * 3.0 : 0.0; }, "3|sin x|", 1.0);
    CHECK(validate_assum2(c, small_cfg()).verdict_of("sigma_bounded_or_increasing") == Verdict::fail);
    c.sigma = Diffusion::custom([](double x) { return x > 0 ? std::abs(std::sin(x)) * 3.0 : 0.0; }, "3|sin x|", 3.0);
    CHECK(validate_assum2(c, small_cfg()).verdict_of("sigma_bounded_or_increasing") == Verdict::pass);
    c.sigma = Diffusion::custom([](double x) { return 1.0 + x * x; }, "1+x^2");
    CHECK(validate_assum1(c, small_cfg()).verdict_of("sigma_zero_nonpositive") == Verdict::fail);
}

TEST_CASE("rho_m must sit below rho") {
    CHECK(validate_assum_uniq(Modulus::power(1.0, 0.5), Modulus::power(0.5, 0.5), 1.0).passed());
    const auto bad = validate_assum_uniq(Modulus::power(1.0, 0.5), Modulus::power(1.0, 0.4), 1.0);
    CHECK(!bad.passed());
    const auto* f = bad.find("rho_m_below_rho");
    REQUIRE(f);
    REQUIRE(f->witness.size() == 3);
    CHECK(std::pow(f->witness[0], 0.4) > std::pow(f->witness[0], 0.5));
    CHECK_THROWS_AS(validate_assum_uniq(Modulus::power(1.0, 0.5), Modulus::power(1.0, 0.5), 0.0), InvalidInput);
}

TEST_CASE("drift conditions") {
    Example21Params p;
    p.n = 3;
    p.a = {1.0};
    p.sigma = {0.5};
    p.sigma_z = {0.0};
    p.alpha = {1.5};
    p.initial = {1.0};
    auto spec = preset_example21(p);
    CHECK(validate_drift(spec, 1.0, small_cfg()).passed());

    spec.drifts.assign(3, DriftSpec::mean_field_custom(
                              [](double, std::span<const double> x) { return 5.0 / (1.0 + x[0] * x[0]); },
                              "decreasing", 5.0, 0.0));
    const auto dec = validate_drift(spec, 1.0, small_cfg());
    CHECK(dec.verdict_of("drift_increasing") == Verdict::fail);
    CHECK(dec.verdict_of("drift_nonnegative") == Verdict::pass);

    spec.drifts.assign(3, DriftSpec::mean_field_custom([](double s, std::span<const double>) { return s - 0.5; },
                                                       "s - 1/2", 0.5, 0.0));
    CHECK(validate_drift(spec, 1.0, small_cfg()).verdict_of("drift_nonnegative") == Verdict::fail);

    spec.drifts.assign(3, DriftSpec::mean_field_custom(
                              [](double, std::span<const double> x) { return 2.0 * (x[0] > 0 ? x[0] : 0.0); },
                              "2 x1", 0.0, 1.0));
    CHECK(validate_drift(spec, 1.0, small_cfg()).verdict_of("drift_linear_bound") == Verdict::fail);
}
