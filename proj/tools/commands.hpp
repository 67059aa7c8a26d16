#pragma once

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "jsde/jsde.hpp"

namespace jsde::cli {

enum ExitCode : int { kOk = 0, kValidationFailure = 1, kNumericFailure = 2, kUsageError = 3 };

class UsageError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct Options {
    std::string scenario;
    std::optional<std::size_t> paths;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::optional<double> dt;
    std::optional<unsigned> levels;
    std::optional<std::string> mode;
    std::size_t jobs = default_jobs();
    std::size_t csv_paths = 16;
    std::vector<double> ladder;
    std::optional<std::size_t> inner;
};

using nlohmann::json;

/// Output directory: --out, then $JSDE_OUT_DIR, then ./jsde_out.
inline std::filesystem::path output_dir(const Options& o) {
    std::filesystem::path dir;
    if (!o.out.empty()) {
        dir = o.out;
    } else if (const char* env = std::getenv("JSDE_OUT_DIR"); env && *env) {
        dir = env;
    } else {
        dir = "jsde_out";
    }
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    if (!f) {
        throw std::runtime_error("cannot write " + p.string());
    }
    return f;
}

inline void write_json(const std::filesystem::path& p, const json& j) {
    auto f = open_out(p);
    f << j.dump(2) << '\n';
}

inline json number_array(const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) {
        a.push_back(std::isfinite(x) ? json(x) : json(format_number(x)));
    }
    return a;
}

inline json finite_or_string(double x) { return std::isfinite(x) ? json(x) : json(format_number(x)); }

inline void log_stage(const std::string& msg) { std::cerr << "jsde: " << msg << '\n'; }

/// Loads the scenario and applies flag overrides that change the model or grid.
inline Scenario prepare(const Options& o) {
    if (o.scenario.empty()) {
        throw UsageError("--scenario is required");
    }
    if (o.paths && *o.paths == 0) {
        throw UsageError("--paths must be >= 1");
    }
    if (o.jobs == 0) {
        throw UsageError("--jobs must be >= 1");
    }
    Scenario sc = load_scenario(o.scenario);
    if (o.paths) {
        sc.monte_carlo.paths = *o.paths;
    }
    if (o.seed) {
        sc.monte_carlo.seed = *o.seed;
    }
    if (o.dt) {
        const double steps = sc.grid.horizon / *o.dt;
        if (!(*o.dt > 0.0) || std::abs(steps - std::round(steps)) > 1e-9 * steps) {
            throw UsageError("--dt must divide the horizon " + format_number(sc.grid.horizon));
        }
        sc.grid.steps = static_cast<std::size_t>(std::llround(steps));
        if (sc.grid.noise_steps % sc.grid.steps != 0) {
            sc.grid.noise_steps = sc.grid.steps;
        }
    }
    return sc;
}

inline std::vector<double> default_sample_times(const Scenario& sc) {
    if (!sc.monte_carlo.sample_times.empty()) {
        return sc.monte_carlo.sample_times;
    }
    std::vector<double> t;
    for (int j = 0; j <= 8; ++j) {
        t.push_back(sc.grid.horizon * j / 8.0);
    }
    return t;
}

inline json curve_json(const MomentCurve& c) {
    return json{{"mean", number_array(c.mean)},
                {"stderr", number_array(c.stderr_mean)},
                {"q05", number_array(c.q05)},
                {"q50", number_array(c.q50)},
                {"q95", number_array(c.q95)},
                {"integral_mean", finite_or_string(c.integral_mean)},
                {"integral_stderr", finite_or_string(c.integral_stderr)}};
}

inline json scenario_json(const Scenario& sc) {
    return json{{"name", sc.name},
                {"source_preset", sc.preset},
                {"components", sc.spec.size()},
                {"drift", sc.drift_kind},
                {"horizon", sc.grid.horizon},
                {"steps", sc.grid.steps},
                {"noise_steps", sc.grid.noise_steps},
                {"scheme", to_string(sc.scheme.scheme)},
                {"clip_at_zero", sc.scheme.clip_at_zero}};
}

inline NumericError on_path(const NumericError& e, std::size_t p) {
    return NumericError("path " + std::to_string(p) + ", step " + std::to_string(e.step()) + ", component " +
                            std::to_string(e.component()) + ": " + e.what(),
                        e.step(), e.component());
}

struct SimulateResult {
    std::vector<CadlagPath> paths;
    RunReport report;
};

inline int cmd_simulate(const Options& o) {
    const Scenario sc = prepare(o);
    const auto dir = output_dir(o);
    const auto times = default_sample_times(sc);
    const auto noise_grid = sc.noise_grid();
    const auto scheme = sc.scheme_config();
    log_stage("simulate " + sc.name + ": " + std::to_string(sc.monte_carlo.paths) + " paths, " +
              std::to_string(sc.grid.steps) + " steps");

    auto paths_csv = open_out(dir / "paths.csv");
    paths_csv << "path_id,component,time,value,is_jump,left_limit\n";
    MomentEstimator est(sc.spec.size(), times);
    RunReport report;
    ordered_parallel(
        sc.monte_carlo.paths, o.jobs,
        [&](std::size_t p) {
            SimulateResult r;
            try {
                const auto noise = make_noise(sc.spec.layout, noise_grid, SeedLineage{sc.monte_carlo.seed, p});
                r.paths = solve_system(sc.spec, noise, scheme, &r.report);
            } catch (const NumericError& e) {
                throw on_path(e, p);
            }
            return r;
        },
        [&](std::size_t p, SimulateResult r) {
            for (auto& w : r.report.warnings) {
                report.warn(std::move(w));
            }
            est.add(r.paths);
            if (p < o.csv_paths) {
                for (std::size_t i = 0; i < r.paths.size(); ++i) {
                    write_path_csv_rows(paths_csv, r.paths[i], std::to_string(p) + "," + std::to_string(i));
                }
            }
        });
    const auto summary = est.summary();

    double initial_mean = 0.0;
    for (double x : sc.spec.initial) {
        initial_mean += x / static_cast<double>(sc.spec.size());
    }
    double worst_se = 0.0;
    for (std::size_t j = 0; j < times.size(); ++j) {
        const double se = summary.aggregate.stderr_mean[j];
        const double dev = std::abs(summary.aggregate.mean[j] - initial_mean);
        if (se > 0.0) {
            worst_se = std::max(worst_se, dev / se);
        }
    }

    json comps = json::array();
    for (const auto& c : summary.components) {
        comps.push_back(curve_json(c));
    }
    json j{{"command", "simulate"},
           {"scenario", scenario_json(sc)},
           {"seed", sc.monte_carlo.seed},
           {"paths", summary.paths},
           {"K", sc.spec.K},
           {"K_source", sc.spec.K_source},
           {"times", number_array(times)},
           {"components", comps},
           {"aggregate", curve_json(summary.aggregate)},
           {"aggregate_initial_mean", initial_mean},
           {"aggregate_max_deviation_in_stderr", worst_se},
           {"warnings", report.warnings}};
    write_json(dir / "summary.json", j);

    auto agg = open_out(dir / "aggregate.csv");
    agg << "time,component,mean,stderr,q05,q50,q95\n";
    auto rows = [&](const MomentCurve& c, const std::string& label) {
        for (std::size_t k = 0; k < times.size(); ++k) {
            CsvRow(agg) << times[k] << label << c.mean[k] << c.stderr_mean[k] << c.q05[k] << c.q50[k] << c.q95[k];
        }
    };
    rows(summary.aggregate, "mean");
    for (std::size_t i = 0; i < summary.components.size(); ++i) {
        rows(summary.components[i], std::to_string(i));
    }
    for (const auto& w : report.warnings) {
        log_stage("warning: " + w);
    }
    log_stage("wrote " + (dir / "summary.json").string());
    return kOk;
}

inline DriftMode choose_mode(const Options& o, const Scenario& sc, std::string& how) {
    if (o.mode) {
        const auto m = detail::parse_mode(*o.mode);
        if (!m) {
            throw UsageError("--mode must be realized, nested-mc or deterministic");
        }
        how = "flag";
        return *m;
    }
    if (sc.approx.mode) {
        how = "scenario";
        return *sc.approx.mode;
    }
    if (!sc.spec.drift_depends_on_state()) {
        how = "automatic: drifts do not depend on the state";
        return DriftMode::deterministic;
    }
    how = "default";
    return DriftMode::realized;
}

inline int cmd_approx(const Options& o) {
    const Scenario sc = prepare(o);
    const auto dir = output_dir(o);
    std::string how;
    ApproxConfig cfg;
    cfg.levels = o.levels ? *o.levels : sc.approx.levels;
    cfg.mode = choose_mode(o, sc, how);
    cfg.inner = o.inner ? *o.inner : sc.approx.inner;
    cfg.scheme = sc.scheme_config();
    if (cfg.levels < 2) {
        throw UsageError("--levels must be >= 2");
    }
    const auto noise_grid = sc.noise_grid();
    const auto grid = noise_grid.coarsen(sc.grid.noise_steps / sc.grid.steps);
    log_stage("approx " + sc.name + ": " + std::to_string(sc.monte_carlo.paths) + " paths, " +
              std::to_string(cfg.levels) + " levels, mode " + to_string(cfg.mode) + " (" + how + ")");

    struct PerPath {
        Hierarchy h;
        RunReport report;
    };
    const unsigned pairs = cfg.levels - 1;
    std::vector<RunningStats> succ(pairs);
    std::vector<RunningStats> lim(pairs);
    std::vector<RunningStats> frac(pairs);
    std::vector<double> max_violation(pairs, 0.0);
    SubsetInfimumCheck subset;
    std::size_t gap_monotone_paths = 0;
    std::size_t ordered_paths = 0;
    LevelMoments moments(cfg.levels, sc.spec.size(), grid);
    RunReport report;
    ordered_parallel(
        sc.monte_carlo.paths, o.jobs,
        [&](std::size_t p) {
            PerPath r;
            try {
                const auto noise = make_noise(sc.spec.layout, noise_grid, SeedLineage{sc.monte_carlo.seed, p});
                r.h = run_hierarchy(sc.spec, noise, cfg, &r.report);
            } catch (const NumericError& e) {
                throw on_path(e, p);
            }
            return r;
        },
        [&](std::size_t, PerPath r) {
            for (auto& w : r.report.warnings) {
                report.warn(std::move(w));
            }
            const auto& h = r.h;
            bool ordered = true;
            for (unsigned l = 0; l < pairs; ++l) {
                succ[l].add(h.successive_gap[l]);
                lim[l].add(h.limit_gap[l]);
                frac[l].add(h.ordering[l].violating_fraction);
                max_violation[l] = std::max(max_violation[l], h.ordering[l].max_violation);
                ordered = ordered && h.ordering[l].ordered();
            }
            bool gaps_monotone = true;
            for (unsigned l = 1; l < pairs; ++l) {
                gaps_monotone = gaps_monotone && h.limit_gap[l] <= h.limit_gap[l - 1];
            }
            ordered_paths += ordered ? 1 : 0;
            gap_monotone_paths += ordered && gaps_monotone ? 1 : 0;
            subset.checked += h.subset.checked;
            subset.skipped += h.subset.skipped;
            subset.violations += h.subset.violations;
            subset.worst = std::max(subset.worst, h.subset.worst);
            moments.add(h);
        });

    const bool enough = sc.monte_carlo.paths >= 2;
    std::optional<MomentBoundCheck> bound;
    if (enough) {
        bound = moment_bound_check(moments, sc.spec);
    }

    json levels = json::array();
    auto gaps = open_out(dir / "level_gaps.csv");
    gaps << "n,successive_gap_mean,successive_gap_stderr,limit_gap_mean,limit_gap_stderr,max_violation,"
            "violating_fraction\n";
    for (unsigned l = 0; l < pairs; ++l) {
        CsvRow(gaps) << (l + 1) << succ[l].mean() << succ[l].stderr_mean() << lim[l].mean() << lim[l].stderr_mean()
                     << max_violation[l] << frac[l].mean();
        levels.push_back(json{{"n", l + 1},
                              {"successive_gap_mean", succ[l].mean()},
                              {"successive_gap_stderr", succ[l].stderr_mean()},
                              {"limit_gap_mean", lim[l].mean()},
                              {"limit_gap_stderr", lim[l].stderr_mean()},
                              {"max_violation", max_violation[l]},
                              {"violating_fraction", frac[l].mean()}});
    }

    json j{{"command", "approx"},
           {"scenario", scenario_json(sc)},
           {"seed", sc.monte_carlo.seed},
           {"paths", sc.monte_carlo.paths},
           {"levels", cfg.levels},
           {"mode", to_string(cfg.mode)},
           {"mode_selection", how},
           {"inner", cfg.mode == DriftMode::nested_mc ? json(cfg.inner) : json(nullptr)},
           {"level_pairs", levels},
           {"ordered_paths", ordered_paths},
           {"ordered_paths_with_nonincreasing_limit_gap", gap_monotone_paths},
           {"subset_infimum", json{{"checked", subset.checked},
                                   {"skipped_unordered", subset.skipped},
                                   {"violations", subset.violations},
                                   {"worst_deficit", subset.worst}}},
           {"warnings", report.warnings}};
    if (bound) {
        j["moment_bound"] = json{{"M", bound->M},
                                 {"B_prime", bound->B_prime},
                                 {"L_prime", bound->L_prime},
                                 {"a_max", sc.spec.max_a()},
                                 {"B", sc.spec.lipschitz_B()},
                                 {"L", sc.spec.lipschitz_L()},
                                 {"N", sc.spec.size()},
                                 {"K", sc.spec.K},
                                 {"K_source", sc.spec.K_source},
                                 {"worst_excess", bound->worst_excess},
                                 {"holds", bound->holds}};
        auto env = open_out(dir / "bound_envelope.csv");
        env << "time,sup_mean,sup_stderr,bound\n";
        for (std::size_t k = 0; k < bound->times.size(); ++k) {
            CsvRow(env) << bound->times[k] << bound->sup_mean[k] << bound->sup_stderr[k] << bound->bound[k];
        }
    }
    write_json(dir / "approx_report.json", j);
    for (const auto& w : report.warnings) {
        log_stage("warning: " + w);
    }
    log_stage("wrote " + (dir / "approx_report.json").string());
    if (subset.violations > 0 || (bound && !bound->holds)) {
        log_stage("verification failed: subset-infimum violations or moment bound exceeded");
        return kValidationFailure;
    }
    return kOk;
}

inline json report_json(const ValidationReport& r) {
    json f = json::array();
    for (const auto& x : r.findings) {
        f.push_back(json{{"condition", x.condition},
                         {"verdict", to_string(x.verdict)},
                         {"detail", x.detail},
                         {"witness", number_array(x.witness)}});
    }
    return json{{"subject", r.subject}, {"passed", r.passed()}, {"findings", f}};
}

inline int cmd_validate(const Options& o) {
    const Scenario sc = prepare(o);
    const auto dir = output_dir(o);
    std::vector<ValidationReport> reports;
    for (std::size_t i = 0; i < sc.spec.size(); ++i) {
        const auto& c = sc.spec.components[i];
        const std::string who = "component " + std::to_string(i);
        auto r1 = validate_assum1(c, sc.validation);
        r1.subject = who + ": well-posedness conditions";
        auto r2 = validate_assum2(c, sc.validation);
        r2.subject = who + ": comparison conditions";
        auto r3 = validate_assum_uniq(c.rho, c.rho_m, sc.uniqueness.xm);
        r3.subject = who + ": uniqueness modulus ordering";
        reports.push_back(std::move(r1));
        reports.push_back(std::move(r2));
        reports.push_back(std::move(r3));
    }
    auto rd = validate_drift(sc.spec, sc.grid.horizon, sc.validation);
    rd.subject = "drifts";
    reports.push_back(std::move(rd));

    bool ok = true;
    json all = json::array();
    for (const auto& r : reports) {
        std::cout << r.subject << '\n';
        for (const auto& f : r.findings) {
            std::cout << "  " << to_string(f.verdict) << "  " << f.condition;
            if (!f.detail.empty()) {
                std::cout << "  " << f.detail;
            }
            if (!f.witness.empty()) {
                std::cout << "  witness=(";
                for (std::size_t k = 0; k < f.witness.size(); ++k) {
                    std::cout << (k ? ", " : "") << format_number(f.witness[k]);
                }
                std::cout << ")";
            }
            std::cout << '\n';
        }
        ok = ok && r.passed();
        all.push_back(report_json(r));
    }
    write_json(dir / "validation.json",
               json{{"command", "validate"}, {"scenario", scenario_json(sc)}, {"passed", ok}, {"reports", all}});
    std::cout << (ok ? "all conditions pass or are unchecked" : "some conditions fail") << '\n';
    return ok ? kOk : kValidationFailure;
}

inline int cmd_uniqueness(const Options& o) {
    const Scenario sc = prepare(o);
    const auto dir = output_dir(o);
    UniquenessConfig cfg;
    cfg.ladder = !o.ladder.empty() ? o.ladder : sc.uniqueness.ladder;
    if (cfg.ladder.empty()) {
        const double dt = sc.grid.horizon / static_cast<double>(sc.grid.steps);
        cfg.ladder = {dt, dt / 2.0, dt / 4.0};
    }
    cfg.paths = sc.monte_carlo.paths;
    cfg.seed = sc.monte_carlo.seed;
    cfg.scheme = sc.scheme.scheme;
    cfg.clip_at_zero = sc.scheme.clip_at_zero;
    cfg.ceiling = sc.uniqueness.ceiling;
    cfg.phi_levels = sc.uniqueness.phi_levels;
    cfg.xm = sc.uniqueness.xm;
    cfg.jobs = o.jobs;
    log_stage("uniqueness " + sc.name + ": " + std::to_string(cfg.paths) + " paths, ladder of " +
              std::to_string(cfg.ladder.size()));
    RunReport report;
    const auto r = uniqueness_trial(sc.spec, sc.grid.horizon, cfg, &report);

    json rows = json::array();
    auto div = open_out(dir / "divergence.csv");
    div << "coarse_step,fine_step,sup_abs_mean,sup_abs_stderr,paths\n";
    for (const auto& row : r.rows) {
        CsvRow(div) << row.coarse_step << row.fine_step << row.sup_abs.mean() << row.sup_abs.stderr_mean()
                    << row.sup_abs.count();
        rows.push_back(json{{"coarse_step", row.coarse_step},
                            {"fine_step", row.fine_step},
                            {"sup_abs_mean", row.sup_abs.mean()},
                            {"sup_abs_stderr", row.sup_abs.stderr_mean()}});
    }
    auto phi = open_out(dir / "phi_moments.csv");
    phi << "coarse_step,fine_step,time,k,mean_abs,phi_mean,phi_stderr\n";
    for (const auto& row : r.rows) {
        for (std::size_t q = 0; q < r.phi_levels.size(); ++q) {
            for (std::size_t t = 0; t < r.times.size(); ++t) {
                CsvRow(phi) << row.coarse_step << row.fine_step << r.times[t] << r.phi_levels[q]
                            << row.mean_abs[t].mean() << row.phi_mean[q][t].mean() << row.phi_mean[q][t].stderr_mean();
            }
        }
    }
    auto aseq = open_out(dir / "a_sequence.csv");
    aseq << "k,a_k\n";
    for (std::size_t k = 0; k < r.a.size(); ++k) {
        CsvRow(aseq) << k << r.a[k];
    }
    write_json(dir / "uniqueness_report.json",
               json{{"command", "uniqueness"},
                    {"kind", "diagnostic"},
                    {"scenario", scenario_json(sc)},
                    {"seed", cfg.seed},
                    {"paths_requested", cfg.paths},
                    {"paths_accepted", r.accepted},
                    {"paths_discarded_above_ceiling", r.discarded},
                    {"ceiling", finite_or_string(cfg.ceiling)},
                    {"ladder", number_array(cfg.ladder)},
                    {"rho", sc.spec.components.front().rho.describe()},
                    {"x_m", cfg.xm},
                    {"a_sequence", number_array(r.a)},
                    {"phi_levels", r.phi_levels},
                    {"rows", rows},
                    {"warnings", report.warnings}});
    log_stage("wrote " + (dir / "uniqueness_report.json").string());
    return kOk;
}

}  // namespace jsde::cli
