#include <catch_amalgamated.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

const fs::path kScenarios = JSDE_SCENARIO_DIR;

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("jsde_cli_" + std::to_string(::getpid())) / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

int run(const std::string& args) {
    const std::string cmd = std::string(JSDE_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(WIFEXITED(status));
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

std::string scenario(const std::string& name) { return "--scenario " + (kScenarios / name).string(); }

}  // namespace

TEST_CASE("usage errors exit with code 3") {
    CHECK(run("") == 3);
    CHECK(run("frobnicate") == 3);
    CHECK(run("simulate") == 3);
    const auto out = scratch("usage");
    CHECK(run("simulate " + scenario("cir.json") + " --paths 0 --out " + out.string()) == 3);
    CHECK(run("simulate " + scenario("cir.json") + " --jobs 0 --out " + out.string()) == 3);
    CHECK(run("simulate " + scenario("cir.json") + " --dt 0.3 --out " + out.string()) == 3);
    CHECK(run("approx " + scenario("cir.json") + " --levels 1 --out " + out.string()) == 3);
    CHECK(run("approx " + scenario("cir.json") + " --mode sometimes --out " + out.string()) == 3);
    CHECK(run("--help") == 0);
}

TEST_CASE("schema problems exit with code 1") {
    const auto dir = scratch("schema");
    {
        std::ofstream f(dir / "bad.json");
        f << "{\n  \"schema_version\": 1,\n  \"name\": \"x\",\n  \"preset\": \"cir\",\n  \"bogus\": 3,\n"
             "  \"parameters\": { \"a\": 1, \"sigma\": 1, \"initial\": 1 }\n}\n";
    }
    CHECK(run("simulate --scenario " + (dir / "bad.json").string() + " --out " + dir.string()) == 1);
    CHECK(run("simulate --scenario " + (dir / "missing.json").string() + " --out " + dir.string()) == 1);
}

TEST_CASE("validate reports failures through the exit code") {
    const auto ok = scratch("validate_ok");
    CHECK(run("validate " + scenario("cir.json") + " --out " + ok.string()) == 0);
    CHECK(read_json(ok / "validation.json")["passed"] == true);

    const auto bad = scratch("validate_bad");
    CHECK(run("validate " + scenario("broken_sigma.json") + " --out " + bad.string()) == 1);
    const auto j = read_json(bad / "validation.json");
    CHECK(j["passed"] == false);
    bool witnessed = false;
    for (const auto& r : j["reports"]) {
        for (const auto& f : r["findings"]) {
            if (f["condition"] == "sigma_modulus") {
                CHECK(f["verdict"] == "fail");
                witnessed = f["witness"].size() == 4;
            }
        }
    }
    CHECK(witnessed);
}

TEST_CASE("non-finite states exit with code 2") {
    const auto dir = scratch("numeric");
    {
        std::ofstream f(dir / "blowup.json");
        f << R"({
  "schema_version": 1,
  "name": "blowup",
  "preset": "custom",
  "parameters": {
    "brownian_factors": 1,
    "components": [
      { "a": 0.0, "initial": 1e200,
        "sigma": { "kind": "power", "scale": 1e200, "exponent": 2.0 },
        "brownian": [ { "factor": 0, "weight": 1.0 } ],
        "rho": { "kind": "power", "scale": 1.0, "exponent": 1.0 } }
    ]
  },
  "grid": { "steps": 8 },
  "monte_carlo": { "paths": 4 }
})";
    }
    CHECK(run("simulate --scenario " + (dir / "blowup.json").string() + " --out " + dir.string()) == 2);
}

TEST_CASE("simulate output does not depend on repeats or job count") {
    const auto a = scratch("sim_a");
    const auto b = scratch("sim_b");
    const auto c = scratch("sim_c");
    const std::string base = "simulate " + scenario("example21.json") + " --paths 60 --seed 5";
    REQUIRE(run(base + " --jobs 1 --out " + a.string()) == 0);
    REQUIRE(run(base + " --jobs 1 --out " + b.string()) == 0);
    REQUIRE(run(base + " --jobs 5 --out " + c.string()) == 0);
    for (const char* file : {"summary.json", "aggregate.csv", "paths.csv"}) {
        INFO(file);
        const auto ref = slurp(a / file);
        CHECK(!ref.empty());
        CHECK(slurp(b / file) == ref);
        CHECK(slurp(c / file) == ref);
    }
    CHECK(slurp(a / "paths.csv").rfind("path_id,component,time,value,is_jump,left_limit\n", 0) == 0);
    const auto s = read_json(a / "summary.json");
    CHECK(s["paths"] == 60);
    CHECK(s["seed"] == 5);
}

TEST_CASE("approx output does not depend on job count") {
    const auto a = scratch("approx_a");
    const auto b = scratch("approx_b");
    const std::string base = "approx " + scenario("example21.json") + " --paths 40";
    REQUIRE(run(base + " --jobs 1 --out " + a.string()) == 0);
    REQUIRE(run(base + " --jobs 3 --out " + b.string()) == 0);
    for (const char* file : {"approx_report.json", "level_gaps.csv", "bound_envelope.csv"}) {
        INFO(file);
        CHECK(slurp(b / file) == slurp(a / file));
    }
    const auto j = read_json(a / "approx_report.json");
    CHECK(j["mode"] == "realized");
    CHECK(j["level_pairs"].size() == j["levels"].get<std::size_t>() - 1);
    CHECK(j["moment_bound"]["holds"] == true);
}

TEST_CASE("approx selects the deterministic mode for time-only drifts") {
    const auto dir = scratch("approx_det");
    REQUIRE(run("approx " + scenario("time_drift.json") + " --paths 10 --out " + dir.string()) == 0);
    const auto j = read_json(dir / "approx_report.json");
    CHECK(j["mode"] == "deterministic");
    CHECK(j["mode_selection"].get<std::string>().rfind("automatic", 0) == 0);

    const auto forced = scratch("approx_forced");
    REQUIRE(run("approx " + scenario("time_drift.json") + " --paths 10 --mode realized --out " + forced.string()) ==
            0);
    CHECK(read_json(forced / "approx_report.json")["mode_selection"] == "flag");
}

TEST_CASE("uniqueness diagnostic output") {
    const auto a = scratch("uniq_a");
    const auto b = scratch("uniq_b");
    const std::string base = "uniqueness " + scenario("cir.json") + " --paths 50";
    REQUIRE(run(base + " --jobs 1 --out " + a.string()) == 0);
    REQUIRE(run(base + " --jobs 4 --out " + b.string()) == 0);
    for (const char* file : {"uniqueness_report.json", "divergence.csv", "phi_moments.csv", "a_sequence.csv"}) {
        INFO(file);
        CHECK(slurp(b / file) == slurp(a / file));
    }
    const auto j = read_json(a / "uniqueness_report.json");
    CHECK(j["kind"] == "diagnostic");
    CHECK(j["rows"].size() == 2);

    const auto self = scratch("uniq_self");
    REQUIRE(run("uniqueness " + scenario("cir.json") + " --paths 5 --ladder 0.0078125 --out " + self.string()) == 0);
    const auto s = read_json(self / "uniqueness_report.json");
    REQUIRE(s["rows"].size() == 1);
    CHECK(s["rows"][0]["sup_abs_mean"] == 0.0);
}

TEST_CASE("output directory falls back to the environment") {
    const auto dir = scratch("env_out");
    const std::string cmd = "JSDE_OUT_DIR=" + dir.string() + " " + JSDE_CLI_PATH + " validate " + scenario("cir.json") +
                            " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(WIFEXITED(status));
    CHECK(WEXITSTATUS(status) == 0);
    CHECK(fs::exists(dir / "validation.json"));
}
