#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "drclab/experiment.hpp"
#include "drclab/selftest.hpp"

using namespace drclab;
namespace fs = std::filesystem;

namespace {

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

ExperimentConfig tiny_config(const std::string& out_dir) {
    ExperimentConfig cfg;
    cfg.cases = {1, 2};
    cfg.horizons = {16, 32, 64, 128};
    cfg.seeds = 2;
    cfg.out_dir = out_dir;
    return cfg;
}

}  // namespace

TEST_CASE("config serialization") {
    SUBCASE("defaults round-trip through the file format") {
        const ExperimentConfig cfg;
        const ExperimentConfig back =
            config_from_toml(toml::parse(toml::serialize(config_to_toml(cfg))));
        CHECK(back == cfg);
    }

    SUBCASE("modified fields round-trip") {
        ExperimentConfig cfg;
        cfg.preset = "random-stable";
        cfg.dim_x = 3;
        cfg.rho = 0.7;
        cfg.model_seed = 99;
        cfg.cases = {2, 3};
        cfg.alpha = 0.5;
        cfg.horizons = {256, 512};
        cfg.seeds = 7;
        cfg.base_seed = 42;
        cfg.r_m = 2.0;
        cfg.m = 4;
        cfg.h = 3;
        cfg.lambda_override = {4.0, 2.0};
        cfg.out_dir = "runs/exp 1";
        cfg.parallel = 8;
        const ExperimentConfig back =
            config_from_toml(toml::parse(toml::serialize(config_to_toml(cfg))));
        CHECK(back == cfg);
    }

    SUBCASE("partial files keep defaults") {
        const ExperimentConfig cfg = config_from_toml(toml::parse("[sweep]\nseeds = 5\n"));
        CHECK(cfg.seeds == 5);
        CHECK(cfg.preset == "scalar-stable");
        CHECK(cfg.horizons == std::vector<long>{256, 512, 1024, 2048});
    }

    SUBCASE("unknown keys are named") {
        CHECK_THROWS_WITH_AS(config_from_toml(toml::parse("[sweep]\nseedz = 5\n")),
                             doctest::Contains("sweep.seedz"), std::runtime_error);
    }

    SUBCASE("type mismatches are named") {
        CHECK_THROWS_WITH_AS(config_from_toml(toml::parse("[sweep]\nseeds = \"many\"\n")),
                             doctest::Contains("sweep.seeds"), std::runtime_error);
        CHECK_THROWS_AS(config_from_toml(toml::parse("[sweep]\nhorizons = [1.5]\n")),
                        std::runtime_error);
    }
}

TEST_CASE("environment overrides") {
    ExperimentConfig cfg;
    setenv("DRCLAB_SEEDS", "9", 1);
    setenv("DRCLAB_CASES", "2,3", 1);
    setenv("DRCLAB_HORIZONS", "64..256", 1);
    setenv("DRCLAB_R_M", "2.25", 1);
    setenv("DRCLAB_OUT_DIR", "elsewhere", 1);
    const auto applied = apply_env_overrides(cfg);
    unsetenv("DRCLAB_SEEDS");
    unsetenv("DRCLAB_CASES");
    unsetenv("DRCLAB_HORIZONS");
    unsetenv("DRCLAB_R_M");
    unsetenv("DRCLAB_OUT_DIR");

    CHECK(applied.size() == 5);
    CHECK(cfg.seeds == 9);
    CHECK(cfg.cases == std::vector<long>{2, 3});
    CHECK(cfg.horizons == std::vector<long>{64, 128, 256});
    CHECK(cfg.r_m == 2.25);
    CHECK(cfg.out_dir == "elsewhere");

    SUBCASE("bad values name the variable") {
        setenv("DRCLAB_SEEDS", "lots", 1);
        ExperimentConfig cfg2;
        CHECK_THROWS_WITH_AS(apply_env_overrides(cfg2), doctest::Contains("DRCLAB_SEEDS"),
                             std::runtime_error);
        unsetenv("DRCLAB_SEEDS");
    }
}

TEST_CASE("config validation") {
    SUBCASE("defaults are valid") { CHECK(validate_config(ExperimentConfig{}).empty()); }

    SUBCASE("each invariant is reported") {
        ExperimentConfig cfg;
        cfg.schema_version = 2;
        CHECK(!validate_config(cfg).empty());

        cfg = ExperimentConfig{};
        cfg.preset = "unknown";
        CHECK(!validate_config(cfg).empty());

        cfg = ExperimentConfig{};
        cfg.rho = 1.0;
        CHECK(!validate_config(cfg).empty());

        cfg = ExperimentConfig{};
        cfg.horizons = {256, 128};
        CHECK(!validate_config(cfg).empty());

        cfg = ExperimentConfig{};
        cfg.horizons = {3};
        const auto problems = validate_config(cfg);
        REQUIRE(problems.size() == 1);
        CHECK(problems.front().find("minimum of 4") != std::string::npos);

        cfg = ExperimentConfig{};
        cfg.cases = {3};
        cfg.alpha = 0.75;
        CHECK(!validate_config(cfg).empty());

        cfg = ExperimentConfig{};
        cfg.cases = {4};
        cfg.alpha = 0.75;
        CHECK(validate_config(cfg).empty());

        cfg = ExperimentConfig{};
        cfg.cases = {2};
        cfg.curvature = 0.0;
        CHECK(!validate_config(cfg).empty());

        cfg = ExperimentConfig{};
        cfg.seeds = 0;
        CHECK(!validate_config(cfg).empty());

        cfg = ExperimentConfig{};
        cfg.m = 0;
        cfg.h = 2;
        CHECK(!validate_config(cfg).empty());
    }

    SUBCASE("increasing lambda override is rejected with the monotonicity rule") {
        ExperimentConfig cfg;
        cfg.horizons = {4};
        cfg.lambda_override = {1.0, 2.0, 2.0, 2.0};
        const auto problems = validate_config(cfg);
        REQUIRE(!problems.empty());
        CHECK(problems.front().find("non-increasing") != std::string::npos);
    }

    SUBCASE("lambda override must match the single horizon") {
        ExperimentConfig cfg;
        cfg.horizons = {8};
        cfg.lambda_override = {2.0, 1.0, 0.0, 0.0};
        CHECK(!validate_config(cfg).empty());
        cfg.horizons = {4};
        CHECK(validate_config(cfg).empty());
    }
}

TEST_CASE("sweep execution") {
    const std::string out = (fs::temp_directory_path() / "drclab_test_sweep").string();
    fs::remove_all(out);
    ExperimentConfig cfg = tiny_config(out);

    const SweepResult result = run_sweep(cfg);

    SUBCASE("row ordering and coverage") {
        REQUIRE(result.rows.size() == 2 * 4 * 2);
        CHECK(result.rows.front().loss_case == 1);
        CHECK(result.rows.front().T == 16);
        CHECK(result.rows.back().loss_case == 2);
        CHECK(result.rows.back().T == 128);
        for (const auto& row : result.rows) {
            CHECK(std::isfinite(row.regret));
            CHECK(row.bound > 0.0);
            CHECK(row.m >= 1);
        }
        REQUIRE(result.summaries.size() == 2 * 4);
        CHECK(result.fits.count(1) == 1);
        CHECK(result.fits.count(2) == 1);
    }

    SUBCASE("run-level invariants hold on the tiny sweep") {
        for (const auto& v : result.violations) CHECK(v.rfind("note: ", 0) == 0);
    }

    SUBCASE("shared noise across cases: same seed column") {
        for (std::size_t i = 0; i < result.rows.size() / 2; ++i)
            CHECK(result.rows[i].seed == result.rows[i + result.rows.size() / 2].seed);
    }

    SUBCASE("parallel execution yields identical rows") {
        ExperimentConfig cfg4 = cfg;
        cfg4.parallel = 4;
        const SweepResult again = run_sweep(cfg4);
        REQUIRE(again.rows.size() == result.rows.size());
        for (std::size_t i = 0; i < result.rows.size(); ++i) {
            CHECK(again.rows[i].regret == result.rows[i].regret);
            CHECK(again.rows[i].realized == result.rows[i].realized);
            CHECK(again.rows[i].bound == result.rows[i].bound);
        }
    }

    SUBCASE("invalid config is rejected up front") {
        ExperimentConfig bad = cfg;
        bad.seeds = 0;
        CHECK_THROWS_AS(run_sweep(bad), std::invalid_argument);
    }
}

TEST_CASE("artifacts") {
    const std::string out = (fs::temp_directory_path() / "drclab_test_artifacts").string();
    fs::remove_all(out);
    ExperimentConfig cfg = tiny_config(out);
    const SweepResult result = run_sweep(cfg);
    const auto written = write_artifacts(cfg, result);

    SUBCASE("expected files, all schema-conformant") {
        for (const char* name : {"summary.csv", "rates.csv", "regret_curves.svg",
                                 "case1_summary.csv", "case1_rates.csv", "case1_curve.svg",
                                 "case1_trace.csv", "case2_summary.csv", "case2_rates.csv",
                                 "case2_curve.svg", "case2_trace.csv", "effective_config.toml"})
            CHECK(fs::exists(fs::path(out) / name));
        CHECK(written.size() == 12);

        CHECK(csv::validate_schema(csv::parse_file(out + "/summary.csv"), summary_schema())
                  .empty());
        CHECK(csv::validate_schema(csv::parse_file(out + "/rates.csv"), rates_schema()).empty());
        CHECK(csv::validate_schema(csv::parse_file(out + "/case1_trace.csv"), trace_schema())
                  .empty());
        CHECK(csv::parse_file(out + "/summary.csv").rows.size() == result.rows.size());
        CHECK(csv::parse_file(out + "/case1_trace.csv").rows.size() == 16);
    }

    SUBCASE("effective config re-parses identically") {
        CHECK(load_config(out + "/effective_config.toml") == cfg);
    }

    SUBCASE("reruns are byte-identical") {
        const std::string summary_before = read_text(out + "/summary.csv");
        const std::string svg_before = read_text(out + "/regret_curves.svg");
        const SweepResult again = run_sweep(cfg);
        write_artifacts(cfg, again);
        CHECK(read_text(out + "/summary.csv") == summary_before);
        CHECK(read_text(out + "/regret_curves.svg") == svg_before);
    }
}

TEST_CASE("cli argument helpers") {
    CHECK(parse_index_list("1,2,3") == std::vector<long>{1, 2, 3});
    CHECK(parse_index_list("7") == std::vector<long>{7});
    CHECK_THROWS_AS(parse_index_list(""), std::invalid_argument);
    CHECK_THROWS_AS(parse_index_list("1,,2"), std::invalid_argument);
    CHECK_THROWS_AS(parse_index_list("1,x"), std::invalid_argument);

    CHECK(parse_horizons_spec("256..8192") ==
          std::vector<long>{256, 512, 1024, 2048, 4096, 8192});
    CHECK(parse_horizons_spec("100,200") == std::vector<long>{100, 200});
    CHECK(parse_horizons_spec("64..64") == std::vector<long>{64});
    CHECK_THROWS_AS(parse_horizons_spec("512..256"), std::invalid_argument);
    CHECK_THROWS_AS(parse_horizons_spec("0..8"), std::invalid_argument);
}

TEST_CASE("selftest suite is green") {
    std::ostringstream out;
    const int failures = run_selftest(out);
    INFO(out.str());
    CHECK(failures == 0);
    CHECK(out.str().find("PASS natural-output-recovery") != std::string::npos);
    CHECK(out.str().find("FAIL") == std::string::npos);
}
