#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "drclab/experiment.hpp"
#include "drclab/selftest.hpp"

namespace {

int run_experiment(drclab::ExperimentConfig cfg, bool validate_only) {
    const auto problems = drclab::validate_config(cfg);
    if (validate_only) {
        if (problems.empty()) {
            std::cout << "configuration ok\n";
            return 0;
        }
        for (const auto& p : problems) std::cout << "invalid: " << p << "\n";
        return 1;
    }
    if (!problems.empty()) {
        for (const auto& p : problems) std::cerr << "invalid: " << p << "\n";
        return 2;
    }

    const drclab::SweepResult result = drclab::run_sweep(cfg);
    const auto written = drclab::write_artifacts(cfg, result);

    for (const auto& summary : result.summaries)
        std::printf("case %ld  T=%-6ld mean regret %12.4f  bound %12.4f\n", summary.loss_case,
                    summary.T, summary.mean_regret, summary.mean_bound);
    for (const auto& [case_id, fit] : result.fits) {
        std::printf("case %ld  fitted exponent %.3f", case_id, fit.exponent);
        if (fit.excluded > 0) std::printf("  (%d nonpositive points excluded)", fit.excluded);
        std::printf("\n");
    }
    for (const auto& path : written) std::cout << "wrote " << path << "\n";

    bool fatal = false;
    for (const auto& violation : result.violations) {
        const bool note = violation.rfind("note: ", 0) == 0;
        (note ? std::cout : std::cerr)
            << (note ? "" : "invariant violation: ") << violation << "\n";
        fatal = fatal || !note;
    }
    return fatal ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"online disturbance-response control experiments"};
    std::string config_path, cases_arg, horizons_arg, out_arg;
    long seeds = 0, parallel = 0;
    bool selftest = false, validate_only = false;

    app.add_option("--config", config_path, "experiment config file");
    app.add_option("--cases", cases_arg, "loss cases to sweep, e.g. 1,2,3");
    app.add_option("--horizons", horizons_arg, "comma list or doubling range lo..hi");
    app.add_option("--seeds", seeds, "noise seeds per (case, horizon) cell");
    app.add_option("--out", out_arg, "output directory");
    app.add_option("--parallel", parallel, "worker threads");
    app.add_flag("--selftest", selftest, "run the invariant self-test suite and exit");
    app.add_flag("--validate", validate_only, "validate the configuration without running");
    CLI11_PARSE(app, argc, argv);

    try {
        if (selftest) return drclab::run_selftest(std::cout) == 0 ? 0 : 1;

        drclab::ExperimentConfig cfg;
        if (!config_path.empty()) cfg = drclab::load_config(config_path);
        else if (!validate_only && cases_arg.empty() && horizons_arg.empty()) {
            std::cerr << "nothing to do: pass --config (and/or --cases/--horizons) "
                         "or --selftest\n";
            return 2;
        }
        const auto overridden = drclab::apply_env_overrides(cfg);
        for (const auto& name : overridden)
            std::cerr << "applied environment override " << name << "\n";
        if (!cases_arg.empty()) cfg.cases = drclab::parse_index_list(cases_arg);
        if (!horizons_arg.empty()) cfg.horizons = drclab::parse_horizons_spec(horizons_arg);
        if (seeds > 0) cfg.seeds = seeds;
        if (!out_arg.empty()) cfg.out_dir = out_arg;
        if (parallel > 0) cfg.parallel = parallel;

        return run_experiment(std::move(cfg), validate_only);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
