#include "drclab/selftest.hpp"

#include <cmath>
#include <functional>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <vector>

#include "drclab/experiment.hpp"
#include "drclab/oco_harness.hpp"
#include "drclab/svg_plot.hpp"

namespace drclab {

namespace {

using CheckResult = std::optional<std::string>;

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

Vector randn(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> d(0.0, 1.0);
    Vector v(n);
    for (int i = 0; i < n; ++i) v(i) = d(rng);
    return v;
}

EpisodeTrace reference_episode() {
    ExperimentConfig cfg;
    const SystemModel model = build_model(cfg);
    EpisodeConfig ec = episode_config_for(cfg, model, 1, 200, 0);
    return run_episode(ec);
}

CheckResult natural_output_recovery() {
    for (unsigned long seed = 1; seed <= 10; ++seed) {
        ExperimentConfig cfg;
        cfg.preset = "random-stable";
        cfg.dim_x = 2 + static_cast<long>(seed % 2);
        cfg.model_seed = seed;
        const SystemModel model = build_model(cfg);
        Simulator sim(model, seed);
        NaturalOutputTracker tracker(model);
        std::mt19937_64 rng(seed * 77);
        std::vector<Vector> inputs;
        for (long t = 1; t <= 40; ++t) {
            const Vector y = sim.observe();
            const Vector ynat = tracker.natural(y);
            Vector recovered = ynat;
            for (long s = 1; s < t; ++s)
                recovered += model.markov(static_cast<int>(s)) * inputs[t - 1 - s];
            if ((y - recovered).norm() > 1e-9)
                return "trajectory " + std::to_string(seed) + " t=" + std::to_string(t) +
                       ": residual " + fmt((y - recovered).norm());
            const Vector u = randn(rng, static_cast<int>(cfg.dim_u));
            sim.apply(u);
            tracker.push_input(u);
            inputs.push_back(u);
        }
    }
    return std::nullopt;
}

CheckResult full_memory_truncation() {
    ExperimentConfig cfg;
    const SystemModel model = build_model(cfg);
    EpisodeConfig ec(model);
    ec.T = 12;
    ec.loss_case = 2;
    ec.m = 1;
    ec.h = 11;
    ec.seed = 3;
    const EpisodeTrace trace = run_episode(ec);
    for (long t = 1; t <= trace.T(); ++t) {
        const double gap = std::abs(trace.steps[t - 1].memory_loss - trace.steps[t - 1].loss);
        if (gap > 1e-9)
            return "t=" + std::to_string(t) + ": |F_t - l_t| = " + fmt(gap);
    }
    return std::nullopt;
}

CheckResult projection_geometry() {
    std::mt19937_64 rng(11);
    const DrcConstraintSet set(3, 2, 2, 1.25);
    for (int rep = 0; rep < 2000; ++rep) {
        const Vector a = 3.0 * randn(rng, set.dim());
        const Vector b = 3.0 * randn(rng, set.dim());
        const Vector pa = set.project(a);
        const Vector pb = set.project(b);
        if (!set.contains(pa)) return "projected point infeasible";
        if ((set.project(pa) - pa).norm() > 1e-9)
            return "projection is not idempotent: " + fmt((set.project(pa) - pa).norm());
        if ((pa - pb).norm() > (a - b).norm() + 1e-9)
            return "projection expanded a pair by " + fmt((pa - pb).norm() - (a - b).norm());
    }
    return std::nullopt;
}

CheckResult gradient_check() {
    std::mt19937_64 rng(13);
    ExperimentConfig mc;
    mc.preset = "random-stable";
    mc.dim_x = 2;
    const SystemModel model = build_model(mc);
    for (int rep = 0; rep < 50; ++rep) {
        const int m = 1 + rep % 3, h = rep % 3;
        Matrix R(2, 2);
        R << randn(rng, 2), randn(rng, 2);
        const LossSpec loss = LossSpec::quadratic(R.transpose() * R + 0.1 * Matrix::Identity(2, 2),
                                                  randn(rng, 2));
        std::vector<Vector> window;
        for (int i = 0; i < m + h; ++i) window.push_back(randn(rng, 1));
        const LossContext ctx = make_loss_context(model, loss, m, h, m + h + 1, window);
        const DrcParams P = DrcParams::from_vector(0.5 * randn(rng, m), m, 1, 1);
        const Vector g = memoryless_gradient(P, ctx);
        const Vector g_fd = memoryless_gradient_fd(P, ctx);
        const double rel = (g - g_fd).norm() / std::max(1.0, g_fd.norm());
        if (rel > 1e-5) return "instance " + std::to_string(rep) + ": relative error " + fmt(rel);
    }
    return std::nullopt;
}

CheckResult rate_bookkeeping() {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    StepState state;
    double sum_H = 0.0, sum_lambda = 0.0;
    for (long t = 1; t <= 100; ++t) {
        const double H = unif(rng), lambda = t == 1 ? 1.0 : unif(rng);
        state.accumulate(H, lambda);
        sum_H += H;
        sum_lambda += lambda;
        const double expect = 1.0 / (sum_H + sum_lambda);
        if (std::abs(step_rate(state) - expect) > 1e-12 * expect)
            return "t=" + std::to_string(t) + ": rate " + fmt(step_rate(state)) +
                   " != " + fmt(expect);
    }
    return std::nullopt;
}

CheckResult schedule_monotonicity() {
    for (int schedule_case = 1; schedule_case <= 4; ++schedule_case) {
        const double alpha = schedule_case == 3 ? 0.25 : (schedule_case == 4 ? 0.75 : 0.0);
        const auto schedule = make_lambda_schedule(schedule_case, 64, 1.0, alpha);
        const auto& values = schedule.values();
        for (std::size_t t = 1; t < values.size(); ++t)
            if (values[t] > values[t - 1])
                return "preset " + std::to_string(schedule_case) + " increases at t=" +
                       std::to_string(t + 1);
    }
    try {
        LambdaSchedule::custom({0.0, 1.0, 0.0, 0.0});
        return std::string("an increasing schedule was accepted");
    } catch (const std::invalid_argument&) {
    }
    return std::nullopt;
}

CheckResult memoryless_regret_bound() {
    for (unsigned long seed = 1; seed <= 5; ++seed) {
        const auto inst = random_ocom_instance(2, 0, 80, seed);
        const auto lambda = make_lambda_schedule(1, 80).values();
        const auto run = run_ocom_protocol(inst, lambda);
        if (run.regret > run.bound_oco + 1e-6)
            return "seed " + std::to_string(seed) + ": regret " + fmt(run.regret) +
                   " > bound " + fmt(run.bound_oco);
    }
    return std::nullopt;
}

CheckResult memory_regret_bound() {
    for (unsigned long seed = 1; seed <= 5; ++seed) {
        const auto inst = random_ocom_instance(2, 2, 80, seed);
        const auto lambda = make_lambda_schedule(1, 80).values();
        const auto run = run_ocom_protocol(inst, lambda);
        if (run.regret > run.bound_ocom + 1e-6)
            return "seed " + std::to_string(seed) + ": regret " + fmt(run.regret) +
                   " > bound " + fmt(run.bound_ocom);
    }
    return std::nullopt;
}

CheckResult step_drift(const EpisodeTrace& trace) {
    const double g_f = trace.constants.g_f;
    const double diam = trace.constants.diameter;
    for (long t = 1; t < trace.T(); ++t) {
        const auto& prev = trace.steps[t - 1];
        const double drift = (trace.steps[t].params - prev.params).norm();
        const double allowed = prev.eta * (g_f + prev.lambda * diam) + 1e-9;
        if (drift > allowed)
            return "t=" + std::to_string(t) + ": drift " + fmt(drift) + " > " + fmt(allowed);
    }
    return std::nullopt;
}

CheckResult decomposition_consistency(const EpisodeTrace& trace) {
    const auto report = evaluate_episode(trace, 4);
    const double gap = std::abs(report.decomposition.total() - report.regret);
    if (gap > 1e-6) return "terms miss the regret by " + fmt(gap);
    return std::nullopt;
}

CheckResult control_regret_bound(const EpisodeTrace& trace) {
    const auto report = evaluate_episode(trace, 4);
    if (report.regret > report.bound + 1e-6)
        return "regret " + fmt(report.regret) + " > bound " + fmt(report.bound);
    return std::nullopt;
}

CheckResult episode_determinism(const EpisodeTrace& trace) {
    const EpisodeTrace again = run_episode(trace.config);
    if (again.realized_total != trace.realized_total)
        return "realized totals differ: " + fmt(trace.realized_total) + " vs " +
               fmt(again.realized_total);
    for (long t = 0; t < trace.T(); ++t)
        if ((again.steps[t].u - trace.steps[t].u).norm() != 0.0)
            return "inputs differ at t=" + std::to_string(t + 1);
    return std::nullopt;
}

CheckResult config_round_trip() {
    ExperimentConfig cfg;
    cfg.preset = "random-stable";
    cfg.dim_x = 3;
    cfg.cases = {1, 2, 3};
    cfg.horizons = {256, 512, 1024, 2048};
    cfg.alpha = 0.25;
    cfg.r_m = 2.5;
    cfg.out_dir = "runs/demo";
    const ExperimentConfig back =
        config_from_toml(toml::parse(toml::serialize(config_to_toml(cfg))));
    if (!(back == cfg)) return std::string("config changed across serialize/parse");
    return std::nullopt;
}

CheckResult csv_round_trip() {
    csv::Table table;
    table.columns = {"a", "b,comma", "c"};
    table.add_row({"1", "quote \" inside", "2.5"});
    table.add_row({"-3", "line\nbreak", "nan"});
    const csv::Table back = csv::parse(table.serialize());
    if (back.columns != table.columns || back.rows != table.rows)
        return std::string("table changed across serialize/parse");
    return std::nullopt;
}

CheckResult svg_well_formed() {
    svg::Series s;
    s.label = "demo";
    s.x = {256, 512, 1024};
    s.y = {10, 14, 20};
    const std::string image = svg::render_loglog({"t", "x", "y"}, {s});
    for (const char* needle : {"xmlns=\"http://www.w3.org/2000/svg\"", "<polyline", "</svg>"})
        if (image.find(needle) == std::string::npos)
            return "missing '" + std::string(needle) + "'";
    return std::nullopt;
}

}  // namespace

int run_selftest(std::ostream& out) {
    const EpisodeTrace trace = reference_episode();
    const std::vector<std::pair<std::string, std::function<CheckResult()>>> checks = {
        {"natural-output-recovery", natural_output_recovery},
        {"full-memory-truncation", full_memory_truncation},
        {"projection-geometry", projection_geometry},
        {"memoryless-gradient-check", gradient_check},
        {"adaptive-rate-bookkeeping", rate_bookkeeping},
        {"schedule-monotonicity", schedule_monotonicity},
        {"memoryless-regret-bound", memoryless_regret_bound},
        {"memory-regret-bound", memory_regret_bound},
        {"step-drift-inequality", [&] { return step_drift(trace); }},
        {"decomposition-consistency", [&] { return decomposition_consistency(trace); }},
        {"control-regret-bound", [&] { return control_regret_bound(trace); }},
        {"episode-determinism", [&] { return episode_determinism(trace); }},
        {"config-round-trip", config_round_trip},
        {"csv-round-trip", csv_round_trip},
        {"svg-well-formed", svg_well_formed},
    };

    int failures = 0;
    for (const auto& [name, fn] : checks) {
        CheckResult result;
        try {
            result = fn();
        } catch (const std::exception& e) {
            result = std::string("threw: ") + e.what();
        }
        if (result) {
            out << "FAIL " << name << ": " << *result << "\n";
            ++failures;
        } else {
            out << "PASS " << name << "\n";
        }
    }
    return failures;
}

}  // namespace drclab
