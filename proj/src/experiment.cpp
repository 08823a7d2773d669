#include "drclab/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <random>
#include <set>
#include <stdexcept>
#include <thread>

#include "drclab/svg_plot.hpp"

namespace drclab {

namespace {

[[noreturn]] void key_error(const std::string& key, const std::string& what) {
    throw std::runtime_error("configuration key '" + key + "': " + what);
}

long read_long(const toml::Value& v, const std::string& key) {
    if (!v.is_integer()) key_error(key, "expected an integer");
    return static_cast<long>(v.as_integer());
}

double read_double(const toml::Value& v, const std::string& key) {
    if (!v.is_integer() && !v.is_float()) key_error(key, "expected a number");
    return v.as_float();
}

std::uint64_t read_seed(const toml::Value& v, const std::string& key) {
    if (!v.is_integer() || v.as_integer() < 0) key_error(key, "expected a nonnegative integer");
    return static_cast<std::uint64_t>(v.as_integer());
}

std::string read_string(const toml::Value& v, const std::string& key) {
    if (!v.is_string()) key_error(key, "expected a string");
    return v.as_string();
}

std::vector<long> read_long_array(const toml::Value& v, const std::string& key) {
    if (!v.is_array()) key_error(key, "expected an array of integers");
    std::vector<long> out;
    for (const auto& item : v.as_array()) {
        if (!item.is_integer()) key_error(key, "expected an array of integers");
        out.push_back(static_cast<long>(item.as_integer()));
    }
    return out;
}

std::vector<double> read_double_array(const toml::Value& v, const std::string& key) {
    if (!v.is_array()) key_error(key, "expected an array of numbers");
    std::vector<double> out;
    for (const auto& item : v.as_array()) {
        if (!item.is_integer() && !item.is_float()) key_error(key, "expected an array of numbers");
        out.push_back(item.as_float());
    }
    return out;
}

long env_long(const char* name, const std::string& text) {
    long v = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
        throw std::runtime_error(std::string(name) + ": expected an integer, got '" + text + "'");
    return v;
}

double env_double(const char* name, const std::string& text) {
    double v = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
        throw std::runtime_error(std::string(name) + ": expected a number, got '" + text + "'");
    return v;
}

std::vector<double> env_double_list(const char* name, const std::string& text) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t comma = text.find(',', start);
        if (comma == std::string::npos) comma = text.size();
        out.push_back(env_double(name, text.substr(start, comma - start)));
        start = comma + 1;
    }
    return out;
}

double scalar_or_norm(const Vector& v) { return v.size() == 1 ? v(0) : v.norm(); }

std::string case_label(long case_id) { return "case " + std::to_string(case_id); }

}  // namespace

ExperimentConfig config_from_toml(const toml::Document& doc) {
    ExperimentConfig cfg;
    for (const auto& [key, value] : doc.entries()) {
        if (key == "schema_version") cfg.schema_version = read_long(value, key);
        else if (key == "model.preset") cfg.preset = read_string(value, key);
        else if (key == "model.dim_x") cfg.dim_x = read_long(value, key);
        else if (key == "model.dim_u") cfg.dim_u = read_long(value, key);
        else if (key == "model.dim_y") cfg.dim_y = read_long(value, key);
        else if (key == "model.rho") cfg.rho = read_double(value, key);
        else if (key == "model.seed") cfg.model_seed = read_seed(value, key);
        else if (key == "sweep.cases") cfg.cases = read_long_array(value, key);
        else if (key == "sweep.alpha") cfg.alpha = read_double(value, key);
        else if (key == "sweep.curvature") cfg.curvature = read_double(value, key);
        else if (key == "sweep.horizons") cfg.horizons = read_long_array(value, key);
        else if (key == "sweep.seeds") cfg.seeds = read_long(value, key);
        else if (key == "sweep.base_seed") cfg.base_seed = read_seed(value, key);
        else if (key == "learner.r_m") cfg.r_m = read_double(value, key);
        else if (key == "learner.m") cfg.m = read_long(value, key);
        else if (key == "learner.h") cfg.h = read_long(value, key);
        else if (key == "learner.lambda_override")
            cfg.lambda_override = read_double_array(value, key);
        else if (key == "output.dir") cfg.out_dir = read_string(value, key);
        else if (key == "output.parallel") cfg.parallel = read_long(value, key);
        else key_error(key, "unknown key");
    }
    return cfg;
}

toml::Document config_to_toml(const ExperimentConfig& cfg) {
    toml::Document doc;
    doc.set("schema_version", toml::Value::integer(cfg.schema_version));
    doc.set("model.preset", toml::Value::string(cfg.preset));
    doc.set("model.dim_x", toml::Value::integer(cfg.dim_x));
    doc.set("model.dim_u", toml::Value::integer(cfg.dim_u));
    doc.set("model.dim_y", toml::Value::integer(cfg.dim_y));
    doc.set("model.rho", toml::Value::real(cfg.rho));
    doc.set("model.seed", toml::Value::integer(static_cast<std::int64_t>(cfg.model_seed)));
    std::vector<toml::Value> cases, horizons, lambdas;
    for (long c : cfg.cases) cases.push_back(toml::Value::integer(c));
    for (long T : cfg.horizons) horizons.push_back(toml::Value::integer(T));
    for (double l : cfg.lambda_override) lambdas.push_back(toml::Value::real(l));
    doc.set("sweep.cases", toml::Value::array(std::move(cases)));
    doc.set("sweep.alpha", toml::Value::real(cfg.alpha));
    doc.set("sweep.curvature", toml::Value::real(cfg.curvature));
    doc.set("sweep.horizons", toml::Value::array(std::move(horizons)));
    doc.set("sweep.seeds", toml::Value::integer(cfg.seeds));
    doc.set("sweep.base_seed", toml::Value::integer(static_cast<std::int64_t>(cfg.base_seed)));
    doc.set("learner.r_m", toml::Value::real(cfg.r_m));
    doc.set("learner.m", toml::Value::integer(cfg.m));
    doc.set("learner.h", toml::Value::integer(cfg.h));
    doc.set("learner.lambda_override", toml::Value::array(std::move(lambdas)));
    doc.set("output.dir", toml::Value::string(cfg.out_dir));
    doc.set("output.parallel", toml::Value::integer(cfg.parallel));
    return doc;
}

ExperimentConfig load_config(const std::string& path) {
    return config_from_toml(toml::parse_file(path));
}

std::vector<std::string> apply_env_overrides(ExperimentConfig& cfg) {
    std::vector<std::string> applied;
    const auto get = [&](const char* name) -> const char* {
        const char* v = std::getenv(name);
        if (v != nullptr) applied.push_back(name);
        return v;
    };
    if (const char* v = get("DRCLAB_SCHEMA_VERSION")) cfg.schema_version = env_long("DRCLAB_SCHEMA_VERSION", v);
    if (const char* v = get("DRCLAB_PRESET")) cfg.preset = v;
    if (const char* v = get("DRCLAB_DIM_X")) cfg.dim_x = env_long("DRCLAB_DIM_X", v);
    if (const char* v = get("DRCLAB_DIM_U")) cfg.dim_u = env_long("DRCLAB_DIM_U", v);
    if (const char* v = get("DRCLAB_DIM_Y")) cfg.dim_y = env_long("DRCLAB_DIM_Y", v);
    if (const char* v = get("DRCLAB_RHO")) cfg.rho = env_double("DRCLAB_RHO", v);
    if (const char* v = get("DRCLAB_MODEL_SEED"))
        cfg.model_seed = static_cast<std::uint64_t>(env_long("DRCLAB_MODEL_SEED", v));
    if (const char* v = get("DRCLAB_CASES")) cfg.cases = parse_index_list(v);
    if (const char* v = get("DRCLAB_ALPHA")) cfg.alpha = env_double("DRCLAB_ALPHA", v);
    if (const char* v = get("DRCLAB_CURVATURE")) cfg.curvature = env_double("DRCLAB_CURVATURE", v);
    if (const char* v = get("DRCLAB_HORIZONS")) cfg.horizons = parse_horizons_spec(v);
    if (const char* v = get("DRCLAB_SEEDS")) cfg.seeds = env_long("DRCLAB_SEEDS", v);
    if (const char* v = get("DRCLAB_BASE_SEED"))
        cfg.base_seed = static_cast<std::uint64_t>(env_long("DRCLAB_BASE_SEED", v));
    if (const char* v = get("DRCLAB_R_M")) cfg.r_m = env_double("DRCLAB_R_M", v);
    if (const char* v = get("DRCLAB_M")) cfg.m = env_long("DRCLAB_M", v);
    if (const char* v = get("DRCLAB_H")) cfg.h = env_long("DRCLAB_H", v);
    if (const char* v = get("DRCLAB_LAMBDA_OVERRIDE"))
        cfg.lambda_override = env_double_list("DRCLAB_LAMBDA_OVERRIDE", v);
    if (const char* v = get("DRCLAB_OUT_DIR")) cfg.out_dir = v;
    if (const char* v = get("DRCLAB_PARALLEL")) cfg.parallel = env_long("DRCLAB_PARALLEL", v);
    return applied;
}

std::vector<std::string> validate_config(const ExperimentConfig& cfg) {
    std::vector<std::string> problems;
    const auto flag = [&](const std::string& msg) { problems.push_back(msg); };

    if (cfg.schema_version != 1)
        flag("unsupported schema_version " + std::to_string(cfg.schema_version) +
             " (this build reads version 1)");
    if (cfg.preset != "scalar-stable" && cfg.preset != "random-stable")
        flag("unknown model preset '" + cfg.preset + "' (known: scalar-stable, random-stable)");
    if (cfg.preset == "random-stable" && (cfg.dim_x < 1 || cfg.dim_u < 1 || cfg.dim_y < 1))
        flag("random-stable needs dim_x, dim_u, dim_y >= 1");
    if (!(cfg.rho > 0.0) || !(cfg.rho < 1.0))
        flag("rho must lie in (0, 1): the plant is required to be stable");

    if (cfg.cases.empty()) flag("sweep.cases must be nonempty");
    std::set<long> seen;
    for (long c : cfg.cases) {
        if (c < 1 || c > 4) flag("unknown loss case " + std::to_string(c) + " (valid: 1-4)");
        if (!seen.insert(c).second) flag("duplicate loss case " + std::to_string(c));
    }
    if (seen.count(3) && !(cfg.alpha > 0.0 && cfg.alpha <= 0.5))
        flag("case 3 needs alpha in (0, 1/2]");
    if (seen.count(4) && !(cfg.alpha > 0.5))
        flag("case 4 needs alpha > 1/2");
    if ((seen.count(2) || seen.count(3) || seen.count(4)) && !(cfg.curvature > 0.0))
        flag("cases 2-4 need a positive curvature scale");

    if (cfg.horizons.empty()) flag("sweep.horizons must be nonempty");
    for (std::size_t i = 1; i < cfg.horizons.size(); ++i)
        if (cfg.horizons[i] <= cfg.horizons[i - 1]) {
            flag("horizons must be strictly increasing");
            break;
        }
    if (cfg.lambda_override.empty()) {
        for (long T : cfg.horizons)
            if (T < 4) {
                flag("horizon T=" + std::to_string(T) +
                     " is below the minimum of 4 required by the preset regularization schedules");
                break;
            }
    } else {
        if (cfg.horizons.size() != 1 ||
            cfg.horizons.front() != static_cast<long>(cfg.lambda_override.size()))
            flag("lambda_override needs exactly one horizon equal to its length");
        for (std::size_t t = 1; t < cfg.lambda_override.size(); ++t)
            if (cfg.lambda_override[t] > cfg.lambda_override[t - 1]) {
                flag("lambda_override must be non-increasing (the adaptive-rate analysis "
                     "requires a non-increasing regularization schedule)");
                break;
            }
        for (double l : cfg.lambda_override)
            if (l < 0.0) {
                flag("lambda_override entries must be nonnegative");
                break;
            }
    }

    if (cfg.seeds < 1) flag("sweep.seeds must be >= 1");
    if (!(cfg.r_m > 0.0)) flag("learner.r_m must be positive");
    if (cfg.m < 0 || cfg.h < 0) flag("learner.m and learner.h must be nonnegative");
    if (cfg.m == 0 && cfg.h > 0) flag("learner.m = 0 with h > 0: auto-selection needs both zero");
    if (cfg.out_dir.empty()) flag("output.dir must be nonempty");
    if (cfg.parallel < 1) flag("output.parallel must be >= 1");
    return problems;
}

SystemModel build_model(const ExperimentConfig& cfg) {
    if (cfg.preset == "scalar-stable") {
        Matrix A(1, 1), B(1, 1), C(1, 1);
        A << cfg.rho;
        B << 1.0;
        C << 1.0;
        return SystemModel(A, B, C, BoundedNoiseSpec::uniform_ball(1, 0.3),
                           BoundedNoiseSpec::uniform_ball(1, 1.0));
    }
    if (cfg.preset != "random-stable")
        throw std::invalid_argument("unknown model preset '" + cfg.preset + "'");
    std::mt19937_64 rng(cfg.model_seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix A(cfg.dim_x, cfg.dim_x), B(cfg.dim_x, cfg.dim_u), C(cfg.dim_y, cfg.dim_x);
    for (long i = 0; i < cfg.dim_x; ++i)
        for (long j = 0; j < cfg.dim_x; ++j) A(i, j) = gauss(rng);
    const double sr =
        std::abs(Eigen::EigenSolver<Matrix>(A).eigenvalues().cwiseAbs().maxCoeff());
    if (sr > 0.0) A *= cfg.rho / sr;
    for (long i = 0; i < cfg.dim_x; ++i)
        for (long j = 0; j < cfg.dim_u; ++j) B(i, j) = gauss(rng) / std::sqrt(cfg.dim_x);
    for (long i = 0; i < cfg.dim_y; ++i)
        for (long j = 0; j < cfg.dim_x; ++j) C(i, j) = gauss(rng) / std::sqrt(cfg.dim_x);
    return SystemModel(A, B, C, BoundedNoiseSpec::uniform_ball(cfg.dim_x, 0.3),
                       BoundedNoiseSpec::uniform_ball(cfg.dim_y, 1.0));
}

EpisodeConfig episode_config_for(const ExperimentConfig& cfg, const SystemModel& model,
                                 long loss_case, long T, long seed_index) {
    EpisodeConfig ec(model);
    ec.T = T;
    ec.loss_case = static_cast<int>(loss_case);
    ec.alpha = cfg.alpha;
    ec.curvature = cfg.curvature;
    ec.r_m = cfg.r_m;
    ec.m = static_cast<int>(cfg.m);
    ec.h = static_cast<int>(cfg.h);
    // case id deliberately left out: cases compare on shared noise streams
    ec.seed = static_cast<unsigned long>(cfg.base_seed + 1000003ULL * seed_index +
                                         static_cast<std::uint64_t>(T));
    ec.lambda_override = cfg.lambda_override;
    return ec;
}

SweepResult run_sweep(const ExperimentConfig& cfg) {
    const auto problems = validate_config(cfg);
    if (!problems.empty()) throw std::invalid_argument("invalid config: " + problems.front());
    const SystemModel model = build_model(cfg);

    struct Job {
        long case_id, T, seed_index;
    };
    std::vector<Job> jobs;
    for (long case_id : cfg.cases)
        for (long T : cfg.horizons)
            for (long s = 0; s < cfg.seeds; ++s) jobs.push_back({case_id, T, s});

    std::vector<SweepRow> rows(jobs.size());
    std::vector<std::vector<std::string>> notes(jobs.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mu;

    const auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= jobs.size()) return;
            try {
                const Job& job = jobs[i];
                const EpisodeConfig ec =
                    episode_config_for(cfg, model, job.case_id, job.T, job.seed_index);
                const EpisodeTrace trace = run_episode(ec);
                const RegretReport report = evaluate_episode(trace, 8);

                SweepRow& row = rows[i];
                row.loss_case = job.case_id;
                row.T = job.T;
                row.seed = ec.seed;
                row.m = trace.m;
                row.h = trace.h;
                row.realized = report.realized;
                row.comparator = report.comparator;
                row.regret = report.regret;
                row.bound = report.bound;
                row.decomposition = report.decomposition;

                const std::string label = case_label(job.case_id) + " T=" +
                                          std::to_string(job.T) + " seed=" +
                                          std::to_string(ec.seed);
                if (row.regret > row.bound + 1e-6)
                    notes[i].push_back(label + ": regret " + std::to_string(row.regret) +
                                       " exceeds the theoretical bound " +
                                       std::to_string(row.bound));
                if (std::abs(report.decomposition.total() - report.regret) > 1e-6)
                    notes[i].push_back(label + ": regret decomposition is inconsistent by " +
                                       std::to_string(report.decomposition.total() -
                                                      report.regret));
                const double g_f = trace.constants.g_f;
                const double diam = trace.constants.diameter;
                for (long t = 1; t < trace.T(); ++t) {
                    const auto& prev = trace.steps[t - 1];
                    const double drift = (trace.steps[t].params - prev.params).norm();
                    if (drift > prev.eta * (g_f + prev.lambda * diam) + 1e-9) {
                        notes[i].push_back(label + ": step drift " + std::to_string(drift) +
                                           " exceeds the rate bound at t=" + std::to_string(t));
                        break;
                    }
                }
                if (!report.comparator_converged)
                    notes[i].push_back("note: " + label +
                                       ": comparator search hit the iteration cap");
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mu);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };

    const long worker_count =
        std::max<long>(1, std::min<long>(cfg.parallel, static_cast<long>(jobs.size())));
    if (worker_count == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (long w = 0; w < worker_count; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (error) std::rethrow_exception(error);

    SweepResult result;
    result.rows = std::move(rows);
    for (const auto& per_row : notes)
        for (const auto& note : per_row) result.violations.push_back(note);

    for (long case_id : cfg.cases) {
        for (long T : cfg.horizons) {
            SweepSummary s;
            s.loss_case = case_id;
            s.T = T;
            long n = 0;
            for (const auto& row : result.rows)
                if (row.loss_case == case_id && row.T == T) {
                    s.mean_regret += row.regret;
                    s.mean_bound += row.bound;
                    ++n;
                }
            s.mean_regret /= n;
            s.mean_bound /= n;
            result.summaries.push_back(s);
        }
    }

    if (cfg.horizons.size() >= 4) {
        for (long case_id : cfg.cases) {
            std::vector<double> Ts, Rs;
            for (const auto& s : result.summaries)
                if (s.loss_case == case_id) {
                    Ts.push_back(static_cast<double>(s.T));
                    Rs.push_back(s.mean_regret);
                }
            try {
                result.fits.emplace(case_id, fit_rate(Ts, Rs));
            } catch (const std::invalid_argument& e) {
                result.violations.push_back("note: " + case_label(case_id) +
                                            " rate fit skipped: " + e.what());
            }
        }
    }
    return result;
}

const std::vector<csv::ColumnSpec>& summary_schema() {
    static const std::vector<csv::ColumnSpec> schema{
        {"case", csv::ColumnKind::Integer},
        {"T", csv::ColumnKind::Integer},
        {"seed", csv::ColumnKind::Integer},
        {"m", csv::ColumnKind::Integer},
        {"h", csv::ColumnKind::Integer},
        {"realized", csv::ColumnKind::Real},
        {"comparator", csv::ColumnKind::Real},
        {"regret", csv::ColumnKind::Real},
        {"bound", csv::ColumnKind::Real},
        {"burn_in", csv::ColumnKind::Real},
        {"algo_truncation", csv::ColumnKind::Real},
        {"f_policy", csv::ColumnKind::Real},
        {"comparator_truncation", csv::ColumnKind::Real},
        {"policy_gap", csv::ColumnKind::Real},
    };
    return schema;
}

const std::vector<csv::ColumnSpec>& rates_schema() {
    static const std::vector<csv::ColumnSpec> schema{
        {"case", csv::ColumnKind::Integer},   {"n_horizons", csv::ColumnKind::Integer},
        {"excluded", csv::ColumnKind::Integer}, {"exponent", csv::ColumnKind::Real},
        {"intercept", csv::ColumnKind::Real},  {"tail_log_ratio", csv::ColumnKind::Real},
        {"warning", csv::ColumnKind::Text},
    };
    return schema;
}

const std::vector<csv::ColumnSpec>& trace_schema() {
    static const std::vector<csv::ColumnSpec> schema{
        {"t", csv::ColumnKind::Integer},        {"y", csv::ColumnKind::Real},
        {"u", csv::ColumnKind::Real},           {"ynat", csv::ColumnKind::Real},
        {"loss", csv::ColumnKind::Real},        {"memory_loss", csv::ColumnKind::Real},
        {"unary_loss", csv::ColumnKind::Real},  {"eta", csv::ColumnKind::Real},
        {"H", csv::ColumnKind::Real},           {"lambda", csv::ColumnKind::Real},
    };
    return schema;
}

namespace {

std::vector<std::string> column_names(const std::vector<csv::ColumnSpec>& schema) {
    std::vector<std::string> names;
    for (const auto& col : schema) names.push_back(col.name);
    return names;
}

std::vector<std::string> summary_cells(const SweepRow& row) {
    return {csv::cell(static_cast<long long>(row.loss_case)),
            csv::cell(static_cast<long long>(row.T)),
            csv::cell(static_cast<unsigned long long>(row.seed)),
            csv::cell(static_cast<long long>(row.m)),
            csv::cell(static_cast<long long>(row.h)),
            csv::cell(row.realized),
            csv::cell(row.comparator),
            csv::cell(row.regret),
            csv::cell(row.bound),
            csv::cell(row.decomposition.burn_in),
            csv::cell(row.decomposition.algo_truncation),
            csv::cell(row.decomposition.f_policy),
            csv::cell(row.decomposition.comparator_truncation),
            csv::cell(row.decomposition.policy_gap)};
}

std::vector<std::string> rates_cells(long case_id, const SweepResult& result, long n_horizons) {
    const auto it = result.fits.find(case_id);
    double exponent = std::numeric_limits<double>::quiet_NaN();
    double intercept = std::numeric_limits<double>::quiet_NaN();
    double tail_ratio = std::numeric_limits<double>::quiet_NaN();
    long long excluded = 0;
    std::string warning;
    if (it != result.fits.end()) {
        exponent = it->second.exponent;
        intercept = it->second.intercept;
        excluded = it->second.excluded;
        warning = it->second.warning;
        const auto& lr = it->second.log_ratio;
        if (lr.size() >= 2 && lr[lr.size() - 2] != 0.0)
            tail_ratio = lr.back() / lr[lr.size() - 2];
    } else {
        warning = n_horizons < 4 ? "fewer than 4 horizons; no fit" : "fit unavailable";
    }
    return {csv::cell(static_cast<long long>(case_id)),
            csv::cell(static_cast<long long>(n_horizons)),
            csv::cell(excluded),
            csv::cell(exponent),
            csv::cell(intercept),
            csv::cell(tail_ratio),
            warning};
}

svg::Series case_series(long case_id, const SweepResult& result) {
    svg::Series series;
    series.label = case_label(case_id);
    const auto it = result.fits.find(case_id);
    if (it != result.fits.end()) {
        char buf[48];
        std::snprintf(buf, sizeof buf, " (slope %.2f)", it->second.exponent);
        series.label += buf;
    }
    for (const auto& s : result.summaries)
        if (s.loss_case == case_id && s.mean_regret > 0.0) {
            series.x.push_back(static_cast<double>(s.T));
            series.y.push_back(s.mean_regret);
        }
    return series;
}

}  // namespace

std::vector<std::string> write_artifacts(const ExperimentConfig& cfg, const SweepResult& result) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.out_dir);
    std::vector<std::string> written;
    const auto path_of = [&](const std::string& name) { return cfg.out_dir + "/" + name; };

    csv::Table summary;
    summary.columns = column_names(summary_schema());
    for (const auto& row : result.rows) summary.add_row(summary_cells(row));
    csv::write_file(path_of("summary.csv"), summary);
    written.push_back(path_of("summary.csv"));

    csv::Table rates;
    rates.columns = column_names(rates_schema());
    for (long case_id : cfg.cases)
        rates.add_row(rates_cells(case_id, result, static_cast<long>(cfg.horizons.size())));
    csv::write_file(path_of("rates.csv"), rates);
    written.push_back(path_of("rates.csv"));

    svg::PlotSpec plot;
    plot.title = "mean regret vs horizon";
    plot.x_label = "horizon T";
    plot.y_label = "mean regret";
    std::vector<svg::Series> all_series;
    for (long case_id : cfg.cases) {
        svg::Series s = case_series(case_id, result);
        if (!s.x.empty()) all_series.push_back(std::move(s));
    }
    if (!all_series.empty()) {
        std::ofstream svg_out(path_of("regret_curves.svg"), std::ios::binary);
        svg_out << svg::render_loglog(plot, all_series);
        written.push_back(path_of("regret_curves.svg"));
    }

    const SystemModel model = build_model(cfg);
    for (long case_id : cfg.cases) {
        const std::string stem = "case" + std::to_string(case_id);

        csv::Table case_summary;
        case_summary.columns = column_names(summary_schema());
        for (const auto& row : result.rows)
            if (row.loss_case == case_id) case_summary.add_row(summary_cells(row));
        csv::write_file(path_of(stem + "_summary.csv"), case_summary);
        written.push_back(path_of(stem + "_summary.csv"));

        csv::Table case_rates;
        case_rates.columns = column_names(rates_schema());
        case_rates.add_row(rates_cells(case_id, result, static_cast<long>(cfg.horizons.size())));
        csv::write_file(path_of(stem + "_rates.csv"), case_rates);
        written.push_back(path_of(stem + "_rates.csv"));

        svg::Series s = case_series(case_id, result);
        if (!s.x.empty()) {
            svg::PlotSpec case_plot = plot;
            case_plot.title = case_label(case_id) + " regret vs horizon";
            std::ofstream svg_out(path_of(stem + "_curve.svg"), std::ios::binary);
            svg_out << svg::render_loglog(case_plot, {s});
            written.push_back(path_of(stem + "_curve.svg"));
        }

        const EpisodeConfig ec =
            episode_config_for(cfg, model, case_id, cfg.horizons.front(), 0);
        const EpisodeTrace trace = run_episode(ec);
        csv::Table trace_table;
        trace_table.columns = column_names(trace_schema());
        for (long t = 1; t <= trace.T(); ++t) {
            const auto& step = trace.steps[t - 1];
            trace_table.add_row({csv::cell(static_cast<long long>(t)),
                                 csv::cell(scalar_or_norm(step.y)),
                                 csv::cell(scalar_or_norm(step.u)),
                                 csv::cell(scalar_or_norm(step.ynat)),
                                 csv::cell(step.loss),
                                 csv::cell(step.memory_loss),
                                 csv::cell(step.unary_loss),
                                 csv::cell(step.eta),
                                 csv::cell(step.H),
                                 csv::cell(step.lambda)});
        }
        csv::write_file(path_of(stem + "_trace.csv"), trace_table);
        written.push_back(path_of(stem + "_trace.csv"));
    }

    toml::write_file(path_of("effective_config.toml"), config_to_toml(cfg));
    written.push_back(path_of("effective_config.toml"));
    return written;
}

std::vector<long> parse_index_list(const std::string& arg) {
    if (arg.empty()) throw std::invalid_argument("empty list argument");
    std::vector<long> out;
    std::size_t start = 0;
    while (start <= arg.size()) {
        std::size_t comma = arg.find(',', start);
        if (comma == std::string::npos) comma = arg.size();
        const std::string item = arg.substr(start, comma - start);
        long v = 0;
        const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
        if (item.empty() || res.ec != std::errc{} || res.ptr != item.data() + item.size())
            throw std::invalid_argument("expected an integer list, got '" + arg + "'");
        out.push_back(v);
        start = comma + 1;
    }
    return out;
}

std::vector<long> parse_horizons_spec(const std::string& arg) {
    const std::size_t dots = arg.find("..");
    if (dots == std::string::npos) return parse_index_list(arg);
    const std::vector<long> lo = parse_index_list(arg.substr(0, dots));
    const std::vector<long> hi = parse_index_list(arg.substr(dots + 2));
    if (lo.size() != 1 || hi.size() != 1 || lo.front() < 1 || hi.front() < lo.front())
        throw std::invalid_argument("horizon range must be lo..hi with 1 <= lo <= hi");
    std::vector<long> out;
    for (long T = lo.front(); T <= hi.front(); T *= 2) out.push_back(T);
    return out;
}

}  // namespace drclab
