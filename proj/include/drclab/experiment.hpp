#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "drclab/csv.hpp"
#include "drclab/regret_lab.hpp"
#include "drclab/toml_lite.hpp"

namespace drclab {

/// A full experiment: one system preset, a sweep over loss cases, horizons
/// and noise seeds, learner geometry and output plumbing. The file format
/// is the canonical TOML layout produced by config_to_toml; every field has
/// a default so a minimal file is valid.
struct ExperimentConfig {
    long schema_version = 1;

    // [model] scalar-stable ignores the dimensions; random-stable draws a
    // system of the given shape with spectral radius rho from model_seed.
    std::string preset = "scalar-stable";
    long dim_x = 1;
    long dim_u = 1;
    long dim_y = 1;
    double rho = 0.5;
    std::uint64_t model_seed = 7;

    // [sweep] cases share ids with the episode loss cases; alpha feeds
    // cases 3/4; every (horizon, seed) pair reuses the same noise stream
    // across cases so rate comparisons are paired.
    std::vector<long> cases{1};
    double alpha = 0.25;
    double curvature = 1.0;
    std::vector<long> horizons{256, 512, 1024, 2048};
    long seeds = 20;
    std::uint64_t base_seed = 1;

    // [learner]
    double r_m = 1.5;
    long m = 0;  // 0 = auto via select_memory
    long h = 0;
    std::vector<double> lambda_override;  // nonempty: single horizon of the same length

    // [output]
    std::string out_dir = "out";
    long parallel = 1;

    bool operator==(const ExperimentConfig&) const = default;
};

/// Throws std::runtime_error naming the offending key on unknown keys or
/// type mismatches.
ExperimentConfig config_from_toml(const toml::Document& doc);
toml::Document config_to_toml(const ExperimentConfig& cfg);
ExperimentConfig load_config(const std::string& path);

/// DRCLAB_<FIELD> environment variables override the matching field
/// (DRCLAB_SEEDS, DRCLAB_OUT_DIR, ...); list fields take comma-separated
/// values. Returns the names of the variables that applied. Throws on
/// unparseable values, naming the variable.
std::vector<std::string> apply_env_overrides(ExperimentConfig& cfg);

/// Dry-run validation: returns one message per violated invariant, empty
/// when the config is runnable.
std::vector<std::string> validate_config(const ExperimentConfig& cfg);

SystemModel build_model(const ExperimentConfig& cfg);

/// The episode a sweep cell runs. The seed mixes base_seed, horizon and
/// seed index but not the case id, so cases are compared on shared noise.
EpisodeConfig episode_config_for(const ExperimentConfig& cfg, const SystemModel& model,
                                 long loss_case, long T, long seed_index);

struct SweepRow {
    long loss_case = 0;
    long T = 0;
    std::uint64_t seed = 0;
    long m = 0, h = 0;
    double realized = 0.0;
    double comparator = 0.0;
    double regret = 0.0;
    double bound = 0.0;
    RegretDecomposition decomposition;
};

struct SweepSummary {
    long loss_case = 0;
    long T = 0;
    double mean_regret = 0.0;
    double mean_bound = 0.0;
};

struct SweepResult {
    std::vector<SweepRow> rows;           // ordered by (case, T, seed index)
    std::vector<SweepSummary> summaries;  // ordered by (case, T)
    std::map<long, RateFit> fits;         // per case, over mean regret vs T
    std::vector<std::string> violations;  // failed run-level invariants
};

/// Runs every (case, horizon, seed) episode, evaluates it against the tail
/// comparator, checks the per-run invariants (regret within bound, step
/// drift, decomposition consistency) and fits per-case rates. Episodes run
/// on cfg.parallel workers; results are merged in deterministic order.
SweepResult run_sweep(const ExperimentConfig& cfg);

/// Writes summary.csv, rates.csv, regret_curves.svg, effective_config.toml
/// plus per-case summary/rates/curve/trace files into cfg.out_dir (created
/// if missing). Returns the paths written. Byte-identical across reruns of
/// the same config.
std::vector<std::string> write_artifacts(const ExperimentConfig& cfg, const SweepResult& result);

const std::vector<csv::ColumnSpec>& summary_schema();
const std::vector<csv::ColumnSpec>& rates_schema();
const std::vector<csv::ColumnSpec>& trace_schema();

/// CLI list arguments: "1,2,3" -> {1,2,3}; horizons also accept a doubling
/// range "256..8192". Throws std::invalid_argument on malformed input.
std::vector<long> parse_index_list(const std::string& arg);
std::vector<long> parse_horizons_spec(const std::string& arg);

}  // namespace drclab
