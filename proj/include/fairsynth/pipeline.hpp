#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fairsynth/eval.hpp"
#include "fairsynth/fairness.hpp"
#include "fairsynth/sem.hpp"
#include "fairsynth/surrogate.hpp"
#include "fairsynth/table.hpp"
#include "fairsynth/training.hpp"

namespace fairsynth {

/// Where surrogate values come from when edges are removed at generation
/// time: a default mechanism plus optional per-edge overrides.
struct SurrogateConfig {
    SurrogatePolicy::Kind default_kind = SurrogatePolicy::Kind::MarginalSample;
    double default_value = 1.0;  // used when default_kind is FixedValue
    struct Override {
        Edge edge;
        SurrogatePolicy::Kind kind;
        double value;
    };
    std::vector<Override> overrides;

    SurrogatePolicy build(const EdgeRemovalSet& removal) const;
};

struct ExperimentConfig {
    std::string name = "experiment";

    // Data source: exactly one of csv_path / sem.
    std::string csv_path;
    std::optional<SemSpec> sem;
    std::size_t n_samples = 2000;  // per repeat, SEM source only

    std::optional<CausalDag> dag;  // training DAG; defaults to sem.dag
    FairnessSpec fairness;
    std::vector<std::string> variants{"nd", "ftu", "dp"};
    SurrogateConfig surrogate;
    TrainConfig train;

    int repeats = 1;
    std::size_t holdout_rows = 0;  // 0 = 2000 for large data, else 20%
    std::size_t synth_rows = 0;    // rows to generate per variant; 0 = training-split size

    // Direct-bias injection into the training split (target set to 0 with
    // probability beta for the disadvantaged protected value).
    double bias_beta = 0.0;
    double disadvantaged = 0.0;

    std::vector<double> betas;  // sweep grid
    bool baseline_pr = false;

    std::vector<std::string> perturb_modes{"remove", "add", "reverse"};
    int perturb_max_count = 3;
    int perturb_seeds = 10;

    std::vector<std::string> confounder_drop;

    std::string output_dir;
    uint64_t seed = 0;
    int knn_k = 5;
    bool save_artifacts = true;

    void validate() const;
    const CausalDag& training_dag() const;

    static ExperimentConfig from_json(const std::string& text);
    static ExperimentConfig load_file(const std::string& path);
    std::string to_json() const;
    std::string fingerprint() const;

    /// Resolves output_dir against the FAIRSYNTH_OUT environment variable.
    std::string resolved_output_dir() const;
};

/// Typed CSV with header from disk, validated against a schema.
Table ingest(const std::string& path, const std::vector<Column>& schema);

struct ExperimentResult {
    std::map<std::string, EvalReport> variants;
    std::string fingerprint;

    std::string to_json() const;
};

/// Fit once per repeat, generate every requested variant from that one model,
/// train a downstream classifier per variant and evaluate on a held-out
/// original-distribution split.
ExperimentResult run_experiment(const ExperimentConfig& config);

struct SweepResult {
    std::vector<double> betas;
    std::vector<ExperimentResult> results;  // parallel to betas
};

SweepResult sweep_bias(const ExperimentConfig& config, const std::vector<double>& betas,
                       int repeats);

struct AblationCell {
    std::string mode;
    int count = 0;
    bool skipped = false;
    std::string skip_reason;
    ExperimentResult result;
};

struct AblationResult {
    std::vector<AblationCell> cells;
};

AblationResult run_ablation(const ExperimentConfig& config);

/// Protected-removal baseline: the protected column is dropped from data and
/// DAG before fitting; FTU is 0 by construction.
ExperimentResult run_baseline_pr(const ExperimentConfig& config);

/// Drops the configured columns from data and DAG, then runs the bias sweep.
SweepResult run_hidden_confounder(const ExperimentConfig& config);

}  // namespace fairsynth
