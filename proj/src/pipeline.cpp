#include "fairsynth/pipeline.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "fairsynth/generator.hpp"
#include "json.hpp"

namespace fairsynth {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr std::size_t kLargeDataThreshold = 10000;
constexpr std::size_t kCensusHoldout = 2000;
constexpr std::size_t kQualityMetricCap = 2000;  // precision/recall points

std::string surrogate_kind_label(SurrogatePolicy::Kind kind) {
    return kind == SurrogatePolicy::Kind::MarginalSample ? "marginal" : "fixed";
}

}  // namespace

SurrogatePolicy SurrogateConfig::build(const EdgeRemovalSet& removal) const {
    SurrogatePolicy policy;
    for (const auto& r : removal.removed) {
        SurrogatePolicy::Entry entry{default_kind, default_value};
        for (const auto& o : overrides) {
            if (o.edge.first == r.from && o.edge.second == r.to) {
                entry = {o.kind, o.value};
            }
        }
        policy.entries[{r.from, r.to}] = entry;
    }
    return policy;
}

void ExperimentConfig::validate() const {
    if (csv_path.empty() == !sem.has_value()) {
        throw ValidationError("config needs exactly one data source (csv or sem)");
    }
    if (sem && n_samples < 10) throw ValidationError("n_samples must be >= 10");
    if (repeats < 1) throw ValidationError("repeats must be >= 1");
    if (knn_k < 1) throw ValidationError("knn_k must be >= 1");
    if (bias_beta < 0.0 || bias_beta > 1.0) throw ValidationError("bias beta must be in [0, 1]");
    for (double b : betas) {
        if (b < 0.0 || b > 1.0) throw ValidationError("sweep betas must be in [0, 1]");
    }
    if (variants.empty() && !baseline_pr) {
        throw ValidationError("at least one variant (or the pr baseline) is required");
    }
    for (const auto& v : variants) {
        if (v != "nd") fairness_definition_from_string(v);
    }
    train.validate();
    if (perturb_max_count < 1) throw ValidationError("perturb_max_count must be >= 1");
    if (perturb_seeds < 1) throw ValidationError("perturb_seeds must be >= 1");

    const CausalDag& base = training_dag();
    for (const auto& drop : confounder_drop) {
        base.node_index(drop);
        if (drop == fairness.protected_attr || drop == fairness.target ||
            fairness.explanatory.count(drop) || fairness.proxies.count(drop)) {
            throw ValidationError("confounder drop '" + drop +
                                  "' is referenced by the fairness spec");
        }
    }
    CausalDag effective = base;
    for (const auto& drop : confounder_drop) effective = effective.with_node_removed(drop);
    fairness.validate(effective);
}

const CausalDag& ExperimentConfig::training_dag() const {
    if (dag) return *dag;
    if (sem) return sem->dag;
    throw ValidationError("config has no DAG (set 'dag' or use a SEM source)");
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw IoError(std::string("invalid experiment config JSON: ") + e.what());
    }
    ExperimentConfig cfg;
    cfg.name = doc.value("name", cfg.name);
    cfg.csv_path = doc.value("csv", std::string{});
    if (doc.contains("sem")) {
        if (doc["sem"].is_string()) {
            cfg.sem = SemSpec::load_file(doc["sem"].get<std::string>());
        } else {
            cfg.sem = SemSpec::from_json(doc["sem"].dump());
        }
    }
    cfg.n_samples = doc.value("n_samples", cfg.n_samples);
    if (doc.contains("dag")) {
        if (doc["dag"].is_string()) {
            cfg.dag = CausalDag::load_file(doc["dag"].get<std::string>());
        } else {
            cfg.dag = CausalDag::from_json(doc["dag"].dump());
        }
    }
    if (doc.contains("fairness")) {
        cfg.fairness = FairnessSpec::from_json(doc["fairness"].dump());
    }
    if (doc.contains("variants")) {
        cfg.variants = doc["variants"].get<std::vector<std::string>>();
    }
    if (doc.contains("surrogate")) {
        const auto& s = doc["surrogate"];
        const std::string kind = s.value("default", "marginal");
        cfg.surrogate.default_kind = kind == "fixed" ? SurrogatePolicy::Kind::FixedValue
                                                     : SurrogatePolicy::Kind::MarginalSample;
        cfg.surrogate.default_value = s.value("value", 1.0);
        if (s.contains("overrides")) {
            for (const auto& o : s["overrides"]) {
                SurrogateConfig::Override ov;
                ov.edge = {o.at("from").get<std::string>(), o.at("to").get<std::string>()};
                ov.kind = o.value("kind", std::string("fixed")) == "marginal"
                              ? SurrogatePolicy::Kind::MarginalSample
                              : SurrogatePolicy::Kind::FixedValue;
                ov.value = o.value("value", 1.0);
                cfg.surrogate.overrides.push_back(ov);
            }
        }
    }
    if (doc.contains("train")) cfg.train = TrainConfig::from_json(doc["train"].dump());
    cfg.repeats = doc.value("repeats", cfg.repeats);
    cfg.holdout_rows = doc.value("holdout_rows", cfg.holdout_rows);
    cfg.synth_rows = doc.value("synth_rows", cfg.synth_rows);
    cfg.bias_beta = doc.value("bias_beta", cfg.bias_beta);
    cfg.disadvantaged = doc.value("disadvantaged", cfg.disadvantaged);
    if (doc.contains("betas")) cfg.betas = doc["betas"].get<std::vector<double>>();
    cfg.baseline_pr = doc.value("baseline_pr", cfg.baseline_pr);
    if (doc.contains("perturb_modes")) {
        cfg.perturb_modes = doc["perturb_modes"].get<std::vector<std::string>>();
    }
    cfg.perturb_max_count = doc.value("perturb_max_count", cfg.perturb_max_count);
    cfg.perturb_seeds = doc.value("perturb_seeds", cfg.perturb_seeds);
    if (doc.contains("confounder_drop")) {
        cfg.confounder_drop = doc["confounder_drop"].get<std::vector<std::string>>();
    }
    cfg.output_dir = doc.value("output_dir", cfg.output_dir);
    cfg.seed = doc.value("seed", cfg.seed);
    cfg.knn_k = doc.value("knn_k", cfg.knn_k);
    cfg.save_artifacts = doc.value("save_artifacts", cfg.save_artifacts);
    return cfg;
}

ExperimentConfig ExperimentConfig::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json(buf.str());
}

std::string ExperimentConfig::to_json() const {
    json doc;
    doc["name"] = name;
    if (!csv_path.empty()) doc["csv"] = csv_path;
    if (sem) doc["sem"] = json::parse(sem->to_json());
    doc["n_samples"] = n_samples;
    if (dag) doc["dag"] = json::parse(dag->to_json());
    doc["fairness"] = json::parse(fairness.to_json());
    doc["variants"] = variants;
    json surrogate;
    surrogate["default"] =
        surrogate_kind_label(this->surrogate.default_kind);
    surrogate["value"] = this->surrogate.default_value;
    json overrides = json::array();
    for (const auto& o : this->surrogate.overrides) {
        overrides.push_back({{"from", o.edge.first},
                             {"to", o.edge.second},
                             {"kind", surrogate_kind_label(o.kind)},
                             {"value", o.value}});
    }
    surrogate["overrides"] = overrides;
    doc["surrogate"] = surrogate;
    doc["train"] = json::parse(train.to_json());
    doc["repeats"] = repeats;
    doc["holdout_rows"] = holdout_rows;
    doc["synth_rows"] = synth_rows;
    doc["bias_beta"] = bias_beta;
    doc["disadvantaged"] = disadvantaged;
    doc["betas"] = betas;
    doc["baseline_pr"] = baseline_pr;
    doc["perturb_modes"] = perturb_modes;
    doc["perturb_max_count"] = perturb_max_count;
    doc["perturb_seeds"] = perturb_seeds;
    doc["confounder_drop"] = confounder_drop;
    doc["output_dir"] = output_dir;
    doc["seed"] = seed;
    doc["knn_k"] = knn_k;
    doc["save_artifacts"] = save_artifacts;
    return doc.dump(2);
}

std::string ExperimentConfig::fingerprint() const {
    const uint64_t h = fnv1a64(to_json());
    std::ostringstream out;
    out << std::hex << h;
    return out.str();
}

std::string ExperimentConfig::resolved_output_dir() const {
    if (output_dir.empty()) return {};
    fs::path p(output_dir);
    if (p.is_absolute()) return p.string();
    const char* root = std::getenv("FAIRSYNTH_OUT");
    if (root != nullptr && *root != '\0') return (fs::path(root) / p).string();
    return p.string();
}

Table ingest(const std::string& path, const std::vector<Column>& schema) {
    return read_csv(path, schema);
}

namespace {

struct VariantOutcome {
    double precision = 0.0;
    double recall = 0.0;
    double auroc_value = 0.0;
    double ftu = 0.0;
    double ftu_max = 0.0;
    double dp = 0.0;
};

Table reorder_columns(const Table& data, const CausalDag& dag) {
    std::vector<std::size_t> order;
    std::vector<Column> schema;
    for (const auto& node : dag.nodes()) {
        order.push_back(data.column_index(node.name));
        schema.push_back({node.name, node.kind});
    }
    std::vector<double> values;
    values.reserve(data.rows() * schema.size());
    for (std::size_t r = 0; r < data.rows(); ++r) {
        for (std::size_t c : order) values.push_back(data.at(r, c));
    }
    return Table(std::move(schema), std::move(values));
}

Table head_rows(const Table& table, std::size_t cap) {
    if (table.rows() <= cap) return table;
    std::vector<std::size_t> idx(cap);
    std::iota(idx.begin(), idx.end(), 0);
    return table.select_rows(idx);
}

FairnessSpec variant_spec(const FairnessSpec& base, const std::string& variant) {
    FairnessSpec spec = base;
    spec.definition = fairness_definition_from_string(variant);
    const bool uses_r = spec.definition == FairnessDefinition::Cf ||
                        spec.definition == FairnessDefinition::NoUnresolved;
    if (!uses_r) spec.explanatory.clear();
    if (spec.definition != FairnessDefinition::NoProxy) spec.proxies.clear();
    return spec;
}

// A run context shared by the repeat loop: the effective DAG (confounder
// drops applied) and source loading.
struct RunContext {
    const ExperimentConfig& config;
    CausalDag dag;

    explicit RunContext(const ExperimentConfig& cfg) : config(cfg), dag(cfg.training_dag()) {
        for (const auto& drop : cfg.confounder_drop) dag = dag.with_node_removed(drop);
    }

    Table load(uint64_t data_seed) const {
        Table data = config.sem ? sem_sample(*config.sem, config.n_samples, data_seed)
                                : read_csv_source();
        for (const auto& drop : config.confounder_drop) data = data.without_column(drop);
        for (const auto& col : data.schema()) {
            if (!dag.has_node(col.name)) {
                throw ValidationError("data column '" + col.name +
                                      "' is not a node of the training DAG");
            }
        }
        return reorder_columns(data, dag);
    }

    Table read_csv_source() const {
        Table raw = read_csv(config.csv_path);
        // Kinds come from the DAG for columns it covers.
        std::vector<Column> schema;
        for (const auto& col : raw.schema()) {
            ColumnKind kind = col.kind;
            const CausalDag& base = config.training_dag();
            if (base.has_node(col.name)) {
                kind = base.node(base.node_index(col.name)).kind;
            }
            schema.push_back({col.name, kind});
        }
        std::vector<double> values;
        values.reserve(raw.rows() * raw.cols());
        for (std::size_t r = 0; r < raw.rows(); ++r) {
            auto row = raw.row(r);
            values.insert(values.end(), row.begin(), row.end());
        }
        return Table(std::move(schema), std::move(values));
    }

    std::size_t holdout_size(std::size_t n) const {
        if (config.holdout_rows > 0) return std::min(config.holdout_rows, n / 2);
        if (n >= kLargeDataThreshold) return kCensusHoldout;
        return std::max<std::size_t>(1, n / 5);
    }
};

VariantOutcome evaluate_variant(const Table& synth, const Table& holdout,
                                const ExperimentConfig& config, uint64_t downstream_seed) {
    VariantOutcome out;
    const DownstreamClassifier clf =
        train_downstream(synth, config.fairness.target, downstream_seed);
    const FtuResult ftu = ftu_details(clf, holdout, config.fairness.protected_attr);
    out.ftu = ftu.mean_gap;
    out.ftu_max = ftu.max_gap;
    out.dp = dp_metric(clf, holdout, config.fairness.protected_attr);
    out.auroc_value = auroc(clf, holdout, config.fairness.target);

    Table real_q = head_rows(holdout, kQualityMetricCap);
    Table synth_q = head_rows(synth, kQualityMetricCap);
    if (synth.schema() != holdout.schema()) {
        // Protected-removal synthesizes without the protected column; compare
        // quality on the shared columns.
        real_q = real_q.without_column(config.fairness.protected_attr);
    }
    const auto [prec, rec] = precision_recall(real_q, synth_q, config.knn_k);
    out.precision = prec;
    out.recall = rec;
    return out;
}

struct RepeatArtifacts {
    std::string model_path;
    std::map<std::string, std::string> synth_paths;
};

std::map<std::string, VariantOutcome> run_one_repeat(const RunContext& ctx, int repeat,
                                                     double beta, const fs::path& artifact_dir,
                                                     RepeatArtifacts* artifacts) {
    const ExperimentConfig& config = ctx.config;
    const uint64_t r_seed = mix_seed(config.seed, "repeat", static_cast<uint64_t>(repeat));

    Table data = ctx.load(mix_seed(r_seed, "data"));
    const std::size_t n = data.rows();
    const std::size_t h = ctx.holdout_size(n);
    if (h == 0 || h >= n) throw ValidationError("holdout split leaves no training data");

    std::vector<std::size_t> index(n);
    std::iota(index.begin(), index.end(), 0);
    std::mt19937_64 split_rng(mix_seed(r_seed, "split"));
    std::shuffle(index.begin(), index.end(), split_rng);
    const Table holdout = data.select_rows({index.begin(), index.begin() + h});
    Table train_split = data.select_rows({index.begin() + h, index.end()});

    if (beta > 0.0) {
        train_split = inject_direct_bias(train_split, config.fairness.protected_attr,
                                         config.fairness.target, config.disadvantaged, beta,
                                         mix_seed(r_seed, "bias"));
    }

    std::map<std::string, VariantOutcome> outcomes;

    if (!config.variants.empty()) {
        TrainConfig tc = config.train;
        tc.seed = mix_seed(r_seed, "fit");
        std::ofstream log_stream;
        std::ostream* log = nullptr;
        if (!artifact_dir.empty()) {
            log_stream.open(artifact_dir / ("train_r" + std::to_string(repeat) + ".ndjson"));
            log = &log_stream;
        }
        const GeneratorModel model = fit(train_split, ctx.dag, tc, log);
        if (artifacts && !artifact_dir.empty()) {
            const fs::path model_path =
                artifact_dir / ("model_r" + std::to_string(repeat) + ".bin");
            model.save(model_path.string());
            artifacts->model_path = model_path.string();
        }

        for (const auto& variant : config.variants) {
            try {
                EdgeRemovalSet removal;
                if (variant != "nd") {
                    removal = edges_to_remove(ctx.dag, variant_spec(config.fairness, variant));
                }
                const SurrogatePolicy policy = config.surrogate.build(removal);
                const std::size_t n_synth =
                    config.synth_rows > 0 ? config.synth_rows : train_split.rows();
                const Table synth = model.generate(n_synth, removal, policy,
                                                   mix_seed(r_seed, "gen-" + variant));
                if (artifacts && !artifact_dir.empty()) {
                    const fs::path synth_path =
                        artifact_dir /
                        ("synth_r" + std::to_string(repeat) + "_" + variant + ".csv");
                    write_csv(synth, synth_path.string());
                    artifacts->synth_paths[variant] = synth_path.string();
                }
                outcomes[variant] = evaluate_variant(synth, holdout, config,
                                                     mix_seed(r_seed, "down-" + variant));
            } catch (const std::exception& e) {
                throw std::runtime_error("variant '" + variant + "', repeat " +
                                         std::to_string(repeat) + ": " + e.what());
            }
        }
    }

    if (config.baseline_pr) {
        const CausalDag pr_dag = ctx.dag.with_node_removed(config.fairness.protected_attr);
        const Table pr_train = train_split.without_column(config.fairness.protected_attr);
        TrainConfig tc = config.train;
        tc.seed = mix_seed(r_seed, "fit-pr");
        const GeneratorModel pr_model = fit(pr_train, pr_dag, tc, nullptr);
        const std::size_t n_pr =
            config.synth_rows > 0 ? config.synth_rows : pr_train.rows();
        const Table pr_synth = pr_model.generate(n_pr, EdgeRemovalSet{}, SurrogatePolicy{},
                                                 mix_seed(r_seed, "gen-pr"));
        outcomes["pr"] =
            evaluate_variant(pr_synth, holdout, config, mix_seed(r_seed, "down-pr"));
    }

    return outcomes;
}

void write_tidy_csv(const fs::path& path, const std::vector<double>& betas,
                    const std::vector<ExperimentResult>& results) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write tidy metrics CSV '" + path.string() + "'");
    out << "beta,variant,repeat,seed,metric,value\n";
    char buf[40];
    for (std::size_t bi = 0; bi < results.size(); ++bi) {
        const double beta = betas.empty() ? -1.0 : betas[bi];
        for (const auto& [variant, report] : results[bi].variants) {
            const std::vector<std::pair<std::string, const MetricStats*>> metrics = {
                {"precision", &report.precision}, {"recall", &report.recall},
                {"auroc", &report.auroc},         {"ftu", &report.ftu},
                {"ftu_max", &report.ftu_max},     {"dp", &report.dp}};
            for (const auto& [metric, stats] : metrics) {
                for (std::size_t r = 0; r < stats->values.size(); ++r) {
                    std::snprintf(buf, sizeof(buf), "%.17g", stats->values[r]);
                    out << beta << ',' << variant << ',' << r << ','
                        << (r < report.seeds.size() ? report.seeds[r] : 0) << ',' << metric
                        << ',' << buf << "\n";
                }
            }
        }
    }
}

ExperimentResult aggregate_repeats(
    const ExperimentConfig& config, const std::vector<uint64_t>& run_seeds,
    const std::vector<std::map<std::string, VariantOutcome>>& repeat_outcomes) {
    ExperimentResult result;
    result.fingerprint = config.fingerprint();
    for (std::size_t r = 0; r < repeat_outcomes.size(); ++r) {
        const uint64_t r_seed = run_seeds[r];
        for (const auto& [variant, outcome] : repeat_outcomes[r]) {
            EvalReport& report = result.variants[variant];
            report.fingerprint = result.fingerprint;
            report.seeds.push_back(r_seed);
            report.precision.add(outcome.precision);
            report.recall.add(outcome.recall);
            report.auroc.add(outcome.auroc_value);
            report.ftu.add(outcome.ftu);
            report.ftu_max.add(outcome.ftu_max);
            report.dp.add(outcome.dp);
        }
    }
    for (auto& [_, report] : result.variants) report.finalize();
    return result;
}

ExperimentResult run_experiment_core(const ExperimentConfig& config, double beta) {
    config.validate();
    RunContext ctx(config);

    fs::path artifact_dir;
    if (!config.resolved_output_dir().empty()) {
        artifact_dir = fs::path(config.resolved_output_dir());
        fs::create_directories(artifact_dir);
        std::ofstream cfg_out(artifact_dir / "config.json");
        cfg_out << config.to_json() << "\n";
    }

    std::vector<std::map<std::string, VariantOutcome>> repeat_outcomes;
    std::vector<uint64_t> run_seeds;
    for (int r = 0; r < config.repeats; ++r) {
        RepeatArtifacts artifacts;
        run_seeds.push_back(mix_seed(config.seed, "repeat", static_cast<uint64_t>(r)));
        repeat_outcomes.push_back(run_one_repeat(
            ctx, r, beta, config.save_artifacts ? artifact_dir : fs::path{}, &artifacts));
    }
    ExperimentResult result = aggregate_repeats(config, run_seeds, repeat_outcomes);

    if (!artifact_dir.empty()) {
        std::ofstream report_out(artifact_dir / "report.json");
        report_out << result.to_json() << "\n";
        write_tidy_csv(artifact_dir / "tidy_metrics.csv", {}, {result});
    }
    return result;
}

}  // namespace

std::string ExperimentResult::to_json() const {
    json doc;
    doc["fingerprint"] = fingerprint;
    json vs = json::object();
    for (const auto& [variant, report] : variants) {
        vs[variant] = json::parse(report.to_json());
    }
    doc["variants"] = vs;
    return doc.dump(2);
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
    return run_experiment_core(config, config.bias_beta);
}

SweepResult sweep_bias(const ExperimentConfig& config, const std::vector<double>& betas,
                       int repeats) {
    if (betas.empty()) throw ValidationError("sweep needs at least one beta");
    SweepResult sweep;
    sweep.betas = betas;
    for (double beta : betas) {
        ExperimentConfig run = config;
        run.repeats = repeats;
        run.bias_beta = beta;
        run.betas.clear();
        if (!config.output_dir.empty()) {
            std::ostringstream dir;
            dir << config.output_dir << "/beta_" << beta;
            run.output_dir = dir.str();
        }
        sweep.results.push_back(run_experiment_core(run, beta));
    }
    if (!config.resolved_output_dir().empty()) {
        const fs::path root(config.resolved_output_dir());
        fs::create_directories(root);
        write_tidy_csv(root / "sweep_metrics.csv", sweep.betas, sweep.results);
        json doc;
        doc["betas"] = sweep.betas;
        json results = json::array();
        for (const auto& r : sweep.results) results.push_back(json::parse(r.to_json()));
        doc["results"] = results;
        std::ofstream out(root / "sweep_report.json");
        out << doc.dump(2) << "\n";
    }
    return sweep;
}

AblationResult run_ablation(const ExperimentConfig& config) {
    config.validate();
    AblationResult ablation;
    const CausalDag base = RunContext(config).dag;

    for (const auto& mode_name : config.perturb_modes) {
        const PerturbMode mode = perturb_mode_from_string(mode_name);
        for (int count = 1; count <= config.perturb_max_count; ++count) {
            AblationCell cell;
            cell.mode = mode_name;
            cell.count = count;

            std::vector<std::map<std::string, VariantOutcome>> outcomes;
            std::vector<uint64_t> run_seeds;
            std::size_t infeasible = 0;
            std::string last_reason;
            ExperimentConfig cell_config = config;
            cell_config.output_dir.clear();  // cells aggregate into one report
            for (int s = 0; s < config.perturb_seeds; ++s) {
                const uint64_t perturb_seed =
                    mix_seed(config.seed, "perturb-" + mode_name, 1000 * count + s);
                CausalDag perturbed = base;
                try {
                    perturbed = perturb_dag(base, mode, count, config.fairness, perturb_seed);
                } catch (const InfeasiblePerturbationError& e) {
                    ++infeasible;
                    last_reason = e.what();
                    continue;
                }
                cell_config.dag = perturbed;
                cell_config.seed = mix_seed(config.seed, "ablate", 1000 * count + s);
                RunContext ctx(cell_config);
                run_seeds.push_back(cell_config.seed);
                outcomes.push_back(run_one_repeat(ctx, 0, config.bias_beta, {}, nullptr));
            }
            if (outcomes.empty()) {
                cell.skipped = true;
                cell.skip_reason = "all " + std::to_string(infeasible) +
                                   " perturbation draws infeasible: " + last_reason;
            } else {
                cell.result = aggregate_repeats(config, run_seeds, outcomes);
                if (infeasible > 0) {
                    cell.skip_reason = std::to_string(infeasible) +
                                       " perturbation draw(s) skipped: " + last_reason;
                }
            }
            ablation.cells.push_back(std::move(cell));
        }
    }

    if (!config.resolved_output_dir().empty()) {
        const fs::path root(config.resolved_output_dir());
        fs::create_directories(root);
        json doc = json::array();
        for (const auto& cell : ablation.cells) {
            json c;
            c["mode"] = cell.mode;
            c["count"] = cell.count;
            c["skipped"] = cell.skipped;
            c["skip_reason"] = cell.skip_reason;
            if (!cell.skipped) c["result"] = json::parse(cell.result.to_json());
            doc.push_back(c);
        }
        std::ofstream out(root / "ablation_report.json");
        out << doc.dump(2) << "\n";
    }
    return ablation;
}

ExperimentResult run_baseline_pr(const ExperimentConfig& config) {
    ExperimentConfig pr = config;
    pr.variants.clear();
    pr.baseline_pr = true;
    if (!config.output_dir.empty()) pr.output_dir = config.output_dir + "/baseline_pr";
    return run_experiment(pr);
}

SweepResult run_hidden_confounder(const ExperimentConfig& config) {
    config.validate();
    if (config.betas.empty()) {
        SweepResult single;
        single.betas = {config.bias_beta};
        single.results.push_back(run_experiment(config));
        return single;
    }
    return sweep_bias(config, config.betas, config.repeats);
}

}  // namespace fairsynth
