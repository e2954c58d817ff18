// Command-line front end: fit / generate / evaluate / sweep / ablate /
// baseline-pr / confounder. Experiment subcommands read a config JSON whose
// fields mirror ExperimentConfig; common fields can be overridden by flags.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "fairsynth/eval.hpp"
#include "fairsynth/generator.hpp"
#include "fairsynth/pipeline.hpp"
#include "fairsynth/training.hpp"

namespace {

using namespace fairsynth;

std::vector<std::string> split_list(const std::string& csv) {
    std::vector<std::string> out;
    std::istringstream in(csv);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

struct ConfigArgs {
    std::string config_path;
    std::string output_dir;
    int repeats = -1;
    int64_t seed = -1;
    std::string betas;

    void attach(CLI::App* cmd) {
        cmd->add_option("--config", config_path, "experiment config JSON")->required();
        cmd->add_option("--output-dir", output_dir, "override output directory");
        cmd->add_option("--repeats", repeats, "override repeat count");
        cmd->add_option("--seed", seed, "override master seed");
        cmd->add_option("--betas", betas, "override sweep betas, comma separated");
    }

    ExperimentConfig load() const {
        ExperimentConfig cfg = ExperimentConfig::load_file(config_path);
        if (!output_dir.empty()) cfg.output_dir = output_dir;
        if (repeats > 0) cfg.repeats = repeats;
        if (seed >= 0) cfg.seed = static_cast<uint64_t>(seed);
        if (!betas.empty()) {
            cfg.betas.clear();
            for (const auto& b : split_list(betas)) cfg.betas.push_back(std::stod(b));
        }
        return cfg;
    }
};

int cmd_fit(const std::string& data_path, const std::string& dag_path,
            const std::string& out_path, const std::string& log_path,
            const TrainConfig& train) {
    const CausalDag dag = CausalDag::load_file(dag_path);
    std::vector<Column> schema;
    for (const auto& n : dag.nodes()) schema.push_back({n.name, n.kind});
    const Table data = ingest(data_path, schema);

    std::ofstream log_stream;
    std::ostream* log = nullptr;
    if (!log_path.empty()) {
        log_stream.open(log_path);
        if (!log_stream) throw IoError("cannot write train log '" + log_path + "'");
        log = &log_stream;
    }
    const GeneratorModel model = fit(data, dag, train, log);
    model.save(out_path);
    std::cout << "model written to " << out_path << "\n";
    return 0;
}

int cmd_generate(const std::string& model_path, std::size_t n, const std::string& out_path,
                 const std::string& definition, const std::string& protected_attr,
                 const std::string& target, const std::string& explanatory,
                 const std::string& proxies, const std::string& surrogate_kind,
                 double surrogate_value, uint64_t seed, const std::string& removal_out) {
    const GeneratorModel model = GeneratorModel::load(model_path);
    EdgeRemovalSet removal;
    if (definition != "nd") {
        FairnessSpec spec;
        spec.definition = fairness_definition_from_string(definition);
        spec.protected_attr = protected_attr;
        spec.target = target;
        for (const auto& r : split_list(explanatory)) spec.explanatory.insert(r);
        for (const auto& p : split_list(proxies)) spec.proxies.insert(p);
        removal = edges_to_remove(model.dag(), spec);
    }
    SurrogateConfig surrogate;
    surrogate.default_kind = surrogate_kind == "fixed" ? SurrogatePolicy::Kind::FixedValue
                                                       : SurrogatePolicy::Kind::MarginalSample;
    surrogate.default_value = surrogate_value;
    const Table synth = model.generate(n, removal, surrogate.build(removal), seed);
    write_csv(synth, out_path);
    if (!removal_out.empty()) {
        std::ofstream out(removal_out);
        out << removal.to_json() << "\n";
    }
    std::cout << "synthetic data written to " << out_path << " (" << removal.size()
              << " edges removed)\n";
    return 0;
}

int cmd_evaluate(const std::string& real_path, const std::string& synth_path,
                 const std::string& protected_attr, const std::string& target, int k,
                 uint64_t seed, const std::string& out_path) {
    const Table synth = read_csv(synth_path);
    const Table real = read_csv(real_path);

    const DownstreamClassifier clf = train_downstream(synth, target, seed);
    EvalReport report;
    report.seeds.push_back(seed);
    const FtuResult ftu = ftu_details(clf, real, protected_attr);
    report.ftu.add(ftu.mean_gap);
    report.ftu_max.add(ftu.max_gap);
    report.dp.add(dp_metric(clf, real, protected_attr));
    report.auroc.add(auroc(clf, real, target));
    const auto [prec, rec] = precision_recall(real, synth, k);
    report.precision.add(prec);
    report.recall.add(rec);
    report.finalize();

    if (out_path.empty()) {
        std::cout << report.to_json() << "\n";
    } else {
        std::ofstream out(out_path);
        out << report.to_json() << "\n";
        std::cout << "report written to " << out_path << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fair synthetic data toolkit"};
    app.require_subcommand(1);

    // fit
    auto* fit_cmd = app.add_subcommand("fit", "train a generator on CSV data");
    std::string fit_data, fit_dag, fit_out, fit_log;
    TrainConfig train;
    int64_t fit_seed = 0;
    fit_cmd->add_option("--data", fit_data, "training CSV")->required();
    fit_cmd->add_option("--dag", fit_dag, "causal DAG JSON")->required();
    fit_cmd->add_option("--out", fit_out, "model output path")->required();
    fit_cmd->add_option("--train-log", fit_log, "line-delimited JSON training log");
    fit_cmd->add_option("--epochs", train.epochs, "training epochs");
    fit_cmd->add_option("--learning-rate", train.learning_rate, "Adam learning rate");
    fit_cmd->add_option("--batch-size", train.batch_size, "minibatch size");
    fit_cmd->add_option("--discriminator-steps", train.discriminator_steps,
                        "discriminator updates per generator update");
    fit_cmd->add_option("--hidden-width", train.hidden_width, "hidden width (0 = 2d)");
    fit_cmd->add_option("--l2-weight", train.l2_weight, "regularization weight");
    fit_cmd->add_option("--seed", fit_seed, "training seed");

    // generate
    auto* gen_cmd = app.add_subcommand("generate", "sample synthetic data from a model");
    std::string gen_model, gen_out, gen_def = "nd", gen_prot, gen_target, gen_expl, gen_prox;
    std::string gen_surrogate = "marginal", gen_removal_out;
    std::size_t gen_n = 1000;
    double gen_value = 1.0;
    int64_t gen_seed = 0;
    gen_cmd->add_option("--model", gen_model, "model file")->required();
    gen_cmd->add_option("--n", gen_n, "rows to generate")->required();
    gen_cmd->add_option("--out", gen_out, "output CSV")->required();
    gen_cmd->add_option("--definition", gen_def,
                        "nd|ftu|dp|cf|no_direct|no_indirect|no_unresolved|no_proxy");
    gen_cmd->add_option("--protected", gen_prot, "protected attribute");
    gen_cmd->add_option("--target", gen_target, "target attribute");
    gen_cmd->add_option("--explanatory", gen_expl, "explanatory set, comma separated");
    gen_cmd->add_option("--proxies", gen_prox, "proxy set, comma separated");
    gen_cmd->add_option("--surrogate", gen_surrogate, "marginal|fixed");
    gen_cmd->add_option("--surrogate-value", gen_value, "fixed surrogate value");
    gen_cmd->add_option("--seed", gen_seed, "generation seed");
    gen_cmd->add_option("--removal-out", gen_removal_out, "write the removal set JSON here");

    // evaluate
    auto* eval_cmd = app.add_subcommand("evaluate", "quality + fairness of synthetic data");
    std::string eval_real, eval_synth, eval_prot, eval_target, eval_out;
    int eval_k = 5;
    int64_t eval_seed = 0;
    eval_cmd->add_option("--real", eval_real, "real data CSV")->required();
    eval_cmd->add_option("--synth", eval_synth, "synthetic data CSV")->required();
    eval_cmd->add_option("--protected", eval_prot, "protected attribute")->required();
    eval_cmd->add_option("--target", eval_target, "target attribute")->required();
    eval_cmd->add_option("--k", eval_k, "k for precision/recall");
    eval_cmd->add_option("--seed", eval_seed, "downstream training seed");
    eval_cmd->add_option("--out", eval_out, "report JSON path (stdout if omitted)");

    // experiment runners
    auto* sweep_cmd = app.add_subcommand("sweep", "bias sweep (or single experiment)");
    ConfigArgs sweep_args;
    sweep_args.attach(sweep_cmd);
    auto* ablate_cmd = app.add_subcommand("ablate", "DAG perturbation sensitivity");
    ConfigArgs ablate_args;
    ablate_args.attach(ablate_cmd);
    auto* pr_cmd = app.add_subcommand("baseline-pr", "protected-removal baseline");
    ConfigArgs pr_args;
    pr_args.attach(pr_cmd);
    auto* conf_cmd = app.add_subcommand("confounder", "hidden-confounder sweep");
    ConfigArgs conf_args;
    conf_args.attach(conf_cmd);

    CLI11_PARSE(app, argc, argv);

    try {
        if (fit_cmd->parsed()) {
            train.seed = static_cast<uint64_t>(fit_seed);
            return cmd_fit(fit_data, fit_dag, fit_out, fit_log, train);
        }
        if (gen_cmd->parsed()) {
            return cmd_generate(gen_model, gen_n, gen_out, gen_def, gen_prot, gen_target,
                                gen_expl, gen_prox, gen_surrogate, gen_value,
                                static_cast<uint64_t>(gen_seed), gen_removal_out);
        }
        if (eval_cmd->parsed()) {
            return cmd_evaluate(eval_real, eval_synth, eval_prot, eval_target, eval_k,
                                static_cast<uint64_t>(eval_seed), eval_out);
        }
        if (sweep_cmd->parsed()) {
            ExperimentConfig cfg = sweep_args.load();
            if (cfg.betas.empty()) {
                run_experiment(cfg);
            } else {
                sweep_bias(cfg, cfg.betas, cfg.repeats);
            }
            std::cout << "sweep complete; outputs in " << cfg.resolved_output_dir() << "\n";
            return 0;
        }
        if (ablate_cmd->parsed()) {
            ExperimentConfig cfg = ablate_args.load();
            const AblationResult result = run_ablation(cfg);
            std::size_t skipped = 0;
            for (const auto& cell : result.cells) skipped += cell.skipped;
            std::cout << "ablation complete: " << result.cells.size() << " cells, " << skipped
                      << " skipped\n";
            return 0;
        }
        if (pr_cmd->parsed()) {
            ExperimentConfig cfg = pr_args.load();
            run_baseline_pr(cfg);
            std::cout << "baseline complete; outputs in " << cfg.resolved_output_dir() << "\n";
            return 0;
        }
        if (conf_cmd->parsed()) {
            ExperimentConfig cfg = conf_args.load();
            run_hidden_confounder(cfg);
            std::cout << "confounder sweep complete; outputs in " << cfg.resolved_output_dir()
                      << "\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
