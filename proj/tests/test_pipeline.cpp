#include "fairsynth/pipeline.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "fairsynth/generator.hpp"
#include "oracles.hpp"

using namespace fairsynth;
namespace fs = std::filesystem;

namespace {

std::string data_file(const std::string& name) {
    return std::string(FAIRSYNTH_DATA_DIR) + "/" + name;
}

// Small but end-to-end config on the credit SEM.
ExperimentConfig smoke_config() {
    ExperimentConfig cfg;
    cfg.name = "smoke";
    cfg.sem = SemSpec::load_file(data_file("credit_sem.json"));
    cfg.dag = CausalDag::load_file(data_file("credit_sweep_dag.json"));
    cfg.n_samples = 700;
    cfg.fairness.definition = FairnessDefinition::Ftu;
    cfg.fairness.protected_attr = "group";
    cfg.fairness.target = "approved";
    cfg.variants = {"nd"};
    cfg.train.epochs = 6;
    cfg.repeats = 1;
    cfg.seed = 5;
    cfg.save_artifacts = false;
    return cfg;
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name)
        : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("ingest: adult-style csv with 11 attributes") {
    const SemSpec sem = SemSpec::load_file(data_file("adult_sem.json"));
    const Table sample = sem_sample(sem, 50, 1);
    TempDir dir("fairsynth_ingest");
    const auto csv = (dir.path / "adult.csv").string();
    write_csv(sample, csv);

    const Table loaded = ingest(csv, sem.schema());
    CHECK(loaded.cols() == 11);
    CHECK(loaded.rows() == 50);
    CHECK(loaded == sample);
}

TEST_CASE("experiment config validation") {
    ExperimentConfig cfg = smoke_config();
    CHECK_NOTHROW(cfg.validate());

    SUBCASE("needs exactly one source") {
        cfg.csv_path = "also.csv";
        CHECK_THROWS_AS(cfg.validate(), ValidationError);
    }
    SUBCASE("repeats must be positive") {
        cfg.repeats = 0;
        CHECK_THROWS_AS(cfg.validate(), ValidationError);
    }
    SUBCASE("unknown variant rejected") {
        cfg.variants = {"nd", "mystery"};
        CHECK_THROWS_AS(cfg.validate(), ValidationError);
    }
    SUBCASE("confounder drop referenced by the fairness spec") {
        cfg.confounder_drop = {"group"};
        CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("referenced"),
                             ValidationError);
    }
    SUBCASE("config json round trip preserves the fingerprint") {
        const ExperimentConfig back = ExperimentConfig::from_json(cfg.to_json());
        CHECK(back.fingerprint() == cfg.fingerprint());
    }
}

TEST_CASE("run_experiment: single-repeat smoke populates every metric") {
    const ExperimentConfig cfg = smoke_config();
    const ExperimentResult result = run_experiment(cfg);
    REQUIRE(result.variants.count("nd") == 1);
    const EvalReport& report = result.variants.at("nd");
    CHECK(report.n_runs == 1);
    CHECK(report.seeds.size() == 1);
    CHECK(report.fingerprint == cfg.fingerprint());
    for (const MetricStats* m :
         {&report.precision, &report.recall, &report.auroc, &report.ftu, &report.dp}) {
        REQUIRE(m->values.size() == 1);
        CHECK(m->values[0] >= 0.0);
        CHECK(m->values[0] <= 1.0);
    }
}

TEST_CASE("run_experiment: reports are byte-reproducible under one seed") {
    const ExperimentConfig cfg = smoke_config();
    const ExperimentResult r1 = run_experiment(cfg);
    const ExperimentResult r2 = run_experiment(cfg);
    CHECK(r1.to_json() == r2.to_json());
}

TEST_CASE("run_experiment writes the documented output layout") {
    ExperimentConfig cfg = smoke_config();
    cfg.variants = {"nd", "ftu"};
    cfg.save_artifacts = true;
    TempDir dir("fairsynth_outputs");
    cfg.output_dir = (dir.path / "run1").string();
    run_experiment(cfg);

    CHECK(fs::exists(fs::path(cfg.output_dir) / "config.json"));
    CHECK(fs::exists(fs::path(cfg.output_dir) / "report.json"));
    CHECK(fs::exists(fs::path(cfg.output_dir) / "tidy_metrics.csv"));
    CHECK(fs::exists(fs::path(cfg.output_dir) / "model_r0.bin"));
    CHECK(fs::exists(fs::path(cfg.output_dir) / "synth_r0_nd.csv"));
    CHECK(fs::exists(fs::path(cfg.output_dir) / "synth_r0_ftu.csv"));

    // One trained model serves every variant of the repeat.
    const auto model = GeneratorModel::load((fs::path(cfg.output_dir) / "model_r0.bin").string());
    CHECK(model.dag() == *cfg.dag);
}

TEST_CASE("baseline-pr: ftu is zero by construction") {
    ExperimentConfig cfg = smoke_config();
    cfg.bias_beta = 0.4;
    const ExperimentResult result = run_baseline_pr(cfg);
    REQUIRE(result.variants.count("pr") == 1);
    const EvalReport& report = result.variants.at("pr");
    CHECK(report.ftu.values[0] == 0.0);
    CHECK(report.ftu_max.values[0] == 0.0);
    CHECK(report.dp.values[0] >= 0.0);
    CHECK(report.precision.values[0] >= 0.0);
}

TEST_CASE("hidden confounder: empty drop list equals the plain sweep") {
    ExperimentConfig cfg = smoke_config();
    cfg.betas = {0.5};
    const SweepResult direct = sweep_bias(cfg, cfg.betas, cfg.repeats);
    const SweepResult via_confounder = run_hidden_confounder(cfg);
    REQUIRE(direct.results.size() == 1);
    REQUIRE(via_confounder.results.size() == 1);
    CHECK(direct.results[0].to_json() == via_confounder.results[0].to_json());
}

TEST_CASE("hidden confounder: dropping a mediator still runs and debiasing holds") {
    ExperimentConfig cfg = smoke_config();
    cfg.variants = {"ftu"};
    cfg.confounder_drop = {"education"};
    cfg.bias_beta = 0.6;
    cfg.train.epochs = 6;
    cfg.n_samples = 900;
    const ExperimentResult result = run_experiment(cfg);
    CHECK(result.variants.at("ftu").ftu.mean <= 0.05);
}

TEST_CASE("ablation: cells complete and skipped cells carry reasons") {
    ExperimentConfig cfg = smoke_config();
    cfg.variants = {"ftu"};
    cfg.perturb_modes = {"remove"};
    cfg.perturb_max_count = 1;
    cfg.perturb_seeds = 2;
    cfg.bias_beta = 0.4;
    cfg.train.epochs = 12;
    cfg.n_samples = 900;
    const AblationResult ablation = run_ablation(cfg);
    REQUIRE(ablation.cells.size() == 1);
    CHECK_FALSE(ablation.cells[0].skipped);
    CHECK(ablation.cells[0].result.variants.count("ftu") == 1);
}

TEST_CASE("cli: fit, generate, evaluate round trip") {
    TempDir dir("fairsynth_cli");
    const SemSpec sem = SemSpec::load_file(data_file("credit_sem.json"));
    const Table sample = sem_sample(sem, 600, 21);
    const auto train_csv = (dir.path / "train.csv").string();
    write_csv(sample, train_csv);
    const auto dag_path = data_file("credit_sweep_dag.json");
    const auto model_path = (dir.path / "model.bin").string();
    const auto synth_path = (dir.path / "synth.csv").string();
    const auto report_path = (dir.path / "report.json").string();
    const std::string cli = FAIRSYNTH_CLI_PATH;

    auto run = [](const std::string& cmd) { return std::system(cmd.c_str()); };

    CHECK(run(cli + " fit --data " + train_csv + " --dag " + dag_path + " --out " +
              model_path + " --epochs 6 --seed 3 > /dev/null") == 0);
    CHECK(fs::exists(model_path));

    CHECK(run(cli + " generate --model " + model_path +
              " --n 400 --definition ftu --protected group --target approved --out " +
              synth_path + " --seed 4 > /dev/null") == 0);
    CHECK(fs::exists(synth_path));
    const Table synth = read_csv(synth_path);
    CHECK(synth.rows() == 400);
    CHECK(synth.cols() == 7);

    CHECK(run(cli + " evaluate --real " + train_csv + " --synth " + synth_path +
              " --protected group --target approved --out " + report_path +
              " > /dev/null") == 0);
    std::ifstream report_in(report_path);
    REQUIRE(report_in.good());
    const EvalReport report = EvalReport::from_json(
        std::string((std::istreambuf_iterator<char>(report_in)), {}));
    CHECK(report.n_runs == 1);

    // Bad invocations exit nonzero.
    CHECK(run(cli + " generate --model /nonexistent.bin --n 5 --out /tmp/x.csv 2>/dev/null") !=
          0);
}
