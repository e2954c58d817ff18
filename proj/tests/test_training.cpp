#include "fairsynth/training.hpp"

#include <cmath>
#include <sstream>

#include "doctest.h"
#include "fairsynth/sem.hpp"
#include "oracles.hpp"

using namespace fairsynth;

namespace {

SemSpec two_node_sem() {
    CausalDag dag({{"A", ColumnKind::Continuous}, {"Y", ColumnKind::Continuous}},
                  {{"A", "Y"}});
    std::map<std::string, Mechanism> mechanisms;
    mechanisms["A"] = {Mechanism::Type::Linear, {}, 1.0, 1.0};
    mechanisms["Y"] = {Mechanism::Type::Linear, {{"A", 1.0}}, 0.0, 0.3};
    return SemSpec(std::move(dag), std::move(mechanisms));
}

}  // namespace

TEST_CASE("train config validation") {
    TrainConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.discriminator_steps = 0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg = TrainConfig{};
    cfg.learning_rate = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg = TrainConfig{};
    cfg.epochs = -1;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
}

TEST_CASE("fit rejects schema mismatches") {
    const SemSpec sem = two_node_sem();
    const Table data = sem_sample(sem, 200, 1);
    TrainConfig cfg;
    cfg.epochs = 0;

    CausalDag extra({{"A", ColumnKind::Continuous},
                     {"Y", ColumnKind::Continuous},
                     {"Z", ColumnKind::Continuous}},
                    {{"A", "Y"}});
    CHECK_THROWS_WITH_AS(fit(data, extra, cfg), doctest::Contains("missing from the data"),
                         ValidationError);

    const Table widened(
        {{"A", ColumnKind::Continuous}, {"Y", ColumnKind::Continuous},
         {"W", ColumnKind::Continuous}},
        [&] {
            std::vector<double> values;
            for (std::size_t r = 0; r < data.rows(); ++r) {
                values.push_back(data.at(r, 0));
                values.push_back(data.at(r, 1));
                values.push_back(0.5);
            }
            return values;
        }());
    CHECK_THROWS_WITH_AS(fit(widened, sem.dag, cfg), doctest::Contains("not a DAG node"),
                         ValidationError);
}

TEST_CASE("zero-epoch fit returns a usable initialized model") {
    const SemSpec sem = two_node_sem();
    const Table data = sem_sample(sem, 500, 2);
    TrainConfig cfg;
    cfg.epochs = 0;
    const GeneratorModel model = fit(data, sem.dag, cfg);
    const Table synth = model.generate(100, {}, {}, 3);
    CHECK(synth.rows() == 100);
    CHECK(synth.cols() == 2);
}

TEST_CASE("fit does not mutate the input table") {
    const SemSpec sem = two_node_sem();
    const Table data = sem_sample(sem, 400, 3);
    const Table snapshot = data;
    TrainConfig cfg;
    cfg.epochs = 2;
    fit(data, sem.dag, cfg);
    CHECK(data == snapshot);
}

TEST_CASE("fixed seed fixes the whole trajectory") {
    const SemSpec sem = two_node_sem();
    const Table data = sem_sample(sem, 600, 4);
    TrainConfig cfg;
    cfg.epochs = 3;
    cfg.seed = 99;
    const GeneratorModel m1 = fit(data, sem.dag, cfg);
    const GeneratorModel m2 = fit(data, sem.dag, cfg);
    CHECK(m1.weights_hash() == m2.weights_hash());
    cfg.seed = 100;
    const GeneratorModel m3 = fit(data, sem.dag, cfg);
    CHECK(m1.weights_hash() != m3.weights_hash());
}

TEST_CASE("training log emits one json line per epoch") {
    const SemSpec sem = two_node_sem();
    const Table data = sem_sample(sem, 300, 5);
    TrainConfig cfg;
    cfg.epochs = 4;
    std::ostringstream log;
    fit(data, sem.dag, cfg, &log);
    std::istringstream lines(log.str());
    std::string line;
    int count = 0;
    while (std::getline(lines, line)) {
        CHECK(line.find("\"epoch\":") != std::string::npos);
        CHECK(line.find("\"d_loss\":") != std::string::npos);
        CHECK(line.find("\"g_loss\":") != std::string::npos);
        CHECK(line.find("\"wall_ms\":") != std::string::npos);
        ++count;
    }
    CHECK(count == 4);
}

TEST_CASE("trained 2-node model reproduces marginals and correlation") {
    const SemSpec sem = two_node_sem();
    const Table data = sem_sample(sem, 5000, 6);
    TrainConfig cfg;
    cfg.epochs = 50;
    cfg.seed = 7;
    const GeneratorModel model = fit(data, sem.dag, cfg);
    const Table synth = model.generate(5000, {}, {}, 8);

    for (std::size_t c = 0; c < 2; ++c) {
        CHECK(std::abs(column_mean(synth, c) - column_mean(data, c)) < 0.1);
        CHECK(std::abs(column_stddev(synth, c) - column_stddev(data, c)) < 0.1);
    }
    const double real_corr = column_correlation(data, 0, 1);
    const double synth_corr = column_correlation(synth, 0, 1);
    CHECK(std::abs(real_corr - synth_corr) < 0.15);
}
