#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "fairsynth/dag.hpp"
#include "fairsynth/generator.hpp"
#include "fairsynth/table.hpp"

namespace fairsynth {

struct TrainConfig {
    int epochs = 50;
    double learning_rate = 0.001;
    int discriminator_steps = 10;  // discriminator updates per generator update
    int hidden_layers = 2;
    int hidden_width = 0;          // 0 = twice the column count
    int batch_size = 64;
    double l2_weight = 1e-4;       // regularization loss weight, both networks
    uint64_t seed = 0;

    void validate() const;

    static TrainConfig from_json(const std::string& text);
    std::string to_json() const;
};

/// Adversarial fit of the sequential generator against a whole-row
/// discriminator. Alternates `discriminator_steps` discriminator updates per
/// generator update; the generator minimizes the non-saturating loss
/// -log D(fake), the discriminator maximizes log D(real) + log(1 - D(fake)).
/// Deterministic under config.seed; never mutates `data`.
///
/// Each epoch's mean losses go to `train_log` (one JSON object per line) when
/// given. Throws TrainingDivergedError if the discriminator loss stays
/// collapsed for a full epoch.
GeneratorModel fit(const Table& data, const CausalDag& dag, const TrainConfig& config,
                   std::ostream* train_log = nullptr);

}  // namespace fairsynth
