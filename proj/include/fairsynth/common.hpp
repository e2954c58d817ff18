#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace fairsynth {

enum class ColumnKind { Continuous, Binary };

std::string to_string(ColumnKind kind);
ColumnKind column_kind_from_string(const std::string& text);

/// Ordered (parent, child) pair.
using Edge = std::pair<std::string, std::string>;

struct ValidationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// File sections disagree with each other (e.g. stored hashes differ).
struct IntegrityError : IoError {
    using IoError::IoError;
};

struct CycleError : ValidationError {
    explicit CycleError(std::vector<std::string> cycle_nodes);
    std::vector<std::string> cycle;
};

struct InfeasiblePerturbationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TrainingDivergedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Deterministically derives an independent stream seed from (seed, tag).
uint64_t mix_seed(uint64_t seed, std::string_view tag);
uint64_t mix_seed(uint64_t seed, std::string_view tag, uint64_t extra);

/// FNV-1a over a byte string; used for config fingerprints and file section hashes.
uint64_t fnv1a64(std::string_view bytes);

}  // namespace fairsynth
