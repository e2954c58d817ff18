#pragma once

#include <string>
#include <vector>

#include "fairsynth/table.hpp"

namespace fairsynth {

struct ColumnStats {
    std::string name;
    ColumnKind kind = ColumnKind::Continuous;
    double mean = 0.0;
    double stddev = 1.0;
};

/// Column-wise standardization: continuous columns to zero mean / unit
/// variance, binary columns untouched. Stats are recorded for inversion.
class Standardizer {
public:
    Standardizer() = default;
    explicit Standardizer(std::vector<ColumnStats> stats);

    /// Throws on zero-variance continuous columns (degenerate column).
    static Standardizer fit(const Table& table);

    /// Identity transform carrying only the schema (used when a model works
    /// in raw space).
    static Standardizer identity(const std::vector<Column>& schema);

    Table apply(const Table& table) const;
    Table invert(const Table& table) const;
    double standardize(std::size_t col, double value) const;
    double destandardize(std::size_t col, double value) const;

    const std::vector<ColumnStats>& stats() const { return stats_; }
    std::vector<Column> schema() const;

    static Standardizer from_json(const std::string& text);
    std::string to_json() const;

private:
    std::vector<ColumnStats> stats_;
};

/// Standardizes and returns the transform; load-time missing values are a
/// Table-construction concern, so this only guards against degenerate
/// continuous columns.
std::pair<Table, Standardizer> preprocess(const Table& table);

}  // namespace fairsynth
