#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fairsynth/common.hpp"

namespace fairsynth {

struct Column {
    std::string name;
    ColumnKind kind = ColumnKind::Continuous;

    bool operator==(const Column& o) const { return name == o.name && kind == o.kind; }
};

/// Row-major numeric table with a typed schema. Binary columns may only hold
/// 0 or 1; that invariant is enforced on construction and CSV load.
class Table {
public:
    Table() = default;
    Table(std::vector<Column> schema, std::vector<double> data);

    static Table empty_like(const std::vector<Column>& schema);

    std::size_t rows() const { return schema_.empty() ? 0 : data_.size() / schema_.size(); }
    std::size_t cols() const { return schema_.size(); }
    const std::vector<Column>& schema() const { return schema_; }

    double at(std::size_t row, std::size_t col) const { return data_[row * cols() + col]; }
    double& at(std::size_t row, std::size_t col) { return data_[row * cols() + col]; }
    std::span<const double> row(std::size_t r) const {
        return {data_.data() + r * cols(), cols()};
    }

    bool has_column(const std::string& name) const;
    std::size_t column_index(const std::string& name) const;  // throws ValidationError
    std::vector<double> column(const std::string& name) const;
    std::vector<double> column(std::size_t index) const;

    void append_row(std::span<const double> values);

    Table without_column(const std::string& name) const;
    Table select_rows(const std::vector<std::size_t>& indices) const;

    /// Re-checks the binary-domain invariant (useful after in-place edits).
    void validate() const;

    bool operator==(const Table& o) const { return schema_ == o.schema_ && data_ == o.data_; }

private:
    std::vector<Column> schema_;
    std::vector<double> data_;
};

/// Reads a header CSV against an expected schema. Columns may appear in any
/// order but must match the schema set exactly; empty cells and non-numeric
/// cells are load errors naming the row and column.
Table read_csv(const std::string& path, const std::vector<Column>& schema);

/// Reads a header CSV, inferring every column's kind (binary iff all values
/// are 0/1).
Table read_csv(const std::string& path);

void write_csv(const Table& table, const std::string& path);

double column_mean(const Table& table, std::size_t col);
double column_stddev(const Table& table, std::size_t col);  // population
double column_correlation(const Table& table, std::size_t a, std::size_t b);

}  // namespace fairsynth
