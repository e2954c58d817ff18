#include "fairsynth/table.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace fairsynth {

namespace {

bool is_binary_value(double v) { return v == 0.0 || v == 1.0; }

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.push_back("");
    return cells;
}

std::string trimmed(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    auto e = s.find_last_not_of(" \t\r");
    if (b == std::string::npos) return "";
    return s.substr(b, e - b + 1);
}

}  // namespace

Table::Table(std::vector<Column> schema, std::vector<double> data)
    : schema_(std::move(schema)), data_(std::move(data)) {
    if (schema_.empty()) throw ValidationError("table schema must be non-empty");
    if (data_.size() % schema_.size() != 0) {
        throw ValidationError("table data size is not a multiple of the schema width");
    }
    validate();
}

Table Table::empty_like(const std::vector<Column>& schema) { return Table(schema, {}); }

void Table::validate() const {
    for (std::size_t c = 0; c < cols(); ++c) {
        if (schema_[c].kind != ColumnKind::Binary) continue;
        for (std::size_t r = 0; r < rows(); ++r) {
            if (!is_binary_value(at(r, c))) {
                throw ValidationError("binary column '" + schema_[c].name +
                                      "' holds non-binary value at row " + std::to_string(r));
            }
        }
    }
}

bool Table::has_column(const std::string& name) const {
    return std::any_of(schema_.begin(), schema_.end(),
                       [&](const Column& c) { return c.name == name; });
}

std::size_t Table::column_index(const std::string& name) const {
    for (std::size_t i = 0; i < schema_.size(); ++i) {
        if (schema_[i].name == name) return i;
    }
    throw ValidationError("unknown column '" + name + "'");
}

std::vector<double> Table::column(const std::string& name) const {
    return column(column_index(name));
}

std::vector<double> Table::column(std::size_t index) const {
    std::vector<double> out(rows());
    for (std::size_t r = 0; r < rows(); ++r) out[r] = at(r, index);
    return out;
}

void Table::append_row(std::span<const double> values) {
    if (values.size() != cols()) {
        throw ValidationError("row width " + std::to_string(values.size()) +
                              " does not match schema width " + std::to_string(cols()));
    }
    data_.insert(data_.end(), values.begin(), values.end());
}

Table Table::without_column(const std::string& name) const {
    const std::size_t drop = column_index(name);
    std::vector<Column> schema;
    for (std::size_t c = 0; c < cols(); ++c) {
        if (c != drop) schema.push_back(schema_[c]);
    }
    std::vector<double> data;
    data.reserve(rows() * schema.size());
    for (std::size_t r = 0; r < rows(); ++r) {
        for (std::size_t c = 0; c < cols(); ++c) {
            if (c != drop) data.push_back(at(r, c));
        }
    }
    return Table(std::move(schema), std::move(data));
}

Table Table::select_rows(const std::vector<std::size_t>& indices) const {
    std::vector<double> data;
    data.reserve(indices.size() * cols());
    for (std::size_t r : indices) {
        if (r >= rows()) throw ValidationError("row index out of range");
        auto row_span = row(r);
        data.insert(data.end(), row_span.begin(), row_span.end());
    }
    return Table(schema_, std::move(data));
}

namespace {

Table read_csv_impl(const std::string& path, const std::vector<Column>* schema) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open CSV file '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw IoError("CSV file '" + path + "' is empty");

    std::vector<std::string> header;
    for (const auto& cell : split_csv_line(line)) header.push_back(trimmed(cell));

    std::vector<std::size_t> dest(header.size());
    std::vector<Column> out_schema;
    if (schema) {
        if (header.size() != schema->size()) {
            throw ValidationError("CSV header has " + std::to_string(header.size()) +
                                  " columns, schema expects " + std::to_string(schema->size()));
        }
        for (std::size_t h = 0; h < header.size(); ++h) {
            auto it = std::find_if(schema->begin(), schema->end(),
                                   [&](const Column& c) { return c.name == header[h]; });
            if (it == schema->end()) {
                throw ValidationError("CSV column '" + header[h] + "' not in expected schema");
            }
            dest[h] = static_cast<std::size_t>(it - schema->begin());
        }
        out_schema = *schema;
    } else {
        for (std::size_t h = 0; h < header.size(); ++h) {
            if (header[h].empty()) throw ValidationError("CSV header has an empty column name");
            dest[h] = h;
            out_schema.push_back({header[h], ColumnKind::Continuous});
        }
    }

    std::vector<double> data;
    std::size_t row_number = 0;
    std::vector<double> row(out_schema.size());
    while (std::getline(in, line)) {
        ++row_number;
        if (trimmed(line).empty()) continue;
        auto cells = split_csv_line(line);
        if (cells.size() != header.size()) {
            throw ValidationError("row " + std::to_string(row_number) + " has " +
                                  std::to_string(cells.size()) + " cells, expected " +
                                  std::to_string(header.size()));
        }
        for (std::size_t h = 0; h < cells.size(); ++h) {
            const std::string cell = trimmed(cells[h]);
            if (cell.empty()) {
                throw ValidationError("missing value at row " + std::to_string(row_number) +
                                      ", column '" + header[h] + "'");
            }
            double value = 0.0;
            const char* begin = cell.data();
            const char* end = begin + cell.size();
            auto [ptr, ec] = std::from_chars(begin, end, value);
            if (ec != std::errc{} || ptr != end) {
                throw ValidationError("non-numeric cell '" + cell + "' at row " +
                                      std::to_string(row_number) + ", column '" + header[h] +
                                      "'");
            }
            row[dest[h]] = value;
        }
        data.insert(data.end(), row.begin(), row.end());
    }

    if (!schema) {
        // Infer binary columns.
        const std::size_t n = out_schema.empty() ? 0 : data.size() / out_schema.size();
        for (std::size_t c = 0; c < out_schema.size(); ++c) {
            bool binary = n > 0;
            for (std::size_t r = 0; r < n && binary; ++r) {
                binary = is_binary_value(data[r * out_schema.size() + c]);
            }
            out_schema[c].kind = binary ? ColumnKind::Binary : ColumnKind::Continuous;
        }
    }
    return Table(std::move(out_schema), std::move(data));
}

}  // namespace

Table read_csv(const std::string& path, const std::vector<Column>& schema) {
    return read_csv_impl(path, &schema);
}

Table read_csv(const std::string& path) { return read_csv_impl(path, nullptr); }

void write_csv(const Table& table, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write CSV file '" + path + "'");
    for (std::size_t c = 0; c < table.cols(); ++c) {
        out << table.schema()[c].name << (c + 1 < table.cols() ? "," : "\n");
    }
    char buf[40];
    for (std::size_t r = 0; r < table.rows(); ++r) {
        for (std::size_t c = 0; c < table.cols(); ++c) {
            std::snprintf(buf, sizeof(buf), "%.17g", table.at(r, c));
            out << buf << (c + 1 < table.cols() ? "," : "\n");
        }
    }
}

double column_mean(const Table& table, std::size_t col) {
    double sum = 0.0;
    for (std::size_t r = 0; r < table.rows(); ++r) sum += table.at(r, col);
    return table.rows() ? sum / static_cast<double>(table.rows()) : 0.0;
}

double column_stddev(const Table& table, std::size_t col) {
    const double mu = column_mean(table, col);
    double ss = 0.0;
    for (std::size_t r = 0; r < table.rows(); ++r) {
        const double d = table.at(r, col) - mu;
        ss += d * d;
    }
    return table.rows() ? std::sqrt(ss / static_cast<double>(table.rows())) : 0.0;
}

double column_correlation(const Table& table, std::size_t a, std::size_t b) {
    const double ma = column_mean(table, a);
    const double mb = column_mean(table, b);
    double saa = 0.0, sbb = 0.0, sab = 0.0;
    for (std::size_t r = 0; r < table.rows(); ++r) {
        const double da = table.at(r, a) - ma;
        const double db = table.at(r, b) - mb;
        saa += da * da;
        sbb += db * db;
        sab += da * db;
    }
    const double denom = std::sqrt(saa * sbb);
    return denom > 0.0 ? sab / denom : 0.0;
}

}  // namespace fairsynth
