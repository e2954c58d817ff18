#include "fairsynth/preprocess.hpp"

#include "json.hpp"

namespace fairsynth {

using json = nlohmann::json;

Standardizer::Standardizer(std::vector<ColumnStats> stats) : stats_(std::move(stats)) {}

Standardizer Standardizer::fit(const Table& table) {
    std::vector<ColumnStats> stats;
    stats.reserve(table.cols());
    for (std::size_t c = 0; c < table.cols(); ++c) {
        const Column& col = table.schema()[c];
        ColumnStats s{col.name, col.kind, 0.0, 1.0};
        if (col.kind == ColumnKind::Continuous) {
            s.mean = column_mean(table, c);
            s.stddev = column_stddev(table, c);
            if (s.stddev <= 0.0) {
                throw ValidationError("degenerate column '" + col.name +
                                      "': zero variance in continuous column");
            }
        }
        stats.push_back(s);
    }
    return Standardizer(std::move(stats));
}

Standardizer Standardizer::identity(const std::vector<Column>& schema) {
    std::vector<ColumnStats> stats;
    for (const auto& col : schema) stats.push_back({col.name, col.kind, 0.0, 1.0});
    return Standardizer(std::move(stats));
}

double Standardizer::standardize(std::size_t col, double value) const {
    const ColumnStats& s = stats_[col];
    if (s.kind == ColumnKind::Binary) return value;
    return (value - s.mean) / s.stddev;
}

double Standardizer::destandardize(std::size_t col, double value) const {
    const ColumnStats& s = stats_[col];
    if (s.kind == ColumnKind::Binary) return value;
    return value * s.stddev + s.mean;
}

namespace {

Table transform(const Table& table, const Standardizer& std, bool forward) {
    std::vector<double> data;
    data.reserve(table.rows() * table.cols());
    for (std::size_t r = 0; r < table.rows(); ++r) {
        for (std::size_t c = 0; c < table.cols(); ++c) {
            data.push_back(forward ? std.standardize(c, table.at(r, c))
                                   : std.destandardize(c, table.at(r, c)));
        }
    }
    return Table(table.schema(), std::move(data));
}

}  // namespace

Table Standardizer::apply(const Table& table) const {
    if (table.cols() != stats_.size()) {
        throw ValidationError("standardizer width does not match table width");
    }
    return transform(table, *this, true);
}

Table Standardizer::invert(const Table& table) const {
    if (table.cols() != stats_.size()) {
        throw ValidationError("standardizer width does not match table width");
    }
    return transform(table, *this, false);
}

std::vector<Column> Standardizer::schema() const {
    std::vector<Column> out;
    for (const auto& s : stats_) out.push_back({s.name, s.kind});
    return out;
}

Standardizer Standardizer::from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw IoError(std::string("invalid standardizer JSON: ") + e.what());
    }
    std::vector<ColumnStats> stats;
    for (const auto& s : doc.at("columns")) {
        stats.push_back({s.at("name").get<std::string>(),
                         column_kind_from_string(s.at("kind").get<std::string>()),
                         s.at("mean").get<double>(), s.at("stddev").get<double>()});
    }
    return Standardizer(std::move(stats));
}

std::string Standardizer::to_json() const {
    json cols = json::array();
    for (const auto& s : stats_) {
        cols.push_back({{"name", s.name},
                        {"kind", to_string(s.kind)},
                        {"mean", s.mean},
                        {"stddev", s.stddev}});
    }
    return json{{"columns", cols}}.dump();
}

std::pair<Table, Standardizer> preprocess(const Table& table) {
    Standardizer std = Standardizer::fit(table);
    return {std.apply(table), std};
}

}  // namespace fairsynth
