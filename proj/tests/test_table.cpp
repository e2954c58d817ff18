#include "fairsynth/table.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "fairsynth/preprocess.hpp"

using namespace fairsynth;

namespace {

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / name;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

}  // namespace

TEST_CASE("table enforces the binary-domain invariant") {
    CHECK_NOTHROW(Table({{"b", ColumnKind::Binary}}, {0.0, 1.0, 1.0}));
    CHECK_THROWS_AS(Table({{"b", ColumnKind::Binary}}, {0.5}), ValidationError);
    CHECK_THROWS_AS(Table({{"a", ColumnKind::Continuous}, {"b", ColumnKind::Continuous}},
                          {1.0, 2.0, 3.0}),
                    ValidationError);  // ragged
}

TEST_CASE("csv read honours schema, order-independent") {
    const auto path = temp_file("fairsynth_tbl.csv");
    write_file(path, "b,a\n1,0.5\n0,1.5\n");
    const std::vector<Column> schema = {{"a", ColumnKind::Continuous},
                                        {"b", ColumnKind::Binary}};
    const Table t = read_csv(path.string(), schema);
    CHECK(t.rows() == 2);
    CHECK(t.at(0, t.column_index("a")) == 0.5);
    CHECK(t.at(0, t.column_index("b")) == 1.0);
}

TEST_CASE("csv errors name the offending cell") {
    const auto path = temp_file("fairsynth_bad.csv");
    const std::vector<Column> schema = {{"a", ColumnKind::Continuous},
                                        {"b", ColumnKind::Continuous}};

    write_file(path, "a,b\n1.0,\n");
    CHECK_THROWS_WITH_AS(read_csv(path.string(), schema),
                         doctest::Contains("missing value at row 1"), ValidationError);

    write_file(path, "a,b\n1.0,zzz\n");
    CHECK_THROWS_WITH_AS(read_csv(path.string(), schema), doctest::Contains("non-numeric"),
                         ValidationError);

    write_file(path, "a,c\n1.0,2.0\n");
    CHECK_THROWS_AS(read_csv(path.string(), schema), ValidationError);

    write_file(path, "a\n1.0\n");
    CHECK_THROWS_AS(read_csv(path.string(), schema), ValidationError);
}

TEST_CASE("csv round trip with kind inference") {
    Table t({{"x", ColumnKind::Continuous}, {"flag", ColumnKind::Binary}},
            {1.25, 1.0, -3.5, 0.0});
    const auto path = temp_file("fairsynth_rt.csv");
    write_csv(t, path.string());
    const Table back = read_csv(path.string());
    CHECK(back.schema()[0].kind == ColumnKind::Continuous);
    CHECK(back.schema()[1].kind == ColumnKind::Binary);
    CHECK(back.at(1, 0) == -3.5);
}

TEST_CASE("select rows and drop column") {
    Table t({{"a", ColumnKind::Continuous}, {"b", ColumnKind::Continuous}},
            {1, 2, 3, 4, 5, 6});
    const Table sel = t.select_rows({2, 0});
    CHECK(sel.at(0, 0) == 5);
    CHECK(sel.at(1, 1) == 2);
    const Table dropped = t.without_column("a");
    CHECK(dropped.cols() == 1);
    CHECK(dropped.at(1, 0) == 4);
    CHECK_THROWS_AS(t.without_column("zz"), ValidationError);
}

TEST_CASE("preprocess standardizes continuous columns exactly") {
    std::vector<double> data;
    for (int i = 0; i < 1000; ++i) {
        data.push_back(5.0 + 2.0 * ((i % 10) - 4.5));  // mean 5, nonzero spread
        data.push_back(i % 2);
    }
    const Table t({{"x", ColumnKind::Continuous}, {"b", ColumnKind::Binary}}, std::move(data));
    const auto [standardized, stats] = preprocess(t);

    CHECK(column_mean(standardized, 0) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(column_stddev(standardized, 0) == doctest::Approx(1.0).epsilon(1e-9));
    // binary untouched
    for (std::size_t r = 0; r < 6; ++r) CHECK(standardized.at(r, 1) == t.at(r, 1));

    const Table restored = stats.invert(standardized);
    for (std::size_t r = 0; r < t.rows(); ++r) {
        CHECK(restored.at(r, 0) == doctest::Approx(t.at(r, 0)).epsilon(1e-9));
    }
}

TEST_CASE("preprocess leaves constant binary columns untouched, rejects degenerate continuous") {
    const Table const_binary({{"b", ColumnKind::Binary}, {"x", ColumnKind::Continuous}},
                             {1, 0.5, 1, 1.5, 1, 2.5});
    const auto [standardized, stats] = preprocess(const_binary);
    CHECK(standardized.at(0, 0) == 1.0);
    CHECK(standardized.at(2, 0) == 1.0);

    const Table degenerate({{"x", ColumnKind::Continuous}}, {2.0, 2.0, 2.0});
    CHECK_THROWS_WITH_AS(preprocess(degenerate), doctest::Contains("degenerate"),
                         ValidationError);
}

TEST_CASE("standardizer json round trip") {
    const Table t({{"x", ColumnKind::Continuous}}, {1.0, 2.0, 3.0, 4.0});
    const Standardizer stats = Standardizer::fit(t);
    const Standardizer back = Standardizer::from_json(stats.to_json());
    CHECK(back.stats()[0].mean == stats.stats()[0].mean);
    CHECK(back.stats()[0].stddev == stats.stats()[0].stddev);
}
