#include <doctest.h>

#include "regsel/dataset.hpp"
#include "regsel/error.hpp"
#include "regsel/table_io.hpp"

#include <random>
#include <set>

using namespace regsel;

namespace {

Schema schema_of(const std::string& text) { return parse_schema(text); }

RawTable table_of(const std::string& csv, const std::string& schema, const std::string& name = "t") {
    return parse_table(csv, schema_of(schema), name);
}

std::vector<std::optional<double>> nums(std::initializer_list<double> v) {
    return {v.begin(), v.end()};
}

}  // namespace

TEST_CASE("load_table: minimal well-formed input") {
    auto t = table_of("ID,x,y\n1,0.5,2\n2,1.5,3\n3,2.5,4\n", "ID\tid\nx\tnumeric\ny\tresponse\n");
    CHECK(t.rows() == 3);
    CHECK(t.predictor_count() == 1);
    CHECK(t.column("x").numbers[1] == doctest::Approx(1.5));
    CHECK(t.id_column().value() == 0);
    CHECK(t.response_column().value() == 2);
}

TEST_CASE("load_table: schema-directed factor column") {
    auto t = table_of("ID,flag,y\n1,0,2\n2,1,3\n3,1,4\n", "ID\tid\nflag\tfactor\ny\tresponse\n");
    CHECK(t.column("flag").role == ColumnRole::factor);
    CHECK(t.column("flag").levels == std::vector<std::string>{"0", "1"});
}

TEST_CASE("load_table: strict numeric column rejects tokens, lenient one maps them to missing") {
    const std::string csv = "ID,x,y\n1,0.5,2\n2,abc,3\n";
    try {
        table_of(csv, "ID\tid\nx\tnumeric\ny\tresponse\n");
        FAIL("expected an error");
    } catch (const DataError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("'x'") != std::string::npos);
        CHECK(msg.find("row 2") != std::string::npos);
    }
    auto t = table_of(csv, "ID\tid\nx\tnumeric\tlenient\ny\tresponse\n");
    CHECK_FALSE(t.column("x").numbers[1].has_value());
}

TEST_CASE("load_table: missing markers, defaults and header errors") {
    auto t = table_of("ID,x,z,y\n1,NA,,2\n2,1,3,3\n", "ID\tid\ny\tresponse\n*\tnumeric\n");
    CHECK(t.column("x").missing_count() == 1);
    CHECK(t.column("z").missing_count() == 1);
    CHECK_THROWS_AS(table_of("ID,x,y\n1,2,3\n", "ID\tid\ny\tresponse\n"), DataError);
    CHECK_THROWS_AS(table_of("ID,x,x\n1,2,3\n", "ID\tid\nx\tnumeric\n"), DataError);
    CHECK_THROWS_AS(table_of("ID,x\n", "ID\tid\nx\tnumeric\n"), DataError);
    CHECK_THROWS_AS(load_table("/nonexistent/file.csv", schema_of("*\tnumeric\n")), DataError);
    CHECK_THROWS_AS(schema_of("x\tweird\n"), DataError);
}

TEST_CASE("load_table: tab delimiter and quoted fields") {
    auto t = parse_table("ID\tlabel\ty\n1\t\"a b\"\t2\n2\tc\t3\n", schema_of("ID\tid\nlabel\tfactor\ny\tresponse\n"), "t",
                         TableFormat{'\t'});
    CHECK(t.column("label").levels == std::vector<std::string>{"a b", "c"});
}

TEST_CASE("drop_sparse_columns uses missing >= ratio * rows") {
    std::vector<std::optional<double>> one_missing(100, 1.0);
    one_missing[7].reset();
    std::vector<std::optional<double>> complete(100, 2.0);
    std::vector<std::optional<std::string>> ids;
    for (int i = 0; i < 100; ++i) ids.emplace_back(std::to_string(i));
    RawTable t("t", {Column::make_labels("ID", ColumnRole::id, ids),
                     Column::make_numeric("sparse", ColumnRole::numeric, one_missing),
                     Column::make_numeric("full", ColumnRole::numeric, complete)});
    auto out = drop_sparse_columns(t, 0.01);
    CHECK_FALSE(out.find("sparse"));
    CHECK(out.find("full"));
    CHECK(out.find("ID"));
    REQUIRE(out.audit().dropped_columns.size() == 1);
    CHECK(out.audit().dropped_columns[0].missing == 1);

    SUBCASE("idempotent") {
        auto twice = drop_sparse_columns(out, 0.01);
        CHECK(twice.cols() == out.cols());
        CHECK(twice.audit().dropped_columns.size() == out.audit().dropped_columns.size());
    }
    SUBCASE("ratio 0 removes every predictor") {
        CHECK_THROWS_WITH_AS(drop_sparse_columns(t, 0.0), doctest::Contains("no predictors remain"), DataError);
    }
    SUBCASE("ratio outside [0, 1]") {
        CHECK_THROWS_AS(drop_sparse_columns(t, 1.5), ArgumentError);
        CHECK_THROWS_AS(drop_sparse_columns(t, -0.1), ArgumentError);
    }
}

TEST_CASE("merge_by_id: inner join sorted by id") {
    auto a = table_of("ID,x\n3,30\n1,10\n2,20\n", "ID\tid\nx\tnumeric\n", "a");
    auto b = table_of("ID,z\n4,400\n2,200\n3,300\n", "ID\tid\nz\tnumeric\n", "b");
    auto m = merge_by_id(a, b);
    CHECK(m.rows() == 2);
    CHECK(*m.column("ID").labels[0] == "2");
    CHECK(*m.column("ID").labels[1] == "3");
    CHECK(*m.column("x").numbers[0] == 20);
    CHECK(*m.column("z").numbers[1] == 300);
    REQUIRE(m.audit().unmatched.size() == 1);
    CHECK(m.audit().unmatched[0].only_left == std::vector<std::string>{"1"});
    CHECK(m.audit().unmatched[0].only_right == std::vector<std::string>{"4"});

    SUBCASE("identity join keeps all rows") {
        auto c = table_of("ID,w\n2,1\n1,2\n3,3\n", "ID\tid\nw\tnumeric\n", "c");
        auto j = merge_by_id(a, c);
        CHECK(j.rows() == 3);
        CHECK(j.cols() == 3);
    }
    SUBCASE("ids sort numerically") {
        auto p = table_of("ID,x\n10,1\n9,2\n100,3\n", "ID\tid\nx\tnumeric\n", "p");
        auto q = table_of("ID,w\n100,1\n10,2\n9,3\n", "ID\tid\nw\tnumeric\n", "q");
        auto j = merge_by_id(p, q);
        CHECK(*j.column("ID").labels[0] == "9");
        CHECK(*j.column("ID").labels[2] == "100");
    }
    SUBCASE("duplicate id") {
        auto d = table_of("ID,w\n7,1\n7,2\n", "ID\tid\nw\tnumeric\n", "d");
        CHECK_THROWS_WITH_AS(merge_by_id(d, b), doctest::Contains("duplicate id '7'"), DataError);
    }
}

TEST_CASE("merge_by_id property: row count bounded and ids ascending") {
    std::mt19937_64 gen(11);
    for (int trial = 0; trial < 20; ++trial) {
        std::uniform_int_distribution<int> id(1, 60);
        auto make = [&](const char* col, const char* name) {
            std::set<int> ids;
            while (ids.size() < 25) ids.insert(id(gen));
            std::vector<int> v(ids.begin(), ids.end());
            std::shuffle(v.begin(), v.end(), gen);
            std::string csv = std::string("ID,") + col + "\n";
            for (int i : v) csv += std::to_string(i) + "," + std::to_string(i * 2) + "\n";
            return table_of(csv, std::string("ID\tid\n") + col + "\tnumeric\n", name);
        };
        auto a = make("x", "a");
        auto b = make("z", "b");
        auto m = merge_by_id(a, b);
        CHECK(m.rows() <= std::min(a.rows(), b.rows()));
        const auto& ids = m.column("ID").labels;
        for (std::size_t i = 1; i < ids.size(); ++i) CHECK(std::stoi(*ids[i - 1]) < std::stoi(*ids[i]));
    }
}

TEST_CASE("drop_incomplete_rows") {
    auto t = table_of("ID,x,y\n1,1,1\n2,2,2\n3,NA,3\n4,4,4\n5,5,5\n", "ID\tid\nx\tnumeric\ny\tresponse\n");
    auto out = drop_incomplete_rows(t);
    CHECK(out.rows() == 4);
    CHECK(out.audit().dropped_rows == std::vector<std::string>{"3"});
    CHECK(drop_incomplete_rows(out).rows() == 4);
    auto bad = table_of("ID,x,y\n1,NA,1\n2,2,NA\n", "ID\tid\nx\tnumeric\ny\tresponse\n");
    CHECK_THROWS_WITH_AS(drop_incomplete_rows(bad), doctest::Contains("empty dataset after NA omission"), DataError);
}

TEST_CASE("coerce_to_factor") {
    auto t = table_of("ID,b,c,w,y\n1,0,0,1,1\n2,1,1,2,2\n3,0,2,3,3\n4,1,0,4,4\n",
                      "ID\tid\nb\tnumeric\nc\tnumeric\nw\tnumeric\ny\tresponse\n");
    SUBCASE("explicit list") {
        auto out = coerce_to_factor(t, std::vector<std::string>{"b"});
        CHECK(out.column("b").role == ColumnRole::factor);
        CHECK(out.column("b").levels == std::vector<std::string>{"0", "1"});
        CHECK(out.column("c").role == ColumnRole::numeric);
        CHECK(out.audit().coerced_factors == std::vector<std::string>{"b"});
    }
    SUBCASE("auto-detect only takes {0,1} columns") {
        auto out = coerce_to_factor(t, AutoDetectBinary{});
        CHECK(out.column("b").role == ColumnRole::factor);
        CHECK(out.column("c").role == ColumnRole::numeric);
        CHECK(out.column("y").role == ColumnRole::response);
    }
    SUBCASE("max_levels guard") {
        std::vector<std::optional<double>> v;
        std::vector<std::optional<std::string>> ids;
        for (int i = 0; i < 20; ++i) {
            v.emplace_back(i);
            ids.emplace_back(std::to_string(i));
        }
        RawTable wide("w", {Column::make_labels("ID", ColumnRole::id, ids), Column::make_numeric("many", ColumnRole::numeric, v)});
        CHECK_THROWS_AS(coerce_to_factor(wide, std::vector<std::string>{"many"}, 12), DataError);
    }
    SUBCASE("numeric levels sort numerically") {
        std::vector<std::optional<double>> v{10, 2, 1, 2};
        std::vector<std::optional<std::string>> ids{"1", "2", "3", "4"};
        RawTable u("u", {Column::make_labels("ID", ColumnRole::id, ids), Column::make_numeric("k", ColumnRole::numeric, v)});
        auto out = coerce_to_factor(u, std::vector<std::string>{"k"});
        CHECK(out.column("k").levels == std::vector<std::string>{"1", "2", "10"});
        CHECK(out.take_rows({0, 1}).column("k").levels == std::vector<std::string>{"2", "10"});
    }
    SUBCASE("unknown or non-numeric column") {
        CHECK_THROWS_AS(coerce_to_factor(t, std::vector<std::string>{"nope"}), DataError);
        CHECK_THROWS_AS(coerce_to_factor(t, std::vector<std::string>{"ID"}), DataError);
    }
}

TEST_CASE("encode_design: treatment coding") {
    SUBCASE("one numeric predictor") {
        auto t = table_of("ID,x,y\n1,0,0\n2,1,1\n3,2,1\n", "ID\tid\nx\tnumeric\ny\tresponse\n");
        auto d = encode_design(t);
        CHECK(d.cols() == 2);
        CHECK(d.x()(2, 1) == 2.0);
        CHECK(d.columns()[0].name == kInterceptName);
        CHECK(d.row_ids() == std::vector<std::string>{"1", "2", "3"});
    }
    SUBCASE("binary factor gives one indicator") {
        auto t = table_of("ID,f,y\n1,0,0\n2,1,1\n3,0,1\n", "ID\tid\nf\tfactor\ny\tresponse\n");
        auto d = encode_design(t);
        REQUIRE(d.cols() == 2);
        CHECK(d.x().col(1) == Eigen::Vector3d(0, 1, 0));
        CHECK(d.columns()[1].name == "f1");
    }
    SUBCASE("six-level factor gives five named indicators") {
        std::string csv = "ID,h_cohort,y\n";
        for (int i = 0; i < 12; ++i) csv += std::to_string(i) + "," + std::to_string(i % 6 + 1) + "," + std::to_string(i) + "\n";
        auto d = encode_design(table_of(csv, "ID\tid\nh_cohort\tfactor\ny\tresponse\n"));
        REQUIRE(d.cols() == 6);
        CHECK(d.terms().size() == 1);
        CHECK(d.terms()[0].columns.size() == 5);
        for (int k = 2; k <= 6; ++k) CHECK(d.columns()[static_cast<std::size_t>(k - 1)].name == "h_cohort" + std::to_string(k));
    }
    SUBCASE("errors") {
        auto single = table_of("ID,f,y\n1,a,0\n2,a,1\n", "ID\tid\nf\tfactor\ny\tresponse\n");
        CHECK_THROWS_WITH_AS(encode_design(single), doctest::Contains("'f'"), DataError);
        auto none = table_of("ID,e,y\n1,3,0\n2,4,1\n", "ID\tid\ne\texclude\ny\tresponse\n");
        CHECK_THROWS_AS(encode_design(none), DataError);
        auto missing = table_of("ID,x,y\n1,NA,0\n2,4,1\n", "ID\tid\nx\tnumeric\ny\tresponse\n");
        CHECK_THROWS_AS(encode_design(missing), DataError);
        auto no_response = table_of("ID,x\n1,1\n2,4\n", "ID\tid\nx\tnumeric\n");
        CHECK_THROWS_AS(encode_design(no_response), DataError);
    }
}

TEST_CASE("encode_design property: width and factor round trip") {
    std::mt19937_64 gen(5);
    for (int trial = 0; trial < 25; ++trial) {
        std::uniform_int_distribution<int> nlev(2, 7);
        std::uniform_int_distribution<int> nnum(0, 4);
        std::uniform_int_distribution<int> nfac(1, 3);
        const int numerics = nnum(gen);
        const int factors = nfac(gen);
        const int n = 40;
        std::string header = "ID";
        std::string schema = "ID\tid\ny\tresponse\n";
        std::vector<int> levels;
        for (int k = 0; k < numerics; ++k) {
            header += ",n" + std::to_string(k);
            schema += "n" + std::to_string(k) + "\tnumeric\n";
        }
        for (int k = 0; k < factors; ++k) {
            header += ",f" + std::to_string(k);
            schema += "f" + std::to_string(k) + "\tfactor\n";
            levels.push_back(nlev(gen));
        }
        header += ",y\n";
        std::string csv = header;
        std::vector<std::vector<std::string>> labels(static_cast<std::size_t>(factors));
        for (int i = 0; i < n; ++i) {
            csv += std::to_string(i);
            for (int k = 0; k < numerics; ++k) csv += "," + std::to_string(std::normal_distribution<>(0, 1)(gen));
            for (int k = 0; k < factors; ++k) {
                // every level appears at least once
                const int l = i < levels[static_cast<std::size_t>(k)] ? i : std::uniform_int_distribution<int>(0, levels[static_cast<std::size_t>(k)] - 1)(gen);
                const std::string lab = std::string(1, static_cast<char>('a' + l));
                labels[static_cast<std::size_t>(k)].push_back(lab);
                csv += "," + lab;
            }
            csv += "," + std::to_string(i) + "\n";
        }
        auto d = encode_design(table_of(csv, schema));
        int expected = 1 + numerics;
        for (int l : levels) expected += l - 1;
        CHECK(d.cols() == expected);
        for (int k = 0; k < factors; ++k) {
            auto t = d.term_index("f" + std::to_string(k));
            REQUIRE(t);
            CHECK(d.decode_factor(*t) == labels[static_cast<std::size_t>(k)]);
        }
    }
}

TEST_CASE("write_table / load_table round trip is exact") {
    auto t = table_of("ID,x,f,y\n1,0.1,a,3.3333333333333335\n2,NA,b,2\n", "ID\tid\nx\tnumeric\tlenient\nf\tfactor\ny\tresponse\n");
    const auto dir = std::filesystem::temp_directory_path() / "regsel_roundtrip";
    write_table(t, dir / "t.csv");
    write_schema(t, dir / "t.schema");
    auto back = load_table(dir / "t.csv", load_schema(dir / "t.schema"));
    REQUIRE(back.cols() == t.cols());
    CHECK(back.column("y").numbers == t.column("y").numbers);
    CHECK(back.column("x").numbers == t.column("x").numbers);
    CHECK(back.column("x").lenient);
    CHECK(back.column("f").labels == t.column("f").labels);
    std::filesystem::remove_all(dir);
}
