#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <stdexcept>

#include "drclab/csv.hpp"

using namespace drclab::csv;

TEST_CASE("table building and serialization") {
    Table table;
    table.columns = {"t", "value", "label"};
    table.add_row({"1", "0.5", "plain"});
    table.add_row({"2", "-3", "with,comma"});
    table.add_row({"3", "nan", "with \"quote\""});

    SUBCASE("width mismatches are rejected") {
        CHECK_THROWS_AS(table.add_row({"1", "2"}), std::invalid_argument);
    }

    SUBCASE("quoting only where needed") {
        const std::string text = table.serialize();
        CHECK(text.find("1,0.5,plain\n") != std::string::npos);
        CHECK(text.find("\"with,comma\"") != std::string::npos);
        CHECK(text.find("\"with \"\"quote\"\"\"") != std::string::npos);
    }

    SUBCASE("round-trip") {
        const Table back = parse(table.serialize());
        CHECK(back.columns == table.columns);
        CHECK(back.rows == table.rows);
    }

    SUBCASE("newline inside a quoted cell") {
        Table t2;
        t2.columns = {"a"};
        t2.add_row({"line1\nline2"});
        const Table back = parse(t2.serialize());
        CHECK(back.rows[0][0] == "line1\nline2");
    }
}

TEST_CASE("numeric cells are canonical") {
    CHECK(cell(0.5) == "0.5");
    CHECK(cell(static_cast<long long>(-7)) == "-7");
    CHECK(cell(static_cast<unsigned long long>(18446744073709551615ull)) ==
          "18446744073709551615");
    // 17 significant digits reproduce the double exactly
    const double v = 0.1 + 0.2;
    CHECK(std::stod(cell(v)) == v);
    CHECK(cell(v) == cell(v));
}

TEST_CASE("parsing errors") {
    CHECK_THROWS_AS(parse(""), std::runtime_error);
    CHECK_THROWS_AS(parse("a,b\n1\n"), std::runtime_error);
    CHECK_THROWS_AS(parse("a\n\"unterminated\n"), std::runtime_error);
}

TEST_CASE("schema validation") {
    const std::vector<ColumnSpec> schema{{"t", ColumnKind::Integer},
                                         {"regret", ColumnKind::Real},
                                         {"label", ColumnKind::Text}};
    Table good;
    good.columns = {"t", "regret", "label"};
    good.add_row({"1", "2.5", "anything"});
    good.add_row({"-2", "nan", ""});
    good.add_row({"3", "1e-9", "x,y"});
    CHECK(validate_schema(good, schema).empty());

    SUBCASE("wrong header") {
        Table bad = good;
        bad.columns[1] = "Regret";
        const std::string msg = validate_schema(bad, schema);
        CHECK(!msg.empty());
        CHECK(msg.find("Regret") != std::string::npos);
    }
    SUBCASE("wrong column count") {
        Table bad;
        bad.columns = {"t", "regret"};
        CHECK(!validate_schema(bad, schema).empty());
    }
    SUBCASE("non-integer in an integer column") {
        Table bad = good;
        bad.rows[0][0] = "1.5";
        const std::string msg = validate_schema(bad, schema);
        CHECK(msg.find("'t'") != std::string::npos);
    }
    SUBCASE("non-number in a real column") {
        Table bad = good;
        bad.rows[1][1] = "oops";
        CHECK(!validate_schema(bad, schema).empty());
    }
}
