#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "drclab/toml_lite.hpp"

using namespace drclab::toml;

TEST_CASE("parsing") {
    SUBCASE("scalars, tables and comments") {
        const auto doc = parse(
            "# header comment\n"
            "version = 1\n"
            "\n"
            "[model]\n"
            "name = \"scalar\"  # trailing comment\n"
            "rho = 0.5\n"
            "stable = true\n"
            "offset = -3\n"
            "scale = 1e-2\n");
        CHECK(doc.at("version").as_integer() == 1);
        CHECK(doc.at("model.name").as_string() == "scalar");
        CHECK(doc.at("model.rho").as_float() == 0.5);
        CHECK(doc.at("model.stable").as_boolean() == true);
        CHECK(doc.at("model.offset").as_integer() == -3);
        CHECK(doc.at("model.scale").as_float() == 0.01);
    }

    SUBCASE("arrays") {
        const auto doc = parse("xs = [1, 2, 3]\nys = [0.5, 2.0]\nnames = [\"a\", \"b,c\"]\n"
                               "empty = []\ntrailing = [7,]\n");
        REQUIRE(doc.at("xs").as_array().size() == 3);
        CHECK(doc.at("xs").as_array()[2].as_integer() == 3);
        CHECK(doc.at("ys").as_array()[0].as_float() == 0.5);
        CHECK(doc.at("names").as_array()[1].as_string() == "b,c");
        CHECK(doc.at("empty").as_array().empty());
        CHECK(doc.at("trailing").as_array().size() == 1);
    }

    SUBCASE("string escapes") {
        const auto doc = parse("s = \"tab\\there \\\"quoted\\\" back\\\\slash\"\n");
        CHECK(doc.at("s").as_string() == "tab\there \"quoted\" back\\slash");
    }

    SUBCASE("integer widening to float") {
        const auto doc = parse("x = 2\n");
        CHECK(doc.at("x").as_float() == 2.0);
        CHECK_THROWS(doc.at("x").as_string());
    }

    SUBCASE("hash inside a string is not a comment") {
        const auto doc = parse("s = \"a#b\"\n");
        CHECK(doc.at("s").as_string() == "a#b");
    }

    SUBCASE("errors carry the line number") {
        CHECK_THROWS_WITH_AS(parse("x 1\n"), doctest::Contains("line 1"), std::runtime_error);
        CHECK_THROWS_WITH_AS(parse("a = 1\nb = what\n"), doctest::Contains("line 2"),
                             std::runtime_error);
        CHECK_THROWS_AS(parse("x = [1, [2]]\n"), std::runtime_error);
        CHECK_THROWS_WITH_AS(parse("x = 1\nx = 2\n"), doctest::Contains("duplicate"),
                             std::runtime_error);
        CHECK_THROWS_AS(parse("[bad\nx = 1\n"), std::runtime_error);
        CHECK_THROWS_AS(parse("x = \"unterminated\n"), std::runtime_error);
        CHECK_THROWS_AS(parse("9bad! = 1\n"), std::runtime_error);
    }

    SUBCASE("missing key lookup names the key") {
        const auto doc = parse("a = 1\n");
        CHECK_THROWS_WITH_AS(doc.at("b"), doctest::Contains("'b'"), std::out_of_range);
    }
}

TEST_CASE("serialization round-trips") {
    SUBCASE("canonical layout") {
        Document doc;
        doc.set("version", Value::integer(1));
        doc.set("model.rho", Value::real(0.5));
        doc.set("model.name", Value::string("scalar"));
        doc.set("sweep.cases", Value::array({Value::integer(1), Value::integer(2)}));
        const std::string text = serialize(doc);
        CHECK(text.find("version = 1\n") == 0);
        CHECK(text.find("[model]") != std::string::npos);
        CHECK(text.find("[sweep]") != std::string::npos);
        CHECK(parse(text) == doc);
    }

    SUBCASE("floats keep full precision and stay floats") {
        Document doc;
        doc.set("a", Value::real(2.0));
        doc.set("b", Value::real(1.0 / 3.0));
        doc.set("c", Value::real(1e300));
        doc.set("d", Value::real(-0.0));
        const Document back = parse(serialize(doc));
        CHECK(back == doc);
        CHECK(back.at("a").is_float());
        CHECK(back.at("b").as_float() == 1.0 / 3.0);
    }

    SUBCASE("strings with specials survive") {
        Document doc;
        doc.set("s", Value::string("quote \" slash \\ tab \t newline \n end"));
        CHECK(parse(serialize(doc)) == doc);
    }

    SUBCASE("empty and mixed arrays survive") {
        Document doc;
        doc.set("empty", Value::array({}));
        doc.set("vals", Value::array({Value::real(0.25), Value::real(4.0)}));
        CHECK(parse(serialize(doc)) == doc);
    }

    SUBCASE("serialize is deterministic") {
        Document doc;
        doc.set("z.k", Value::integer(1));
        doc.set("a.k", Value::integer(2));
        doc.set("root", Value::boolean(false));
        CHECK(serialize(doc) == serialize(doc));
        const std::string text = serialize(doc);
        CHECK(text.find("root") < text.find("[a]"));
        CHECK(text.find("[a]") < text.find("[z]"));
    }
}
