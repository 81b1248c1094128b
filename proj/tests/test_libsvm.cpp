#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "a2bcd/libsvm.hpp"

using namespace a2bcd;

namespace {

LabeledDataset parse_text(const std::string& text, std::optional<std::size_t> dim = std::nullopt) {
    std::istringstream in(text);
    return parse_libsvm(in, dim);
}

}  // namespace

TEST_CASE("libsvm parsing") {
    SECTION("basic line") {
        const auto data = parse_text("1 3:0.5 7:1.25\n");
        REQUIRE(data.labels == std::vector<double>{1.0});
        REQUIRE(data.features.rows() == 7);
        REQUIRE(data.features.cols() == 1);
        REQUIRE(data.features.nnz() == 2);
        REQUIRE(data.features.row_index(0) == 2);
        REQUIRE(data.features.value(0) == 0.5);
        REQUIRE(data.features.row_index(1) == 6);
        REQUIRE(data.features.value(1) == 1.25);
    }

    SECTION("blank lines and comments are skipped") {
        const auto data = parse_text("# header comment\n\n-1 1:2.0  # trailing\n\n+1 2:3.5\n");
        REQUIRE(data.labels == std::vector<double>{-1.0, 1.0});
        REQUIRE(data.features.cols() == 2);
        REQUIRE(data.features.nnz() == 2);
    }

    SECTION("label-only samples give empty columns") {
        const auto data = parse_text("5.5\n1 2:1\n");
        REQUIRE(data.labels.size() == 2);
        REQUIRE(data.features.col_begin(0) == data.features.col_end(0));
    }

    SECTION("non-ascending index reports the line") {
        try {
            parse_text("1 3:0.5 2:1\n");
            FAIL("expected a parse error");
        } catch (const ParseError& e) {
            REQUIRE(std::string(e.what()).find("non-ascending index") != std::string::npos);
            REQUIRE(e.line_number == 1);
        }
        REQUIRE_THROWS_AS(parse_text("1 2:1\n-1 4:1 4:2\n"), ParseError);  // duplicate = non-ascending
    }

    SECTION("index below one") {
        REQUIRE_THROWS_AS(parse_text("1 0:0.5\n"), ParseError);
    }

    SECTION("malformed tokens carry line numbers") {
        try {
            parse_text("1 2:1\nbad 1:1\n");
            FAIL("expected a parse error");
        } catch (const ParseError& e) {
            REQUIRE(e.line_number == 2);
        }
        REQUIRE_THROWS_AS(parse_text("1 x:1\n"), ParseError);
        REQUIRE_THROWS_AS(parse_text("1 2:abc\n"), ParseError);
        REQUIRE_THROWS_AS(parse_text("1 23\n"), ParseError);  // missing colon
    }

    SECTION("dimension override") {
        const auto data = parse_text("1 3:1\n", 300);
        REQUIRE(data.features.rows() == 300);
        REQUIRE_THROWS_AS(parse_text("1 3:1\n", 2), std::invalid_argument);
    }
}

TEST_CASE("libsvm round trip preserves numeric content") {
    const std::string text =
        "1 1:0.12345678901234567 5:-3.25 9:1e-17\n"
        "-1 2:4.0\n"
        "0.5\n";
    const auto first = parse_text(text);
    std::ostringstream out;
    serialize_libsvm(first, out);
    const auto second = parse_text(out.str());

    REQUIRE(second.labels == first.labels);
    REQUIRE(second.features.cols() == first.features.cols());
    REQUIRE(second.features.nnz() == first.features.nnz());
    for (std::size_t c = 0; c < first.features.cols(); ++c) {
        REQUIRE(second.features.col_begin(c) == first.features.col_begin(c));
        for (std::size_t t = first.features.col_begin(c); t < first.features.col_end(c); ++t) {
            REQUIRE(second.features.row_index(t) == first.features.row_index(t));
            REQUIRE(second.features.value(t) == first.features.value(t));  // bitwise
        }
    }
}
