#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "tceforge/date.hpp"
#include "tceforge/rng.hpp"
#include "tceforge/text.hpp"

using namespace tceforge;

TEST_CASE("date parse and format round-trip") {
    const auto d = Date::parse("2019-04-17");
    CHECK(d.to_string() == "2019-04-17");
    CHECK(Date::parse("2019-04-18") - d == 1);
    CHECK(d.plus_days(14).to_string() == "2019-05-01");
}

TEST_CASE("date rejects malformed input") {
    CHECK_THROWS_AS(Date::parse("2019/04/17"), ParseError);
    CHECK_THROWS_AS(Date::parse("2019-13-01"), ParseError);
    CHECK_THROWS_AS(Date::parse("19-04-17"), ParseError);
}

TEST_CASE("sentence splitting keeps content") {
    const auto parts = text::split_sentences("One ends here. Two! Is three? tail");
    REQUIRE(parts.size() == 4);
    CHECK(parts[0] == "One ends here.");
    CHECK(parts[1] == "Two!");
    CHECK(parts[2] == "Is three?");
    CHECK(parts[3] == "tail");
}

TEST_CASE("normalize_whitespace collapses runs") {
    CHECK(text::normalize_whitespace("  a\t b\n\nc ") == "a b c");
}

TEST_CASE("metric tokens strip edge punctuation and lowercase") {
    const auto toks = text::metric_tokens("The cat, sat -- down.");
    REQUIRE(toks.size() == 4);
    CHECK(toks[0] == "the");
    CHECK(toks[1] == "cat");
    CHECK(toks[3] == "down");
}

TEST_CASE("contains_word_ci matches standalone words only") {
    CHECK(text::contains_word_ci("happens Before 2019", "before"));
    CHECK_FALSE(text::contains_word_ci("the border accord", "before"));
}

TEST_CASE("seeded rng streams are reproducible") {
    SeededRng a(123), b(123);
    for (int i = 0; i < 100; ++i) CHECK(a.below(1000) == b.below(1000));

    std::vector<int> v1{1, 2, 3, 4, 5}, v2{1, 2, 3, 4, 5};
    SeededRng s1(9), s2(9);
    s1.shuffle(v1);
    s2.shuffle(v2);
    CHECK(v1 == v2);
}
