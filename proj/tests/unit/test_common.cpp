#include <cmath>
#include <limits>

#include "doctest.h"
#include "social/common.hpp"

using namespace social;

TEST_SUITE("common") {

TEST_CASE("text helpers") {
    CHECK(to_lower("HeLLo") == "hello");
    CHECK(trim("  a b \n\t") == "a b");
    CHECK(trim("   ").empty());
    CHECK(starts_with_icase("Answer: x", "answer:"));
    CHECK_FALSE(starts_with_icase("An", "answer"));
    CHECK(contains_icase("What is the WEATHER like", "weather"));
    CHECK_FALSE(contains_icase("abc", "abd"));
}

TEST_CASE("utf8 prefix never splits a code point") {
    const std::string s = "a\xC3\xA9z";  // a é z
    CHECK(utf8_prefix(s, 1) == "a");
    CHECK(utf8_prefix(s, 2) == "a");
    CHECK(utf8_prefix(s, 3) == "a\xC3\xA9");
    CHECK(utf8_prefix(s, 100) == s);
}

TEST_CASE("utf8 offsets") {
    const std::string s = "a\xC3\xA9\xE2\x82\xAC";  // a é €
    const auto off = utf8_offsets(s);
    REQUIRE(off.size() == 4);
    CHECK(off[0] == 0);
    CHECK(off[1] == 1);
    CHECK(off[2] == 3);
    CHECK(off[3] == 6);
    CHECK(is_valid_utf8(s));
    CHECK_FALSE(is_valid_utf8("\xC3"));
    CHECK_FALSE(is_valid_utf8("\xFF"));
    CHECK_THROWS_AS(utf8_offsets("\xC3("), ValidationError);
}

TEST_CASE("format_double round-trips") {
    for (double v : {0.0, 1.0, -0.5, 0.1, 1.0 / 3.0, 1e-300, 123456789.125, -0.047007}) {
        CHECK(std::stod(format_double(v)) == v);
    }
    CHECK(format_fixed(0.5, 2) == "0.50");
    CHECK(format_fixed(-1.0 / 3.0, 6) == "-0.333333");
}

TEST_CASE("manual clock only moves when told") {
    ManualClock c(100.0);
    CHECK(to_epoch_seconds(c.now()) == 100.0);
    c.advance(Seconds{2.5});
    CHECK(to_epoch_seconds(c.now()) == 102.5);
    c.set(from_epoch_seconds(7.0));
    CHECK(to_epoch_seconds(c.now()) == 7.0);
}

}
