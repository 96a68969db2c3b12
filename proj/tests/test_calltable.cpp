#include "doctest.h"
#include "vuldet/calltable.hpp"

using namespace vuldet::dataflow;

TEST_CASE("call table parses names, directions and wildcards") {
    CallTable t = CallTable::parse(
        "# comment\n"
        "recv\tF\n"
        "strcpy\tB\n"
        "istream.read*\tF\n"
        "_snprintf*\tB\n",
        "<mem>");
    CHECK(t.size() == 4);
    CHECK(t.match("recv") == CallDirection::Forward);
    CHECK(t.match("strcpy") == CallDirection::Backward);
    CHECK_FALSE(t.match("my_helper").has_value());
    SUBCASE("prefix wildcard") {
        CHECK(t.match("_snprintf_s") == CallDirection::Backward);
        CHECK_FALSE(t.match("_snprintx").has_value());
    }
    SUBCASE("dotted entries match member calls by method") {
        CHECK(t.match_member("in", "readsome") == CallDirection::Forward);
        CHECK_FALSE(t.match("readsome").has_value());
        // plain entries also match member calls by method name
        CHECK(t.match_member("obj", "strcpy") == CallDirection::Backward);
    }
    SUBCASE("contains_name covers dotted methods for the symbolizer") {
        CHECK(t.contains_name("strcpy"));
        CHECK(t.contains_name("readsome"));
        CHECK_FALSE(t.contains_name("buf"));
    }
}

TEST_CASE("bundled tables carry the expected entry counts") {
    auto cwe119 = CallTable::load(std::string(VULDET_DATA_DIR) +
                                  "/call_tables/cwe119.txt");
    auto cwe399 = CallTable::load(std::string(VULDET_DATA_DIR) +
                                  "/call_tables/cwe399.txt");
    CHECK(cwe119.size() == 124);
    CHECK(cwe399.size() == 16);
    CHECK(cwe119.match("strcpy") == CallDirection::Backward);
    CHECK(cwe119.match("recv") == CallDirection::Forward);
    CHECK(cwe399.match("free") == CallDirection::Backward);
    CHECK(cwe399.match("new") == CallDirection::Backward);
}

TEST_CASE("merge deduplicates shared entries") {
    CallTable a = CallTable::parse("malloc\tB\nfree\tB\n", "<a>");
    CallTable b = CallTable::parse("malloc\tB\nrecv\tF\n", "<b>");
    a.merge(b);
    CHECK(a.size() == 3);
}
