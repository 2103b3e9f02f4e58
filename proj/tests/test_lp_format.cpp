#include <algorithm>

#include "doctest.h"
#include "fixtures.hpp"
#include "nnbound/lp_format.hpp"
#include "nnbound/network.hpp"

using namespace nnbound;
using fixtures::vec;

TEST_CASE("export of the detached-bound problem") {
    const auto text = export_lp_text(fixtures::detached_fixture());
    auto m = parse_lp_text(text);
    CHECK(m.sense == Sense::Minimize);
    CHECK(m.binaries.size() == 2);
    CHECK(m.rows.size() == 8);
    auto aux = std::count_if(m.variables.begin(), m.variables.end(),
                             [](const std::string& v) { return v.front() == 'y'; });
    CHECK(aux == 2);
    CHECK(m.objective_constant == 2.0);
    CHECK(m.bounds_of("v0") == std::make_pair(-1.0, 1.0));
    CHECK(m.bounds_of("z1") == std::make_pair(0.0, 1.0));
    auto v = solve_milp_by_enumeration(m);
    REQUIRE(v);
    CHECK(*v == doctest::Approx(1.0).epsilon(1e-9));
    for (const char* section : {"Minimize", "Subject To", "Bounds", "Binary", "End"})
        CHECK(text.find(section) != std::string::npos);
}

TEST_CASE("export of the second-layer error term") {
    auto m = parse_lp_text(export_lp_text(fixtures::layer2_error_fixture()));
    CHECK(m.binaries.size() == 3);
    auto v = solve_milp_by_enumeration(m);
    REQUIRE(v);
    CHECK(*v == doctest::Approx(0.4).epsilon(1e-9));
}

TEST_CASE("zero-term problem exports only the objective and the box") {
    ShallowReluProblem p;
    p.box_lower = vec({-1, 0});
    p.box_upper = vec({1, 2});
    p.linear = vec({0.1, -3});
    p.sense = Sense::Maximize;
    const auto text = export_lp_text(p);
    auto m = parse_lp_text(text);
    CHECK(m.sense == Sense::Maximize);
    CHECK(m.rows.empty());
    CHECK(m.binaries.empty());
    CHECK(m.objective.at("v0") == 0.1);
    CHECK(*solve_milp_by_enumeration(m) == doctest::Approx(0.1));
}

TEST_CASE("numbers survive the round trip") {
    auto p = fixtures::detached_fixture();
    p.linear(0) = 0.1 + 0.2;
    p.terms[0].coeffs(1) = 1.0 / 3.0;
    auto m = parse_lp_text(export_lp_text(p));
    CHECK(m.objective.at("v0") == p.linear(0));
    CHECK(m.rows[1].coeffs.at("v1") == -p.terms[0].coeffs(1));
}

TEST_CASE("parser accepts common spellings and rejects malformed input") {
    auto m = parse_lp_text("\\ comment\nmaximize\n obj: 2 x + y\nsubject to\n c1: x + y =< 3\n c2: x - y = 1\n"
                           "bounds\n 0 <= x <= 10\n y <= 4\n -inf <= w <= +inf\n z free\nend\n");
    CHECK(m.sense == Sense::Maximize);
    CHECK(m.rows.size() == 2);
    CHECK(m.rows[1].relation == Relation::Equal);
    CHECK(m.bounds_of("y") == std::make_pair(0.0, 4.0));
    CHECK(std::isinf(m.bounds_of("z").first));
    CHECK(*solve_milp_by_enumeration(parse_lp_text("max\n obj: 2 x + y\nst\n x + y <= 3\n x - y = 1\n"
                                                   "bounds\n 0 <= x <= 10\n 0 <= y <= 4\nend\n")) ==
          doctest::Approx(5.0));

    CHECK_THROWS_AS(parse_lp_text("Minimize\n obj: x\nSubject To\n c: x + <= 2\nEnd\n"), ParseError);
    CHECK_THROWS_AS(parse_lp_text(" obj: x\nEnd\n"), ParseError);
    CHECK_THROWS_AS(parse_lp_text("Minimize\n obj: x\nSubject To\n c: x 3\nEnd\n"), ParseError);
    try {
        parse_lp_text("Minimize\n obj: x\nSubject To\n c: x ?? 2\nEnd\n");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("line 4") != std::string::npos);
    }
    CHECK_THROWS(solve_milp_by_enumeration(parse_lp_text("Minimize\n obj: x\nBounds\n x free\nEnd\n")));
}
