#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "nnbound/oracle.hpp"
#include "nnbound/shallow.hpp"

using namespace nnbound;
using fixtures::vec;

namespace {

ShallowReluProblem direct_query() {
    ShallowReluProblem p;
    p.box_lower = vec({-1, -1, -1});
    p.box_upper = vec({1, 1, 1});
    p.linear = vec({0, 0, 0});
    p.constant = 2.4;
    p.terms = {{2.0, vec({1, -1, 0}), 0.0}, {0.2, vec({0, 0, 1}), 0.0}};
    p.sense = Sense::Maximize;
    return p;
}

}  // namespace

TEST_CASE("solve_shallow on the fixtures") {
    auto e2 = solve_shallow(fixtures::layer2_error_fixture());
    CHECK(e2.status == OptStatus::Optimal);
    CHECK(e2.certified_bound == doctest::Approx(0.4).epsilon(1e-8));
    CHECK(e2.incumbent_value == doctest::Approx(0.4).epsilon(1e-8));

    auto et = solve_shallow(fixtures::detached_fixture());
    CHECK(et.status == OptStatus::Optimal);
    CHECK(et.certified_bound == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(et.incumbent_point(0) == doctest::Approx(-1.0));

    auto d = solve_shallow(direct_query());
    CHECK(d.status == OptStatus::Optimal);
    CHECK(d.certified_bound == doctest::Approx(6.6).epsilon(1e-8));
    CHECK(direct_query().evaluate(d.incumbent_point) == doctest::Approx(6.6));

    ShallowReluProblem stable;
    stable.box_lower = vec({1});
    stable.box_upper = vec({2});
    stable.linear = vec({0});
    stable.terms = {{1.0, vec({1}), 0.0}};
    stable.sense = Sense::Maximize;
    CHECK(solve_shallow(stable).certified_bound == doctest::Approx(2.0));

    ShallowReluProblem sum;
    sum.box_lower = vec({-1, -1});
    sum.box_upper = vec({1, 1});
    sum.linear = vec({0, 0});
    sum.terms = {{1.0, vec({1, 1}), 0.0}, {1.0, vec({1, -1}), 0.0}};
    CHECK(solve_shallow(sum).certified_bound == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("zero-term problem equals the box LP") {
    ShallowReluProblem p;
    p.box_lower = vec({-1, 0, 2});
    p.box_upper = vec({1, 3, 4});
    p.linear = vec({2, -1, 0.5});
    p.constant = 0.25;
    p.sense = Sense::Maximize;
    LinearProgram lp;
    lp.objective = p.linear;
    lp.constant = p.constant;
    lp.sense = p.sense;
    lp.lower = p.box_lower;
    lp.upper = p.box_upper;
    auto want = solve_lp(lp).value;
    CHECK(solve_shallow(p).certified_bound == doctest::Approx(want));
    CHECK(enumerate_shallow(p) == doctest::Approx(want));
}

TEST_CASE("solve_shallow matches phase enumeration on random problems") {
    std::mt19937_64 rng(2024);
    for (int it = 0; it < 120; ++it) {
        auto p = fixtures::random_shallow(rng, 5, 8);
        auto r = solve_shallow(p);
        REQUIRE(r.status == OptStatus::Optimal);
        double want = enumerate_shallow(p);
        CHECK(r.certified_bound == doctest::Approx(want).epsilon(1e-8).scale(1.0));
        // the incumbent is a real point in the box with the reported value
        CHECK(((r.incumbent_point.array() >= p.box_lower.array() - 1e-9) &&
               (r.incumbent_point.array() <= p.box_upper.array() + 1e-9))
                  .all());
        CHECK(p.evaluate(r.incumbent_point) == doctest::Approx(r.incumbent_value).epsilon(1e-9));
        if (p.sense == Sense::Minimize) CHECK(r.incumbent_value >= r.certified_bound - 1e-9);
        else CHECK(r.incumbent_value <= r.certified_bound + 1e-9);
    }
}

TEST_CASE("budget exhaustion keeps a certified bound") {
    std::mt19937_64 rng(7);
    int exhausted = 0;
    for (int it = 0; it < 60; ++it) {
        auto p = fixtures::random_shallow(rng, 6, 12);
        MipOptions opt;
        opt.max_nodes = 1;
        auto r = solve_shallow(p, opt);
        double truth = enumerate_shallow(p);
        if (r.status == OptStatus::BudgetExhausted) ++exhausted;
        if (p.sense == Sense::Minimize) CHECK(r.certified_bound <= truth + 1e-8);
        else CHECK(r.certified_bound >= truth - 1e-8);
    }
    CHECK(exhausted > 0);

    MipOptions zero;
    zero.budget = std::chrono::milliseconds(0);
    auto r = solve_shallow(fixtures::layer2_error_fixture(), zero);
    CHECK(r.certified_bound <= 0.4 + 1e-8);
}

TEST_CASE("solve_shallow is deterministic") {
    std::mt19937_64 rng(11);
    for (int it = 0; it < 20; ++it) {
        auto p = fixtures::random_shallow(rng, 6, 10);
        auto a = solve_shallow(p), b = solve_shallow(p);
        CHECK(a.certified_bound == b.certified_bound);
        CHECK(a.incumbent_value == b.incumbent_value);
        CHECK(a.incumbent_point == b.incumbent_point);
        CHECK(a.nodes_explored == b.nodes_explored);
    }
}

TEST_CASE("folded and validate") {
    auto p = fixtures::detached_fixture();
    p.terms.push_back({0.0, vec({1, 1}), 0.0});
    p.terms.push_back({-2.0, vec({0, 0}), 1.5});
    auto f = p.folded();
    CHECK(f.terms.size() == 2);
    CHECK(f.constant == doctest::Approx(2.0 - 3.0));
    CHECK(solve_shallow(p).certified_bound == doctest::Approx(-2.0));

    auto bad = fixtures::detached_fixture();
    bad.terms[0].coeffs = vec({1});
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    auto crossed = fixtures::detached_fixture();
    crossed.box_lower(0) = 2.0;
    CHECK_THROWS_AS(crossed.validate(), std::invalid_argument);
}

TEST_CASE("argument_range") {
    auto p = fixtures::layer2_error_fixture();
    auto [l, u] = p.argument_range(1);
    CHECK(l == doctest::Approx(-2.0));
    CHECK(u == doctest::Approx(3.0));
}
