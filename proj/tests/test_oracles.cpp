#include <catch2/catch_amalgamated.hpp>

#include "balmat/oracles.hpp"

using namespace balmat;

namespace {
OracleInstance k2_two_tokens() {
    OracleInstance inst{complete(2), {{0, 1}}, {2, 0}, 0b11, 0b10};
    return inst;
}
}  // namespace

TEST_CASE("joint occupancy of two stacked tokens is dominated by the product") {
    // both tokens start on node 0; after one matched round they sit on
    // different nodes, so they can never both be on node 1
    NaOracleResult r = na_oracle(k2_two_tokens());
    CHECK(r.joint == Rational(0));
    CHECK(r.product == Rational(1, 4));
    CHECK(r.pass);
}

TEST_CASE("singleton subsets make the joint equal the marginal") {
    OracleInstance inst = k2_two_tokens();
    inst.token_set = 0b01;
    NaOracleResult r = na_oracle(inst);
    CHECK(r.joint == r.product);
    CHECK(r.pass);
}

TEST_CASE("the full node set is a certain event") {
    OracleInstance inst = k2_two_tokens();
    inst.node_set = 0b11;
    NaOracleResult r = na_oracle(inst);
    CHECK(r.joint == Rational(1));
    CHECK(r.product == Rational(1));
    CHECK(r.pass);
}

TEST_CASE("token location law equals the window product row") {
    SECTION("one matched round on two nodes") {
        OracleInstance inst{complete(2), {{0, 1}}, {1, 0}, 0b1, 0b1};
        WalkLawResult r = walk_law_oracle(inst, 0);
        CHECK(r.equal);
        CHECK(r.distribution[0] == Rational(1, 2));
        CHECK(r.distribution[1] == Rational(1, 2));
    }
    SECTION("no rounds leave the unit vector") {
        OracleInstance inst{complete(2), {}, {1, 0}, 0b1, 0b1};
        WalkLawResult r = walk_law_oracle(inst, 0);
        CHECK(r.equal);
        CHECK(r.distribution[0] == Rational(1));
        CHECK(r.distribution[1] == Rational(0));
    }
    SECTION("two rounds on a path") {
        Graph p3(3, {{0, 1}, {1, 2}});
        OracleInstance inst{p3, {{0, 1}, {1, 2}}, {1, 0, 0}, 0b1, 0b1};
        WalkLawResult r = walk_law_oracle(inst, 0);
        CHECK(r.equal);
        CHECK(r.distribution[0] == Rational(1, 2));
        CHECK(r.distribution[1] == Rational(1, 4));
        CHECK(r.distribution[2] == Rational(1, 4));
    }
}

TEST_CASE("oversized instances are rejected") {
    CHECK_THROWS_WITH(na_oracle(OracleInstance{complete(2), {}, {6, 0}, 1, 1}),
                      Catch::Matchers::ContainsSubstring("5 tokens"));
    CHECK_THROWS_WITH(
        na_oracle(OracleInstance{complete(2),
                                 {{0, 1}, {0, 1}, {0, 1}, {0, 1}, {0, 1}},
                                 {1, 0},
                                 1,
                                 1}),
        Catch::Matchers::ContainsSubstring("4 single-edge rounds"));
    CHECK_THROWS_WITH(na_oracle(OracleInstance{complete(6), {}, {1, 0, 0, 0, 0, 0}, 1, 1}),
                      Catch::Matchers::ContainsSubstring("5 nodes"));
    CHECK_THROWS_AS(walk_law_oracle(k2_two_tokens(), 5), Error);
}

TEST_CASE("reduced exhaustive family passes exactly") {
    FamilyCheckResult r = exhaustive_family_check(3, 2, 3);
    // 1 two-node graph x 3 sequences x 9 placements, plus the three labeled
    // paths (15 sequences each) and the triangle (13) x 19 placements
    CHECK(r.instances == 673);
    CHECK(r.na_failures == 0);
    CHECK(r.walk_failures == 0);
}

TEST_CASE("instances at the type limits enumerate fine") {
    // five nodes, five tokens, four single-edge rounds
    Graph g = cycle(5);
    OracleInstance inst{g, {{0, 1}, {1, 2}, {2, 3}, {3, 4}}, {3, 2, 0, 0, 0}, 0b10011,
                        0b01101};
    NaOracleResult r = na_oracle(inst);
    CHECK(r.pass);
    CHECK(r.joint >= Rational(0));
    CHECK(r.product <= Rational(1));
    for (int tok = 0; tok < 5; ++tok) CHECK(walk_law_oracle(inst, tok).equal);
}

TEST_CASE("the product bound is attainable, so the inequality has teeth") {
    // two sibling pairs: a process that shared one swap coin across levels
    // would put both left tokens on the right with probability 1/2, above
    // the product bound 1/4 that independent level coins achieve exactly
    Graph k2 = complete(2);
    OracleInstance inst{k2, {{0, 1}}, {2, 2}, 0b0011, 0b10};
    NaOracleResult r = na_oracle(inst);
    CHECK(r.product == Rational(1, 4));
    CHECK(r.joint == Rational(1, 4));  // independent coins attain the bound
    CHECK(Rational(1, 2) > r.product);  // the correlated variant would fail
}

TEST_CASE("an implementation that raised heights would fail the oracle") {
    // sanity check of the oracle's teeth: the product bound for two tokens
    // meeting on a shared destination is strictly positive, while the exact
    // joint stays below it on an example where both could collide
    Graph p3(3, {{0, 1}, {1, 2}});
    OracleInstance inst{p3, {{0, 1}, {1, 2}}, {1, 1, 0}, 0b11, 0b100};
    NaOracleResult r = na_oracle(inst);
    CHECK(r.product > Rational(0));
    CHECK(r.joint <= r.product);
    CHECK(r.pass);
}
