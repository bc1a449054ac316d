#include <catch2/catch_amalgamated.hpp>

#include "balmat/metrics.hpp"
#include "balmat/process.hpp"

using namespace balmat;

namespace {
LoadVector lv(std::vector<std::int64_t> v) { return LoadVector(std::move(v)); }
}  // namespace

TEST_CASE("load vectors validate on construction") {
    CHECK_THROWS_AS(lv({3, -1}), Error);
    CHECK(lv({7, 2}).total() == 9);
    CHECK(lv({7, 2}).disc() == 5);
    // totals must stay clear of intermediate-sum overflow
    std::int64_t big = std::int64_t{1} << 61;
    CHECK_THROWS_AS(lv({big, big}), Error);
    CHECK(lv({big - 1, 0}).total() == big - 1);
}

TEST_CASE("standard step splits a matched pair") {
    Matching m{1, {{0, 1}}};

    SECTION("odd sums put the extra token on a uniform side") {
        int ceil_low_id = 0;
        for (int seed = 0; seed < 4000; ++seed) {
            LoadVector x = lv({7, 2});
            CounterRng rng(static_cast<std::uint64_t>(seed));
            step_standard(x, m, rng);
            REQUIRE(x.total() == 9);
            bool low = x.x[0] == 5 && x.x[1] == 4;
            bool high = x.x[0] == 4 && x.x[1] == 5;
            REQUIRE((low || high));
            ceil_low_id += low;
        }
        double f = ceil_low_id / 4000.0;
        CHECK_THAT(f, Catch::Matchers::WithinAbs(0.5, 3 * 0.5 / 63.2));  // 3 sigma
    }
    SECTION("even sums split deterministically with zero error") {
        LoadVector x = lv({6, 2});
        RoundingTrace trace;
        CounterRng rng(1);
        step_standard(x, m, rng, false, &trace);
        CHECK(x.x[0] == 4);
        CHECK(x.x[1] == 4);
        REQUIRE(trace.entries.size() == 1);
        CHECK(!trace.entries[0].odd);
    }
    SECTION("a single excess token moves or stays") {
        bool saw_stay = false, saw_move = false;
        for (int seed = 0; seed < 64; ++seed) {
            LoadVector x = lv({0, 1});
            CounterRng rng(static_cast<std::uint64_t>(seed));
            step_standard(x, m, rng);
            if (x.x[0] == 1) saw_move = true;
            if (x.x[1] == 1) saw_stay = true;
        }
        CHECK(saw_stay);
        CHECK(saw_move);
    }
    SECTION("out-of-range matchings are rejected") {
        LoadVector x = lv({1, 1});
        Matching bad{1, {{0, 7}}};
        CounterRng rng(1);
        CHECK_THROWS_AS(step_standard(x, bad, rng), Error);
    }
}

TEST_CASE("continuous step moves pairs to their mean") {
    std::vector<double> xi{7, 2};
    step_continuous(xi, Matching{1, {{0, 1}}});
    CHECK(xi[0] == 4.5);
    CHECK(xi[1] == 4.5);
    std::vector<double> same{3, 9};
    step_continuous(same, Matching{1, {}});
    CHECK(same == std::vector<double>{3, 9});
}

TEST_CASE("continuous totals drift below 1e-9 over many rounds") {
    Graph g = torus(3, 4);
    RandomMatchingSchedule schedule(g, 13);
    std::vector<double> xi(12);
    for (std::size_t i = 0; i < xi.size(); ++i) xi[i] = static_cast<double>(i) * 7.25;
    const double total = std::accumulate(xi.begin(), xi.end(), 0.0);
    std::vector<double> end = run_continuous<double>(xi, schedule, 100000);
    CHECK_THAT(std::accumulate(end.begin(), end.end(), 0.0),
               Catch::Matchers::WithinAbs(total, 1e-9));
}

TEST_CASE("moving step reproduces the canonical configuration") {
    // seven tokens on the left node, two on the right; the top three cross
    // and keep their order, landing at heights 3..5
    TokenState s = TokenState::from_loads(lv({7, 2}));
    auto [hi, lo] = height_moving_step(s, 0, 1);
    CHECK(hi == 0);
    CHECK(lo == 1);
    CHECK(s.stacks[0] == std::vector<int>{0, 1, 2, 3});
    CHECK(s.stacks[1] == std::vector<int>{7, 8, 4, 5, 6});
    for (int tok : {4, 5, 6}) CHECK(s.location[static_cast<std::size_t>(tok)] == 1);
    CHECK(s.height[4] == 3);
    CHECK(s.height[5] == 4);
    CHECK(s.height[6] == 5);
    s.validate();
}

TEST_CASE("height step behavior on small cases") {
    SECTION("equal loads only shuffle") {
        bool swapped = false, kept = false;
        for (int seed = 0; seed < 64; ++seed) {
            TokenState s = TokenState::from_loads(lv({1, 1}));
            CounterRng rng(static_cast<std::uint64_t>(seed));
            step_height(s, Matching{1, {{0, 1}}}, rng);
            s.validate();
            REQUIRE(s.loads().x == std::vector<std::int64_t>{1, 1});
            (s.location[0] == 0 ? kept : swapped) = true;
        }
        CHECK(swapped);
        CHECK(kept);
    }
    SECTION("two stacked tokens spread to one each") {
        bool orders[2] = {false, false};
        for (int seed = 0; seed < 64; ++seed) {
            TokenState s = TokenState::from_loads(lv({2, 0}));
            CounterRng rng(static_cast<std::uint64_t>(seed));
            step_height(s, Matching{1, {{0, 1}}}, rng);
            s.validate();
            REQUIRE(s.loads().x == std::vector<std::int64_t>{1, 1});
            CHECK(s.height[0] == 1);
            CHECK(s.height[1] == 1);
            orders[s.location[0]] = true;
        }
        CHECK(orders[0]);  // tokens can stay put
        CHECK(orders[1]);  // or swap sides
    }
    SECTION("ties send nothing and keep loads") {
        TokenState s = TokenState::from_loads(lv({3, 3}));
        CounterRng rng(9);
        step_height(s, Matching{1, {{0, 1}}}, rng);
        CHECK(s.loads().x == std::vector<std::int64_t>{3, 3});
    }
}

TEST_CASE("height runs keep exact token-state invariants") {
    Graph g = cycle(5);
    RandomMatchingSchedule schedule(g, 4);
    TokenState s0 = TokenState::from_loads(lv({9, 0, 3, 1, 0}));
    CounterRng rng(11);
    std::vector<int> prev = s0.height;
    run_height(s0, schedule, 50, rng, [&](long, const TokenState& s) {
        s.validate();
        CHECK(s.loads().total() == 13);
        for (std::size_t i = 0; i < s.height.size(); ++i) {
            CHECK(s.height[i] <= prev[i]);
        }
        prev = s.height;
    });
}

TEST_CASE("runs with zero rounds return the initial state") {
    Graph k2 = complete(2);
    CircuitSchedule s(k2, edge_color(k2));
    CounterRng rng(1);
    LoadVector x = run_standard(lv({7, 2}), s, 0, rng);
    CHECK(x.x == std::vector<std::int64_t>{7, 2});
    CHECK_THROWS_AS(run_standard(lv({7, 2}), s, -1, rng), Error);
}

TEST_CASE("standard runs conserve the total") {
    Graph k2 = complete(2);
    CircuitSchedule s(k2, edge_color(k2));
    CounterRng rng(123);
    run_standard(lv({7, 2}), s, 25, rng, [&](long, const LoadVector& x) {
        CHECK(x.total() == 9);
    });
}

TEST_CASE("flip-coupled runs mirror each other exactly") {
    Graph g = cycle(4);
    RandomMatchingSchedule schedule(g, 5);

    SECTION("mirror identity at every round") {
        CoupledFlipRun runs = coupled_flip_run(lv({4, 0, 3, 1}), 4, schedule, 30, 17);
        REQUIRE(runs.original.size() == 31);
        for (std::size_t r = 0; r < runs.original.size(); ++r)
            for (int u = 0; u < 4; ++u)
                CHECK(runs.flipped[r].x[static_cast<std::size_t>(u)] ==
                      4 - runs.original[r].x[static_cast<std::size_t>(u)]);
    }
    SECTION("the uniform vector is a fixed point") {
        CoupledFlipRun runs = coupled_flip_run(lv({2, 2, 2, 2}), 4, schedule, 10, 17);
        for (const auto& x : runs.original) CHECK(x.x == std::vector<std::int64_t>{2, 2, 2, 2});
        for (const auto& x : runs.flipped) CHECK(x.x == std::vector<std::int64_t>{2, 2, 2, 2});
    }
    SECTION("zero rounds mirror the initial vector") {
        CoupledFlipRun runs = coupled_flip_run(lv({4, 0, 3, 1}), 5, schedule, 0, 17);
        CHECK(runs.flipped[0].x == std::vector<std::int64_t>{1, 5, 2, 4});
    }
    SECTION("K below the maximum load is rejected") {
        CHECK_THROWS_AS(coupled_flip_run(lv({4, 0, 3, 1}), 3, schedule, 1, 17), Error);
    }
}

TEST_CASE("rounding-error decomposition") {
    SECTION("even-only trajectories have zero on both sides") {
        Graph k2 = complete(2);
        CircuitSchedule s(k2, edge_color(k2));
        RoundingTrace trace;
        CounterRng rng(3);
        run_standard(lv({6, 2}), s, 1, rng, {}, &trace);
        auto sides = reconstruct_from_errors<double>(lv({6, 2}), s, trace, 1);
        CHECK(sides.lhs == std::vector<double>{0, 0});
        CHECK(sides.rhs == std::vector<double>{0, 0});
    }
    SECTION("a single odd round matches the hand computation") {
        Graph k2 = complete(2);
        CircuitSchedule s(k2, edge_color(k2));
        RoundingTrace trace;
        CounterRng rng(3);
        run_standard(lv({0, 1}), s, 1, rng, {}, &trace);
        REQUIRE(trace.entries.size() == 1);
        double e = trace.entries[0].phi * 0.5;
        auto sides = reconstruct_from_errors<double>(lv({0, 1}), s, trace, 1);
        CHECK_THAT(sides.lhs[0], Catch::Matchers::WithinAbs(e, 1e-15));
        CHECK_THAT(sides.lhs[1], Catch::Matchers::WithinAbs(-e, 1e-15));
        CHECK(sides.max_residual() < 1e-15);
    }
    SECTION("exact equality on a four-node run") {
        Graph g = cycle(4);
        RandomMatchingSchedule schedule(g, 8);
        RoundingTrace trace;
        CounterRng rng(19);
        LoadVector x0 = lv({13, 0, 5, 2});
        run_standard(x0, schedule, 10, rng, {}, &trace);
        auto sides = reconstruct_from_errors<Rational>(x0, schedule, trace, 10);
        CHECK(sides.max_residual() == Rational(0));
    }
    SECTION("mismatched schedules are rejected") {
        Graph g = cycle(4);
        RandomMatchingSchedule a(g, 8), b(g, 9);
        RoundingTrace trace;
        CounterRng rng(19);
        run_standard(lv({13, 0, 5, 2}), a, 10, rng, {}, &trace);
        bool differs = false;
        for (long r = 1; r <= 10 && !differs; ++r)
            differs = a.matching_at(r).pairs != b.matching_at(r).pairs;
        REQUIRE(differs);
        CHECK_THROWS_AS(reconstruct_from_errors<double>(lv({13, 0, 5, 2}), b, trace, 10),
                        Error);
    }
}

TEST_CASE("trace serializes round, endpoints and orientation") {
    Graph k2 = complete(2);
    CircuitSchedule s(k2, edge_color(k2));
    RoundingTrace trace;
    CounterRng rng(3);
    run_standard(lv({0, 1}), s, 2, rng, {}, &trace);
    nlohmann::json j = trace.to_json();
    REQUIRE(j.is_array());
    REQUIRE(j.size() == 2);
    for (const auto& e : j) {
        CHECK(e.contains("round"));
        CHECK(e.contains("u"));
        CHECK(e.contains("v"));
        CHECK(e.contains("phi"));
    }
}

TEST_CASE("metrics are exact") {
    CHECK(metrics(lv({5, 2, 2, 3})).disc == 3);
    CHECK(above_average(lv({4, 0, 0, 0})).value() == 3.0);
    CHECK(y_at_level(lv({3, 1, 0}), 2) == 1);
    CHECK(metrics(lv({3, 1, 0}), 2).y_at_level == 1);
    // shift invariance of the discrepancy
    CHECK(metrics(lv({15, 12, 12, 13})).disc == 3);
    // y_at_level is non-increasing in the level
    LoadVector x = lv({9, 4, 0, 2});
    for (std::int64_t level = 0; level < 9; ++level)
        CHECK(y_at_level(x, level + 1) <= y_at_level(x, level));
    CHECK(ceil_average(lv({4, 0, 0, 0})) == 1);
    CHECK(ceil_average(lv({5, 0, 0, 0})) == 2);
}
