#include <catch2/catch_amalgamated.hpp>

#include "balmat/graph.hpp"

using namespace balmat;

TEST_CASE("named families have the expected shape") {
    Graph h3 = hypercube(3);
    CHECK(h3.node_count() == 8);
    CHECK(h3.edge_count() == 12);
    CHECK(h3.max_degree() == 3);

    Graph c4 = cycle(4);
    CHECK(c4.node_count() == 4);
    CHECK(c4.edge_count() == 4);
    CHECK(c4.max_degree() == 2);

    Graph k2 = complete(2);
    CHECK(k2.edge_count() == 1);
    CHECK(k2.edges() == std::vector<Edge>{{0, 1}});

    Graph t34 = torus(3, 4);
    CHECK(t34.node_count() == 12);
    CHECK(t34.edge_count() == 24);
    CHECK(t34.max_degree() == 4);
}

TEST_CASE("infeasible family parameters are rejected by name") {
    CHECK_THROWS_AS(cycle(2), Error);
    CHECK_THROWS_AS(torus(2, 5), Error);
    CHECK_THROWS_AS(complete(1), Error);
    CHECK_THROWS_AS(hypercube(0), Error);
    CHECK_THROWS_WITH(random_regular(5, 3, 1), Catch::Matchers::ContainsSubstring("even"));
    CHECK_THROWS_WITH(random_regular(4, 4, 1), Catch::Matchers::ContainsSubstring("d < n"));
}

TEST_CASE("random regular graphs are d-regular, connected, seed-deterministic") {
    Graph g = random_regular(14, 3, 7);
    for (int u = 0; u < g.node_count(); ++u) CHECK(g.degree(u) == 3);
    CHECK(save_graph(random_regular(14, 3, 7)) == save_graph(g));
    CHECK(save_graph(random_regular(14, 3, 8)) != save_graph(g));
    // heavier degree, the regime a one-shot pairing would essentially never hit
    Graph dense = random_regular(64, 8, 3);
    for (int u = 0; u < dense.node_count(); ++u) CHECK(dense.degree(u) == 8);
}

TEST_CASE("edge list parsing round-trips and reports line numbers") {
    CHECK(save_graph(load_graph("2 1\n0 1\n")) == "2 1\n0 1\n");
    Graph p3 = load_graph("3 2\n0 1\n1 2\n");
    CHECK(p3.edge_count() == 2);
    CHECK(p3.degree(1) == 2);

    CHECK_THROWS_WITH(load_graph("4 2\n0 1\n2 3\n"),
                      Catch::Matchers::ContainsSubstring("not connected"));
    CHECK_THROWS_WITH(load_graph("3 2\n0 1\n1 5\n"),
                      Catch::Matchers::ContainsSubstring("line 3"));
    CHECK_THROWS_WITH(load_graph("3 3\n0 1\n1 2\n0 1\n"),
                      Catch::Matchers::ContainsSubstring("line 4"));
    CHECK_THROWS_WITH(load_graph("2 1\n1 0\n"),
                      Catch::Matchers::ContainsSubstring("u < v"));
    CHECK_THROWS_AS(load_graph(""), Error);
}

TEST_CASE("save produces the canonical sorted form") {
    Graph g(3, {{1, 2}, {0, 2}, {0, 1}});
    CHECK(save_graph(g) == "3 3\n0 1\n0 2\n1 2\n");
}

TEST_CASE("graph construction rejects bad edge sets") {
    CHECK_THROWS_WITH((Graph(3, {{0, 0}, {0, 1}, {1, 2}})),
                      Catch::Matchers::ContainsSubstring("self-loop"));
    CHECK_THROWS_WITH((Graph(3, {{0, 1}, {0, 1}, {1, 2}})),
                      Catch::Matchers::ContainsSubstring("duplicate"));
    CHECK_THROWS_WITH((Graph(4, {{0, 1}, {2, 3}})),
                      Catch::Matchers::ContainsSubstring("not connected"));
    CHECK_THROWS_WITH((Graph(2, {{0, 5}})),
                      Catch::Matchers::ContainsSubstring("out of range"));
}

TEST_CASE("greedy coloring partitions edges into matchings") {
    SECTION("single edge") {
        EdgeColoring c = edge_color(complete(2));
        REQUIRE(c.width() == 1);
        CHECK(c.classes[0] == std::vector<Edge>{{0, 1}});
    }
    SECTION("cycle of four splits into two perfect matchings") {
        EdgeColoring c = edge_color(cycle(4));
        REQUIRE(c.width() == 2);
        CHECK(c.classes[0].size() == 2);
        CHECK(c.classes[1].size() == 2);
        for (const auto& cls : c.classes) {
            std::vector<char> used(4, 0);
            for (const auto& [u, v] : cls) {
                CHECK(!used[u]);
                CHECK(!used[v]);
                used[u] = used[v] = 1;
            }
        }
    }
    SECTION("hypercube classes are the dimension exchanges") {
        EdgeColoring c = edge_color(hypercube(3));
        REQUIRE(c.width() == 3);
        for (int i = 0; i < 3; ++i) {
            CHECK(c.classes[static_cast<std::size_t>(i)].size() == 4);
            for (const auto& [u, v] : c.classes[static_cast<std::size_t>(i)])
                CHECK((u ^ v) == (1 << i));
        }
    }
}

TEST_CASE("coloring width stays within the greedy guarantee") {
    std::uint64_t seed = 11;
    for (const Graph& g : {torus(3, 5), random_regular(20, 5, seed), complete(7)}) {
        EdgeColoring c = edge_color(g);
        CHECK(c.width() <= 2 * g.max_degree() - 1);
        std::vector<Edge> all;
        for (const auto& cls : c.classes)
            all.insert(all.end(), cls.begin(), cls.end());
        std::sort(all.begin(), all.end());
        CHECK(all == g.edges());
    }
}
