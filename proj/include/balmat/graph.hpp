#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "balmat/rng.hpp"

namespace balmat {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using Edge = std::pair<int, int>;  // always stored with first < second

// Undirected simple connected graph on nodes 0..n-1.
// Immutable after construction; safe to share across threads.
class Graph {
public:
    Graph(int n, std::vector<Edge> edges) : n_(n), edges_(std::move(edges)) {
        if (n_ < 1) throw Error("graph: node count must be >= 1");
        for (auto& e : edges_) {
            if (e.first > e.second) std::swap(e.first, e.second);
            if (e.first == e.second)
                throw Error("graph: self-loop at node " + std::to_string(e.first));
            if (e.first < 0 || e.second >= n_)
                throw Error("graph: edge (" + std::to_string(e.first) + "," +
                            std::to_string(e.second) + ") out of range");
        }
        std::sort(edges_.begin(), edges_.end());
        if (std::adjacent_find(edges_.begin(), edges_.end()) != edges_.end())
            throw Error("graph: duplicate edge");
        adj_.assign(n_, {});
        for (const auto& [u, v] : edges_) {
            adj_[u].push_back(v);
            adj_[v].push_back(u);
        }
        for (auto& nb : adj_) std::sort(nb.begin(), nb.end());
        max_degree_ = 0;
        for (const auto& nb : adj_)
            max_degree_ = std::max<int>(max_degree_, static_cast<int>(nb.size()));
        if (!connected())
            throw Error("graph: not connected");
    }

    int node_count() const { return n_; }
    int edge_count() const { return static_cast<int>(edges_.size()); }
    const std::vector<Edge>& edges() const { return edges_; }
    const std::vector<int>& neighbors(int u) const { return adj_[u]; }
    int degree(int u) const { return static_cast<int>(adj_[u].size()); }
    int max_degree() const { return max_degree_; }
    double average_degree() const { return 2.0 * edge_count() / node_count(); }

    bool has_edge(int u, int v) const {
        if (u > v) std::swap(u, v);
        return std::binary_search(edges_.begin(), edges_.end(), Edge{u, v});
    }

    // Index of {u,v} in the sorted edge list; throws if absent.
    int edge_index(int u, int v) const {
        if (u > v) std::swap(u, v);
        auto it = std::lower_bound(edges_.begin(), edges_.end(), Edge{u, v});
        if (it == edges_.end() || *it != Edge{u, v})
            throw Error("graph: no edge (" + std::to_string(u) + "," +
                        std::to_string(v) + ")");
        return static_cast<int>(it - edges_.begin());
    }

private:
    bool connected() const {
        std::vector<char> seen(n_, 0);
        std::vector<int> stack{0};
        seen[0] = 1;
        int reached = 1;
        while (!stack.empty()) {
            int u = stack.back();
            stack.pop_back();
            for (int v : adj_[u])
                if (!seen[v]) {
                    seen[v] = 1;
                    ++reached;
                    stack.push_back(v);
                }
        }
        return reached == n_;
    }

    int n_;
    std::vector<Edge> edges_;
    std::vector<std::vector<int>> adj_;
    int max_degree_;
};

inline Graph hypercube(int d) {
    if (d < 1 || d > 24) throw Error("hypercube: dimension must be in [1,24]");
    int n = 1 << d;
    std::vector<Edge> edges;
    edges.reserve(static_cast<std::size_t>(n) * d / 2);
    for (int u = 0; u < n; ++u)
        for (int i = 0; i < d; ++i) {
            int v = u ^ (1 << i);
            if (u < v) edges.emplace_back(u, v);
        }
    return Graph(n, std::move(edges));
}

inline Graph cycle(int n) {
    if (n < 3) throw Error("cycle: need n >= 3 for a simple cycle");
    std::vector<Edge> edges;
    for (int u = 0; u + 1 < n; ++u) edges.emplace_back(u, u + 1);
    edges.emplace_back(0, n - 1);
    return Graph(n, std::move(edges));
}

inline Graph complete(int n) {
    if (n < 2) throw Error("complete: need n >= 2");
    std::vector<Edge> edges;
    for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v) edges.emplace_back(u, v);
    return Graph(n, std::move(edges));
}

inline Graph torus(int a, int b) {
    if (a < 3 || b < 3)
        throw Error("torus: both sides must be >= 3 to avoid duplicate wrap edges");
    auto id = [b](int i, int j) { return i * b + j; };
    std::vector<Edge> edges;
    for (int i = 0; i < a; ++i)
        for (int j = 0; j < b; ++j) {
            edges.emplace_back(std::min(id(i, j), id((i + 1) % a, j)),
                               std::max(id(i, j), id((i + 1) % a, j)));
            edges.emplace_back(std::min(id(i, j), id(i, (j + 1) % b)),
                               std::max(id(i, j), id(i, (j + 1) % b)));
        }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    return Graph(a * b, std::move(edges));
}

// Random d-regular simple connected graph, deterministic given seed.
// Stubs are paired sequentially, redrawing pairs that would create a
// self-loop or duplicate edge; an attempt that gets stuck (or produces a
// disconnected graph) is restarted with fresh randomness, up to 100 attempts.
inline Graph random_regular(int n, int d, std::uint64_t seed) {
    if (d < 1) throw Error("random_regular: degree must be >= 1");
    if (d >= n) throw Error("random_regular: need d < n");
    if ((static_cast<long long>(n) * d) % 2 != 0)
        throw Error("random_regular: n*d must be even");
    CounterRng rng(derive_seed(seed, 0x7265677561726772ull));
    for (int attempt = 0; attempt < 100; ++attempt) {
        std::vector<int> stubs(static_cast<std::size_t>(n) * d);
        for (int u = 0; u < n; ++u)
            for (int k = 0; k < d; ++k) stubs[static_cast<std::size_t>(u) * d + k] = u;
        std::vector<Edge> edges;
        std::vector<std::vector<int>> adj(n);
        bool ok = true;
        std::uint64_t draw = 0;
        while (!stubs.empty()) {
            // Pick two distinct stub positions whose pairing keeps the graph simple.
            bool paired = false;
            for (int retry = 0; retry < 200 && !paired; ++retry) {
                std::uint64_t i =
                    rng.below(stubs.size(), attempt, draw, Tag::pairing, 2 * retry);
                std::uint64_t j =
                    rng.below(stubs.size(), attempt, draw, Tag::pairing, 2 * retry + 1);
                if (i == j) continue;
                int u = stubs[i], v = stubs[j];
                if (u == v) continue;
                if (std::find(adj[u].begin(), adj[u].end(), v) != adj[u].end()) continue;
                adj[u].push_back(v);
                adj[v].push_back(u);
                edges.emplace_back(std::min(u, v), std::max(u, v));
                if (i < j) std::swap(i, j);
                stubs.erase(stubs.begin() + static_cast<std::ptrdiff_t>(i));
                stubs.erase(stubs.begin() + static_cast<std::ptrdiff_t>(j));
                paired = true;
            }
            if (!paired) { ok = false; break; }
            ++draw;
        }
        if (!ok) continue;
        try {
            return Graph(n, std::move(edges));
        } catch (const Error&) {
            continue;  // disconnected; retry
        }
    }
    throw Error("random_regular: no simple connected graph after 100 attempts");
}

// Edge-list text format: first line "n m", then m lines "u v" with
// 0 <= u < v < n, LF newlines, space-separated.
inline Graph load_graph(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    auto fail = [&](const std::string& what) {
        throw Error("edge list line " + std::to_string(lineno) + ": " + what);
    };
    if (!std::getline(in, line)) { lineno = 1; fail("missing header"); }
    ++lineno;
    long long n = 0, m = 0;
    {
        std::istringstream hs(line);
        if (!(hs >> n >> m) || n < 1 || m < 0) fail("expected header \"n m\"");
    }
    std::vector<Edge> edges;
    edges.reserve(static_cast<std::size_t>(m));
    std::set<Edge> seen;
    for (long long k = 0; k < m; ++k) {
        if (!std::getline(in, line)) { ++lineno; fail("missing edge line"); }
        ++lineno;
        std::istringstream es(line);
        long long u = -1, v = -1;
        if (!(es >> u >> v)) fail("expected \"u v\"");
        if (u < 0 || v < 0 || u >= n || v >= n) fail("node id out of range");
        if (u >= v) fail("expected u < v");
        Edge e{static_cast<int>(u), static_cast<int>(v)};
        if (!seen.insert(e).second) fail("duplicate edge");
        edges.push_back(e);
    }
    try {
        return Graph(static_cast<int>(n), std::move(edges));
    } catch (const Error& e) {
        throw Error(std::string("edge list: ") + e.what());
    }
}

// Canonical form: edges sorted lexicographically. save(load(x)) is the
// canonical form of x.
inline std::string save_graph(const Graph& g) {
    std::ostringstream out;
    out << g.node_count() << ' ' << g.edge_count() << '\n';
    for (const auto& [u, v] : g.edges()) out << u << ' ' << v << '\n';
    return out.str();
}

// A partition of the edge set into matchings (proper edge coloring).
struct EdgeColoring {
    std::vector<std::vector<Edge>> classes;
    int width() const { return static_cast<int>(classes.size()); }
};

// Greedy coloring over edges in lexicographic order, assigning the smallest
// class index free at both endpoints. Uses at most 2*max_degree - 1 classes;
// on hypercubes this yields exactly the dimension-exchange classes.
inline EdgeColoring edge_color(const Graph& g) {
    EdgeColoring coloring;
    std::vector<std::vector<char>> used(g.node_count());
    auto is_free = [&used](int w, std::size_t c) {
        return c >= used[w].size() || !used[w][c];
    };
    for (const auto& [u, v] : g.edges()) {
        std::size_t c = 0;
        while (!is_free(u, c) || !is_free(v, c)) ++c;
        while (c >= coloring.classes.size()) coloring.classes.emplace_back();
        if (used[u].size() <= c) used[u].resize(c + 1, 0);
        if (used[v].size() <= c) used[v].resize(c + 1, 0);
        used[u][c] = used[v][c] = 1;
        coloring.classes[c].emplace_back(u, v);
    }
    return coloring;
}

}  // namespace balmat
