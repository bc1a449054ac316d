#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "balmat/matrix.hpp"
#include "balmat/process.hpp"

namespace balmat {

// A small instance for exhaustive verification: a graph on at most 5 nodes,
// a fixed list of single-edge matchings (at most 4 rounds), an initial load
// placement of at most 5 tokens (canonical numbering: node order, then stack
// order), a token subset and a destination node set.
struct OracleInstance {
    Graph graph;
    std::vector<Edge> rounds;         // one edge per round
    std::vector<std::int64_t> loads;  // initial tokens per node
    std::uint32_t token_set;          // bitmask over token ids
    std::uint32_t node_set;           // bitmask over nodes

    int token_count() const {
        std::int64_t t = 0;
        for (std::int64_t e : loads) t += e;
        return static_cast<int>(t);
    }

    void check_limits() const {
        if (graph.node_count() > 5)
            throw Error("oracle instance: at most 5 nodes");
        if (rounds.size() > 4)
            throw Error("oracle instance: at most 4 single-edge rounds");
        if (token_count() < 1 || token_count() > 5)
            throw Error("oracle instance: between 1 and 5 tokens");
        for (const auto& [u, v] : rounds)
            if (!graph.has_edge(u, v))
                throw Error("oracle instance: round edge not in graph");
    }
};

namespace detail {

constexpr int kOracleBits = 30;   // common denominator 2^kOracleBits
constexpr int kBitBudget = 24;    // max random bits along any trajectory

// Fixed-size token configuration for the exhaustive walks (n <= 5, <= 8 tokens).
struct TinyState {
    std::int8_t stack[5][8];
    std::int8_t size[5];
    std::int8_t loc[8];
};

inline TinyState tiny_from_loads(const std::vector<std::int64_t>& loads) {
    TinyState s{};
    int next = 0;
    for (std::size_t v = 0; v < loads.size(); ++v) {
        s.size[v] = static_cast<std::int8_t>(loads[v]);
        for (int h = 0; h < loads[v]; ++h) {
            s.stack[v][h] = static_cast<std::int8_t>(next);
            s.loc[next] = static_cast<std::int8_t>(v);
            ++next;
        }
    }
    return s;
}

// Enumerates every trajectory of the height-sensitive process over the given
// single-edge rounds, invoking leaf(state, bits_used) with the number of fair
// coins spent on that path. Exact: each leaf has probability 2^-bits.
template <typename Leaf>
void enumerate_trajectories(const TinyState& init, const std::vector<Edge>& rounds,
                            Leaf&& leaf) {
    std::function<void(const TinyState&, std::size_t, int)> walk =
        [&](const TinyState& state, std::size_t r, int bits) {
            if (bits > kBitBudget)
                throw Error("oracle: trajectory exceeds the 24-bit enumeration budget");
            if (r == rounds.size()) {
                leaf(state, bits);
                return;
            }
            auto [a, b] = rounds[r];
            TinyState moved = state;
            int hi = a, lo = b;
            if (moved.size[hi] < moved.size[lo]) std::swap(hi, lo);
            int diff = moved.size[hi] - moved.size[lo];
            int k = (diff + 1) / 2;
            for (int i = moved.size[hi] - k; i < moved.size[hi]; ++i) {
                std::int8_t tok = moved.stack[hi][i];
                moved.stack[lo][moved.size[lo]++] = tok;
                moved.loc[tok] = static_cast<std::int8_t>(lo);
            }
            moved.size[hi] = static_cast<std::int8_t>(moved.size[hi] - k);
            int shared = std::min(moved.size[hi], moved.size[lo]);
            bool odd = moved.size[hi] != moved.size[lo];
            int coins = shared + (odd ? 1 : 0);
            for (int mask = 0; mask < (1 << coins); ++mask) {
                TinyState child = moved;
                for (int h = 0; h < shared; ++h) {
                    if (!(mask & (1 << h))) continue;
                    std::swap(child.stack[hi][h], child.stack[lo][h]);
                    child.loc[child.stack[hi][h]] = static_cast<std::int8_t>(hi);
                    child.loc[child.stack[lo][h]] = static_cast<std::int8_t>(lo);
                }
                if (odd && (mask & (1 << shared))) {
                    std::int8_t tok = child.stack[lo][--child.size[lo]];
                    child.stack[hi][child.size[hi]++] = tok;
                    child.loc[tok] = static_cast<std::int8_t>(hi);
                }
                walk(child, r + 1, bits + coins);
            }
        };
    walk(init, 0, 0);
}

// Window product of the single-edge rounds as integer numerators over the
// common denominator 2^len. Averaging keeps entries integral at that scale.
inline std::vector<std::array<std::int64_t, 5>> exact_window(
    int n, const std::vector<Edge>& rounds) {
    std::int64_t scale = std::int64_t{1} << rounds.size();
    std::vector<std::array<std::int64_t, 5>> m(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        m[static_cast<std::size_t>(i)].fill(0);
        m[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = scale;
    }
    for (const auto& [u, v] : rounds)
        for (int r = 0; r < n; ++r) {
            std::int64_t mean = (m[static_cast<std::size_t>(r)][static_cast<std::size_t>(u)] +
                                 m[static_cast<std::size_t>(r)][static_cast<std::size_t>(v)]) /
                                2;
            m[static_cast<std::size_t>(r)][static_cast<std::size_t>(u)] = mean;
            m[static_cast<std::size_t>(r)][static_cast<std::size_t>(v)] = mean;
        }
    return m;
}

}  // namespace detail

struct NaOracleResult {
    Rational joint;
    Rational product;
    bool pass = false;
};

// Exhaustively enumerates all shuffle outcomes and compares the exact joint
// probability that every token of the subset ends inside the node set against
// the product of the matrix-row marginals.
inline NaOracleResult na_oracle(const OracleInstance& inst) {
    inst.check_limits();
    const int t_count = inst.token_count();
    detail::TinyState init = detail::tiny_from_loads(inst.loads);
    std::uint64_t joint_num = 0;
    enumerate_trajectories(init, inst.rounds,
                           [&](const detail::TinyState& s, int bits) {
                               for (int i = 0; i < t_count; ++i)
                                   if (inst.token_set & (1u << i))
                                       if (!(inst.node_set & (1u << s.loc[i]))) return;
                               joint_num += std::uint64_t{1}
                                            << (detail::kOracleBits - bits);
                           });
    auto window = detail::exact_window(inst.graph.node_count(), inst.rounds);
    std::int64_t scale = std::int64_t{1} << inst.rounds.size();
    NaOracleResult res;
    res.joint = Rational(joint_num, std::uint64_t{1} << detail::kOracleBits);
    res.product = Rational(1);
    for (int i = 0; i < t_count; ++i) {
        if (!(inst.token_set & (1u << i))) continue;
        std::int64_t row_mass = 0;
        int start = init.loc[i];
        for (int v = 0; v < inst.graph.node_count(); ++v)
            if (inst.node_set & (1u << v))
                row_mass += window[static_cast<std::size_t>(start)][static_cast<std::size_t>(v)];
        res.product *= Rational(row_mass, scale);
    }
    res.pass = res.joint <= res.product;
    return res;
}

struct WalkLawResult {
    std::vector<Rational> distribution;  // enumerated location law of the token
    std::vector<Rational> matrix_row;    // window-product row of its start node
    bool equal = false;
};

// The location of a single token after the rounds must follow the window
// product row of its start node, exactly.
inline WalkLawResult walk_law_oracle(const OracleInstance& inst, int token) {
    inst.check_limits();
    if (token < 0 || token >= inst.token_count())
        throw Error("walk_law_oracle: token id out of range");
    const int n = inst.graph.node_count();
    detail::TinyState init = detail::tiny_from_loads(inst.loads);
    std::vector<std::uint64_t> mass(static_cast<std::size_t>(n), 0);
    enumerate_trajectories(init, inst.rounds,
                           [&](const detail::TinyState& s, int bits) {
                               mass[static_cast<std::size_t>(s.loc[token])] +=
                                   std::uint64_t{1} << (detail::kOracleBits - bits);
                           });
    auto window = detail::exact_window(n, inst.rounds);
    std::int64_t scale = std::int64_t{1} << inst.rounds.size();
    WalkLawResult res;
    res.equal = true;
    for (int v = 0; v < n; ++v) {
        res.distribution.emplace_back(mass[static_cast<std::size_t>(v)],
                                      std::uint64_t{1} << detail::kOracleBits);
        res.matrix_row.emplace_back(
            window[static_cast<std::size_t>(init.loc[token])][static_cast<std::size_t>(v)],
            scale);
        if (res.distribution.back() != res.matrix_row.back()) res.equal = false;
    }
    return res;
}

// All connected labeled graphs on exactly n nodes.
inline std::vector<Graph> connected_graphs(int n) {
    std::vector<Edge> all;
    for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v) all.emplace_back(u, v);
    std::vector<Graph> out;
    for (std::uint32_t mask = 0; mask < (1u << all.size()); ++mask) {
        std::vector<Edge> edges;
        for (std::size_t i = 0; i < all.size(); ++i)
            if (mask & (1u << i)) edges.push_back(all[i]);
        try {
            out.emplace_back(n, std::move(edges));
        } catch (const Error&) {
            // disconnected or otherwise invalid; skip
        }
    }
    return out;
}

struct FamilyCheckResult {
    long instances = 0;  // (graph, sequence, placement) triples
    long checks = 0;     // (token set, node set) pairs across all instances
    long na_failures = 0;
    long walk_failures = 0;
};

inline void check_placement(const Graph& g, const std::vector<Edge>& rounds,
                            const std::vector<std::array<std::int64_t, 5>>& window,
                            std::int64_t scale, const std::vector<std::int64_t>& loads,
                            FamilyCheckResult& result, int d_count);

// Runs the negative-association and walk-law checks over the full exhaustive
// family: all connected graphs with at most max_n nodes, all single-edge
// matching sequences up to max_len rounds, all placements of 1..max_tokens
// tokens, all token subsets, all destination sets. Pure integer arithmetic on
// a common power-of-two denominator, so every comparison is exact.
inline FamilyCheckResult exhaustive_family_check(int max_n = 4, int max_len = 3,
                                                 int max_tokens = 4) {
    if (max_n > 5 || max_tokens > 5 || max_len > 4)
        throw Error("family check: limits exceed the oracle instance bounds");
    FamilyCheckResult result;
    for (int n = 2; n <= max_n; ++n) {
        const int d_count = 1 << n;
        for (const Graph& g : connected_graphs(n)) {
            // All edge sequences of length 0..max_len, odometer-style.
            const int m = g.edge_count();
            for (int len = 0; len <= max_len; ++len) {
                std::vector<int> idx(static_cast<std::size_t>(len), 0);
                while (true) {
                    std::vector<Edge> rounds;
                    for (int i : idx) rounds.push_back(g.edges()[static_cast<std::size_t>(i)]);
                    auto window = detail::exact_window(n, rounds);
                    std::int64_t scale = std::int64_t{1} << len;
                    // All load placements of 1..max_tokens tokens.
                    std::vector<std::int64_t> loads(static_cast<std::size_t>(n), 0);
                    std::function<void(int, int)> place = [&](int node, int remaining) {
                        if (node == n - 1) {
                            loads[static_cast<std::size_t>(node)] = remaining;
                            check_placement(g, rounds, window, scale, loads, result,
                                            d_count);
                            return;
                        }
                        for (int take = 0; take <= remaining; ++take) {
                            loads[static_cast<std::size_t>(node)] = take;
                            place(node + 1, remaining - take);
                        }
                    };
                    for (int total = 1; total <= max_tokens; ++total) place(0, total);
                    // Advance the sequence odometer.
                    int pos = len - 1;
                    while (pos >= 0 && ++idx[static_cast<std::size_t>(pos)] == m) {
                        idx[static_cast<std::size_t>(pos)] = 0;
                        --pos;
                    }
                    if (pos < 0) break;
                }
            }
        }
    }
    return result;
}

inline void check_placement(const Graph& g, const std::vector<Edge>& rounds,
                            const std::vector<std::array<std::int64_t, 5>>& window,
                            std::int64_t scale, const std::vector<std::int64_t>& loads,
                            FamilyCheckResult& result, int d_count) {
    const int n = g.node_count();
    int t_count = 0;
    for (std::int64_t e : loads) t_count += static_cast<int>(e);
    const int b_count = 1 << t_count;
    detail::TinyState init = detail::tiny_from_loads(loads);

    // mass[D][S]: probability numerator that exactly the token set S (as a
    // superset filter) lands in D; marg[i][v]: location law numrators.
    std::vector<std::uint64_t> mass(static_cast<std::size_t>(d_count) * b_count, 0);
    std::uint64_t marg[8][5] = {};
    enumerate_trajectories(init, rounds, [&](const detail::TinyState& s, int bits) {
        std::uint64_t p = std::uint64_t{1} << (detail::kOracleBits - bits);
        for (int i = 0; i < t_count; ++i) marg[i][s.loc[i]] += p;
        for (int d = 0; d < d_count; ++d) {
            int in_d = 0;
            for (int i = 0; i < t_count; ++i)
                if (d & (1 << s.loc[i])) in_d |= 1 << i;
            mass[static_cast<std::size_t>(d) * b_count + in_d] += p;
        }
    });
    ++result.instances;

    // Walk law: enumerated marginals must equal the matrix rows exactly.
    for (int i = 0; i < t_count; ++i)
        for (int v = 0; v < n; ++v) {
            std::uint64_t lhs = marg[i][v] * static_cast<std::uint64_t>(scale);
            std::uint64_t rhs =
                static_cast<std::uint64_t>(
                    window[static_cast<std::size_t>(init.loc[i])][static_cast<std::size_t>(v)])
                << detail::kOracleBits;
            if (lhs != rhs) ++result.walk_failures;
        }

    // Superset sums: joint[D][B] = sum of mass[D][S] over S containing B.
    for (int d = 0; d < d_count; ++d) {
        std::uint64_t* f = mass.data() + static_cast<std::size_t>(d) * b_count;
        for (int bit = 0; bit < t_count; ++bit)
            for (int s = 0; s < b_count; ++s)
                if (!(s & (1 << bit))) f[s] += f[s | (1 << bit)];
    }

    // Row masses per token and destination set.
    std::int64_t row_mass[8][32];
    for (int i = 0; i < t_count; ++i)
        for (int d = 0; d < d_count; ++d) {
            std::int64_t acc = 0;
            for (int v = 0; v < n; ++v)
                if (d & (1 << v))
                    acc += window[static_cast<std::size_t>(init.loc[i])][static_cast<std::size_t>(v)];
            row_mass[i][d] = acc;
        }

    for (int d = 0; d < d_count; ++d)
        for (int b = 0; b < b_count; ++b) {
            ++result.checks;
            // joint/2^kOracleBits vs product of row_mass/scale over tokens in b
            std::uint64_t joint = mass[static_cast<std::size_t>(d) * b_count + b];
            std::uint64_t prod_num = 1;
            std::uint64_t prod_den = 1;
            for (int i = 0; i < t_count; ++i)
                if (b & (1 << i)) {
                    prod_num *= static_cast<std::uint64_t>(row_mass[i][d]);
                    prod_den *= static_cast<std::uint64_t>(scale);
                }
            // joint * prod_den <= prod_num * 2^kOracleBits, both < 2^63
            if (joint * prod_den > (prod_num << detail::kOracleBits))
                ++result.na_failures;
        }
}

}  // namespace balmat
