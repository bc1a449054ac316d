#pragma once

#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "balmat/graph.hpp"
#include "balmat/matrix.hpp"
#include "balmat/rng.hpp"

namespace balmat {

// One round's matching: node-disjoint graph edges, each stored with u < v.
struct Matching {
    long round = 0;
    std::vector<Edge> pairs;
};

// Throws unless every pair is a graph edge and no node appears twice.
inline void validate_matching(const Matching& m, const Graph& g) {
    std::vector<char> seen(g.node_count(), 0);
    for (const auto& [u, v] : m.pairs) {
        if (!g.has_edge(u, v))
            throw Error("matching: (" + std::to_string(u) + "," + std::to_string(v) +
                        ") is not a graph edge");
        if (seen[u] || seen[v])
            throw Error("matching: node matched twice in round " +
                        std::to_string(m.round));
        seen[u] = seen[v] = 1;
    }
}

// Generator of the matching sequence. Rounds are 1-based. All models give
// random access by round: the random ones draw from a counter-based stream
// keyed by (seed, round), so matching_at is a pure function.
class Schedule {
public:
    virtual ~Schedule() = default;
    virtual Matching matching_at(long round) const = 0;
    virtual const Graph& graph() const = 0;
    virtual std::string kind() const = 0;
    virtual bool deterministic() const { return false; }

    // Stateful convenience: emits rounds 1, 2, ... in order.
    Matching next_matching() { return matching_at(++cursor_); }
    long cursor() const { return cursor_; }
    void reset_cursor() { cursor_ = 0; }

private:
    long cursor_ = 0;
};

// Fixed periodic sequence from an edge coloring: round t applies class
// ((t-1) mod width) + 1.
class CircuitSchedule : public Schedule {
public:
    CircuitSchedule(const Graph& g, EdgeColoring coloring)
        : g_(&g), coloring_(std::move(coloring)) {
        if (coloring_.width() == 0) throw Error("circuit: empty coloring");
    }

    Matching matching_at(long round) const override {
        Matching m;
        m.round = round;
        m.pairs = coloring_.classes[static_cast<std::size_t>((round - 1) %
                                                             coloring_.width())];
        return m;
    }

    const Graph& graph() const override { return *g_; }
    std::string kind() const override { return "circuit"; }
    bool deterministic() const override { return true; }
    int width() const { return coloring_.width(); }
    const EdgeColoring& coloring() const { return coloring_; }

private:
    const Graph* g_;
    EdgeColoring coloring_;
};

// Every node proposes to a uniformly random neighbor; an edge joins the
// matching iff its endpoints proposed to each other. Matchings are mutually
// independent across rounds and edge {u,v} is included with probability
// exactly 1/(deg(u)*deg(v)) every round.
class RandomMatchingSchedule : public Schedule {
public:
    RandomMatchingSchedule(const Graph& g, std::uint64_t seed)
        : g_(&g), rng_(derive_seed(seed, 0x6d617463686d6f64ull)) {}

    Matching matching_at(long round) const override {
        Matching m;
        m.round = round;
        const Graph& g = *g_;
        std::vector<int> proposal(static_cast<std::size_t>(g.node_count()));
        for (int u = 0; u < g.node_count(); ++u)
            proposal[static_cast<std::size_t>(u)] = g.neighbors(u)[static_cast<std::size_t>(
                rng_.below(g.degree(u), round, static_cast<std::uint64_t>(u), Tag::proposal))];
        for (const auto& [u, v] : g.edges())
            if (proposal[static_cast<std::size_t>(u)] == v &&
                proposal[static_cast<std::size_t>(v)] == u)
                m.pairs.emplace_back(u, v);
        return m;
    }

    const Graph& graph() const override { return *g_; }
    std::string kind() const override { return "random_matching"; }

    // Exact per-edge inclusion probability of this scheme.
    double edge_probability(int u, int v) const {
        return 1.0 / (static_cast<double>(g_->degree(u)) * g_->degree(v));
    }

    double p_min_exact() const {
        double p = 1.0;
        for (const auto& [u, v] : g_->edges()) p = std::min(p, edge_probability(u, v));
        return p;
    }

private:
    const Graph* g_;
    CounterRng rng_;
};

// Single edge per round, uniform over E.
class AsyncEdgeSchedule : public Schedule {
public:
    AsyncEdgeSchedule(const Graph& g, std::uint64_t seed)
        : g_(&g), rng_(derive_seed(seed, 0x6173796e63656467ull)) {}

    Matching matching_at(long round) const override {
        Matching m;
        m.round = round;
        std::uint64_t k = rng_.below(g_->edge_count(), round, 0, Tag::async_edge);
        m.pairs.push_back(g_->edges()[static_cast<std::size_t>(k)]);
        return m;
    }

    const Graph& graph() const override { return *g_; }
    std::string kind() const override { return "async_edge"; }

private:
    const Graph* g_;
    CounterRng rng_;
};

// Fixed stored list of matchings (one schedule realization).
class ReplaySchedule : public Schedule {
public:
    ReplaySchedule(const Graph& g, std::vector<std::vector<Edge>> rounds)
        : g_(&g), rounds_(std::move(rounds)) {}

    Matching matching_at(long round) const override {
        if (round < 1 || round > static_cast<long>(rounds_.size()))
            throw Error("replay: round " + std::to_string(round) +
                        " outside stored range");
        Matching m;
        m.round = round;
        m.pairs = rounds_[static_cast<std::size_t>(round - 1)];
        return m;
    }

    const Graph& graph() const override { return *g_; }
    std::string kind() const override { return "replay"; }
    bool deterministic() const override { return true; }
    long stored_rounds() const { return static_cast<long>(rounds_.size()); }

private:
    const Graph* g_;
    std::vector<std::vector<Edge>> rounds_;
};

// Materializes rounds 1..t of a schedule, fixing one realization.
inline ReplaySchedule capture_replay(const Schedule& s, long t) {
    std::vector<std::vector<Edge>> rounds;
    rounds.reserve(static_cast<std::size_t>(t));
    for (long r = 1; r <= t; ++r) rounds.push_back(s.matching_at(r).pairs);
    return ReplaySchedule(s.graph(), std::move(rounds));
}

// Replay wire format: JSON array of rounds, each an array of [u,v] pairs.
inline nlohmann::json replay_to_json(const ReplaySchedule& s) {
    nlohmann::json rounds = nlohmann::json::array();
    for (long r = 1; r <= s.stored_rounds(); ++r) {
        nlohmann::json round = nlohmann::json::array();
        for (const auto& [u, v] : s.matching_at(r).pairs)
            round.push_back(nlohmann::json::array({u, v}));
        rounds.push_back(std::move(round));
    }
    return rounds;
}

inline ReplaySchedule replay_from_json(const Graph& g, const nlohmann::json& j) {
    if (!j.is_array()) throw Error("replay: expected a JSON array of rounds");
    std::vector<std::vector<Edge>> rounds;
    for (const auto& jr : j) {
        std::vector<Edge> pairs;
        for (const auto& jp : jr) {
            if (!jp.is_array() || jp.size() != 2)
                throw Error("replay: each pair must be [u,v]");
            int u = jp[0].get<int>(), v = jp[1].get<int>();
            pairs.emplace_back(std::min(u, v), std::max(u, v));
        }
        rounds.push_back(std::move(pairs));
    }
    ReplaySchedule s(g, std::move(rounds));
    for (long r = 1; r <= s.stored_rounds(); ++r) validate_matching(s.matching_at(r), g);
    return s;
}

// Empirical per-edge inclusion frequencies over the given number of rounds.
// Only meaningful for the randomized models.
inline std::vector<double> measure_p_min(const Schedule& s, long rounds) {
    if (s.deterministic())
        throw Error("measure_p_min: schedule \"" + s.kind() + "\" is deterministic");
    if (rounds < 1) throw Error("measure_p_min: need rounds >= 1");
    const Graph& g = s.graph();
    std::vector<long> hits(g.edge_count(), 0);
    for (long r = 1; r <= rounds; ++r)
        for (const auto& [u, v] : s.matching_at(r).pairs)
            ++hits[static_cast<std::size_t>(g.edge_index(u, v))];
    std::vector<double> freq(hits.size());
    for (std::size_t i = 0; i < hits.size(); ++i)
        freq[i] = static_cast<double>(hits[i]) / static_cast<double>(rounds);
    return freq;
}

// Product of the round matrices over [t1, t2]; identity when t1 > t2.
template <typename S = double>
Mat<S> window_product(const Schedule& s, long t1, long t2) {
    Mat<S> m = Mat<S>::identity(s.graph().node_count());
    for (long r = t1; r <= t2; ++r) m.right_mul_matching(s.matching_at(r).pairs);
    return m;
}

}  // namespace balmat
