#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include <json.hpp>

#include "balmat/matrix.hpp"
#include "balmat/rng.hpp"
#include "balmat/schedule.hpp"

namespace balmat {

// Integer token counts per node. Totals are conserved exactly by every
// discrete step; construction rejects negative entries and totals that could
// overflow intermediate sums.
struct LoadVector {
    std::vector<std::int64_t> x;

    LoadVector() = default;
    explicit LoadVector(std::vector<std::int64_t> v) : x(std::move(v)) {
        std::int64_t total = 0;
        for (std::int64_t e : x) {
            if (e < 0) throw Error("load vector: negative entry");
            total += e;
            if (total >= (std::int64_t{1} << 62))
                throw Error("load vector: total must stay below 2^62");
        }
    }

    int size() const { return static_cast<int>(x.size()); }
    std::int64_t total() const { return std::accumulate(x.begin(), x.end(), std::int64_t{0}); }
    std::int64_t max() const { return *std::max_element(x.begin(), x.end()); }
    std::int64_t min() const { return *std::min_element(x.begin(), x.end()); }
    std::int64_t disc() const { return max() - min(); }
};

// Per-edge record of one standard-process round: the drawn orientation and
// whether the pair sum was odd. phi = +1 means the smaller-id endpoint
// received the ceil. The rounding error is odd ? phi/2 : 0.
struct TraceEntry {
    long round;
    int u, v;
    int phi;
    bool odd;
};

struct RoundingTrace {
    std::vector<TraceEntry> entries;

    nlohmann::json to_json() const {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& e : entries)
            arr.push_back(nlohmann::json{
                {"round", e.round}, {"u", e.u}, {"v", e.v}, {"phi", e.phi}});
        return arr;
    }
};

// One standard-process round: each matched pair splits its total into
// ceil/floor, the ceil going to the smaller id iff the drawn orientation is
// +1. flip negates every orientation (coupling harnesses use this).
inline void step_standard(LoadVector& load, const Matching& m, const CounterRng& rng,
                          bool flip = false, RoundingTrace* trace = nullptr) {
    const int n = load.size();
    for (const auto& [u, v] : m.pairs) {
        if (u < 0 || v >= n) throw Error("step: matching references node >= n");
        std::int64_t sum = load.x[u] + load.x[v];
        bool odd = sum & 1;
        int phi = 0;
        if (odd || trace) {
            phi = rng.sign(static_cast<std::uint64_t>(m.round), edge_key(u, v),
                           Tag::orientation);
            if (flip) phi = -phi;
        }
        if (odd) {
            load.x[u] = (sum + phi) / 2;
            load.x[v] = sum - load.x[u];
        } else {
            load.x[u] = load.x[v] = sum / 2;
        }
        if (trace) trace->entries.push_back({m.round, u, v, phi, odd});
    }
}

// One continuous round: each matched pair moves to its exact mean.
template <typename S>
void step_continuous(std::vector<S>& xi, const Matching& m) {
    for (const auto& [u, v] : m.pairs) {
        S mean = (xi[static_cast<std::size_t>(u)] + xi[static_cast<std::size_t>(v)]) / S(2);
        xi[static_cast<std::size_t>(u)] = mean;
        xi[static_cast<std::size_t>(v)] = mean;
    }
}

// Token-level state of the height-sensitive process: every token has a
// location and a height, and on every node the heights are exactly
// 1..load with no gaps.
struct TokenState {
    std::vector<std::vector<int>> stacks;  // stacks[v] = token ids bottom to top
    std::vector<int> location;             // per token
    std::vector<int> height;               // per token, 1-based

    // Canonical initial ordering: tokens are numbered in node order, then
    // stack order within the node.
    static TokenState from_loads(const LoadVector& load) {
        TokenState s;
        s.stacks.resize(static_cast<std::size_t>(load.size()));
        int next = 0;
        for (int v = 0; v < load.size(); ++v)
            for (std::int64_t h = 0; h < load.x[static_cast<std::size_t>(v)]; ++h) {
                s.stacks[static_cast<std::size_t>(v)].push_back(next);
                s.location.push_back(v);
                s.height.push_back(static_cast<int>(h) + 1);
                ++next;
            }
        return s;
    }

    int node_count() const { return static_cast<int>(stacks.size()); }
    int token_count() const { return static_cast<int>(location.size()); }
    int load(int v) const { return static_cast<int>(stacks[static_cast<std::size_t>(v)].size()); }

    LoadVector loads() const {
        std::vector<std::int64_t> x(stacks.size());
        for (std::size_t v = 0; v < stacks.size(); ++v)
            x[v] = static_cast<std::int64_t>(stacks[v].size());
        return LoadVector(std::move(x));
    }

    void validate() const {
        std::vector<char> seen(location.size(), 0);
        for (int v = 0; v < node_count(); ++v)
            for (std::size_t h = 0; h < stacks[static_cast<std::size_t>(v)].size(); ++h) {
                int tok = stacks[static_cast<std::size_t>(v)][h];
                if (seen[static_cast<std::size_t>(tok)])
                    throw Error("token state: token appears twice");
                seen[static_cast<std::size_t>(tok)] = 1;
                if (location[static_cast<std::size_t>(tok)] != v ||
                    height[static_cast<std::size_t>(tok)] != static_cast<int>(h) + 1)
                    throw Error("token state: location/height out of sync");
            }
        for (char c : seen)
            if (!c) throw Error("token state: missing token");
    }
};

// Moving step of the height-sensitive process on one matched pair: the
// endpoint with the larger load (smaller id on ties) sends its top
// ceil(diff/2) tokens to the other endpoint, preserving their relative order
// and dropping their heights onto the receiver's top. Returns the pair
// (sender, receiver).
inline std::pair<int, int> height_moving_step(TokenState& s, int a, int b) {
    int hi = a, lo = b;
    if (s.load(hi) < s.load(lo)) std::swap(hi, lo);
    auto& src = s.stacks[static_cast<std::size_t>(hi)];
    auto& dst = s.stacks[static_cast<std::size_t>(lo)];
    int diff = static_cast<int>(src.size()) - static_cast<int>(dst.size());
    int moved = (diff + 1) / 2;
    for (int k = static_cast<int>(src.size()) - moved;
         k < static_cast<int>(src.size()); ++k) {
        int tok = src[static_cast<std::size_t>(k)];
        dst.push_back(tok);
        s.location[static_cast<std::size_t>(tok)] = lo;
        s.height[static_cast<std::size_t>(tok)] = static_cast<int>(dst.size());
    }
    src.resize(src.size() - static_cast<std::size_t>(moved));
    return {hi, lo};
}

// One height-sensitive round: moving step, then a shuffling step in which
// every equal-height sibling pair swaps with probability 1/2 and an unpaired
// topmost token crosses with probability 1/2. No token's height ever
// increases.
inline void step_height(TokenState& s, const Matching& m, const CounterRng& rng) {
    for (const auto& [a, b] : m.pairs) {
        auto [hi, lo] = height_moving_step(s, a, b);
        auto& src = s.stacks[static_cast<std::size_t>(hi)];
        auto& dst = s.stacks[static_cast<std::size_t>(lo)];
        std::uint64_t ek = edge_key(a, b);
        std::size_t shared = std::min(src.size(), dst.size());
        for (std::size_t h = 0; h < shared; ++h) {
            if (!rng.coin(static_cast<std::uint64_t>(m.round), ek, Tag::shuffle, h))
                continue;
            std::swap(src[h], dst[h]);
            s.location[static_cast<std::size_t>(src[h])] = hi;
            s.location[static_cast<std::size_t>(dst[h])] = lo;
        }
        // Odd total: after the move the receiver holds the ceil, so its top
        // token is the unpaired one; it may cross back at its own height.
        if (src.size() != dst.size() &&
            rng.coin(static_cast<std::uint64_t>(m.round), ek, Tag::excess)) {
            int tok = dst.back();
            dst.pop_back();
            src.push_back(tok);
            s.location[static_cast<std::size_t>(tok)] = hi;
        }
    }
}

enum class EngineKind { standard, continuous, height };

// Round-by-round driver. The observer is called with the state after round 0
// (the initial state) and after every subsequent round up to T.
template <typename State, typename Step, typename Observer>
State run_rounds(State state, const Schedule& schedule, long t, Step step,
                 Observer&& observe) {
    observe(0L, state);
    for (long r = 1; r <= t; ++r) {
        step(state, schedule.matching_at(r));
        observe(r, state);
    }
    return state;
}

inline LoadVector run_standard(
    const LoadVector& x0, const Schedule& schedule, long t, const CounterRng& rng,
    const std::function<void(long, const LoadVector&)>& observe = {},
    RoundingTrace* trace = nullptr, bool flip = false) {
    if (t < 0) throw Error("run: need T >= 0");
    return run_rounds(
        x0, schedule, t,
        [&](LoadVector& s, const Matching& m) {
            step_standard(s, m, rng, flip, trace);
        },
        [&](long r, const LoadVector& s) {
            if (observe) observe(r, s);
        });
}

template <typename S>
std::vector<S> run_continuous(
    const std::vector<S>& xi0, const Schedule& schedule, long t,
    const std::function<void(long, const std::vector<S>&)>& observe = {}) {
    if (t < 0) throw Error("run: need T >= 0");
    return run_rounds(
        xi0, schedule, t,
        [&](std::vector<S>& s, const Matching& m) { step_continuous(s, m); },
        [&](long r, const std::vector<S>& s) {
            if (observe) observe(r, s);
        });
}

inline TokenState run_height(
    const TokenState& s0, const Schedule& schedule, long t, const CounterRng& rng,
    const std::function<void(long, const TokenState&)>& observe = {}) {
    if (t < 0) throw Error("run: need T >= 0");
    return run_rounds(
        s0, schedule, t,
        [&](TokenState& s, const Matching& m) { step_height(s, m, rng); },
        [&](long r, const TokenState& s) {
            if (observe) observe(r, s);
        });
}

// Runs the standard process twice over the same matchings: once from x, and
// once from K*1 - x with every orientation negated. The flipped trajectory
// mirrors the original exactly: X~(t) = K*1 - X(t) for every round.
struct CoupledFlipRun {
    std::vector<LoadVector> original;  // index = round
    std::vector<LoadVector> flipped;
};

inline CoupledFlipRun coupled_flip_run(const LoadVector& x, std::int64_t K,
                                       const Schedule& schedule, long t,
                                       std::uint64_t seed) {
    if (K < x.max()) throw Error("coupled_flip_run: K must be >= max load");
    std::vector<std::int64_t> mirrored(x.x.size());
    for (std::size_t i = 0; i < x.x.size(); ++i) mirrored[i] = K - x.x[i];
    CounterRng rng(derive_seed(seed, 0x70726f6365737331ull));
    CoupledFlipRun out;
    run_standard(x, schedule, t, rng,
                 [&](long, const LoadVector& s) { out.original.push_back(s); });
    run_standard(LoadVector(std::move(mirrored)), schedule, t, rng,
                 [&](long, const LoadVector& s) { out.flipped.push_back(s); },
                 nullptr, /*flip=*/true);
    return out;
}

// Both sides of the rounding-error decomposition at round t:
//   lhs_w = X_w(t) - xi_w(t)   (discrete minus continuous load)
//   rhs_w = sum over rounds s and matched pairs [u:v] of
//           E_uv(s) * (M[s+1,t](u,w) - M[s+1,t](v,w))
// where E_uv(s) = phi/2 on odd pair sums and 0 otherwise. The discrete run is
// replayed from the trace; the trace must match the schedule realization.
template <typename S>
struct ErrorDecomposition {
    std::vector<S> lhs;
    std::vector<S> rhs;

    S max_residual() const {
        S worst(0);
        for (std::size_t i = 0; i < lhs.size(); ++i) {
            S d = lhs[i] - rhs[i];
            if (d < S(0)) d = -d;
            if (d > worst) worst = d;
        }
        return worst;
    }
};

template <typename S>
ErrorDecomposition<S> reconstruct_from_errors(const LoadVector& x0,
                                              const Schedule& schedule,
                                              const RoundingTrace& trace, long t) {
    const int n = x0.size();
    // Group trace entries by round and check them against the schedule.
    std::vector<std::vector<const TraceEntry*>> by_round(static_cast<std::size_t>(t) + 1);
    for (const auto& e : trace.entries) {
        if (e.round < 1 || e.round > t)
            throw Error("reconstruct: trace round outside [1,t]");
        by_round[static_cast<std::size_t>(e.round)].push_back(&e);
    }
    for (long r = 1; r <= t; ++r) {
        Matching m = schedule.matching_at(r);
        if (m.pairs.size() != by_round[static_cast<std::size_t>(r)].size())
            throw Error("reconstruct: trace does not match the schedule realization");
        for (std::size_t i = 0; i < m.pairs.size(); ++i) {
            const TraceEntry* e = by_round[static_cast<std::size_t>(r)][i];
            if (Edge{e->u, e->v} != m.pairs[i])
                throw Error("reconstruct: trace does not match the schedule realization");
        }
    }
    // Replay the discrete run from the recorded orientations.
    LoadVector final_load = x0;
    for (long r = 1; r <= t; ++r)
        for (const TraceEntry* e : by_round[static_cast<std::size_t>(r)]) {
            std::int64_t sum = final_load.x[e->u] + final_load.x[e->v];
            if ((sum & 1) != (e->odd ? 1 : 0))
                throw Error("reconstruct: trace parity does not match the loads");
            if (sum & 1) {
                final_load.x[e->u] = (sum + e->phi) / 2;
                final_load.x[e->v] = sum - final_load.x[e->u];
            } else {
                final_load.x[e->u] = final_load.x[e->v] = sum / 2;
            }
        }
    // Walk the suffix windows backwards, accumulating each round's error
    // contribution against M[s+1,t]; after processing round 1 the window
    // matrix equals M[1,t], which also gives the continuous loads.
    Mat<S> window = Mat<S>::identity(n);
    std::vector<S> rhs(static_cast<std::size_t>(n), S(0));
    const S half = S(1) / S(2);
    for (long s = t; s >= 1; --s) {
        for (const TraceEntry* e : by_round[static_cast<std::size_t>(s)]) {
            if (!e->odd) continue;
            S err = e->phi > 0 ? half : -half;
            for (int w = 0; w < n; ++w)
                rhs[static_cast<std::size_t>(w)] += err * (window(e->u, w) - window(e->v, w));
        }
        window.left_mul_matching(schedule.matching_at(s).pairs);
    }
    ErrorDecomposition<S> out;
    out.rhs = std::move(rhs);
    out.lhs.resize(static_cast<std::size_t>(n));
    for (int w = 0; w < n; ++w) {
        S xi(0);
        for (int u = 0; u < n; ++u)
            xi += S(x0.x[static_cast<std::size_t>(u)]) * window(u, w);
        out.lhs[static_cast<std::size_t>(w)] =
            S(final_load.x[static_cast<std::size_t>(w)]) - xi;
    }
    return out;
}

}  // namespace balmat
