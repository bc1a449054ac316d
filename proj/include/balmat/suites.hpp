#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "balmat/checks.hpp"
#include "balmat/metrics.hpp"
#include "balmat/oracles.hpp"
#include "balmat/process.hpp"
#include "balmat/schedule.hpp"
#include "balmat/smoothing.hpp"
#include "balmat/spectral.hpp"

namespace balmat {

struct SuiteResult {
    bool pass = false;
    std::string detail;
};

struct Suite {
    std::string name;
    std::function<SuiteResult(std::uint64_t)> run;
};

namespace suites {

inline SuiteResult ok(const std::string& detail) { return {true, detail}; }
inline SuiteResult fail(const std::string& detail) { return {false, detail}; }

// Small pool of graphs the randomized suites draw from.
inline std::vector<Graph> sample_graphs(std::uint64_t seed) {
    std::vector<Graph> gs;
    gs.push_back(hypercube(3));
    gs.push_back(cycle(7));
    gs.push_back(torus(3, 4));
    gs.push_back(complete(6));
    gs.push_back(random_regular(12, 3, seed));
    return gs;
}

inline SuiteResult graph_invariants(std::uint64_t seed) {
    auto graphs = sample_graphs(seed);
    graphs.push_back(hypercube(5));
    for (const Graph& g : graphs) {
        // reachability from node 0 (construction already rejects otherwise)
        std::vector<char> seen(g.node_count(), 0);
        std::vector<int> stack{0};
        seen[0] = 1;
        int reached = 1;
        while (!stack.empty()) {
            int u = stack.back();
            stack.pop_back();
            for (int v : g.neighbors(u))
                if (!seen[v]) { seen[v] = 1; ++reached; stack.push_back(v); }
        }
        if (reached != g.node_count()) return fail("unreachable node");

        EdgeColoring col = edge_color(g);
        if (col.width() > 2 * g.max_degree() - 1)
            return fail("coloring width exceeds 2*max_degree - 1");
        std::vector<Edge> all;
        for (const auto& cls : col.classes) {
            std::vector<char> used(g.node_count(), 0);
            for (const auto& [u, v] : cls) {
                if (used[u] || used[v]) return fail("color class is not a matching");
                used[u] = used[v] = 1;
                all.emplace_back(u, v);
            }
        }
        std::sort(all.begin(), all.end());
        if (all != g.edges()) return fail("color classes do not partition the edges");

        Graph round_trip = load_graph(save_graph(g));
        if (save_graph(round_trip) != save_graph(g)) return fail("edge list round trip");
    }
    // dimension-exchange classes on the hypercube
    EdgeColoring hc = edge_color(hypercube(4));
    if (hc.width() != 4) return fail("hypercube coloring width");
    for (int c = 0; c < 4; ++c)
        for (const auto& [u, v] : hc.classes[static_cast<std::size_t>(c)])
            if ((u ^ v) != (1 << c)) return fail("hypercube class is not a dimension");
    // determinism of the random regular builder
    if (save_graph(random_regular(16, 3, seed)) != save_graph(random_regular(16, 3, seed)))
        return fail("random_regular not deterministic");
    return ok("graph families, coloring, round trip");
}

inline SuiteResult schedule_invariants(std::uint64_t seed) {
    for (const Graph& g : sample_graphs(seed)) {
        CircuitSchedule circuit(g, edge_color(g));
        RandomMatchingSchedule rm(g, seed);
        AsyncEdgeSchedule async(g, seed);
        const Schedule* models[] = {&circuit, &rm, &async};
        for (const Schedule* s : models)
            for (long r = 1; r <= 40; ++r) validate_matching(s->matching_at(r), g);
        // periodicity of the circuit
        for (long r = 1; r <= 6; ++r)
            if (circuit.matching_at(r).pairs !=
                circuit.matching_at(r + circuit.width()).pairs)
                return fail("circuit is not periodic");
        // single edge per asynchronous round
        for (long r = 1; r <= 40; ++r)
            if (async.matching_at(r).pairs.size() != 1)
                return fail("async round is not a single edge");
        // every window product stays doubly stochastic
        MatD w = window_product<double>(rm, 1, 60);
        if (!is_doubly_stochastic(w, 1e-12)) return fail("window not doubly stochastic");
    }
    // a star never matches two edges at once
    Graph star(4, {{0, 1}, {0, 2}, {0, 3}});
    RandomMatchingSchedule rm(star, seed);
    for (long r = 1; r <= 200; ++r)
        if (rm.matching_at(r).pairs.size() > 1) return fail("star matched twice");
    // uniform single-edge frequencies
    Graph c4 = cycle(4);
    AsyncEdgeSchedule async(c4, seed);
    auto freq = measure_p_min(async, 100000);
    for (double f : freq)
        if (std::fabs(f - 0.25) > 0.01) return fail("async edge frequency off");
    return ok("matching validity, periodicity, frequencies");
}

inline SuiteResult l2_monotonicity(std::uint64_t seed) {
    Graph g = random_regular(32, 4, seed);
    for (int rep = 0; rep < 10; ++rep) {
        RandomMatchingSchedule rm(g, derive_seed(seed, static_cast<std::uint64_t>(rep)));
        MatD m = MatD::identity(g.node_count());
        std::vector<double> prev(static_cast<std::size_t>(g.node_count()), 2.0);
        for (long t = 1; t <= 200; ++t) {
            m.right_mul_matching(rm.matching_at(t).pairs);
            for (int u = 0; u < g.node_count(); ++u) {
                double dist = row_dist_to_uniform_sq(m, u);
                double norm = row_norm_sq(m, u);
                if (std::fabs(norm - 1.0 / g.node_count() - dist) > 1e-12)
                    return fail("norm/distance identity violated");
                if (dist > prev[static_cast<std::size_t>(u)] + 1e-12)
                    return fail("row distance to uniform increased");
                prev[static_cast<std::size_t>(u)] = dist;
            }
        }
    }
    return ok("row l2 identity and monotonicity over 10 schedules");
}

inline SuiteResult smoothing_sufficient_condition(std::uint64_t seed) {
    Graph g = hypercube(4);
    const double K = 64.0, eps = 0.5;
    const double row_thr = std::pow(eps / (2.0 * K * g.node_count()), 2.0);
    for (int rep = 0; rep < 5; ++rep) {
        RandomMatchingSchedule rm(g, derive_seed(seed, static_cast<std::uint64_t>(rep)));
        MatD m = MatD::identity(g.node_count());
        long t = 0;
        for (long r = 1; r <= 5000; ++r) {
            m.right_mul_matching(rm.matching_at(r).pairs);
            bool all = true;
            for (int u = 0; u < g.node_count() && all; ++u)
                all = row_dist_to_uniform_sq(m, u) <= row_thr;
            if (all) { t = r; break; }
        }
        if (t == 0) return fail("row condition never reached");
        if (!check_smoothing(rm, t, K, eps).pass)
            return fail("row condition held but smoothing check failed");
    }
    return ok("row-norm condition implies the smoothing bound");
}

inline SuiteResult goodness_smoothing_relation(std::uint64_t seed) {
    Graph g = hypercube(4);
    const int n = g.node_count();
    const double K = 2.0 * n * n, eps = 1.0;
    // window estimate from sampled starts
    RandomMatchingSchedule probe(g, derive_seed(seed, 999));
    GoodnessReport rep = check_goodness(probe, 400, 60, {0, 50, 100});
    long t_star = static_cast<long>(
        std::ceil(3.0 * std::log(K / eps) / std::log(static_cast<double>(n)) *
                  static_cast<double>(rep.tau_global_estimate)));
    int passes = 0;
    const int realizations = 20;
    for (int i = 0; i < realizations; ++i) {
        RandomMatchingSchedule rm(g, derive_seed(seed, static_cast<std::uint64_t>(i)));
        if (check_smoothing(rm, t_star, K, eps).pass) ++passes;
    }
    if (passes < static_cast<int>(0.95 * realizations))
        return fail("smoothing passed only " + std::to_string(passes) + "/20");
    std::ostringstream os;
    os << "t*=" << t_star << " smoothing passes " << passes << "/20";
    return ok(os.str());
}

inline SuiteResult conservation_and_couplings(std::uint64_t seed) {
    Graph g = torus(3, 4);
    for (int rep = 0; rep < 20; ++rep) {
        std::uint64_t s = derive_seed(seed, static_cast<std::uint64_t>(rep));
        RandomMatchingSchedule rm(g, s);
        CounterRng rng(derive_seed(s, 1));
        std::vector<std::int64_t> v(static_cast<std::size_t>(g.node_count()));
        for (std::size_t i = 0; i < v.size(); ++i)
            v[i] = static_cast<std::int64_t>(rng.below(40, 0, i, Tag::init));
        LoadVector x0(v);
        const std::int64_t total = x0.total();

        // conservation
        CounterRng prng(derive_seed(s, 2));
        std::vector<LoadVector> base;
        run_standard(x0, rm, 30, prng,
                     [&](long, const LoadVector& st) { base.push_back(st); });
        for (const LoadVector& st : base)
            if (st.total() != total) return fail("total not conserved");

        // shift coupling: adding alpha everywhere shifts every round by alpha
        std::vector<std::int64_t> shifted = v;
        for (auto& e : shifted) e += 7;
        std::vector<LoadVector> shifted_run;
        run_standard(LoadVector(shifted), rm, 30, prng,
                     [&](long, const LoadVector& st) { shifted_run.push_back(st); });
        for (std::size_t r = 0; r < base.size(); ++r)
            for (int u = 0; u < g.node_count(); ++u)
                if (shifted_run[r].x[static_cast<std::size_t>(u)] !=
                    base[r].x[static_cast<std::size_t>(u)] + 7)
                    return fail("shift coupling violated");

        // domination coupling: entrywise order is preserved
        std::vector<std::int64_t> dom = v;
        for (std::size_t i = 0; i < dom.size(); i += 2) dom[i] += 3;
        std::vector<LoadVector> dom_run;
        run_standard(LoadVector(dom), rm, 30, prng,
                     [&](long, const LoadVector& st) { dom_run.push_back(st); });
        for (std::size_t r = 0; r < base.size(); ++r)
            for (int u = 0; u < g.node_count(); ++u)
                if (dom_run[r].x[static_cast<std::size_t>(u)] <
                    base[r].x[static_cast<std::size_t>(u)])
                    return fail("domination coupling violated");

        // flip coupling and gap symmetry
        std::int64_t K = x0.max() + 3;
        CoupledFlipRun flip = coupled_flip_run(x0, K, rm, 30, s);
        for (std::size_t r = 0; r < flip.original.size(); ++r) {
            const auto& orig = flip.original[r];
            const auto& mirr = flip.flipped[r];
            for (int u = 0; u < g.node_count(); ++u)
                if (mirr.x[static_cast<std::size_t>(u)] !=
                    K - orig.x[static_cast<std::size_t>(u)])
                    return fail("flip identity violated");
            // n*avg - n*min of the original equals n*max - n*avg of the mirror
            std::int64_t n64 = g.node_count();
            std::int64_t lhs = orig.total() - n64 * orig.min();
            std::int64_t rhs = n64 * mirr.max() - mirr.total();
            if (lhs != rhs) return fail("gap symmetry violated");
        }
    }
    return ok("conservation, shift/domination/flip couplings over 20 runs");
}

inline SuiteResult height_process(std::uint64_t seed) {
    Graph g = complete(6);
    for (int rep = 0; rep < 10; ++rep) {
        std::uint64_t s = derive_seed(seed, static_cast<std::uint64_t>(rep));
        RandomMatchingSchedule rm(g, s);
        CounterRng init_rng(derive_seed(s, 3));
        std::vector<std::int64_t> v(static_cast<std::size_t>(g.node_count()));
        for (std::size_t i = 0; i < v.size(); ++i)
            v[i] = static_cast<std::int64_t>(init_rng.below(9, 0, i, Tag::init));
        if (LoadVector(v).total() == 0) v[0] = 5;
        TokenState ts = TokenState::from_loads(LoadVector(v));
        std::vector<int> prev_height = ts.height;
        const std::int64_t level = 3;
        std::int64_t prev_y = y_at_level(ts.loads(), level);
        CounterRng rng(derive_seed(s, 4));
        for (long r = 1; r <= 60; ++r) {
            step_height(ts, rm.matching_at(r), rng);
            ts.validate();
            for (std::size_t i = 0; i < ts.height.size(); ++i)
                if (ts.height[i] > prev_height[i]) return fail("token height increased");
            prev_height = ts.height;
            std::int64_t y = y_at_level(ts.loads(), level);
            if (y > prev_y) return fail("load above the level increased");
            prev_y = y;
        }
    }
    // load marginal: on an odd pair the ceil lands on each endpoint half the time
    Graph k2 = complete(2);
    Matching m{1, {{0, 1}}};
    long ceil_at_0 = 0;
    const long trials = 20000;
    for (long i = 0; i < trials; ++i) {
        TokenState ts = TokenState::from_loads(LoadVector({std::int64_t{7}, std::int64_t{2}}));
        CounterRng rng(derive_seed(seed, 0xbeef00 + static_cast<std::uint64_t>(i)));
        m.round = i + 1;
        step_height(ts, m, rng);
        LoadVector after = ts.loads();
        if (after.x[0] == 5 && after.x[1] == 4) ++ceil_at_0;
        else if (!(after.x[0] == 4 && after.x[1] == 5)) return fail("bad split");
    }
    double f = static_cast<double>(ceil_at_0) / trials;
    double sigma = std::sqrt(0.25 / trials);
    if (std::fabs(f - 0.5) > 3 * sigma)
        return fail("ceil frequency " + std::to_string(f));
    return ok("height monotonicity, state invariants, marginal split");
}

inline SuiteResult continuous_matrix_equivalence(std::uint64_t seed) {
    Graph g = cycle(9);
    for (int rep = 0; rep < 10; ++rep) {
        std::uint64_t s = derive_seed(seed, static_cast<std::uint64_t>(rep));
        RandomMatchingSchedule rm(g, s);
        CounterRng rng(derive_seed(s, 5));
        std::vector<double> xi(static_cast<std::size_t>(g.node_count()));
        std::vector<Rational> xi_q(xi.size());
        for (std::size_t i = 0; i < xi.size(); ++i) {
            auto val = static_cast<std::int64_t>(rng.below(100, 0, i, Tag::init));
            xi[i] = static_cast<double>(val);
            xi_q[i] = val;
        }
        const long t = 40;
        std::vector<double> end = run_continuous<double>(xi, rm, t);
        std::vector<Rational> end_q = run_continuous<Rational>(xi_q, rm, t);
        MatD w = window_product<double>(rm, 1, t);
        MatQ wq = window_product<Rational>(rm, 1, t);
        for (int v = 0; v < g.node_count(); ++v) {
            double expect = 0.0;
            Rational expect_q(0);
            for (int u = 0; u < g.node_count(); ++u) {
                expect += xi[static_cast<std::size_t>(u)] * w(u, v);
                expect_q += xi_q[static_cast<std::size_t>(u)] * wq(u, v);
            }
            if (std::fabs(expect - end[static_cast<std::size_t>(v)]) > 1e-9)
                return fail("continuous run differs from the window product");
            if (expect_q != end_q[static_cast<std::size_t>(v)])
                return fail("exact continuous run differs from the window product");
        }
    }
    return ok("continuous trajectories equal the window products");
}

inline SuiteResult rounding_error_identity(std::uint64_t seed) {
    for (int rep = 0; rep < 40; ++rep) {
        std::uint64_t s = derive_seed(seed, static_cast<std::uint64_t>(rep));
        CounterRng pick(s);
        int n = 4 + static_cast<int>(pick.below(13, 0, 0, Tag::init));  // 4..16
        Graph g = n % 2 == 0 ? random_regular(n, 3, s) : complete(n);
        long t = 8 + static_cast<long>(pick.below(57, 0, 1, Tag::init));  // 8..64
        RandomMatchingSchedule rm(g, derive_seed(s, 6));
        CounterRng init_rng(derive_seed(s, 7));
        std::vector<std::int64_t> v(static_cast<std::size_t>(n));
        for (std::size_t i = 0; i < v.size(); ++i)
            v[i] = static_cast<std::int64_t>(init_rng.below(33, 0, i, Tag::init));
        LoadVector x0(v);
        RoundingTrace trace;
        CounterRng rng(derive_seed(s, 8));
        run_standard(x0, rm, t, rng, {}, &trace);
        auto exact = reconstruct_from_errors<Rational>(x0, rm, trace, t);
        if (exact.max_residual() != Rational(0))
            return fail("exact identity violated");
        auto approx = reconstruct_from_errors<double>(x0, rm, trace, t);
        if (approx.max_residual() > 1e-9) return fail("double identity off by > 1e-9");
    }
    return ok("rounding-error decomposition exact on 40 runs");
}

inline SuiteResult na_oracle_suite(std::uint64_t) {
    FamilyCheckResult r = exhaustive_family_check(4, 3, 4);
    std::ostringstream os;
    os << r.instances << " instances, " << r.checks << " checks, " << r.na_failures
       << " failures";
    return r.na_failures == 0 ? ok(os.str()) : fail(os.str());
}

inline SuiteResult walk_law_suite(std::uint64_t) {
    FamilyCheckResult r = exhaustive_family_check(4, 3, 4);
    std::ostringstream os;
    os << r.instances << " instances, " << r.walk_failures << " failures";
    return r.walk_failures == 0 ? ok(os.str()) : fail(os.str());
}

inline SuiteResult psi_identity_suite(std::uint64_t seed) {
    double worst = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
        std::uint64_t s = derive_seed(seed, static_cast<std::uint64_t>(rep));
        CounterRng pick(s);
        int n = 4 + static_cast<int>(pick.below(29, 0, 0, Tag::init));  // 4..32
        Graph g = complete(n);
        RandomMatchingSchedule rm(g, derive_seed(s, 9));
        long t = 1 + static_cast<long>(pick.below(50, 0, 1, Tag::init));
        std::vector<double> a(static_cast<std::size_t>(n));
        double sum = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            a[i] = pick.unit(1, i, Tag::init);
            sum += a[i];
        }
        for (auto& e : a) e /= sum;
        PsiIdentityCheck c = psi_identity_check(a, rm, t);
        worst = std::max(worst, c.max_residual);
        if (c.max_residual > 1e-10) return fail("identity residual too large");
        if (!c.bound1_ok || !c.bound2_ok) return fail("norm bound violated");
    }
    std::ostringstream os;
    os << "100 draws, worst residual " << worst;
    return ok(os.str());
}

inline SuiteResult hoeffding_suite(std::uint64_t seed) {
    Graph g = hypercube(5);
    CircuitSchedule circuit(g, edge_color(g));
    std::vector<std::int64_t> v(static_cast<std::size_t>(g.node_count()), 0);
    v[0] = 512;
    LoadVector x0(v);
    std::vector<double> unit(static_cast<std::size_t>(g.node_count()), 0.0);
    unit[3] = 1.0;
    TailCheck c = hoeffding_check(circuit, x0, circuit.width(), unit, 1.0 / 64.0,
                                  {1, 2, 3, 4}, 2000, seed);
    if (!c.pass) return fail("unit-vector tail above the bound");
    std::vector<double> uniform(static_cast<std::size_t>(g.node_count()),
                                1.0 / g.node_count());
    TailCheck cu = hoeffding_check(circuit, x0, circuit.width(), uniform, 1.0 / 64.0,
                                   {0.5, 1, 2}, 500, seed);
    for (double e : cu.empirical)
        if (e != 0.0) return fail("uniform combination deviated from the average");
    return cu.pass ? ok("tails below the analytic bound") : fail("uniform tail");
}

inline SuiteResult collision_bound_suite(std::uint64_t seed) {
    // two tokens on a single matched edge never collide
    Graph k2 = complete(2);
    ReplaySchedule one_round(k2, {{{0, 1}}});
    TokenState ts = TokenState::from_loads(LoadVector({std::int64_t{1}, std::int64_t{1}}));
    CollisionCheck c = collision_bound_check(one_round, ts, 0, 1, 400, seed);
    if (c.empirical_mean != 0.0) return fail("siblings collided on the single edge");
    if (!c.pass) return fail("single-edge bound violated");
    // identity window: everyone stays put
    Graph p3(3, {{0, 1}, {1, 2}});
    ReplaySchedule idle(p3, {{}});
    TokenState t3 = TokenState::from_loads(LoadVector({std::int64_t{4}, std::int64_t{1}, std::int64_t{0}}));
    CollisionCheck ci = collision_bound_check(idle, t3, 0, 1, 50, seed);
    if (ci.empirical_mean != 3.0 || ci.rhs != 4.0) return fail("identity window values");
    // randomized case on a denser graph
    Graph g = complete(5);
    RandomMatchingSchedule rm(g, derive_seed(seed, 11));
    TokenState tg = TokenState::from_loads(
        LoadVector(std::vector<std::int64_t>{std::int64_t{6}, std::int64_t{2},
                                             std::int64_t{1}, std::int64_t{0},
                                             std::int64_t{1}}));
    CollisionCheck cr = collision_bound_check(rm, tg, 0, 6, 3000, seed);
    if (!cr.pass) return fail("randomized collision mean above the bound");
    return ok("exact and randomized collision bounds hold");
}

}  // namespace suites

// Registry behind the `verify` command: every module's invariant suites, by
// name. New suites must be added here (the tests assert the count).
inline const std::vector<Suite>& verify_suites() {
    static const std::vector<Suite> all = {
        {"graph-invariants", suites::graph_invariants},
        {"schedule-invariants", suites::schedule_invariants},
        {"l2-monotonicity", suites::l2_monotonicity},
        {"smoothing-sufficient-condition", suites::smoothing_sufficient_condition},
        {"goodness-smoothing-relation", suites::goodness_smoothing_relation},
        {"conservation-and-couplings", suites::conservation_and_couplings},
        {"height-process", suites::height_process},
        {"continuous-matrix-equivalence", suites::continuous_matrix_equivalence},
        {"rounding-error-identity", suites::rounding_error_identity},
        {"na-oracle", suites::na_oracle_suite},
        {"walk-law-oracle", suites::walk_law_suite},
        {"psi-identity", suites::psi_identity_suite},
        {"hoeffding-tail", suites::hoeffding_suite},
        {"collision-bound", suites::collision_bound_suite},
    };
    return all;
}

}  // namespace balmat
