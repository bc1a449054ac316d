#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include <json.hpp>

#include "balmat/metrics.hpp"
#include "balmat/process.hpp"
#include "balmat/smoothing.hpp"

namespace balmat {

inline double norm2_sq(const std::vector<double>& a) {
    double acc = 0.0;
    for (double x : a) acc += x * x;
    return acc;
}

inline void require_stochastic_vector(const std::vector<double>& a) {
    double sum = 0.0;
    for (double x : a) {
        if (x < 0.0) throw Error("coefficient vector: negative entry");
        sum += x;
    }
    if (std::fabs(sum - 1.0) > 1e-12)
        throw Error("coefficient vector: entries must sum to 1");
}

// Monte Carlo tail of a convex combination of loads against the analytic
// bound 2*exp(-(delta-kappa)^2 / (4*||a||_2^2)). For delta <= kappa the
// exponent is clamped to zero, making the bound trivially 2.
struct TailCheck {
    std::vector<double> a;
    std::vector<double> deltas;
    long trials = 0;
    std::vector<double> empirical;
    std::vector<double> bound;
    double kappa = 0.0;
    bool pass = false;

    nlohmann::json to_json() const {
        return nlohmann::json{{"a", a},         {"deltas", deltas},
                              {"trials", trials}, {"empirical", empirical},
                              {"bound", bound},   {"kappa", kappa},
                              {"pass", pass}};
    }
};

// Requires the length-t prefix of the schedule to smooth discrepancy disc(x0)
// down to kappa; the matchings stay fixed across trials while the
// orientation randomness varies. One-sided pass with a 3-sigma binomial
// slack at every delta.
inline TailCheck hoeffding_check(const Schedule& schedule, const LoadVector& x0,
                                 long t, const std::vector<double>& a, double kappa,
                                 const std::vector<double>& deltas, long trials,
                                 std::uint64_t seed) {
    require_stochastic_vector(a);
    if (trials < 1) throw Error("hoeffding_check: need trials >= 1");
    SmoothingResult sm = check_smoothing(schedule, t, static_cast<double>(x0.disc()), kappa);
    if (!sm.pass)
        throw Error("hoeffding_check: prefix is not (K,kappa)-smoothing (worst " +
                    std::to_string(sm.worst_disc) + " > " + std::to_string(kappa) + ")");
    ReplaySchedule fixed = capture_replay(schedule, t);

    const double avg = static_cast<double>(x0.total()) / x0.size();
    TailCheck check;
    check.a = a;
    check.deltas = deltas;
    check.trials = trials;
    check.kappa = kappa;
    check.empirical.assign(deltas.size(), 0.0);
    for (long trial = 0; trial < trials; ++trial) {
        CounterRng rng(derive_seed(seed, 0x686f656666ull + static_cast<std::uint64_t>(trial)));
        LoadVector xt = run_standard(x0, fixed, t, rng);
        double combo = 0.0;
        for (int w = 0; w < xt.size(); ++w)
            combo += a[static_cast<std::size_t>(w)] *
                     static_cast<double>(xt.x[static_cast<std::size_t>(w)]);
        double dev = std::fabs(combo - avg);
        for (std::size_t i = 0; i < deltas.size(); ++i)
            if (dev >= deltas[i]) check.empirical[i] += 1.0;
    }
    for (double& e : check.empirical) e /= static_cast<double>(trials);

    const double norm_sq = norm2_sq(a);
    check.pass = true;
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        double shifted = std::max(deltas[i] - kappa, 0.0);
        check.bound.push_back(2.0 * std::exp(-shifted * shifted / (4.0 * norm_sq)));
        double p = std::min(check.bound[i], 1.0);
        double sigma = std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
        if (check.empirical[i] > check.bound[i] + 3.0 * sigma) check.pass = false;
    }
    return check;
}

struct CollisionCheck {
    double empirical_mean = 0.0;
    double sigma = 0.0;  // standard error of the mean
    double rhs = 0.0;
    bool pass = false;

    nlohmann::json to_json() const {
        return nlohmann::json{{"empirical_mean", empirical_mean},
                              {"sigma", sigma},
                              {"rhs", rhs},
                              {"pass", pass}};
    }
};

// Tracks the topmost token on node u through `window` rounds of the
// height-sensitive process (matchings fixed, shuffles vary) and compares the
// mean number of tokens sharing its final location against the convex
// combination sum_w (sum_v M(u,v)*M(w,v)) * X_w(0) over the window product.
inline CollisionCheck collision_bound_check(const Schedule& schedule,
                                            const TokenState& s0, int u, long window,
                                            long trials, std::uint64_t seed) {
    if (s0.load(u) == 0) throw Error("collision_bound_check: no token on node u");
    if (window < 1 || trials < 1)
        throw Error("collision_bound_check: need window >= 1 and trials >= 1");
    const int token = s0.stacks[static_cast<std::size_t>(u)].back();
    ReplaySchedule fixed = capture_replay(schedule, window);

    double sum = 0.0, sum_sq = 0.0;
    for (long trial = 0; trial < trials; ++trial) {
        CounterRng rng(derive_seed(seed, 0x636f6cull + static_cast<std::uint64_t>(trial)));
        TokenState end = run_height(s0, fixed, window, rng);
        double z = static_cast<double>(
            end.load(end.location[static_cast<std::size_t>(token)]) - 1);
        sum += z;
        sum_sq += z * z;
    }
    CollisionCheck check;
    check.empirical_mean = sum / static_cast<double>(trials);
    double var = std::max(0.0, sum_sq / trials - check.empirical_mean * check.empirical_mean);
    check.sigma = std::sqrt(var / static_cast<double>(trials));

    MatD win = window_product<double>(fixed, 1, window);
    const int n = win.size();
    LoadVector x0 = s0.loads();
    double rhs = 0.0;
    for (int w = 0; w < n; ++w) {
        double coeff = 0.0;
        for (int v = 0; v < n; ++v) coeff += win(u, v) * win(w, v);
        rhs += coeff * static_cast<double>(x0.x[static_cast<std::size_t>(w)]);
    }
    check.rhs = rhs;
    check.pass = check.empirical_mean <= rhs + 3.0 * check.sigma + 1e-9;
    return check;
}

struct PsiIdentityCheck {
    double max_residual = 0.0;   // worst per-round identity violation
    double pair_sum = 0.0;       // sum over rounds/pairs of squared row gaps
    double pair_sum_bound = 0.0; // 2*||a||_2^2
    bool bound1_ok = false;
    double worst_row_combo = 0.0;  // max over suffixes of sum_w (window*a)_w^2
    double row_combo_bound = 0.0;  // ||a||_2^2
    bool bound2_ok = false;

    nlohmann::json to_json() const {
        return nlohmann::json{{"max_residual", max_residual},
                              {"pair_sum", pair_sum},
                              {"pair_sum_bound", pair_sum_bound},
                              {"bound1_ok", bound1_ok},
                              {"worst_row_combo", worst_row_combo},
                              {"row_combo_bound", row_combo_bound},
                              {"bound2_ok", bound2_ok}};
    }
};

// Verifies, along one schedule realization, the quadratic potential
//   Psi(s) = sum_w ( (M[s+1,t] a)_w - 1/n )^2
// whose per-round change must equal half the sum of squared matched-row gaps
// of the suffix window, plus the two norm bounds it implies:
//   sum_{s<=t} sum_pairs ( (M[s+1,t] a)_u - (M[s+1,t] a)_v )^2 <= 2 ||a||^2
//   sum_w ( (M[s+1,t] a)_w )^2 <= ||a||^2  for every suffix start s.
inline PsiIdentityCheck psi_identity_check(const std::vector<double>& a,
                                           const Schedule& schedule, long t) {
    require_stochastic_vector(a);
    if (t < 1) throw Error("psi_identity_check: need t >= 1");
    const int n = static_cast<int>(a.size());
    if (n != schedule.graph().node_count())
        throw Error("psi_identity_check: vector length must match the graph");
    const double inv_n = 1.0 / n;
    auto psi_of = [&](const std::vector<double>& c) {
        double acc = 0.0;
        for (double x : c) {
            double d = x - inv_n;
            acc += d * d;
        }
        return acc;
    };
    auto norm_of = [&](const std::vector<double>& c) {
        double acc = 0.0;
        for (double x : c) acc += x * x;
        return acc;
    };

    PsiIdentityCheck check;
    check.pair_sum_bound = 2.0 * norm2_sq(a);
    check.row_combo_bound = norm2_sq(a);

    std::vector<double> combo = a;  // (M[s+1,t] a), starting at s = t
    check.worst_row_combo = norm_of(combo);
    double psi = psi_of(combo);
    for (long s = t; s >= 1; --s) {
        Matching m = schedule.matching_at(s);
        double drop = 0.0;
        for (const auto& [u, v] : m.pairs) {
            double gap = combo[static_cast<std::size_t>(u)] - combo[static_cast<std::size_t>(v)];
            drop += 0.5 * gap * gap;
            check.pair_sum += gap * gap;
        }
        for (const auto& [u, v] : m.pairs) {
            double mean = 0.5 * (combo[static_cast<std::size_t>(u)] +
                                 combo[static_cast<std::size_t>(v)]);
            combo[static_cast<std::size_t>(u)] = mean;
            combo[static_cast<std::size_t>(v)] = mean;
        }
        double psi_prev = psi_of(combo);  // Psi(s-1)
        check.max_residual =
            std::max(check.max_residual, std::fabs(psi - psi_prev - drop));
        check.worst_row_combo = std::max(check.worst_row_combo, norm_of(combo));
        psi = psi_prev;
    }
    check.bound1_ok = check.pair_sum <= check.pair_sum_bound + 1e-12;
    check.bound2_ok = check.worst_row_combo <= check.row_combo_bound + 1e-12;
    return check;
}

}  // namespace balmat
