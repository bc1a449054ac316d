#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <json.hpp>

#include "balmat/matrix.hpp"
#include "balmat/schedule.hpp"

namespace balmat {

struct SmoothingResult {
    bool pass = false;
    double worst_disc = 0.0;

    nlohmann::json to_json() const {
        return nlohmann::json{{"pass", pass}, {"worst_disc", worst_disc}};
    }
};

// Exact worst case of the continuous process over the prefix [1,t]: an input
// with discrepancy at most K ends with discrepancy
//   K * max_{w,w'} sum_u max(M[1,t](u,w) - M[1,t](u,w'), 0).
// Passes iff that value is at most eps.
inline SmoothingResult check_smoothing(const Schedule& s, long t, double K,
                                       double eps) {
    if (t < 1) throw Error("check_smoothing: need t >= 1");
    MatD m = window_product<double>(s, 1, t);
    int n = m.size();
    double worst = 0.0;
    for (int w = 0; w < n; ++w)
        for (int w2 = 0; w2 < n; ++w2) {
            if (w == w2) continue;
            double acc = 0.0;
            for (int u = 0; u < n; ++u) {
                double d = m(u, w) - m(u, w2);
                if (d > 0.0) acc += d;
            }
            worst = std::max(worst, acc);
        }
    SmoothingResult res;
    res.worst_disc = K * worst;
    res.pass = res.worst_disc <= eps;
    return res;
}

struct GoodnessReport {
    long tau_global_estimate = 0;
    long tau_local_estimate = 0;
    double gamma_g_pass = 0.0;
    std::vector<double> gamma_l_pass;

    nlohmann::json to_json() const {
        return nlohmann::json{{"tau_global_estimate", tau_global_estimate},
                              {"tau_local_estimate", tau_local_estimate},
                              {"gamma_g_pass", gamma_g_pass},
                              {"gamma_l_pass", gamma_l_pass}};
    }
};

// Samples window start rounds and evaluates, for growing window lengths w,
//   global event: every row of M[t+1,t+w] is within 1/n^7 of uniform in
//                 squared l2 distance;
//   local event:  row u of M[t+1,t+w] has squared l2 norm <= 1/ln^10(n).
// Both quantities are non-increasing in w along a realization, so only the
// first passing window length per start (and per node) is needed.
//
// gamma_g_pass is the fraction of sampled starts whose global event holds at
// window tau_g; gamma_l_pass[u] likewise at window tau_l. The estimate fields
// hold the smallest tested window whose pass fraction reaches the target
// probabilities 1 - 1/n^3 (global) and 1 - 1/ln^11(n) (local); they are
// sampled estimates, not certificates, and are clamped to the largest tested
// window when the target is never reached.
inline GoodnessReport check_goodness(const Schedule& s, long tau_g, long tau_l,
                                     const std::vector<long>& start_rounds) {
    if (tau_g < 1 || tau_l < 1) throw Error("check_goodness: windows must be >= 1");
    if (start_rounds.empty()) throw Error("check_goodness: need at least one start");
    const int n = s.graph().node_count();
    const long max_w = std::max(tau_g, tau_l);
    const double global_thr = std::pow(static_cast<double>(n), -7.0);
    const double ln_n = std::log(static_cast<double>(n));
    const double local_thr = ln_n > 1.0
                                 ? 1.0 / std::pow(ln_n, 10.0)
                                 : std::numeric_limits<double>::infinity();

    const long none = max_w + 1;
    std::vector<long> first_global;
    std::vector<std::vector<long>> first_local;  // [start][node]
    for (long t : start_rounds) {
        MatD m = MatD::identity(n);
        long fg = none;
        std::vector<long> fl(n, none);
        for (long w = 1; w <= max_w; ++w) {
            m.right_mul_matching(s.matching_at(t + w).pairs);
            bool all_rows = true;
            for (int u = 0; u < n; ++u) {
                double d = row_dist_to_uniform_sq(m, u);
                if (fg == none && d > global_thr) all_rows = false;
                if (fl[u] == none && d + 1.0 / n <= local_thr) fl[u] = w;
            }
            if (fg == none && all_rows) fg = w;
            if (fg != none &&
                std::all_of(fl.begin(), fl.end(), [&](long x) { return x != none; }))
                break;
        }
        first_global.push_back(fg);
        first_local.push_back(std::move(fl));
    }

    const double starts = static_cast<double>(start_rounds.size());
    auto frac_global_at = [&](long w) {
        long c = 0;
        for (long f : first_global) c += (f <= w);
        return c / starts;
    };
    auto frac_local_at = [&](int u, long w) {
        long c = 0;
        for (const auto& fl : first_local) c += (fl[static_cast<std::size_t>(u)] <= w);
        return c / starts;
    };

    GoodnessReport rep;
    rep.gamma_g_pass = frac_global_at(tau_g);
    rep.gamma_l_pass.resize(n);
    for (int u = 0; u < n; ++u) rep.gamma_l_pass[u] = frac_local_at(u, tau_l);

    const double target_g = 1.0 - std::pow(static_cast<double>(n), -3.0);
    const double target_l =
        ln_n > 1.0 ? 1.0 - 1.0 / std::pow(ln_n, 11.0) : 0.0;
    rep.tau_global_estimate = max_w;
    for (long w = 1; w <= max_w; ++w)
        if (frac_global_at(w) >= target_g) {
            rep.tau_global_estimate = w;
            break;
        }
    rep.tau_local_estimate = max_w;
    for (long w = 1; w <= max_w; ++w) {
        bool all_nodes = true;
        for (int u = 0; u < n && all_nodes; ++u)
            all_nodes = frac_local_at(u, w) >= target_l;
        if (all_nodes) {
            rep.tau_local_estimate = w;
            break;
        }
    }
    return rep;
}

}  // namespace balmat
