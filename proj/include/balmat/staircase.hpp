#pragma once

#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "balmat/metrics.hpp"
#include "balmat/process.hpp"
#include "balmat/spectral.hpp"

namespace balmat {

// Round counts for the stage-by-stage reduction of the discrepancy, derived
// from the model's spectral base B:
//   circuit:         B = width / (1 - lambda(period product))
//   random matching: B = 1 / (p_min * max_degree * (1 - lambda(P)))
//   single edge:     same with p_min = 1/|E|
// with mixing windows tau_global = ceil(multiplier * B * ln n) and
// tau_local = ceil(multiplier * B * lnln n). The stage rounds are
//   t0      = ceil(3 * tau_global * ln(2Kn) / ln n)
//   t1, t2  = two increments of ceil(2*tau_global + 6*ell*tau_local)
//   t_final = one increment of ceil(2*tau_global + 20*ell*tau_local)
// where ell = ln n / lnln n.
struct StaircaseSchedule {
    long tau_global = 0;
    long tau_local = 0;
    double ell = 0.0;
    long t0 = 0;        // load above the average drops to linear
    long t_phase1 = 0;  // high tokens drop to n/ln n
    long t1 = 0;        // discrepancy 38
    long t2 = 0;        // discrepancy 4
    long t_final = 0;   // discrepancy 3
};

inline StaircaseSchedule staircase_schedule(double spectral_base, double K, int n,
                                            double multiplier) {
    if (n < 3) throw Error("staircase: need n >= 3");
    if (multiplier <= 0) throw Error("staircase: multiplier must be positive");
    if (K < 1) throw Error("staircase: need K >= 1");
    const double ln_n = std::log(static_cast<double>(n));
    const double lnln_n = std::log(ln_n);
    if (!(lnln_n > 0)) throw Error("staircase: need ln(ln(n)) > 0");
    StaircaseSchedule s;
    s.tau_global = static_cast<long>(std::ceil(multiplier * spectral_base * ln_n));
    s.tau_local = static_cast<long>(std::ceil(multiplier * spectral_base * lnln_n));
    s.ell = ln_n / lnln_n;
    s.t0 = static_cast<long>(std::ceil(3.0 * s.tau_global * std::log(2.0 * K * n) / ln_n));
    long incr = static_cast<long>(std::ceil(2.0 * s.tau_global + 6.0 * s.ell * s.tau_local));
    long incr_final =
        static_cast<long>(std::ceil(2.0 * s.tau_global + 20.0 * s.ell * s.tau_local));
    s.t_phase1 = s.t0 + static_cast<long>(std::ceil(s.tau_global + s.ell * s.tau_local));
    s.t1 = s.t0 + incr;
    s.t2 = s.t1 + incr;
    s.t_final = s.t2 + incr_final;
    return s;
}

struct StageVerdict {
    std::string stage;
    long round = 0;
    double threshold = 0.0;
    double observed = 0.0;
    bool pass = false;

    nlohmann::json to_json() const {
        return nlohmann::json{{"stage", stage},
                              {"round", round},
                              {"threshold", threshold},
                              {"observed", observed},
                              {"pass", pass}};
    }
};

struct StaircaseSnapshots {
    LoadVector at_t0, at_phase1, at_t1, at_t2, at_final;
};

// Stage thresholds measured on the snapshots of one run. Pure measurement,
// no adaptivity. The shifted views use L = 17 above the exact average
// ceiling, matching the constant budget of the linear-token stage.
inline std::vector<StageVerdict> stage_verdicts(const LoadVector& x0,
                                                const StaircaseSnapshots& snaps,
                                                const StaircaseSchedule& plan) {
    const int n = x0.size();
    const double ln_n = std::log(static_cast<double>(n));
    const std::int64_t shift = ceil_average(x0) + 17;
    const LoadVector& at_t0 = snaps.at_t0;
    const LoadVector& at_phase1 = snaps.at_phase1;
    const LoadVector& at_t1 = snaps.at_t1;
    const LoadVector& at_t2 = snaps.at_t2;
    const LoadVector& at_final = snaps.at_final;

    std::vector<StageVerdict> out;
    auto add = [&out](const std::string& name, long round, double threshold,
                      double observed, bool pass) {
        out.push_back({name, round, threshold, observed, pass});
    };

    Frac above = above_average(at_t0);
    add("tokens_above_avg", plan.t0, 16.0 * n, above.value(),
        above <= 16 * static_cast<std::int64_t>(n));
    double disc_bound = std::sqrt(48.0 * ln_n) + 1.0;
    add("disc_sqrt_48_log_n", plan.t0, disc_bound,
        static_cast<double>(at_t0.disc()),
        static_cast<double>(at_t0.disc()) <= disc_bound);
    std::int64_t high = y_at_level(at_phase1, shift);
    add("phase1_high_tokens", plan.t_phase1, static_cast<double>(n) / ln_n,
        static_cast<double>(high), static_cast<double>(high) <= n / ln_n);
    std::int64_t top = 0;
    for (std::int64_t e : at_t1.x) top = std::max(top, std::max<std::int64_t>(e - shift, 0));
    add("phase2_top_level", plan.t1, 1.0, static_cast<double>(top), top <= 1);
    add("max_load_L_plus_1", plan.t1, static_cast<double>(shift + 1),
        static_cast<double>(at_t1.max()), at_t1.max() <= shift + 1);
    add("disc_38", plan.t1, 38.0, static_cast<double>(at_t1.disc()), at_t1.disc() <= 38);
    add("disc_4", plan.t2, 4.0, static_cast<double>(at_t2.disc()), at_t2.disc() <= 4);
    add("disc_3", plan.t_final, 3.0, static_cast<double>(at_final.disc()),
        at_final.disc() <= 3);
    return out;
}

// Runs the standard process once and measures every stage.
inline std::vector<StageVerdict> staircase_report(const LoadVector& x0,
                                                  const Schedule& schedule,
                                                  const StaircaseSchedule& plan,
                                                  std::uint64_t process_seed) {
    StaircaseSnapshots snaps;
    CounterRng rng(process_seed);
    run_standard(x0, schedule, plan.t_final, rng, [&](long r, const LoadVector& s) {
        if (r == plan.t0) snaps.at_t0 = s;
        if (r == plan.t_phase1) snaps.at_phase1 = s;
        if (r == plan.t1) snaps.at_t1 = s;
        if (r == plan.t2) snaps.at_t2 = s;
        if (r == plan.t_final) snaps.at_final = s;
    });
    return stage_verdicts(x0, snaps, plan);
}

inline std::string stages_csv_header() { return "stage,round,threshold,observed,pass"; }

inline std::string stages_csv_row(const StageVerdict& v) {
    std::ostringstream os;
    os << v.stage << ',' << v.round << ',' << v.threshold << ',' << v.observed << ','
       << (v.pass ? "true" : "false");
    return os.str();
}

}  // namespace balmat
