#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "balmat/metrics.hpp"
#include "balmat/process.hpp"
#include "balmat/schedule.hpp"
#include "balmat/spectral.hpp"
#include "balmat/staircase.hpp"

namespace balmat {

using nlohmann::json;

// Configuration error carrying every violation found in one validation pass.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::vector<std::string>& problems)
        : Error(join(problems)), problems_(problems) {}
    const std::vector<std::string>& problems() const { return problems_; }

private:
    static std::string join(const std::vector<std::string>& ps) {
        std::string s = "invalid config:";
        for (const auto& p : ps) s += "\n  - " + p;
        return s;
    }
    std::vector<std::string> problems_;
};

struct ExperimentConfig {
    json graph_spec;
    std::string model_kind;  // circuit | random_matching | async_edge
    std::string engine = "standard";
    json initial_spec;
    std::int64_t K = 0;
    std::string rounds_kind = "tau_spectral";  // explicit | tau_spectral | staircase
    long rounds_t = 0;
    double multiplier = 8.0;
    long trials = 10;
    std::uint64_t seed = 1;
    bool obs_above_avg = false;
    std::optional<std::int64_t> y_level;
    long cadence = 1;
    std::string out_dir;
};

inline Graph build_graph(const json& spec) {
    if (spec.contains("file")) {
        std::ifstream in(spec.at("file").get<std::string>());
        if (!in) throw Error("graph: cannot open " + spec.at("file").get<std::string>());
        std::stringstream buf;
        buf << in.rdbuf();
        return load_graph(buf.str());
    }
    std::string family = spec.at("family").get<std::string>();
    if (family == "hypercube") return hypercube(spec.at("d").get<int>());
    if (family == "cycle") return cycle(spec.at("n").get<int>());
    if (family == "torus") return torus(spec.at("a").get<int>(), spec.at("b").get<int>());
    if (family == "complete") return complete(spec.at("n").get<int>());
    if (family == "random_regular")
        return random_regular(spec.at("n").get<int>(), spec.at("d").get<int>(),
                              spec.value("seed", std::uint64_t{1}));
    throw Error("graph: unknown family \"" + family +
                "\" (valid: hypercube, cycle, torus, complete, random_regular)");
}

inline std::unique_ptr<Schedule> build_schedule(const std::string& kind, const Graph& g,
                                                std::uint64_t seed) {
    if (kind == "circuit")
        return std::make_unique<CircuitSchedule>(g, edge_color(g));
    if (kind == "random_matching")
        return std::make_unique<RandomMatchingSchedule>(g, seed);
    if (kind == "async_edge")
        return std::make_unique<AsyncEdgeSchedule>(g, seed);
    throw Error("model: unknown kind \"" + kind +
                "\" (valid: circuit, random_matching, async_edge)");
}

inline ModelKind model_kind_of(const std::string& kind) {
    if (kind == "circuit") return ModelKind::circuit;
    if (kind == "random_matching") return ModelKind::random_matching;
    if (kind == "async_edge") return ModelKind::async_edge;
    throw Error("model: unknown kind \"" + kind +
                "\" (valid: circuit, random_matching, async_edge)");
}

inline LoadVector build_initial(const json& spec, int n, std::int64_t K,
                                std::uint64_t seed) {
    std::string kind = spec.at("kind").get<std::string>();
    std::vector<std::int64_t> v(static_cast<std::size_t>(n), 0);
    if (kind == "point") {
        v[0] = K;
    } else if (kind == "two_block") {
        for (int u = 0; u < n / 2; ++u) v[static_cast<std::size_t>(u)] = K;
    } else if (kind == "random_bounded") {
        CounterRng rng(derive_seed(spec.value("seed", seed), 0x696e6974ull));
        for (int u = 0; u < n; ++u)
            v[static_cast<std::size_t>(u)] = static_cast<std::int64_t>(
                rng.below(static_cast<std::uint64_t>(K) + 1, 0, static_cast<std::uint64_t>(u),
                          Tag::init));
    } else if (kind == "explicit") {
        auto vals = spec.at("values").get<std::vector<std::int64_t>>();
        if (static_cast<int>(vals.size()) != n)
            throw Error("initial: explicit vector length must equal the node count");
        v = std::move(vals);
    } else {
        throw Error("initial: unknown kind \"" + kind +
                    "\" (valid: point, two_block, random_bounded, explicit)");
    }
    LoadVector load(std::move(v));
    if (load.disc() > K) throw Error("initial: vector discrepancy exceeds K");
    return load;
}

// Parses and validates a config document, applying defaults
// (trials=10, cadence=1, multiplier=8). All schema violations are collected
// and reported together.
inline ExperimentConfig load_config(const std::string& text) {
    std::vector<std::string> problems;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError({std::string("not valid JSON: ") + e.what()});
    }
    ExperimentConfig cfg;
    try {

    if (!j.contains("graph")) {
        problems.emplace_back("missing \"graph\"");
    } else {
        cfg.graph_spec = j["graph"];
        try {
            build_graph(cfg.graph_spec);
        } catch (const std::exception& e) {
            problems.emplace_back(e.what());
        }
    }

    if (!j.contains("model")) {
        problems.emplace_back("missing \"model\"");
    } else {
        json m = j["model"];
        cfg.model_kind = m.is_string() ? m.get<std::string>()
                                       : m.value("kind", std::string{});
        if (cfg.model_kind == "async") cfg.model_kind = "async_edge";
        if (cfg.model_kind != "circuit" && cfg.model_kind != "random_matching" &&
            cfg.model_kind != "async_edge")
            problems.emplace_back("model: unknown kind \"" + cfg.model_kind +
                                  "\" (valid: circuit, random_matching, async_edge)");
    }

    cfg.engine = j.value("engine", std::string("standard"));
    if (cfg.engine != "standard" && cfg.engine != "continuous" && cfg.engine != "height")
        problems.emplace_back("engine: unknown kind \"" + cfg.engine +
                              "\" (valid: standard, continuous, height)");

    if (!j.contains("initial")) {
        problems.emplace_back("missing \"initial\"");
    } else {
        cfg.initial_spec = j["initial"];
        std::string kind = cfg.initial_spec.value("kind", std::string("point"));
        if (kind != "point" && kind != "two_block" && kind != "random_bounded" &&
            kind != "explicit")
            problems.emplace_back("initial: unknown kind \"" + kind +
                                  "\" (valid: point, two_block, random_bounded, explicit)");
        cfg.K = j.value("K", cfg.initial_spec.value("K", std::int64_t{0}));
        if (kind == "explicit" && cfg.K == 0 && cfg.initial_spec.contains("values")) {
            auto vals = cfg.initial_spec["values"].get<std::vector<std::int64_t>>();
            if (!vals.empty())
                cfg.K = *std::max_element(vals.begin(), vals.end()) -
                        *std::min_element(vals.begin(), vals.end());
        }
        if (cfg.K < 1) problems.emplace_back("initial: K must be >= 1");
    }

    if (j.contains("rounds")) {
        json r = j["rounds"];
        cfg.rounds_kind = r.is_string() ? r.get<std::string>()
                                        : r.value("kind", std::string("tau_spectral"));
        if (cfg.rounds_kind == "explicit") {
            cfg.rounds_t = r.is_object() ? r.value("t", long{-1}) : -1;
            if (cfg.rounds_t < 0) problems.emplace_back("rounds: explicit needs t >= 0");
        } else if (cfg.rounds_kind != "tau_spectral" && cfg.rounds_kind != "staircase") {
            problems.emplace_back("rounds: unknown kind \"" + cfg.rounds_kind +
                                  "\" (valid: explicit, tau_spectral, staircase)");
        }
        if (r.is_object() && r.contains("multiplier"))
            cfg.multiplier = r["multiplier"].get<double>();
    }
    if (j.contains("multiplier")) cfg.multiplier = j["multiplier"].get<double>();
    if (cfg.multiplier <= 0) problems.emplace_back("multiplier must be positive");

    cfg.trials = j.value("trials", long{10});
    if (cfg.trials < 1) problems.emplace_back("trials must be >= 1");
    cfg.seed = j.value("seed", std::uint64_t{1});

    if (j.contains("observers")) {
        json o = j["observers"];
        cfg.obs_above_avg = o.value("above_avg", false);
        if (o.contains("y_level")) cfg.y_level = o["y_level"].get<std::int64_t>();
        cfg.cadence = o.value("cadence", long{1});
        if (cfg.cadence < 1) problems.emplace_back("observers: cadence must be >= 1");
    }
    cfg.out_dir = j.value("out", std::string{});

    } catch (const json::exception& e) {
        problems.emplace_back(std::string("wrong field type: ") + e.what());
    }
    if (!problems.empty()) throw ConfigError(problems);
    return cfg;
}

// One line of trace output.
struct TraceRow {
    long round = 0;
    double disc = 0, max = 0, min = 0;
    std::optional<double> above_avg;
    std::optional<std::int64_t> y_count;

    json to_json() const {
        json j{{"round", round}, {"disc", disc}, {"max", max}, {"min", min}};
        if (above_avg) j["above_avg"] = *above_avg;
        if (y_count) j["y_count"] = *y_count;
        return j;
    }
};

struct TrialResult {
    double final_disc = 0;
    std::vector<TraceRow> trace;
    std::vector<StageVerdict> stages;
};

struct RunSummary {
    ExperimentConfig config;
    long rounds = 0;
    std::vector<TrialResult> trials;
    double wall_clock_sec = 0;

    json to_json() const {
        json j;
        j["trials"] = static_cast<long>(trials.size());
        j["rounds"] = rounds;
        j["seed"] = config.seed;
        json discs = json::array();
        for (const auto& t : trials) discs.push_back(t.final_disc);
        j["final_disc"] = discs;
        std::vector<double> sorted;
        for (const auto& t : trials) sorted.push_back(t.final_disc);
        std::sort(sorted.begin(), sorted.end());
        auto q = [&](double p) {
            return sorted[static_cast<std::size_t>(p * (sorted.size() - 1) + 0.5)];
        };
        j["quantiles"] = {{"min", sorted.front()}, {"p25", q(0.25)}, {"p50", q(0.5)},
                          {"p75", q(0.75)},        {"max", sorted.back()}};
        // aggregate curves over the common observation rounds
        json rounds_arr = json::array(), mean_arr = json::array(), max_arr = json::array();
        if (!trials.empty()) {
            std::size_t points = trials.front().trace.size();
            for (std::size_t k = 0; k < points; ++k) {
                double sum = 0, mx = 0;
                for (const auto& t : trials) {
                    sum += t.trace[k].disc;
                    mx = std::max(mx, t.trace[k].disc);
                }
                rounds_arr.push_back(trials.front().trace[k].round);
                mean_arr.push_back(sum / static_cast<double>(trials.size()));
                max_arr.push_back(mx);
            }
        }
        j["curves"] = {{"round", rounds_arr}, {"disc_mean", mean_arr}, {"disc_max", max_arr}};
        if (!trials.empty() && !trials.front().stages.empty()) {
            json stages = json::array();
            std::map<std::string, long> pass_counts;
            for (const auto& t : trials) {
                json per_trial = json::array();
                for (const auto& v : t.stages) {
                    per_trial.push_back(v.to_json());
                    if (v.pass) ++pass_counts[v.stage];
                }
                stages.push_back(std::move(per_trial));
            }
            j["stages"] = std::move(stages);
            j["stage_pass_counts"] = pass_counts;
        }
        j["wall_clock_sec"] = wall_clock_sec;
        return j;
    }
};

inline int harness_threads() {
    if (const char* env = std::getenv("BAL_THREADS")) {
        int t = std::atoi(env);
        if (t >= 1) return t;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// Executes the configured experiment: `trials` seeded runs, observed at the
// configured cadence (staircase mode records the stage rounds only). Trials
// run in parallel across BAL_THREADS workers; outputs are assembled by trial
// index, so results are identical regardless of the thread count.
inline RunSummary run_experiment(const ExperimentConfig& cfg) {
    auto started = std::chrono::steady_clock::now();
    Graph g = build_graph(cfg.graph_spec);
    const int n = g.node_count();

    // Spectral quantities an automatic rounds spec needs.
    std::optional<StaircaseSchedule> plan;
    long rounds = cfg.rounds_t;
    if (cfg.rounds_kind != "explicit") {
        ModelKind kind = model_kind_of(cfg.model_kind);
        double lam, base;
        int delta;
        if (kind == ModelKind::circuit) {
            CircuitSchedule circuit(g, edge_color(g));
            lam = lambda(window_product<double>(circuit, 1, circuit.width()));
            delta = circuit.width();
            base = delta / (1.0 - lam);
        } else {
            lam = lambda(diffusion_matrix(g));
            delta = g.max_degree();
            double p_min = kind == ModelKind::async_edge
                               ? 1.0 / g.edge_count()
                               : RandomMatchingSchedule(g, cfg.seed).p_min_exact();
            base = 1.0 / (p_min * delta * (1.0 - lam));
        }
        if (cfg.rounds_kind == "tau_spectral") {
            rounds = static_cast<long>(std::ceil(
                cfg.multiplier * base * std::log(static_cast<double>(cfg.K) * n)));
        } else {  // staircase
            plan = staircase_schedule(base, static_cast<double>(cfg.K), n, cfg.multiplier);
            rounds = plan->t_final;
        }
    }

    RunSummary summary;
    summary.config = cfg;
    summary.rounds = rounds;
    summary.trials.resize(static_cast<std::size_t>(cfg.trials));

    auto run_trial = [&](long trial) {
        std::uint64_t trial_seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(trial));
        std::uint64_t schedule_seed = derive_seed(trial_seed, 0xAA);
        std::uint64_t process_seed = derive_seed(trial_seed, 0xBB);
        auto schedule = build_schedule(cfg.model_kind, g, schedule_seed);
        LoadVector x0 = build_initial(cfg.initial_spec, n, cfg.K,
                                      derive_seed(cfg.seed, 0xCC));
        TrialResult& result = summary.trials[static_cast<std::size_t>(trial)];

        auto want_row = [&](long r) {
            if (plan)
                return r == plan->t0 || r == plan->t_phase1 || r == plan->t1 ||
                       r == plan->t2 || r == plan->t_final || r == 0;
            return r % cfg.cadence == 0 || r == rounds;
        };
        auto record = [&](long r, const LoadVector& s) {
            if (!want_row(r)) return;
            TraceRow row;
            row.round = r;
            row.disc = static_cast<double>(s.disc());
            row.max = static_cast<double>(s.max());
            row.min = static_cast<double>(s.min());
            if (cfg.obs_above_avg) row.above_avg = above_average(s).value();
            if (cfg.y_level) row.y_count = y_at_level(s, *cfg.y_level);
            result.trace.push_back(row);
        };

        if (cfg.engine == "standard") {
            StaircaseSnapshots snaps;
            CounterRng rng(process_seed);
            LoadVector final_load = run_standard(
                x0, *schedule, rounds, rng, [&](long r, const LoadVector& s) {
                    record(r, s);
                    if (plan) {
                        if (r == plan->t0) snaps.at_t0 = s;
                        if (r == plan->t_phase1) snaps.at_phase1 = s;
                        if (r == plan->t1) snaps.at_t1 = s;
                        if (r == plan->t2) snaps.at_t2 = s;
                        if (r == plan->t_final) snaps.at_final = s;
                    }
                });
            result.final_disc = static_cast<double>(final_load.disc());
            if (plan) result.stages = stage_verdicts(x0, snaps, *plan);
        } else if (cfg.engine == "continuous") {
            std::vector<double> xi(x0.x.begin(), x0.x.end());
            std::vector<double> end = run_continuous<double>(
                xi, *schedule, rounds, [&](long r, const std::vector<double>& s) {
                    if (!want_row(r)) return;
                    auto [mn, mx] = std::minmax_element(s.begin(), s.end());
                    result.trace.push_back(TraceRow{r, *mx - *mn, *mx, *mn, {}, {}});
                });
            auto [mn, mx] = std::minmax_element(end.begin(), end.end());
            result.final_disc = *mx - *mn;
        } else {  // height
            TokenState ts = TokenState::from_loads(x0);
            CounterRng rng(process_seed);
            TokenState end = run_height(ts, *schedule, rounds, rng,
                                        [&](long r, const TokenState& s) {
                                            if (want_row(r)) record(r, s.loads());
                                        });
            result.final_disc = static_cast<double>(end.loads().disc());
        }
    };

    const int workers = std::min<long>(harness_threads(), cfg.trials);
    if (workers <= 1) {
        for (long t = 0; t < cfg.trials; ++t) run_trial(t);
    } else {
        std::atomic<long> next{0};
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&]() {
                for (long t = next.fetch_add(1); t < cfg.trials; t = next.fetch_add(1))
                    run_trial(t);
            });
        for (auto& th : pool) th.join();
    }

    summary.wall_clock_sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return summary;
}

inline void write_outputs(const RunSummary& summary, const std::string& dir) {
    {
        std::ofstream out(dir + "/summary.json");
        out << summary.to_json().dump(2) << '\n';
    }
    {
        std::ofstream out(dir + "/trace.jsonl");
        if (!summary.trials.empty())
            for (const auto& row : summary.trials.front().trace)
                out << row.to_json().dump() << '\n';
    }
    if (!summary.trials.empty() && !summary.trials.front().stages.empty()) {
        std::ofstream out(dir + "/stages.csv");
        out << stages_csv_header() << '\n';
        for (const auto& trial : summary.trials)
            for (const auto& v : trial.stages) out << stages_csv_row(v) << '\n';
    }
}

// Expands a sweep document into individual configs. Either an explicit list
// under "configs", or a "base" document plus a "grid" of dotted parameter
// paths to value lists (cartesian product).
inline std::vector<json> expand_sweep(const json& doc) {
    std::vector<json> out;
    if (doc.contains("configs")) {
        for (const auto& c : doc["configs"]) out.push_back(c);
        return out;
    }
    if (!doc.contains("base") || !doc.contains("grid"))
        throw ConfigError({"sweep: need either \"configs\" or \"base\" + \"grid\""});
    std::vector<std::pair<std::string, json>> axes;
    for (const auto& [key, values] : doc["grid"].items()) {
        if (!values.is_array() || values.empty())
            throw ConfigError({"sweep: grid entry \"" + key + "\" must be a non-empty array"});
        std::string pointer = "/" + key;
        for (auto& c : pointer)
            if (c == '.') c = '/';
        axes.emplace_back(pointer, values);
    }
    std::vector<std::size_t> idx(axes.size(), 0);
    while (true) {
        json cfg = doc["base"];
        for (std::size_t a = 0; a < axes.size(); ++a)
            cfg[json::json_pointer(axes[a].first)] = axes[a].second[idx[a]];
        out.push_back(std::move(cfg));
        std::size_t pos = 0;
        while (pos < axes.size() && ++idx[pos] == axes[pos].second.size()) {
            idx[pos] = 0;
            ++pos;
        }
        if (pos == axes.size()) break;
    }
    return out;
}

}  // namespace balmat
