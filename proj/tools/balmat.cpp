// Command-line front end: graph generation, experiment runs, spectral and
// smoothing/goodness reports, invariant suites, and config sweeps.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "balmat/config.hpp"
#include "balmat/smoothing.hpp"
#include "balmat/spectral.hpp"
#include "balmat/suites.hpp"

namespace {

using namespace balmat;

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

ExperimentConfig config_from_file(const std::string& path) {
    return load_config(read_file(path));
}

int cmd_gen_graph(const std::string& family, int d, int n, int a, int b,
                  std::uint64_t seed, const std::string& out_path) {
    json spec;
    spec["family"] = family;
    if (family == "hypercube") spec["d"] = d;
    if (family == "cycle" || family == "complete") spec["n"] = n;
    if (family == "torus") { spec["a"] = a; spec["b"] = b; }
    if (family == "random_regular") { spec["n"] = n; spec["d"] = d; spec["seed"] = seed; }
    Graph g = build_graph(spec);
    std::ofstream out(out_path);
    if (!out) throw Error("cannot write " + out_path);
    out << save_graph(g);
    std::cerr << "wrote " << g.node_count() << " nodes, " << g.edge_count()
              << " edges to " << out_path << "\n";
    return 0;
}

int cmd_run(const ExperimentConfig& cfg) {
    RunSummary summary = run_experiment(cfg);
    std::string dir = cfg.out_dir.empty() ? "." : cfg.out_dir;
    std::filesystem::create_directories(dir);
    write_outputs(summary, dir);
    std::cout << summary.to_json().dump(2) << "\n";
    return 0;
}

int cmd_spectral(const ExperimentConfig& cfg, long measure_rounds) {
    Graph g = build_graph(cfg.graph_spec);
    ModelKind kind = model_kind_of(cfg.model_kind);
    SpectralReport rep;
    if (kind == ModelKind::circuit) {
        CircuitSchedule circuit(g, edge_color(g));
        rep = spectral_report(g, kind, static_cast<double>(cfg.K), cfg.multiplier,
                              &circuit);
    } else {
        std::optional<double> measured;
        if (measure_rounds > 0) {
            auto schedule = build_schedule(cfg.model_kind, g, cfg.seed);
            auto freq = measure_p_min(*schedule, measure_rounds);
            measured = *std::min_element(freq.begin(), freq.end());
        }
        rep = spectral_report(g, kind, static_cast<double>(cfg.K), cfg.multiplier,
                              nullptr, measured);
    }
    std::cout << rep.to_json().dump(2) << "\n";
    return 0;
}

int cmd_smoothing(const ExperimentConfig& cfg, long t, double eps) {
    Graph g = build_graph(cfg.graph_spec);
    auto schedule = build_schedule(cfg.model_kind, g, cfg.seed);
    SmoothingResult res = check_smoothing(*schedule, t, static_cast<double>(cfg.K), eps);
    std::cout << res.to_json().dump(2) << "\n";
    return res.pass ? 0 : 1;
}

int cmd_goodness(const ExperimentConfig& cfg, long tau_g, long tau_l, long starts) {
    Graph g = build_graph(cfg.graph_spec);
    auto schedule = build_schedule(cfg.model_kind, g, cfg.seed);
    std::vector<long> start_rounds;
    if (auto* circuit = dynamic_cast<CircuitSchedule*>(schedule.get())) {
        // one period of offsets suffices for a periodic schedule
        for (int k = 0; k < circuit->width(); ++k) start_rounds.push_back(k);
    } else {
        for (long k = 0; k < starts; ++k)
            start_rounds.push_back(k * std::max<long>(tau_g, tau_l));
    }
    GoodnessReport rep = check_goodness(*schedule, tau_g, tau_l, start_rounds);
    std::cout << rep.to_json().dump(2) << "\n";
    return 0;
}

int cmd_verify(const std::string& suite, std::uint64_t seed) {
    int failures = 0;
    bool matched = false;
    for (const Suite& s : verify_suites()) {
        if (!suite.empty() && s.name != suite) continue;
        matched = true;
        SuiteResult res = s.run(seed);
        std::cout << (res.pass ? "[ ok ] " : "[FAIL] ") << s.name << ": " << res.detail
                  << "\n";
        if (!res.pass) ++failures;
    }
    if (!suite.empty() && !matched) {
        std::ostringstream names;
        for (const Suite& s : verify_suites()) names << ' ' << s.name;
        std::cerr << "unknown suite \"" << suite << "\"; available:" << names.str()
                  << "\n";
        return 2;
    }
    return failures == 0 ? 0 : 1;
}

int cmd_sweep(const std::string& path, const std::string& out_dir) {
    json doc = json::parse(read_file(path));
    std::vector<json> configs = expand_sweep(doc);
    json index = json::array();
    for (std::size_t i = 0; i < configs.size(); ++i) {
        ExperimentConfig cfg = load_config(configs[i].dump());
        std::string dir = out_dir + "/sweep_" + std::to_string(i);
        std::filesystem::create_directories(dir);
        RunSummary summary = run_experiment(cfg);
        write_outputs(summary, dir);
        index.push_back({{"dir", dir}, {"config", configs[i]}});
        std::cerr << "sweep " << i + 1 << "/" << configs.size() << " done\n";
    }
    std::ofstream out(out_dir + "/index.json");
    out << index.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"matching-based iterative load balancing: simulator and checks"};
    app.require_subcommand(1);

    // gen-graph
    auto* gen = app.add_subcommand("gen-graph", "write an edge-list file");
    std::string family = "hypercube", out_path = "graph.edges";
    int gg_d = 3, gg_n = 8, gg_a = 3, gg_b = 3;
    std::uint64_t gg_seed = 1;
    gen->add_option("--family", family,
                    "hypercube | cycle | torus | complete | random_regular");
    gen->add_option("--d", gg_d, "dimension (hypercube) or degree (random_regular)");
    gen->add_option("--n", gg_n, "node count (cycle, complete, random_regular)");
    gen->add_option("--a", gg_a, "torus rows");
    gen->add_option("--b", gg_b, "torus columns");
    gen->add_option("--seed", gg_seed, "seed (random_regular)");
    gen->add_option("--out", out_path, "output path");

    // shared options for config-driven subcommands
    std::string config_path;
    std::uint64_t seed_override = 0;
    bool seed_set = false;
    long trials_override = 0;
    std::string out_override;
    double multiplier_override = 0;

    auto add_common = [&](CLI::App* cmd, bool need_config) {
        auto* opt = cmd->add_option("--config", config_path, "config JSON path");
        if (need_config) opt->required();
        cmd->add_option("--seed", seed_override, "seed override")
            ->each([&](const std::string&) { seed_set = true; });
        cmd->add_option("--trials", trials_override, "trials override");
        cmd->add_option("--out", out_override, "output directory override");
        cmd->add_option("--multiplier", multiplier_override, "multiplier override");
    };

    auto* run = app.add_subcommand("run", "execute an experiment config");
    add_common(run, true);

    auto* spectral = app.add_subcommand("spectral", "print the spectral report");
    add_common(spectral, true);
    long measure_rounds = 0;
    spectral->add_option("--measure", measure_rounds,
                         "measure p_min over this many rounds instead of the exact value");

    auto* smoothing = app.add_subcommand("smoothing", "worst-case smoothing check");
    add_common(smoothing, true);
    long sm_t = 1;
    double sm_eps = 1.0;
    smoothing->add_option("--t", sm_t, "prefix length")->required();
    smoothing->add_option("--eps", sm_eps, "target discrepancy");

    auto* goodness = app.add_subcommand("goodness", "window mixing report");
    add_common(goodness, true);
    long tau_g = 1, tau_l = 1, starts = 4;
    goodness->add_option("--tau-global", tau_g, "global window")->required();
    goodness->add_option("--tau-local", tau_l, "local window")->required();
    goodness->add_option("--starts", starts, "sampled start rounds (random models)");

    auto* verify = app.add_subcommand("verify", "run the invariant suites");
    std::string suite;
    std::uint64_t verify_seed = 1;
    verify->add_option("--suite", suite, "run a single suite by name");
    verify->add_option("--seed", verify_seed, "suite seed");

    auto* sweep = app.add_subcommand("sweep", "run a config grid");
    std::string sweep_out = "sweep_out";
    sweep->add_option("--config", config_path, "sweep JSON path")->required();
    sweep->add_option("--out", sweep_out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (gen->parsed())
            return cmd_gen_graph(family, gg_d, gg_n, gg_a, gg_b, gg_seed, out_path);
        if (verify->parsed()) return cmd_verify(suite, verify_seed);
        if (sweep->parsed()) return cmd_sweep(config_path, sweep_out);

        ExperimentConfig cfg = config_from_file(config_path);
        if (seed_set) cfg.seed = seed_override;
        if (trials_override > 0) cfg.trials = trials_override;
        if (!out_override.empty()) cfg.out_dir = out_override;
        if (multiplier_override > 0) cfg.multiplier = multiplier_override;

        if (run->parsed()) return cmd_run(cfg);
        if (spectral->parsed()) return cmd_spectral(cfg, measure_rounds);
        if (smoothing->parsed()) return cmd_smoothing(cfg, sm_t, sm_eps);
        if (goodness->parsed()) return cmd_goodness(cfg, tau_g, tau_l, starts);
    } catch (const ConfigError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
