#pragma once

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rmlab/io.hpp"

namespace rmlab::cli {

// exit codes: 0 success, 2 validation error, 3 budget or resource error

namespace detail {

inline std::vector<double> parse_grid(const std::string& csv) {
    std::vector<double> g;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) g.push_back(std::stod(tok));
    return g;
}

struct CommonState {
    ExperimentConfig cfg;
    std::string out_dir = ".";
    std::string t_grid_csv, l_grid_csv;
    std::string x_spec;
    double radius = 0.0;
    double grid_res = 0.0;
    int64_t big_n = 64;
    std::string mode_str = "pair"; // sweep: pair | sup; smoothing: P | Q
    int depth = 2;
    bool check_union = false;
    std::string manifest_path;
    bool replay = false;
};

inline std::string outpath(const CommonState& st, const std::string& name) {
    std::filesystem::create_directories(st.out_dir);
    return (std::filesystem::path(st.out_dir) / name).string();
}

inline void finish_manifest(const CommonState& st, RunManifest& m, const std::string& name) {
    m.finished = now_iso8601();
    m.config = config_to_json(st.cfg);
    write_manifest(outpath(st, name), m);
}

int dispatch_parsed(const std::string& cmd, CommonState& st, RunManifest manifest);

} // namespace detail

inline int dispatch(const std::vector<std::string>& args) {
    using detail::CommonState;
    CommonState st;
    // precedence: defaults < config file < flags
    for (size_t i = 0; i + 1 < args.size(); ++i) {
        if (args[i] == "--config") {
            std::ifstream in(args[i + 1]);
            if (!in) {
                std::cerr << "config: unreadable file " << args[i + 1] << "\n";
                return 2;
            }
            try {
                nlohmann::json j;
                in >> j;
                config_from_json(j, st.cfg);
            } catch (const std::exception& e) {
                std::cerr << "config: " << e.what() << "\n";
                return 2;
            }
        }
    }

    CLI::App app{"random-matrix singularity laboratory"};
    app.require_subcommand(1);
    std::string config_dummy;
    app.add_option("--config", config_dummy, "JSON config file (merged before flags)");

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--dist", st.cfg.dist_spec, "distribution: ber:p | rademacher | uniform:a1,a2,... | file.json");
        sub->add_option("--n", st.cfg.n, "matrix dimension / vector length");
        sub->add_option("--samples", st.cfg.samples, "Monte Carlo sample count");
        sub->add_option("--trials", st.cfg.trials, "experiment trials");
        sub->add_option("--seed", st.cfg.seed, "root seed; all randomness flows from it");
        sub->add_option("--workers", st.cfg.workers, "worker threads");
        sub->add_option("--budget", st.cfg.budget, "enumeration / DP budget");
        sub->add_option("--out-dir", st.out_dir, "output directory");
        sub->add_option("--config", config_dummy, "JSON config file (merged before flags)");
    };

    auto* c_exact = app.add_subcommand("exact", "exact singularity probability by enumeration");
    add_common(c_exact);
    bool want_union = false;
    c_exact->add_flag("--union", want_union, "enumerate the dominant union instead");

    auto* c_mc = app.add_subcommand("mc", "Monte Carlo singularity frequency");
    add_common(c_mc);
    c_mc->add_flag("--check-union", st.check_union, "classify the dominant union per sample");

    auto* c_levy = app.add_subcommand("levy", "concentration function of sum b_i x_i");
    add_common(c_levy);
    c_levy->add_option("--x", st.x_spec, "coordinates: CSV file or inline JSON array")->required();
    c_levy->add_option("--r", st.radius, "window radius");

    auto* c_threshold = app.add_subcommand("threshold", "largest scale where concentration beats L t");
    add_common(c_threshold);
    c_threshold->add_option("--x", st.x_spec, "unit vector: CSV file or inline JSON array")->required();
    c_threshold->add_option("--L", st.cfg.L, "threshold slope");
    c_threshold->add_option("--grid", st.grid_res, "report resolution (0 = exact scan)");

    auto* c_tail = app.add_subcommand("tail", "lower-tail curve of the smallest singular value");
    add_common(c_tail);
    c_tail->add_option("--t-grid", st.t_grid_csv, "comma-separated t values in [0,2]");

    auto* c_structure = app.add_subcommand("structure", "kernel-vector structure dichotomy");
    add_common(c_structure);
    c_structure->add_option("--delta", st.cfg.delta, "almost-constant band fraction");
    c_structure->add_option("--rho", st.cfg.rho, "almost-constant window scale");
    c_structure->add_option("--r0", st.cfg.r0, "classifier radius");
    c_structure->add_option("--tau0", st.cfg.tau0, "classifier cutoff");

    auto* c_compress = app.add_subcommand("compressible", "infimum over the almost-constant net");
    add_common(c_compress);
    c_compress->add_option("--t", st.cfg.t_net, "event threshold");
    c_compress->add_option("--net-budget", st.cfg.net_budget, "quantized profiles in the net");
    c_compress->add_option("--delta", st.cfg.delta, "almost-constant band fraction");
    c_compress->add_option("--rho", st.cfg.rho, "almost-constant window scale");

    auto* c_sweep = app.add_subcommand("sweep", "anticoncentration margin sweep");
    add_common(c_sweep);
    c_sweep->add_option("--theta", st.cfg.theta, "window radius");
    c_sweep->add_option("--delta-prime", st.cfg.delta_prime, "elementary rejection radius");
    c_sweep->add_option("--mode", st.mode_str, "pair | sup");

    auto* c_smoothing = app.add_subcommand("smoothing", "averaged-function exceedance curves");
    add_common(c_smoothing);
    c_smoothing->add_option("--N", st.big_n, "admissible scale N");
    c_smoothing->add_option("--L-grid", st.l_grid_csv, "comma-separated exceedance thresholds");
    c_smoothing->add_option("--mode", st.mode_str, "admissible block mode: P | Q");
    c_smoothing->add_option("--delta", st.cfg.delta, "admissible head fraction");
    c_smoothing->add_option("--epsilon", st.cfg.epsilon, "entropy margin (reported)");

    auto* c_report = app.add_subcommand("report", "summarize or replay a manifest");
    c_report->add_option("--manifest", st.manifest_path, "manifest file")->required();
    c_report->add_flag("--replay", st.replay, "re-run the recorded command");
    c_report->add_option("--out-dir", st.out_dir, "output directory for the replay");

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }

    RunManifest manifest;
    manifest.argv = args;
    manifest.started = now_iso8601();

    std::string cmd;
    for (auto* sub : app.get_subcommands()) cmd = sub->get_name();
    manifest.command = cmd;
    if (cmd == "exact" && want_union) st.check_union = true;
    if (!st.t_grid_csv.empty()) st.cfg.t_grid = detail::parse_grid(st.t_grid_csv);

    try {
        return detail::dispatch_parsed(cmd, st, std::move(manifest));
    } catch (const BudgetError& e) {
        std::cerr << "budget: " << e.what() << "\n";
        return 3;
    } catch (const ValidationError& e) {
        std::cerr << "invalid: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

namespace detail {

inline int dispatch_parsed(const std::string& cmd, CommonState& st, RunManifest manifest) {
    using nlohmann::json;
    if (cmd == "exact") {
        auto d = parse_dist(st.cfg.dist_spec);
        auto res = st.check_union
                       ? enumerate_dominant_union(d, st.cfg.n, st.cfg.budget, st.cfg.workers)
                       : enumerate_singularity(d, st.cfg.n, st.cfg.budget, st.cfg.workers);
        std::cout << res.probability.to_string() << "\n";
        json out{{"distribution", st.cfg.dist_spec},
                 {"n", st.cfg.n},
                 {"event", st.check_union ? "dominant_union" : "singular"},
                 {"probability", res.probability.to_string()},
                 {"scanned", res.matrices_scanned},
                 {"seconds", res.elapsed_seconds}};
        std::ofstream(outpath(st, "exact.json"), std::ios::binary) << out.dump(2) << "\n";
        manifest.outputs = {"exact.json"};
        finish_manifest(st, manifest, "exact_manifest.json");
        return 0;
    }
    if (cmd == "mc") {
        auto d = parse_dist(st.cfg.dist_spec);
        auto res = mc_singularity(d, st.cfg, st.check_union);
        std::cout << fmt_double(res.estimate) << " +- " << fmt_double(res.stderr_)
                  << " (ratio " << fmt_double(res.ratio_to_conjecture) << ")\n";
        json out{{"distribution", st.cfg.dist_spec},
                 {"n", st.cfg.n},
                 {"samples", res.samples},
                 {"hits", res.hits},
                 {"estimate", res.estimate},
                 {"stderr", res.stderr_},
                 {"ratio_to_conjecture", res.ratio_to_conjecture},
                 {"exact_confirms", res.exact_confirms},
                 {"union_hits", res.union_hits},
                 {"union_violations", res.union_violations},
                 {"screen_primes", {res.primes.p1, res.primes.p2}},
                 {"seconds", res.seconds}};
        std::ofstream(outpath(st, "mc.json"), std::ios::binary) << out.dump(2) << "\n";
        manifest.outputs = {"mc.json"};
        finish_manifest(st, manifest, "mc_manifest.json");
        return 0;
    }
    if (cmd == "levy") {
        auto d = parse_dist(st.cfg.dist_spec);
        auto xs = parse_vector(st.x_spec);
        // parsed coordinates are exact rationals, so the result is exact
        std::vector<Rational> xr;
        for (double v : xs) xr.push_back(Rational::from_double_exact(v));
        auto s = sum_dist(d, xr, st.cfg.budget);
        Rational val = levy_exact(s, Rational::from_double_exact(st.radius));
        std::cout << val.to_string() << "\n";
        json out{{"distribution", st.cfg.dist_spec},
                 {"r", st.radius},
                 {"coords", xs.size()},
                 {"levy", val.to_string()},
                 {"exact", true}};
        std::ofstream(outpath(st, "levy.json"), std::ios::binary) << out.dump(2) << "\n";
        manifest.outputs = {"levy.json"};
        finish_manifest(st, manifest, "levy_manifest.json");
        return 0;
    }
    if (cmd == "threshold") {
        auto d = parse_dist(st.cfg.dist_spec);
        auto xs = parse_vector(st.x_spec);
        double t = threshold_scale(d, xs, st.cfg.L, st.grid_res, st.cfg.budget);
        std::cout << fmt_double(t) << "\n";
        json out{{"distribution", st.cfg.dist_spec},
                 {"L", st.cfg.L},
                 {"grid", st.grid_res},
                 {"threshold", t}};
        std::ofstream(outpath(st, "threshold.json"), std::ios::binary) << out.dump(2) << "\n";
        manifest.outputs = {"threshold.json"};
        finish_manifest(st, manifest, "threshold_manifest.json");
        return 0;
    }
    if (cmd == "tail") {
        auto d = parse_dist(st.cfg.dist_spec);
        auto curve = tail_curve(d, st.cfg);
        std::vector<std::vector<std::string>> rows;
        for (const auto& r : curve.rows)
            rows.push_back({fmt_double(r.t), fmt_double(r.p_hat), fmt_double(r.stderr_),
                            fmt_double(r.predicted)});
        write_csv(outpath(st, "tail.csv"), "t,p_hat,stderr,predicted", rows);
        std::cout << "c_fit " << fmt_double(curve.c_fit) << "\n";
        manifest.outputs = {"tail.csv"};
        finish_manifest(st, manifest, "tail_manifest.json");
        return 0;
    }
    if (cmd == "structure") {
        auto d = parse_dist(st.cfg.dist_spec);
        auto res = structure_dichotomy(d, st.cfg);
        std::vector<std::vector<std::string>> rows;
        for (const auto& r : res.rows)
            rows.push_back({std::to_string(r.trial), r.cons ? "1" : "0",
                            fmt_double(r.levy_estimate), fmt_double(r.levy_stderr)});
        write_csv(outpath(st, "dichotomy.csv"), "trial,cons,levy_estimate,levy_stderr", rows);
        std::cout << "cons " << fmt_double(res.frac_cons) << " small "
                  << fmt_double(res.frac_small_threshold) << " neither "
                  << fmt_double(res.frac_neither) << "\n";
        json out{{"frac_cons", res.frac_cons},
                 {"frac_small_threshold", res.frac_small_threshold},
                 {"frac_neither", res.frac_neither},
                 {"r0", st.cfg.r0},
                 {"tau0", st.cfg.tau0}};
        std::ofstream(outpath(st, "structure.json"), std::ios::binary) << out.dump(2) << "\n";
        manifest.outputs = {"dichotomy.csv", "structure.json"};
        finish_manifest(st, manifest, "structure_manifest.json");
        return 0;
    }
    if (cmd == "compressible") {
        auto d = parse_dist(st.cfg.dist_spec);
        auto res = compressible_trial(d, st.cfg);
        json out{{"frequency", res.frequency},   {"stderr", res.stderr_},
                 {"rhs_dominant", res.rhs_dominant}, {"rhs_tail", res.rhs_tail},
                 {"eta_fit", res.eta_fit},       {"net_size", res.net_size},
                 {"hits", res.hits},             {"t", st.cfg.t_net}};
        std::cout << "frequency " << fmt_double(res.frequency) << "\n";
        std::ofstream(outpath(st, "compressible.json"), std::ios::binary) << out.dump(2) << "\n";
        manifest.outputs = {"compressible.json"};
        finish_manifest(st, manifest, "compressible_manifest.json");
        return 0;
    }
    if (cmd == "sweep") {
        auto d = parse_dist(st.cfg.dist_spec);
        auto mode = st.mode_str == "sup" ? SweepMode::SupNorm : SweepMode::PairExcluded;
        auto res = anticoncentration_sweep(d, st.cfg, mode);
        std::vector<std::vector<std::string>> rows{{st.mode_str,
                                                    res.min_margin.to_string(),
                                                    res.boundary_margin.to_string(),
                                                    std::to_string(res.accepted),
                                                    std::to_string(res.rejected)}};
        write_csv(outpath(st, "sweep.csv"), "mode,min_margin,boundary_margin,accepted,rejected",
                  rows);
        std::cout << "min_margin " << res.min_margin.to_string() << "\n";
        manifest.outputs = {"sweep.csv"};
        finish_manifest(st, manifest, "sweep_manifest.json");
        return 0;
    }
    if (cmd == "smoothing") {
        InversionConfig icfg;
        icfg.dist = parse_dist(st.cfg.dist_spec);
        icfg.N = st.big_n;
        icfg.n = st.cfg.n;
        icfg.delta = st.cfg.delta;
        icfg.trials = st.cfg.trials;
        icfg.seed = {st.cfg.seed, 0};
        icfg.workers = st.cfg.workers;
        icfg.mode = st.mode_str == "P" ? AdmissibleSpec::P : AdmissibleSpec::Q;
        if (!st.l_grid_csv.empty()) icfg.L_grid = parse_grid(st.l_grid_csv);
        auto res = inversion_experiment(icfg);
        std::vector<std::vector<std::string>> rows;
        for (const auto& r : res.curve)
            rows.push_back({fmt_double(r.L), fmt_double(r.exceedance), fmt_double(r.stderr_)});
        write_csv(outpath(st, "exceedance.csv"), "L,exceedance,stderr", rows);
        // a few replayable admissible specs for the record
        Rng rng({st.cfg.seed, 1000003ULL});
        json specs = json::array();
        for (int t = 0; t < std::min(3, icfg.trials); ++t)
            specs.push_back(admissible_to_json(generate_admissible(
                icfg.N, icfg.n, icfg.K1, icfg.K2, icfg.K3, icfg.delta, icfg.mode, rng)));
        std::ofstream(outpath(st, "specs.json"), std::ios::binary) << specs.dump(2) << "\n";
        std::cout << "exceedance rows " << res.curve.size() << "\n";
        manifest.outputs = {"exceedance.csv", "specs.json"};
        finish_manifest(st, manifest, "smoothing_manifest.json");
        return 0;
    }
    if (cmd == "report") {
        std::ifstream in(st.manifest_path);
        if (!in) throw ValidationError("report: unreadable manifest " + st.manifest_path);
        json j;
        in >> j;
        std::cout << "command: " << j.at("command").get<std::string>() << "\n"
                  << "version: " << j.at("version").get<std::string>() << "\n"
                  << "started: " << j.at("started").get<std::string>() << "\n"
                  << "outputs:";
        for (const auto& o : j.at("outputs")) std::cout << " " << o.get<std::string>();
        std::cout << "\n";
        if (st.replay) {
            std::vector<std::string> argv;
            for (const auto& a : j.at("argv")) argv.push_back(a.get<std::string>());
            // strip any prior out-dir and redirect the replay
            std::vector<std::string> cleaned;
            for (size_t i = 0; i < argv.size(); ++i) {
                if (argv[i] == "--out-dir") {
                    ++i;
                    continue;
                }
                cleaned.push_back(argv[i]);
            }
            cleaned.push_back("--out-dir");
            cleaned.push_back(st.out_dir);
            return dispatch(cleaned);
        }
        return 0;
    }
    std::cerr << "unknown command\n";
    return 2;
}

} // namespace detail

} // namespace rmlab::cli
