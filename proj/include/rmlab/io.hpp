#pragma once

#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rmlab/experiments.hpp"
#include "rmlab/smoothing.hpp"

namespace rmlab {

inline constexpr const char* kVersion = "0.1.0";

// ---------------------------------------------------------------------------
// distribution shorthand: "ber:p", "rademacher", "uniform:a1,a2,...", or a
// JSON file {"atoms": [...], "probs": [...]} with "num/den" strings or ints
// ---------------------------------------------------------------------------

namespace detail {
inline Rational rational_from_json(const nlohmann::json& v) {
    if (v.is_string()) return Rational::from_string(v.get<std::string>());
    if (v.is_number_integer()) return Rational(v.get<int64_t>());
    throw ValidationError("dist json: rationals must be integers or \"num/den\" strings");
}
} // namespace detail

inline DiscreteDist parse_dist(const std::string& spec) {
    if (spec == "rademacher") return DiscreteDist::rademacher();
    if (spec.rfind("ber:", 0) == 0) {
        Rational p = Rational::from_string(spec.substr(4));
        if (p.sign() <= 0 || p >= Rational(1)) throw ValidationError("ber: p must be in (0,1)");
        return DiscreteDist::bernoulli(p);
    }
    if (spec.rfind("uniform:", 0) == 0) {
        std::vector<Rational> atoms;
        std::stringstream ss(spec.substr(8));
        std::string tok;
        while (std::getline(ss, tok, ',')) atoms.push_back(Rational::from_string(tok));
        return DiscreteDist::uniform_on(std::move(atoms));
    }
    std::ifstream in(spec);
    if (!in) throw ValidationError("dist: unknown shorthand or unreadable file: " + spec);
    nlohmann::json j;
    in >> j;
    std::vector<Rational> atoms, probs;
    for (const auto& a : j.at("atoms")) atoms.push_back(detail::rational_from_json(a));
    for (const auto& p : j.at("probs")) probs.push_back(detail::rational_from_json(p));
    return DiscreteDist::construct(std::move(atoms), std::move(probs));
}

// vectors come from CSV files (one coordinate per line) or inline JSON arrays
inline std::vector<double> parse_vector(const std::string& spec) {
    std::vector<double> x;
    if (!spec.empty() && spec.front() == '[') {
        for (const auto& v : nlohmann::json::parse(spec)) x.push_back(v.get<double>());
        return x;
    }
    std::ifstream in(spec);
    if (!in) throw ValidationError("vector: unreadable file: " + spec);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        x.push_back(std::stod(line));
    }
    return x;
}

// ---------------------------------------------------------------------------
// config serialization
// ---------------------------------------------------------------------------

inline nlohmann::json config_to_json(const ExperimentConfig& c) {
    return nlohmann::json{{"dist", c.dist_spec},
                          {"n", c.n},
                          {"samples", c.samples},
                          {"trials", c.trials},
                          {"t_grid", c.t_grid},
                          {"epsilon", c.epsilon},
                          {"L", c.L},
                          {"delta", c.delta},
                          {"rho", c.rho},
                          {"delta_prime", c.delta_prime},
                          {"theta", c.theta},
                          {"r0", c.r0},
                          {"tau0", c.tau0},
                          {"t_net", c.t_net},
                          {"net_budget", c.net_budget},
                          {"include_transpose", c.include_transpose},
                          {"budget", c.budget},
                          {"seed", c.seed},
                          {"workers", c.workers}};
}

inline void config_from_json(const nlohmann::json& j, ExperimentConfig& c) {
    auto get = [&](const char* key, auto& slot) {
        if (j.contains(key)) slot = j.at(key).get<std::decay_t<decltype(slot)>>();
    };
    get("dist", c.dist_spec);
    get("n", c.n);
    get("samples", c.samples);
    get("trials", c.trials);
    get("t_grid", c.t_grid);
    get("epsilon", c.epsilon);
    get("L", c.L);
    get("delta", c.delta);
    get("rho", c.rho);
    get("delta_prime", c.delta_prime);
    get("theta", c.theta);
    get("r0", c.r0);
    get("tau0", c.tau0);
    get("t_net", c.t_net);
    get("net_budget", c.net_budget);
    get("include_transpose", c.include_transpose);
    get("budget", c.budget);
    get("seed", c.seed);
    get("workers", c.workers);
}

inline nlohmann::json admissible_to_json(const AdmissibleSpec& s) {
    nlohmann::json blocks = nlohmann::json::array();
    for (const auto& b : s.blocks) {
        nlohmann::json iv = nlohmann::json::array();
        for (auto [lo, hi] : b) iv.push_back({lo, hi});
        blocks.push_back(iv);
    }
    return nlohmann::json{{"N", s.N},       {"n", s.n},
                          {"K1", s.K1},     {"K2", s.K2},
                          {"K3", s.K3},     {"delta", s.delta},
                          {"mode", s.mode == AdmissibleSpec::P ? "P" : "Q"},
                          {"blocks", blocks}};
}

inline AdmissibleSpec admissible_from_json(const nlohmann::json& j) {
    AdmissibleSpec s;
    s.N = j.at("N").get<int64_t>();
    s.n = j.at("n").get<int>();
    s.K1 = j.at("K1").get<double>();
    s.K2 = j.at("K2").get<double>();
    s.K3 = j.at("K3").get<double>();
    s.delta = j.at("delta").get<double>();
    s.mode = j.at("mode").get<std::string>() == "P" ? AdmissibleSpec::P : AdmissibleSpec::Q;
    for (const auto& b : j.at("blocks")) {
        IntervalUnion u;
        for (const auto& iv : b) u.emplace_back(iv.at(0).get<int64_t>(), iv.at(1).get<int64_t>());
        s.blocks.push_back(std::move(u));
    }
    return s;
}

// ---------------------------------------------------------------------------
// CSV and manifest emission; CSVs are byte-stable for a fixed config
// ---------------------------------------------------------------------------

inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline void write_csv(const std::string& path, const std::string& header,
                      const std::vector<std::vector<std::string>>& rows) {
    std::ofstream out(path, std::ios::binary); // LF line endings everywhere
    out << header << "\n";
    for (const auto& row : rows) {
        for (size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
        out << "\n";
    }
}

struct RunManifest {
    std::string command;
    std::vector<std::string> argv;
    nlohmann::json config;
    std::string started, finished;
    std::vector<std::string> outputs;
};

inline std::string now_iso8601() {
    auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

inline void write_manifest(const std::string& path, const RunManifest& m) {
    nlohmann::json j{{"command", m.command}, {"argv", m.argv},         {"version", kVersion},
                     {"config", m.config},   {"started", m.started},   {"finished", m.finished},
                     {"outputs", m.outputs}};
    std::ofstream out(path, std::ios::binary);
    out << j.dump(2) << "\n";
}

} // namespace rmlab
