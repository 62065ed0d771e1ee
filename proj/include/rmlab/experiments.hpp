#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "rmlab/exact.hpp"
#include "rmlab/levy.hpp"
#include "rmlab/parallel.hpp"
#include "rmlab/sampler.hpp"
#include "rmlab/smoothing.hpp"
#include "rmlab/spectral.hpp"
#include "rmlab/sphere.hpp"

namespace rmlab {

// free parameters of the experiment layer; everything the runs depend on is
// echoed into the output manifests
struct ExperimentConfig {
    std::string dist_spec = "ber:1/2";
    int n = 10;
    uint64_t samples = 100000;
    int trials = 100;
    std::vector<double> t_grid = {0.0, 0.25, 0.5, 1.0};
    double epsilon = 0.1;
    double L = 4.0;           // threshold scale factor
    double delta = 0.1;       // Cons band fraction
    double rho = 1.0;         // Cons window, in units of 1/sqrt(n)
    double delta_prime = 0.1; // Elem radius
    double theta = 1e-3;      // anticoncentration radius
    double r0 = 1e-2;         // dichotomy classifier radius
    double tau0 = 5e-2;       // dichotomy classifier cutoff
    double t_net = 0.0;       // compressible event threshold
    int net_budget = 64;      // quantized profiles in the compressible net
    bool include_transpose = true;
    uint64_t budget = 1ULL << 28;
    uint64_t seed = 1;
    int workers = 2;
};

// ---------------------------------------------------------------------------
// Monte Carlo singularity frequency vs the two-term prediction
// ---------------------------------------------------------------------------

struct McSingularityResult {
    double estimate = 0;
    double stderr_ = 0;
    double ratio_to_conjecture = 0;
    uint64_t hits = 0;
    uint64_t samples = 0;
    uint64_t exact_confirms = 0;
    uint64_t union_hits = 0;
    uint64_t union_violations = 0; // union hit without a singularity hit
    double seconds = 0;
    ScreenPrimes primes;
};

inline McSingularityResult mc_singularity(const DiscreteDist& d, const ExperimentConfig& cfg,
                                          bool check_union = false) {
    if (cfg.samples < 10000) throw ValidationError("mc_singularity: needs at least 1e4 samples");
    auto t0 = std::chrono::steady_clock::now();
    auto primes = make_screen_primes({cfg.seed, 0xdeadULL});
    auto sa = d.scaled_atoms();
    const int n = cfg.n;
    const int nw = std::max(1, cfg.workers);
    std::vector<uint64_t> hits(static_cast<size_t>(nw), 0), confirms(static_cast<size_t>(nw), 0),
        uhits(static_cast<size_t>(nw), 0), uviol(static_cast<size_t>(nw), 0);
    parallel_blocks(nw, nw, [&](int w) {
        Rng rng({cfg.seed, static_cast<uint64_t>(w) + 1});
        AtomSampler sampler(d);
        std::vector<int64_t> m(static_cast<size_t>(n) * n);
        uint64_t lo = cfg.samples * static_cast<uint64_t>(w) / static_cast<uint64_t>(nw);
        uint64_t hi = cfg.samples * static_cast<uint64_t>(w + 1) / static_cast<uint64_t>(nw);
        for (uint64_t s = lo; s < hi; ++s) {
            for (auto& e : m) e = sa.values[sampler.sample(rng)];
            bool sing = is_singular_exact(m, n, primes, &confirms[static_cast<size_t>(w)]);
            if (sing) ++hits[static_cast<size_t>(w)];
            if (check_union) {
                bool u = in_dominant_union(m, n);
                if (u) {
                    ++uhits[static_cast<size_t>(w)];
                    if (!sing) ++uviol[static_cast<size_t>(w)];
                }
            }
        }
    });
    McSingularityResult r;
    r.primes = primes;
    r.samples = cfg.samples;
    for (int w = 0; w < nw; ++w) {
        r.hits += hits[static_cast<size_t>(w)];
        r.exact_confirms += confirms[static_cast<size_t>(w)];
        r.union_hits += uhits[static_cast<size_t>(w)];
        r.union_violations += uviol[static_cast<size_t>(w)];
    }
    r.estimate = static_cast<double>(r.hits) / static_cast<double>(cfg.samples);
    r.stderr_ = std::sqrt(r.estimate * (1 - r.estimate) / static_cast<double>(cfg.samples));
    double conj = predicted_probabilities(d, n).conjecture.to_double();
    r.ratio_to_conjecture = conj > 0 ? r.estimate / conj : 0.0;
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

// ---------------------------------------------------------------------------
// lower tail of the smallest singular value on shared samples
// ---------------------------------------------------------------------------

struct TailCurve {
    struct Row {
        double t = 0;
        double p_hat = 0;
        double stderr_ = 0;
        double predicted = 0;
    };
    std::vector<Row> rows;
    double c_fit = 0; // slope fitted through the closed-form intercept
    uint64_t samples = 0;
};

inline TailCurve tail_curve(const DiscreteDist& d, const ExperimentConfig& cfg) {
    for (double t : cfg.t_grid)
        if (t < 0 || t > 2.0) throw ValidationError("tail_curve: t grid must lie in [0, 2]");
    std::vector<double> grid = cfg.t_grid;
    std::sort(grid.begin(), grid.end());
    auto primes = make_screen_primes({cfg.seed, 0xdeadULL});
    auto sa = d.scaled_atoms();
    auto av = d.atoms_double();
    const int n = cfg.n;
    const double rootn = std::sqrt(static_cast<double>(n));
    const int nw = std::max(1, cfg.workers);
    std::vector<std::vector<uint64_t>> counts(static_cast<size_t>(nw),
                                              std::vector<uint64_t>(grid.size(), 0));
    parallel_blocks(nw, nw, [&](int w) {
        Rng rng({cfg.seed, static_cast<uint64_t>(w) + 1});
        AtomSampler sampler(d);
        std::vector<int64_t> mi(static_cast<size_t>(n) * n);
        Mat m(n, n);
        uint64_t lo = cfg.samples * static_cast<uint64_t>(w) / static_cast<uint64_t>(nw);
        uint64_t hi = cfg.samples * static_cast<uint64_t>(w + 1) / static_cast<uint64_t>(nw);
        for (uint64_t s = lo; s < hi; ++s) {
            for (size_t c = 0; c < mi.size(); ++c) {
                uint8_t idx = sampler.sample(rng);
                mi[c] = sa.values[idx];
                m.a[c] = av[idx];
            }
            double sn;
            if (is_singular_exact(mi, n, primes)) {
                sn = 0.0; // exact event, never a floating-point call
            } else {
                sn = singular_values_jacobi(m).back();
            }
            for (size_t g = 0; g < grid.size(); ++g) {
                bool hit = grid[g] == 0.0 ? (sn == 0.0) : (sn <= grid[g] / rootn);
                if (hit) counts[static_cast<size_t>(w)][g] += 1;
            }
        }
    });
    TailCurve out;
    out.samples = cfg.samples;
    auto pred = predicted_probabilities(d, n);
    double intercept = pred.conjecture.to_double();
    std::vector<double> ps(grid.size());
    for (size_t g = 0; g < grid.size(); ++g) {
        uint64_t c = 0;
        for (int w = 0; w < nw; ++w) c += counts[static_cast<size_t>(w)][g];
        ps[g] = static_cast<double>(c) / static_cast<double>(cfg.samples);
    }
    double num = 0, den = 0;
    for (size_t g = 0; g < grid.size(); ++g) {
        if (grid[g] <= 0) continue;
        num += grid[g] * (ps[g] - intercept);
        den += grid[g] * grid[g];
    }
    out.c_fit = den > 0 ? num / den : 0.0;
    for (size_t g = 0; g < grid.size(); ++g) {
        TailCurve::Row row;
        row.t = grid[g];
        row.p_hat = ps[g];
        row.stderr_ = std::sqrt(ps[g] * (1 - ps[g]) / static_cast<double>(cfg.samples));
        row.predicted = out.c_fit * grid[g] + intercept;
        out.rows.push_back(row);
    }
    return out;
}

// ---------------------------------------------------------------------------
// compressible net: elementary centers plus quantized almost-constant profiles
// ---------------------------------------------------------------------------

struct CompressibleResult {
    double frequency = 0;
    double stderr_ = 0;
    double rhs_dominant = 0; // n P[E_e1] + C(n,2)(P- + P+), doubled with transpose
    double rhs_tail = 0;     // (t + P[E_{e1-e2}]) e^{-eta n} at the fitted eta
    double eta_fit = 0;
    size_t net_size = 0;
    uint64_t hits = 0;
};

namespace detail {
// profiles with one quantized majority level and a few off-window coordinates
inline std::vector<std::vector<double>> quantized_profiles(int n, int count, Rng& rng) {
    std::vector<std::vector<double>> out;
    const double rootn = std::sqrt(static_cast<double>(n));
    for (int p = 0; p < count; ++p) {
        std::vector<double> x(static_cast<size_t>(n));
        double lambda = (static_cast<double>(rng.next_below(17)) - 8.0) / (4.0 * rootn);
        for (auto& v : x) v = lambda;
        int minority = 1 + static_cast<int>(rng.next_below(static_cast<uint64_t>(std::max(1, n / 10))));
        for (int t = 0; t < minority; ++t) {
            size_t i = rng.next_below(static_cast<uint64_t>(n));
            x[i] = (rng.next_below(2) ? 1.0 : -1.0) * (0.25 + rng.next_unit());
        }
        double norm = 0;
        for (double v : x) norm += v * v;
        if (norm < 1e-12) {
            x[0] = 1.0;
            norm = 1.0;
        }
        for (auto& v : x) v /= std::sqrt(norm);
        out.push_back(std::move(x));
    }
    return out;
}
} // namespace detail

inline CompressibleResult compressible_trial(const DiscreteDist& d, const ExperimentConfig& cfg,
                                             bool elementary_only = false,
                                             bool single_center_e1 = false) {
    const int n = cfg.n;
    auto av = d.atoms_double();
    Rng net_rng({cfg.seed, 0xabcULL});
    auto profiles = elementary_only ? std::vector<std::vector<double>>{}
                                    : detail::quantized_profiles(n, cfg.net_budget, net_rng);
    const double t = cfg.t_net;
    const int nw = std::max(1, cfg.workers);
    std::vector<uint64_t> hits(static_cast<size_t>(nw), 0);
    parallel_blocks(nw, nw, [&](int w) {
        Rng rng({cfg.seed, static_cast<uint64_t>(w) + 1});
        AtomSampler sampler(d);
        Mat m(n, n);
        std::vector<double> gram(static_cast<size_t>(n) * n);
        uint64_t lo = cfg.samples * static_cast<uint64_t>(w) / static_cast<uint64_t>(nw);
        uint64_t hi = cfg.samples * static_cast<uint64_t>(w + 1) / static_cast<uint64_t>(nw);
        for (uint64_t s = lo; s < hi; ++s) {
            for (auto& e : m.a) e = av[sampler.sample(rng)];
            bool hit = false;
            const int sides = (cfg.include_transpose && !single_center_e1) ? 2 : 1;
            for (int side = 0; side < sides && !hit; ++side) {
                const Mat mm = side == 0 ? m : m.transposed();
                if (single_center_e1) {
                    double g = 0;
                    for (int r = 0; r < n; ++r) g += mm(r, 0) * mm(r, 0);
                    hit = std::sqrt(g) <= t;
                    continue;
                }
                // gram of columns drives all elementary-center norms
                for (int i = 0; i < n; ++i)
                    for (int j = i; j < n; ++j) {
                        double g = 0;
                        for (int r = 0; r < n; ++r) g += mm(r, i) * mm(r, j);
                        gram[static_cast<size_t>(i) * n + j] = g;
                        gram[static_cast<size_t>(j) * n + i] = g;
                    }
                auto g2 = [&](int i, int j) { return gram[static_cast<size_t>(i) * n + j]; };
                for (int i = 0; i < n && !hit; ++i)
                    if (std::sqrt(g2(i, i)) <= t) hit = true; // center e_i
                for (int i = 0; i < n && !hit; ++i)
                    for (int j = i + 1; j < n && !hit; ++j) {
                        double minus = 0.5 * (g2(i, i) + g2(j, j) - 2 * g2(i, j));
                        double plus = 0.5 * (g2(i, i) + g2(j, j) + 2 * g2(i, j));
                        if (std::sqrt(std::max(0.0, minus)) <= t ||
                            std::sqrt(std::max(0.0, plus)) <= t)
                            hit = true;
                    }
                for (const auto& x : profiles) {
                    if (hit) break;
                    double norm2 = 0;
                    for (int r = 0; r < n; ++r) {
                        double acc = 0;
                        for (int c = 0; c < n; ++c) acc += mm(r, c) * x[static_cast<size_t>(c)];
                        norm2 += acc * acc;
                    }
                    if (std::sqrt(norm2) <= t) hit = true;
                }
            }
            if (hit) ++hits[static_cast<size_t>(w)];
        }
    });
    CompressibleResult out;
    for (int w = 0; w < nw; ++w) out.hits += hits[static_cast<size_t>(w)];
    out.frequency = static_cast<double>(out.hits) / static_cast<double>(cfg.samples);
    out.stderr_ = std::sqrt(out.frequency * (1 - out.frequency) / static_cast<double>(cfg.samples));
    out.net_size = static_cast<size_t>(single_center_e1 ? 1 : n + n * (n - 1)) + profiles.size();
    auto pred = predicted_probabilities(d, n);
    double orient = cfg.include_transpose && !single_center_e1 ? 2.0 : 1.0;
    out.rhs_dominant = orient * (n * pred.pE1.to_double() +
                                 0.5 * n * (n - 1) *
                                     (pred.pE1minus.to_double() + pred.pE1plus.to_double()));
    double resid = std::max(out.frequency - out.rhs_dominant, 0.0);
    double base = t + pred.pE1minus.to_double();
    out.eta_fit = resid > 0 && base > 0 ? -std::log(resid / base) / n : 0.0;
    out.rhs_tail = resid;
    return out;
}

// ---------------------------------------------------------------------------
// kernel-vector structure dichotomy
// ---------------------------------------------------------------------------

struct DichotomyResult {
    double frac_cons = 0;
    double frac_small_threshold = 0;
    double frac_neither = 0;
    struct Row {
        int trial = 0;
        bool cons = false;
        double levy_estimate = 0;
        double levy_stderr = 0;
    };
    std::vector<Row> rows;
};

// one trial on an explicit panel, so fixed panels can be injected in tests
inline DichotomyResult::Row dichotomy_trial(const DiscreteDist& d, const Mat& panel,
                                            const ExperimentConfig& cfg, RngSeed mc_seed,
                                            int trial_id) {
    DichotomyResult::Row row;
    row.trial = trial_id;
    auto v = kernel_vector(panel);
    row.cons = cons_membership(v, {cfg.delta, cfg.rho}).has_value();
    if (!row.cons) {
        auto est = levy_mc(d, v, cfg.r0, cfg.samples, mc_seed);
        row.levy_estimate = est.estimate;
        row.levy_stderr = est.stderr_;
    }
    return row;
}

inline DichotomyResult structure_dichotomy(const DiscreteDist& d, const ExperimentConfig& cfg) {
    if (cfg.n < 2 || cfg.trials < 1) throw ValidationError("structure_dichotomy: bad parameters");
    DichotomyResult out;
    out.rows.resize(static_cast<size_t>(cfg.trials));
    parallel_blocks(cfg.trials, cfg.workers, [&](int t) {
        Rng rng({cfg.seed, 7777ULL + static_cast<uint64_t>(t)});
        auto sample = sample_matrix_rect(d, cfg.n - 1, cfg.n, rng);
        Mat panel = realize(sample, d);
        out.rows[static_cast<size_t>(t)] =
            dichotomy_trial(d, panel, cfg, {cfg.seed, 555555ULL + static_cast<uint64_t>(t)}, t);
    });
    int cons = 0, small = 0;
    for (const auto& r : out.rows) {
        if (r.cons) ++cons;
        else if (r.levy_estimate <= cfg.tau0) ++small;
    }
    out.frac_cons = static_cast<double>(cons) / cfg.trials;
    out.frac_small_threshold = static_cast<double>(small) / cfg.trials;
    out.frac_neither = 1.0 - out.frac_cons - out.frac_small_threshold;
    return out;
}

// ---------------------------------------------------------------------------
// anticoncentration margin sweeps
// ---------------------------------------------------------------------------

struct SweepResult {
    Rational min_margin;        // over accepted sampled vectors
    std::vector<double> argmin; // vector attaining the minimum
    Rational boundary_margin;   // injected boundary self-test, exactly zero
    uint64_t accepted = 0;
    uint64_t rejected = 0;
};

enum class SweepMode { PairExcluded, SupNorm }; // |p|_2^2 vs |p|_inf reference

inline Rational sweep_margin(const DiscreteDist& d, const std::vector<double>& x, double theta,
                             SweepMode mode, uint64_t budget) {
    auto s = sum_dist(d, x, budget);
    Rational L = levy_window(s, theta);
    auto st = stats(d);
    return (mode == SweepMode::PairExcluded ? st.p2_sq : st.p_inf) - L;
}

inline SweepResult anticoncentration_sweep(const DiscreteDist& d, const ExperimentConfig& cfg,
                                           SweepMode mode) {
    const int n = cfg.n;
    SweepResult out;
    // boundary self-test: the margin vanishes exactly on the matching center
    std::vector<double> boundary(static_cast<size_t>(n), 0.0);
    if (mode == SweepMode::PairExcluded) {
        boundary[0] = 1.0 / std::sqrt(2.0);
        boundary[1] = -1.0 / std::sqrt(2.0);
    } else {
        boundary[0] = 1.0;
    }
    out.boundary_margin = sweep_margin(d, boundary, cfg.theta, mode, cfg.budget);

    Rng rng({cfg.seed, 0xfeedULL});
    bool have = false;
    for (uint64_t s = 0; s < cfg.samples; ++s) {
        auto x = random_unit_vector(n, rng);
        if (mode == SweepMode::PairExcluded &&
            elem_classify(x, cfg.delta_prime).kind != ElemClass::None) {
            ++out.rejected;
            continue;
        }
        ++out.accepted;
        Rational m = sweep_margin(d, x, cfg.theta, mode, cfg.budget);
        if (!have || m < out.min_margin) {
            out.min_margin = m;
            out.argmin = x;
            have = true;
        }
    }
    return out;
}

} // namespace rmlab
