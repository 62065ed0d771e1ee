#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rmlab/distribution.hpp"
#include "rmlab/parallel.hpp"
#include "rmlab/rng.hpp"

namespace rmlab {

// ---------------------------------------------------------------------------
// admissible product sets of integer-interval unions
// ---------------------------------------------------------------------------

// closed integer intervals [lo, hi], disjoint and sorted
using IntervalUnion = std::vector<std::pair<int64_t, int64_t>>;

inline int64_t interval_union_size(const IntervalUnion& u) {
    int64_t s = 0;
    for (auto [lo, hi] : u) s += hi - lo + 1;
    return s;
}

struct AdmissibleSpec {
    int64_t N = 16;
    int n = 16;
    double K1 = 2, K2 = 4, K3 = 8;
    double delta = 0.1;
    enum Mode { P, Q } mode = Q;
    std::vector<IntervalUnion> blocks; // one per coordinate
};

// checks every admissibility clause; returns the first violated clause name
inline std::optional<std::string> validate_admissible(const AdmissibleSpec& s) {
    if (static_cast<int>(s.blocks.size()) != s.n) return "block count";
    if (!(s.K3 > s.K2 && s.K2 > s.K1 && s.K1 > 1)) return "K ordering";
    if (!(s.delta > 0 && s.delta < 0.25)) return "delta range";
    const double N = static_cast<double>(s.N);
    double log_prod = 0;
    for (const auto& b : s.blocks) {
        if (b.empty()) return "empty block";
        for (size_t i = 0; i + 1 < b.size(); ++i)
            if (b[i].second >= b[i + 1].first) return "interval overlap";
        for (auto [lo, hi] : b) {
            if (lo > hi) return "interval order";
            if (std::max(std::abs(lo), std::abs(hi)) > static_cast<int64_t>(s.n) * s.N)
                return "element range";
        }
        log_prod += std::log2(static_cast<double>(interval_union_size(b)));
    }
    if (log_prod > s.n * std::log2(s.K3 * N) + 1e-9) return "cardinality product";
    const int head = static_cast<int>(std::floor(s.delta * s.n));
    for (int i = 1; i <= s.n; ++i) {
        const auto& b = s.blocks[static_cast<size_t>(i - 1)];
        if (static_cast<double>(i) > 2.0 * s.delta * s.n) {
            if (b.size() != 1) return "tail interval shape";
            if (interval_union_size(b) < 2 * s.N + 1) return "tail interval size";
        }
    }
    for (int i = 1; i <= head; ++i) {
        const auto& even = s.blocks[static_cast<size_t>(2 * i - 1)]; // A_{2i}
        const auto& odd = s.blocks[static_cast<size_t>(2 * i - 2)];  // A_{2i-1}
        if (s.mode == AdmissibleSpec::P) {
            if (even.size() != 1 || interval_union_size(even) < 2 * s.N + 1 ||
                even[0].first < static_cast<int64_t>(-s.K1 * N) ||
                even[0].second > static_cast<int64_t>(s.K1 * N))
                return "(P1)";
            // symmetric about zero, two intervals totaling >= 2N, avoiding [-K2 N, K2 N]
            if (odd.size() != 2) return "(P2) shape";
            if (odd[0].first != -odd[1].second || odd[0].second != -odd[1].first) return "(P2) symmetry";
            if (interval_union_size(odd) < 2 * s.N) return "(P2) size";
            for (auto [lo, hi] : odd)
                if (!(hi < -s.K2 * N || lo > s.K2 * N)) return "(P2) gap";
        } else {
            if (even.size() != 1 || interval_union_size(even) < 2 * s.N + 1 ||
                even[0].first < static_cast<int64_t>(s.K1 * N) ||
                even[0].second > static_cast<int64_t>(s.K2 * N))
                return "(Q1)";
            if (odd.size() != 1 || interval_union_size(odd) < 2 * s.N + 1 ||
                odd[0].first < static_cast<int64_t>(-s.K2 * N) ||
                odd[0].second > static_cast<int64_t>(-s.K1 * N))
                return "(Q2)";
        }
    }
    return std::nullopt;
}

inline AdmissibleSpec generate_admissible(int64_t N, int n, double K1, double K2, double K3,
                                          double delta, AdmissibleSpec::Mode mode, Rng& rng) {
    AdmissibleSpec s;
    s.N = N;
    s.n = n;
    s.K1 = K1;
    s.K2 = K2;
    s.K3 = K3;
    s.delta = delta;
    s.mode = mode;
    s.blocks.assign(static_cast<size_t>(n), {});
    const int64_t W = 2 * N + 1;
    const int head = static_cast<int>(std::floor(delta * n));
    if (2 * head > n) throw ValidationError("generate_admissible: delta too large");
    for (int i = 1; i <= head; ++i) {
        if (mode == AdmissibleSpec::Q) {
            int64_t span = static_cast<int64_t>((K2 - K1) * static_cast<double>(N)) - W + 2;
            if (span < 1) throw ValidationError("generate_admissible: K2 - K1 too small");
            int64_t lo = static_cast<int64_t>(K1 * static_cast<double>(N)) +
                         static_cast<int64_t>(rng.next_below(static_cast<uint64_t>(span)));
            s.blocks[static_cast<size_t>(2 * i - 1)] = {{lo, lo + W - 1}};
            int64_t lo2 = static_cast<int64_t>(K1 * static_cast<double>(N)) +
                          static_cast<int64_t>(rng.next_below(static_cast<uint64_t>(span)));
            s.blocks[static_cast<size_t>(2 * i - 2)] = {{-(lo2 + W - 1), -lo2}};
        } else {
            int64_t slack = static_cast<int64_t>((K1 - 1) * static_cast<double>(N));
            int64_t off = static_cast<int64_t>(rng.next_below(static_cast<uint64_t>(2 * slack + 1))) - slack;
            s.blocks[static_cast<size_t>(2 * i - 1)] = {{off - N, off + N}};
            int64_t base = static_cast<int64_t>(K2 * static_cast<double>(N)) + 1;
            if (base + N > static_cast<int64_t>(n) * N)
                throw ValidationError("generate_admissible: n too small for (P2)");
            s.blocks[static_cast<size_t>(2 * i - 2)] = {{-(base + N - 1), -base}, {base, base + N - 1}};
        }
    }
    for (int i = 2 * head + 1; i <= n; ++i) {
        int64_t off = static_cast<int64_t>(rng.next_below(static_cast<uint64_t>(N + 1))) - N / 2;
        s.blocks[static_cast<size_t>(i - 1)] = {{off - N, off + N}};
    }
    if (auto bad = validate_admissible(s))
        throw ValidationError("generate_admissible: infeasible parameters (" + *bad + ")");
    return s;
}

inline std::vector<int64_t> sample_from_blocks(const AdmissibleSpec& s, Rng& rng) {
    std::vector<int64_t> x;
    x.reserve(s.blocks.size());
    for (const auto& b : s.blocks) {
        int64_t total = interval_union_size(b);
        int64_t u = static_cast<int64_t>(rng.next_below(static_cast<uint64_t>(total)));
        for (auto [lo, hi] : b) {
            int64_t sz = hi - lo + 1;
            if (u < sz) {
                x.push_back(lo + u);
                break;
            }
            u -= sz;
        }
    }
    return x;
}

// ---------------------------------------------------------------------------
// grid functions: nonnegative, stored in the log2 domain on a uniform grid
// ---------------------------------------------------------------------------

struct GridFunction {
    // node t_i = (u_lo + i) / den; den = atom_den * 2^m keeps every atom shift
    // an exact integer number of nodes
    int64_t u_lo = 0;
    int64_t den = 1;
    std::vector<double> log2v;
    double lipschitz = 0.0; // log2-Lipschitz constant eta

    double h() const { return 1.0 / static_cast<double>(den); }
    double node(size_t i) const {
        return static_cast<double>(u_lo + static_cast<int64_t>(i)) / static_cast<double>(den);
    }
    size_t size() const { return log2v.size(); }

    double mass() const { // trapezoid rule
        if (log2v.size() < 2) return 0.0;
        double s = 0;
        for (double lv : log2v) s += std::exp2(lv);
        s -= 0.5 * (std::exp2(log2v.front()) + std::exp2(log2v.back()));
        return s * h();
    }
    double linf() const {
        double m = -std::numeric_limits<double>::infinity();
        for (double lv : log2v) m = std::max(m, lv);
        return std::exp2(m);
    }
    double mass_on(double a, double b) const { // trapezoid restricted to [a, b]
        double s = 0;
        bool first = true;
        double prev = 0;
        for (size_t i = 0; i < log2v.size(); ++i) {
            double t = node(i);
            if (t < a || t > b) continue;
            double v = std::exp2(log2v[i]);
            if (!first) s += 0.5 * (v + prev);
            prev = v;
            first = false;
        }
        return s * h();
    }
};

// f(t) = 2^{-|t|/sqrt(n)} / iota, normalized so the grid trapezoid mass is one
inline GridFunction default_profile(int n_scale, int64_t u_lo, int64_t u_hi, int64_t den) {
    GridFunction f;
    f.u_lo = u_lo;
    f.den = den;
    f.lipschitz = 1.0 / std::sqrt(static_cast<double>(n_scale));
    f.log2v.resize(static_cast<size_t>(u_hi - u_lo + 1));
    for (size_t i = 0; i < f.log2v.size(); ++i)
        f.log2v[i] = -std::abs(f.node(i)) * f.lipschitz;
    double iota = f.mass();
    double shift = std::log2(iota);
    for (auto& lv : f.log2v) lv -= shift;
    return f;
}

// ---------------------------------------------------------------------------
// the averaging recursion over count vectors
// ---------------------------------------------------------------------------

namespace detail {
inline uint64_t pack_cvec(const std::vector<int>& c) {
    uint64_t key = 0;
    for (int v : c) key = (key << 9) | static_cast<uint64_t>(v);
    return key;
}
inline void enum_cvecs(const std::vector<int>& cap, int weight, size_t pos, std::vector<int>& cur,
                       std::vector<std::vector<int>>& out) {
    if (pos + 1 == cap.size()) {
        if (weight <= cap[pos]) {
            cur[pos] = weight;
            out.push_back(cur);
        }
        return;
    }
    for (int v = 0; v <= std::min(cap[pos], weight); ++v) {
        cur[pos] = v;
        enum_cvecs(cap, weight - v, pos + 1, cur, out);
    }
}
} // namespace detail

struct AverageOptions {
    bool retain_levels = false;
    bool require_coverage = true; // small hand-built grids may opt out
    uint64_t value_budget = 1ULL << 28; // stored doubles across one level
    int workers = 1;
};

// retained state of one recursion run
struct AveragingRun {
    int64_t u_lo = 0, den = 1;
    size_t npoints = 0;
    int ell = 0;
    int n_full = 0;     // spec length, for the R-drop scale
    int64_t N = 0;      // admissible N, for the R-drop scale
    double lipschitz = 0;
    std::vector<Rational> atoms;
    std::vector<int64_t> atom_units; // atom * den, exact integers
    std::vector<int64_t> X;
    std::vector<int> s_top;
    // levels[j]: packed count vector -> linear values (retained mode only)
    std::vector<std::map<uint64_t, std::vector<double>>> levels;
    GridFunction result;
};

// Computes f_{A, s, ell} bottom-up. Shifts a_j X_i are exact node counts by
// construction of the grid denominator, so the convex combination conserves
// mass up to double rounding; non-aligned shifts interpolate linearly in the
// log2 domain.
inline AveragingRun average(const GridFunction& f, const DiscreteDist& d,
                            const std::vector<int64_t>& X, const std::vector<int>& s,
                            const AdmissibleSpec& spec, AverageOptions opts = {}) {
    const size_t k = d.k();
    if (s.size() != k) throw ValidationError("average: count vector length mismatch");
    int ell = 0;
    for (int v : s) {
        if (v < 0) throw ValidationError("average: negative count");
        ell += v;
    }
    if (ell > static_cast<int>(X.size())) throw ValidationError("average: counts exceed coordinates");
    for (int v : s)
        if (v > 511) throw BudgetError("average: count packing limit");

    AveragingRun run;
    run.u_lo = f.u_lo;
    run.den = f.den;
    run.npoints = f.size();
    run.ell = ell;
    run.n_full = spec.n;
    run.N = spec.N;
    run.lipschitz = f.lipschitz;
    run.atoms = d.atoms();
    run.X.assign(X.begin(), X.begin() + ell);
    run.s_top = s;
    for (const auto& a : d.atoms()) {
        Rational units = a * Rational(static_cast<int64_t>(run.den));
        if (!units.is_integer()) {
            // grid does not resolve this atom exactly; interpolation fallback
            run.atom_units.push_back(INT64_MIN);
        } else {
            run.atom_units.push_back(units.num().to_int64());
        }
    }

    // grid coverage: the profile must have decayed at its edges
    double peak = -std::numeric_limits<double>::infinity();
    for (double lv : f.log2v) peak = std::max(peak, lv);
    if (opts.require_coverage && ell > 0 &&
        (f.log2v.front() > peak - 40.0 || f.log2v.back() > peak - 40.0))
        throw ValidationError("average: grid coverage insufficient");

    const size_t m = f.size();
    std::vector<double> base(m);
    for (size_t i = 0; i < m; ++i) base[i] = std::exp2(f.log2v[i]);

    std::map<uint64_t, std::vector<double>> prev, cur;
    std::vector<int> zero(k, 0);
    prev.emplace(detail::pack_cvec(zero), std::move(base));
    if (opts.retain_levels) {
        run.levels.resize(static_cast<size_t>(ell) + 1);
        run.levels[0] = prev;
    }

    std::vector<std::vector<int>> cvecs;
    std::vector<int> scratch(k, 0);
    for (int j = 1; j <= ell; ++j) {
        cvecs.clear();
        detail::enum_cvecs(s, j, 0, scratch, cvecs);
        if (cvecs.size() * m > opts.value_budget) throw BudgetError("average: level storage over budget");
        cur.clear();
        const int64_t Xj = X[static_cast<size_t>(j - 1)];
        std::vector<std::pair<uint64_t, std::vector<int>>> todo;
        for (const auto& c : cvecs) todo.emplace_back(detail::pack_cvec(c), c);
        std::vector<std::vector<double>> outs(todo.size());
        parallel_blocks(static_cast<int>(todo.size()), opts.workers, [&](int bi) {
            const auto& [key, c] = todo[static_cast<size_t>(bi)];
            std::vector<double> out(m, 0.0);
            for (size_t u = 0; u < k; ++u) {
                if (c[u] == 0) continue; // zero-coefficient children drop out
                std::vector<int> child = c;
                child[u] -= 1;
                auto it = prev.find(detail::pack_cvec(child));
                if (it == prev.end()) continue;
                const std::vector<double>& ch = it->second;
                const double coeff = static_cast<double>(c[u]) / static_cast<double>(j);
                if (run.atom_units[u] != INT64_MIN) {
                    const int64_t q = run.atom_units[u] * Xj; // node offset, exact
                    const int64_t lo = std::max<int64_t>(0, -q);
                    const int64_t hi = std::min<int64_t>(static_cast<int64_t>(m),
                                                         static_cast<int64_t>(m) - q);
                    for (int64_t i = lo; i < hi; ++i)
                        out[static_cast<size_t>(i)] += coeff * ch[static_cast<size_t>(i + q)];
                } else {
                    // non-resolving atom: log-domain linear interpolation
                    const double shift = run.atoms[u].to_double() * static_cast<double>(Xj);
                    const double qr = shift * static_cast<double>(run.den);
                    const int64_t q0 = static_cast<int64_t>(std::floor(qr));
                    const double th = qr - static_cast<double>(q0);
                    for (int64_t i = 0; i < static_cast<int64_t>(m); ++i) {
                        int64_t a = i + q0, b = a + 1;
                        if (a < 0 || b >= static_cast<int64_t>(m)) continue;
                        double va = ch[static_cast<size_t>(a)], vb = ch[static_cast<size_t>(b)];
                        if (va <= 0.0 || vb <= 0.0) continue;
                        out[static_cast<size_t>(i)] +=
                            coeff * std::exp2((1.0 - th) * std::log2(va) + th * std::log2(vb));
                    }
                }
            }
            outs[static_cast<size_t>(bi)] = std::move(out);
        });
        for (size_t t = 0; t < todo.size(); ++t) cur.emplace(todo[t].first, std::move(outs[t]));
        prev = std::move(cur);
        if (opts.retain_levels) run.levels[static_cast<size_t>(j)] = prev;
    }

    const auto& fin = prev.at(detail::pack_cvec(s));
    run.result.u_lo = run.u_lo;
    run.result.den = run.den;
    run.result.lipschitz = f.lipschitz;
    run.result.log2v.resize(m);
    for (size_t i = 0; i < m; ++i)
        run.result.log2v[i] = fin[i] > 0 ? std::log2(fin[i]) : -std::numeric_limits<double>::infinity();
    return run;
}

// ---------------------------------------------------------------------------
// step records over a retained recursion
// ---------------------------------------------------------------------------

struct StepTrace {
    std::vector<double> t_seq; // t_ell ... t_0 in descent order
    std::vector<int> w;        // chosen atom index per step, ell entries
    std::vector<double> h_seq; // h_ell ... h_0
    std::vector<bool> robust;
    std::vector<bool> drop;
};

namespace detail {
inline double query_level(const AveragingRun& run, const std::map<uint64_t, std::vector<double>>& lvl,
                          const std::vector<int>& c, double t) {
    auto it = lvl.find(pack_cvec(c));
    if (it == lvl.end()) throw ValidationError("step record: missing level entry");
    double pos = t * static_cast<double>(run.den) - static_cast<double>(run.u_lo);
    int64_t i = static_cast<int64_t>(std::llround(pos));
    if (std::abs(pos - static_cast<double>(i)) > 1e-6)
        throw ValidationError("step record: point off grid");
    if (i < 0 || i >= static_cast<int64_t>(it->second.size())) return 0.0;
    return it->second[static_cast<size_t>(i)];
}
} // namespace detail

// greedy descent: at each level pick the smallest atom index whose child value
// meets the current level; flag robustness and R-drops along the way
inline StepTrace extract_step_record(const AveragingRun& run, double t, double lambda, double R) {
    if (run.levels.empty()) throw ValidationError("step record: run did not retain levels");
    const size_t k = run.atoms.size();
    const double drop_scale =
        R / (static_cast<double>(run.N) * std::sqrt(static_cast<double>(run.n_full)));
    // nonzero atom differences, for the drop test
    std::vector<double> diffs;
    for (size_t p = 0; p < k; ++p)
        for (size_t q = 0; q < k; ++q)
            if (p != q) diffs.push_back((run.atoms[p] - run.atoms[q]).to_double());
    std::sort(diffs.begin(), diffs.end());
    diffs.erase(std::unique(diffs.begin(), diffs.end()), diffs.end());

    StepTrace tr;
    std::vector<int> c = run.s_top;
    double t_cur = t;
    double h_cur = detail::query_level(run, run.levels[static_cast<size_t>(run.ell)], c, t_cur);
    tr.t_seq.push_back(t_cur);
    tr.h_seq.push_back(h_cur);
    for (int i = run.ell; i >= 1; --i) {
        const auto& lvl = run.levels[static_cast<size_t>(i - 1)];
        const double Xi = static_cast<double>(run.X[static_cast<size_t>(i - 1)]);
        int pick = -1;
        double pick_val = -1;
        double best_val = -1;
        int best = -1;
        for (size_t u = 0; u < k; ++u) {
            if (c[u] == 0) continue;
            std::vector<int> child = c;
            child[u] -= 1;
            double val =
                detail::query_level(run, lvl, child, t_cur + run.atoms[u].to_double() * Xi);
            if (val > best_val) {
                best_val = val;
                best = static_cast<int>(u);
            }
            if (pick < 0 && val >= h_cur * (1.0 - 1e-9)) {
                pick = static_cast<int>(u);
                pick_val = val;
            }
        }
        if (pick < 0) { // numerical fuzz: fall back to the largest child
            pick = best;
            pick_val = best_val;
        }
        // robustness of this step: the chosen atom's running frequency
        double wbar = static_cast<double>(c[static_cast<size_t>(pick)]) / static_cast<double>(i);
        tr.robust.push_back(wbar > lambda && wbar < 1.0 - lambda);
        // R-drop: every admissible child at every nonzero difference shift is small
        bool is_drop = true;
        for (size_t u = 0; u < k && is_drop; ++u) {
            if (c[u] == 0) continue;
            std::vector<int> child = c;
            child[u] -= 1;
            for (double z : diffs) {
                if (z == 0.0) continue;
                double val = detail::query_level(
                    run, lvl, child, t_cur + run.atoms[static_cast<size_t>(pick)].to_double() * Xi + z * Xi);
                if (val > drop_scale) {
                    is_drop = false;
                    break;
                }
            }
        }
        tr.drop.push_back(is_drop);
        tr.w.push_back(pick);
        c[static_cast<size_t>(pick)] -= 1;
        t_cur = t_cur + run.atoms[static_cast<size_t>(tr.w.back())].to_double() * Xi;
        h_cur = pick_val;
        tr.t_seq.push_back(t_cur);
        tr.h_seq.push_back(h_cur);
    }
    return tr;
}

// re-evaluates each level's convex identity along the trace; returns the
// largest deviation from the stored h values
inline double verify_trace(const AveragingRun& run, const StepTrace& tr) {
    double worst = 0;
    std::vector<int> c = run.s_top;
    for (size_t step = 0; step < tr.w.size(); ++step) {
        int i = run.ell - static_cast<int>(step);
        double t_i = tr.t_seq[step];
        double acc = 0;
        for (size_t u = 0; u < run.atoms.size(); ++u) {
            if (c[u] == 0) continue;
            std::vector<int> child = c;
            child[u] -= 1;
            double val = detail::query_level(
                run, run.levels[static_cast<size_t>(i - 1)], child,
                t_i + run.atoms[u].to_double() * static_cast<double>(run.X[static_cast<size_t>(i - 1)]));
            acc += static_cast<double>(c[u]) / static_cast<double>(i) * val;
        }
        worst = std::max(worst, std::abs(acc - tr.h_seq[step]));
        c[static_cast<size_t>(tr.w[step])] -= 1;
    }
    return worst;
}

// ---------------------------------------------------------------------------
// grid construction for the averaging experiments
// ---------------------------------------------------------------------------

// denominator that resolves every atom shift exactly and meets eta h <= 1e-3
inline int64_t resolving_den(const DiscreteDist& d, double eta, double target = 1e-3) {
    Rational L = lcm_rational_dens(d.atoms());
    int64_t den = L.num().to_int64();
    while (eta / static_cast<double>(den) > target) den *= 2;
    return den;
}

// widened symmetric grid: profile support T0 plus the worst-case shift sum
inline std::pair<int64_t, int64_t> widened_grid(const DiscreteDist& d, const AdmissibleSpec& spec,
                                                int64_t den, int n_scale) {
    double amax = 0;
    for (const auto& a : d.atoms()) amax = std::max(amax, std::abs(a.to_double()));
    double shift_sum = 0;
    for (const auto& b : spec.blocks) {
        int64_t worst = 0;
        for (auto [lo, hi] : b) worst = std::max({worst, std::abs(lo), std::abs(hi)});
        shift_sum += amax * static_cast<double>(worst);
    }
    double t0 = std::sqrt(static_cast<double>(n_scale)) * 55.0;
    int64_t half = static_cast<int64_t>(std::ceil((t0 + shift_sum) * static_cast<double>(den)));
    return {-half, half};
}

struct ExceedanceRow {
    double L = 0;
    double exceedance = 0;
    double stderr_ = 0;
};

struct InversionConfig {
    DiscreteDist dist = DiscreteDist::bernoulli(Rational(1, 2));
    int64_t N = 64;
    int n = 16;
    double K1 = 2, K2 = 4, K3 = 8;
    double delta = 0.1;
    AdmissibleSpec::Mode mode = AdmissibleSpec::Q;
    int trials = 200;
    std::vector<double> L_grid = {0.25, 0.5, 1.0, 2.0, 4.0, 8.0};
    RngSeed seed;
    int workers = 1;
};

// counts m = round(p n) patched to sum exactly to n
inline std::vector<int> central_counts(const DiscreteDist& d, int n) {
    std::vector<int> m(d.k());
    int total = 0;
    std::vector<std::pair<double, size_t>> fracs;
    for (size_t j = 0; j < d.k(); ++j) {
        double exact = d.probs()[j].to_double() * n;
        m[j] = static_cast<int>(std::floor(exact));
        total += m[j];
        fracs.emplace_back(exact - std::floor(exact), j);
    }
    std::sort(fracs.rbegin(), fracs.rend());
    for (int t = 0; t < n - total; ++t) m[fracs[static_cast<size_t>(t)].second] += 1;
    return m;
}

struct InversionResult {
    std::vector<ExceedanceRow> curve;
    std::vector<double> sup_norms; // per trial, scaled by N sqrt(n)
};

inline InversionResult inversion_experiment(const InversionConfig& cfg) {
    auto m = central_counts(cfg.dist, cfg.n);
    const int64_t den = resolving_den(cfg.dist, 1.0 / std::sqrt(static_cast<double>(cfg.n)));
    std::vector<double> sups(static_cast<size_t>(cfg.trials));
    parallel_blocks(cfg.trials, cfg.workers, [&](int trial) {
        Rng rng({cfg.seed.seed, cfg.seed.stream + 1000003ULL * static_cast<uint64_t>(trial + 1)});
        auto spec = generate_admissible(cfg.N, cfg.n, cfg.K1, cfg.K2, cfg.K3, cfg.delta, cfg.mode, rng);
        auto X = sample_from_blocks(spec, rng);
        auto [ulo, uhi] = widened_grid(cfg.dist, spec, den, cfg.n);
        auto f = default_profile(cfg.n, ulo, uhi, den);
        AverageOptions opts;
        opts.retain_levels = false;
        auto run = average(f, cfg.dist, X, m, spec, opts);
        sups[static_cast<size_t>(trial)] =
            run.result.linf() * static_cast<double>(cfg.N) * std::sqrt(static_cast<double>(cfg.n));
    });
    InversionResult out;
    out.sup_norms = sups;
    for (double L : cfg.L_grid) {
        int hits = 0;
        for (double s : sups) hits += (s >= L);
        double p = static_cast<double>(hits) / static_cast<double>(cfg.trials);
        out.curve.push_back({L, p, std::sqrt(p * (1 - p) / static_cast<double>(cfg.trials))});
    }
    return out;
}

} // namespace rmlab
