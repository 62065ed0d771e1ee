#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "rmlab/distribution.hpp"
#include "rmlab/rng.hpp"

namespace rmlab {

// ---------------------------------------------------------------------------
// SumDist: the finite law of sum b_i x_i as sorted (value, mass) atoms.
// Masses are always exact rationals; values are exact when the coordinates
// are rational, otherwise doubles merged within 1e-12 absolute.
// ---------------------------------------------------------------------------
struct SumDist {
    std::vector<double> values;         // sorted ascending
    std::vector<Rational> values_exact; // parallel, present iff exact_values
    std::vector<Rational> masses;
    bool exact_values = false;

    size_t size() const { return values.size(); }
    Rational total_mass() const {
        Rational t;
        for (const auto& m : masses) t += m;
        return t;
    }
};

static constexpr double kValueMergeTol = 1e-12;

// per-atom count bands for length-n i.i.d. vectors
struct SliceConstraint {
    int n = 0;
    std::vector<int> lo, hi; // inclusive

    // lower = ceil(p_j n - g_j n), upper = floor(p_j n + g_j n), clamped to [0, n]
    static SliceConstraint bands(const DiscreteDist& d, int n, const std::vector<Rational>& gamma) {
        if (gamma.size() != d.k()) throw ValidationError("slice: gamma length mismatch");
        SliceConstraint c;
        c.n = n;
        Rational nn(n);
        for (size_t j = 0; j < d.k(); ++j) {
            Rational mid = d.probs()[j] * nn, w = gamma[j] * nn;
            int64_t l = (mid - w).ceil_i64(), h = (mid + w).floor_i64();
            c.lo.push_back(static_cast<int>(std::max<int64_t>(0, l)));
            c.hi.push_back(static_cast<int>(std::min<int64_t>(n, h)));
        }
        return c;
    }
    static SliceConstraint bands_uniform(const DiscreteDist& d, int n, const Rational& gamma) {
        return bands(d, n, std::vector<Rational>(d.k(), gamma));
    }
    static SliceConstraint exact_counts(std::vector<int> m) {
        SliceConstraint c;
        c.n = 0;
        for (int v : m) c.n += v;
        c.lo = m;
        c.hi = std::move(m);
        return c;
    }
    static SliceConstraint full(size_t k, int n) {
        SliceConstraint c;
        c.n = n;
        c.lo.assign(k, 0);
        c.hi.assign(k, n);
        return c;
    }

    bool satisfiable() const {
        long slo = 0, shi = 0;
        for (size_t j = 0; j < lo.size(); ++j) {
            if (lo[j] > hi[j]) return false;
            slo += lo[j];
            shi += hi[j];
        }
        return slo <= n && n <= shi;
    }
    bool admits(const std::vector<int>& counts) const {
        for (size_t j = 0; j < lo.size(); ++j)
            if (counts[j] < lo[j] || counts[j] > hi[j]) return false;
        return true;
    }
};

// ---------------------------------------------------------------------------
// exact law of sum b_i x_i
// ---------------------------------------------------------------------------
namespace detail {

inline SumDist finalize_exact(std::map<Rational, Rational>& acc) {
    SumDist s;
    s.exact_values = true;
    for (auto& [v, m] : acc) {
        s.values_exact.push_back(v);
        s.values.push_back(v.to_double());
        s.masses.push_back(m);
    }
    return s;
}

inline SumDist finalize_double(std::vector<std::pair<double, Rational>>& atoms) {
    std::sort(atoms.begin(), atoms.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    SumDist s;
    for (auto& [v, m] : atoms) {
        if (!s.values.empty() && v - s.values.back() <= kValueMergeTol) {
            s.masses.back() += m;
        } else {
            s.values.push_back(v);
            s.masses.push_back(m);
        }
    }
    return s;
}

inline void check_budget_pow(size_t k, size_t n, uint64_t budget) {
    double lg = static_cast<double>(n) * std::log2(static_cast<double>(k));
    if (lg > 62.0 || lg > std::log2(static_cast<double>(budget)))
        throw BudgetError("sum_dist: k^n exceeds budget");
}

} // namespace detail

inline SumDist sum_dist(const DiscreteDist& d, const std::vector<Rational>& x,
                        uint64_t budget = (1ULL << 24)) {
    const size_t n = x.size(), k = d.k();
    // value-indexed dynamic program over integer-scaled sums when affordable
    Rational sx = lcm_rational_dens(x);
    auto sa = d.scaled_atoms();
    std::vector<int64_t> xs;
    bool ints_ok = true;
    for (const auto& xi : x) {
        Rational v = xi * sx;
        if (!v.num().fits_int64()) { ints_ok = false; break; }
        xs.push_back(v.num().to_int64());
    }
    if (ints_ok) {
        // range must cover every prefix sum, not only the final one
        int64_t run_lo = 0, run_hi = 0, lo = 0, hi = 0;
        for (size_t i = 0; i < n && ints_ok; ++i) {
            int64_t mn = INT64_MAX, mx = INT64_MIN;
            for (int64_t a : sa.values) {
                // xs and atoms are modest; products checked via double guard
                double p = static_cast<double>(a) * static_cast<double>(xs[i]);
                if (std::abs(p) > 9e17) { ints_ok = false; break; }
                int64_t v = a * xs[i];
                mn = std::min(mn, v);
                mx = std::max(mx, v);
            }
            if (!ints_ok) break;
            run_lo += mn;
            run_hi += mx;
            lo = std::min(lo, run_lo);
            hi = std::max(hi, run_hi);
        }
        double span = static_cast<double>(hi - lo) + 1.0;
        if (ints_ok && span <= static_cast<double>(budget)) {
            const size_t width = static_cast<size_t>(hi - lo + 1);
            std::vector<Rational> cur(width), next(width);
            cur[static_cast<size_t>(-lo)] = Rational(1);
            int64_t reach_lo = 0, reach_hi = 0;
            for (size_t i = 0; i < n; ++i) {
                for (auto& q : next) q = Rational(0);
                int64_t new_lo = INT64_MAX, new_hi = INT64_MIN;
                for (int64_t v = reach_lo; v <= reach_hi; ++v) {
                    Rational& m = cur[static_cast<size_t>(v - lo)];
                    if (m.is_zero()) continue;
                    for (size_t j = 0; j < k; ++j) {
                        int64_t w = v + sa.values[j] * xs[i];
                        next[static_cast<size_t>(w - lo)] += m * d.probs()[j];
                        new_lo = std::min(new_lo, w);
                        new_hi = std::max(new_hi, w);
                    }
                }
                std::swap(cur, next);
                reach_lo = new_lo;
                reach_hi = new_hi;
            }
            Rational scale = sx * sa.scale; // real sum = scaled / scale
            std::map<Rational, Rational> acc;
            for (int64_t v = reach_lo; v <= reach_hi; ++v) {
                const Rational& m = cur[static_cast<size_t>(v - lo)];
                if (!m.is_zero()) acc.emplace(Rational(v) / scale, m);
            }
            return detail::finalize_exact(acc);
        }
    }
    // fall back to full enumeration
    detail::check_budget_pow(k, n, budget);
    std::map<Rational, Rational> acc;
    std::vector<size_t> idx(n, 0);
    for (;;) {
        Rational v, m(1);
        for (size_t i = 0; i < n; ++i) {
            v += d.atoms()[idx[i]] * x[i];
            m *= d.probs()[idx[i]];
        }
        acc[v] += m;
        size_t c = n;
        while (c > 0 && ++idx[c - 1] == k) idx[--c] = 0;
        if (c == 0) break;
    }
    return detail::finalize_exact(acc);
}

inline SumDist sum_dist(const DiscreteDist& d, const std::vector<double>& x,
                        uint64_t budget = (1ULL << 24)) {
    const size_t n = x.size(), k = d.k();
    detail::check_budget_pow(k, n, budget);
    auto av = d.atoms_double();
    std::vector<std::pair<double, Rational>> atoms;
    std::vector<size_t> idx(n, 0);
    for (;;) {
        Rational m(1);
        double v = 0;
        for (size_t i = 0; i < n; ++i) {
            m *= d.probs()[idx[i]];
            v += av[idx[i]] * x[i];
        }
        atoms.emplace_back(v, m);
        size_t c = n;
        while (c > 0 && ++idx[c - 1] == k) idx[--c] = 0;
        if (c == 0) break;
    }
    return detail::finalize_double(atoms);
}

// ---------------------------------------------------------------------------
// Levy concentration: largest mass in any closed window of radius r. The sup
// is attained by a window whose left edge sits on an atom.
// ---------------------------------------------------------------------------

inline Rational levy_window(const SumDist& s, double r) {
    if (r < 0) throw ValidationError("levy: radius must be nonnegative");
    Rational best;
    size_t j = 0;
    Rational run; // mass of window [i, j)
    for (size_t i = 0; i < s.size(); ++i) {
        if (j < i) { j = i; run = Rational(0); }
        while (j < s.size() && s.values[j] <= s.values[i] + 2 * r + 1e-15 * std::max(1.0, std::abs(s.values[i]))) {
            run += s.masses[j];
            ++j;
        }
        if (run > best) best = run;
        run -= s.masses[i];
    }
    return best;
}

inline Rational levy_exact(const SumDist& s, const Rational& r) {
    if (!s.exact_values) throw ValidationError("levy_exact: needs exact values");
    if (r.sign() < 0) throw ValidationError("levy: radius must be nonnegative");
    Rational best;
    Rational two_r = Rational(2) * r;
    size_t j = 0;
    Rational run;
    for (size_t i = 0; i < s.size(); ++i) {
        if (j < i) { j = i; run = Rational(0); }
        while (j < s.size() && s.values_exact[j] <= s.values_exact[i] + two_r) {
            run += s.masses[j];
            ++j;
        }
        if (run > best) best = run;
        run -= s.masses[i];
    }
    return best;
}

inline double levy(const SumDist& s, double r) { return levy_window(s, r).to_double(); }

// ---------------------------------------------------------------------------
// conditional law given per-atom count bands
// ---------------------------------------------------------------------------

namespace detail {

// enumerate count vectors c with sum(prefix) constraints; small k only
inline void pack_counts(const std::vector<int>& c, uint64_t& key) {
    key = 0;
    for (int v : c) key = (key << 9) | static_cast<uint64_t>(v);
}

} // namespace detail

// Exact conditional law of sum b_i x_i given counts in bands: a dynamic
// program jointly indexed by count vector and integer-scaled sum.
inline SumDist conditional_sum_dist(const DiscreteDist& d, const std::vector<Rational>& x,
                                    const SliceConstraint& c, uint64_t budget = (1ULL << 26)) {
    const int n = static_cast<int>(x.size());
    const size_t k = d.k();
    if (c.n != n) throw ValidationError("conditional_sum_dist: constraint length mismatch");
    if (!c.satisfiable()) throw ValidationError("conditional_sum_dist: unsatisfiable constraint");
    if (k > 7 || n > 511) throw BudgetError("conditional_sum_dist: count packing limit");
    Rational sx = lcm_rational_dens(x);
    auto sa = d.scaled_atoms();
    std::vector<int64_t> xs;
    for (const auto& xi : x) xs.push_back((xi * sx).num().to_int64());
    int64_t lo = 0, hi = 0;
    for (int i = 0; i < n; ++i) {
        int64_t mn = INT64_MAX, mx = INT64_MIN;
        for (int64_t a : sa.values) {
            int64_t v = a * xs[static_cast<size_t>(i)];
            mn = std::min(mn, v);
            mx = std::max(mx, v);
        }
        lo += mn;
        hi += mx;
    }
    const int64_t width = hi - lo + 1;
    // count-vector space: product of (hi_j - ... ) capped bands
    uint64_t cv_space = 1;
    for (size_t j = 0; j < k; ++j) cv_space *= static_cast<uint64_t>(c.hi[j] + 1);
    if (cv_space * static_cast<uint64_t>(width) > budget)
        throw BudgetError("conditional_sum_dist: DP state space exceeds budget");

    // DP keyed by (count vector, scaled sum)
    using Key = std::pair<uint64_t, int64_t>;
    std::map<Key, Rational> cur, next;
    std::vector<int> zero(k, 0);
    uint64_t zkey;
    detail::pack_counts(zero, zkey);
    cur[{zkey, 0}] = Rational(1);
    std::vector<int> cnt(k);
    for (int i = 0; i < n; ++i) {
        next.clear();
        for (const auto& [key, mass] : cur) {
            uint64_t ck = key.first;
            for (size_t j = k; j-- > 0;) {
                cnt[j] = static_cast<int>(ck & 0x1ff);
                ck >>= 9;
            }
            for (size_t j = 0; j < k; ++j) {
                if (cnt[j] + 1 > c.hi[j]) continue;
                // feasibility: remaining coordinates must be able to reach lows
                int remaining = n - i - 1;
                long deficit = 0;
                for (size_t l = 0; l < k; ++l)
                    deficit += std::max(0, c.lo[l] - cnt[l] - (l == j ? 1 : 0));
                if (deficit > remaining) continue;
                cnt[j] += 1;
                uint64_t nk;
                detail::pack_counts(cnt, nk);
                cnt[j] -= 1;
                int64_t nv = key.second + sa.values[j] * xs[static_cast<size_t>(i)];
                next[{nk, nv}] += mass * d.probs()[j];
            }
        }
        std::swap(cur, next);
    }
    Rational scale = sx * sa.scale;
    std::map<Rational, Rational> acc;
    Rational band_mass;
    for (const auto& [key, mass] : cur) {
        acc[Rational(key.second) / scale] += mass;
        band_mass += mass;
    }
    if (band_mass.is_zero()) throw ValidationError("conditional_sum_dist: band event has zero mass");
    for (auto& [v, m] : acc) m /= band_mass;
    return detail::finalize_exact(acc);
}

// filtered-enumeration variant for real coordinates
inline SumDist conditional_sum_dist(const DiscreteDist& d, const std::vector<double>& x,
                                    const SliceConstraint& c, uint64_t budget = (1ULL << 24)) {
    const size_t n = x.size(), k = d.k();
    if (!c.satisfiable()) throw ValidationError("conditional_sum_dist: unsatisfiable constraint");
    detail::check_budget_pow(k, n, budget);
    auto av = d.atoms_double();
    std::vector<std::pair<double, Rational>> atoms;
    std::vector<size_t> idx(n, 0);
    std::vector<int> counts(k, 0);
    counts[0] = static_cast<int>(n);
    Rational band_mass;
    for (;;) {
        if (c.admits(counts)) {
            Rational m(1);
            double v = 0;
            for (size_t i = 0; i < n; ++i) {
                m *= d.probs()[idx[i]];
                v += av[idx[i]] * x[i];
            }
            atoms.emplace_back(v, m);
            band_mass += m;
        }
        size_t cpos = n;
        while (cpos > 0) {
            --counts[idx[cpos - 1]];
            if (++idx[cpos - 1] < k) {
                ++counts[idx[cpos - 1]];
                break;
            }
            idx[cpos - 1] = 0;
            ++counts[0];
            --cpos;
        }
        if (cpos == 0) break;
    }
    if (band_mass.is_zero()) throw ValidationError("conditional_sum_dist: band event has zero mass");
    for (auto& [v, m] : atoms) m /= band_mass;
    return detail::finalize_double(atoms);
}

struct ConditionalLevy {
    Rational value;      // exact when exact == true
    bool exact = false;
    double estimate = 0; // Monte Carlo fallback
    double stderr_ = 0;
};

// band-conditioned Monte Carlo: i.i.d. draws rejected until the counts land
inline ConditionalLevy levy_conditional_mc(const DiscreteDist& d, const std::vector<double>& x,
                                           const SliceConstraint& c, double r, uint64_t samples,
                                           RngSeed seed, uint64_t max_rejects = 1000000) {
    if (!c.satisfiable()) throw ValidationError("levy_conditional: unsatisfiable constraint");
    AtomSampler sampler(d);
    auto av = d.atoms_double();
    Rng rng(seed);
    std::vector<double> sums;
    sums.reserve(samples);
    std::vector<int> counts(d.k());
    std::vector<uint8_t> draw(x.size());
    uint64_t rejects = 0;
    while (sums.size() < samples) {
        std::fill(counts.begin(), counts.end(), 0);
        for (auto& e : draw) {
            e = sampler.sample(rng);
            ++counts[e];
        }
        if (!c.admits(counts)) {
            if (++rejects > max_rejects) throw BudgetError("levy_conditional: rejection budget");
            continue;
        }
        double v = 0;
        for (size_t i = 0; i < x.size(); ++i) v += av[draw[i]] * x[i];
        sums.push_back(v);
    }
    std::sort(sums.begin(), sums.end());
    uint64_t best = 0;
    size_t j = 0;
    for (size_t i = 0; i < sums.size(); ++i) {
        if (j < i) j = i;
        while (j < sums.size() && sums[j] <= sums[i] + 2 * r) ++j;
        best = std::max<uint64_t>(best, j - i);
    }
    ConditionalLevy out;
    out.exact = false;
    out.estimate = static_cast<double>(best) / static_cast<double>(samples);
    out.stderr_ = std::sqrt(out.estimate * (1 - out.estimate) / static_cast<double>(samples));
    return out;
}

inline ConditionalLevy levy_conditional(const DiscreteDist& d, const std::vector<Rational>& x,
                                        const SliceConstraint& c, const Rational& r,
                                        uint64_t budget = (1ULL << 26),
                                        uint64_t mc_samples = 200000, RngSeed mc_seed = {1, 0}) {
    try {
        SumDist s = conditional_sum_dist(d, x, c, budget);
        ConditionalLevy out;
        out.value = levy_exact(s, r);
        out.exact = true;
        out.estimate = out.value.to_double();
        return out;
    } catch (const BudgetError&) {
        std::vector<double> xd;
        xd.reserve(x.size());
        for (const auto& v : x) xd.push_back(v.to_double());
        return levy_conditional_mc(d, xd, c, r.to_double(), mc_samples, mc_seed);
    }
}

// ---------------------------------------------------------------------------
// Monte Carlo estimator for large n
// ---------------------------------------------------------------------------
struct LevyMcResult {
    double estimate = 0;
    double stderr_ = 0;
};

inline LevyMcResult levy_mc(const DiscreteDist& d, const std::vector<double>& x, double r,
                            uint64_t samples, RngSeed seed) {
    if (samples < 1) throw ValidationError("levy_mc: needs at least one sample");
    AtomSampler sampler(d);
    auto av = d.atoms_double();
    Rng rng(seed);
    std::vector<double> sums(samples);
    for (uint64_t s = 0; s < samples; ++s) {
        double v = 0;
        for (double xi : x) v += av[sampler.sample(rng)] * xi;
        sums[s] = v;
    }
    std::sort(sums.begin(), sums.end());
    uint64_t best = 0;
    size_t j = 0;
    for (size_t i = 0; i < sums.size(); ++i) {
        if (j < i) j = i;
        while (j < sums.size() && sums[j] <= sums[i] + 2 * r) ++j;
        best = std::max<uint64_t>(best, j - i);
    }
    LevyMcResult res;
    res.estimate = static_cast<double>(best) / static_cast<double>(samples);
    res.stderr_ = std::sqrt(res.estimate * (1.0 - res.estimate) / static_cast<double>(samples));
    return res;
}

// ---------------------------------------------------------------------------
// threshold scale: sup of the window radii at which concentration beats L*t
// ---------------------------------------------------------------------------

namespace detail {
// scan over atom-pair windows; masses in double (the result is a real scale)
inline double threshold_from_atoms(const std::vector<double>& v, const std::vector<double>& mass,
                                   double L) {
    double best = 0.0;
    const size_t m = v.size();
    std::vector<double> prefix(m + 1, 0.0);
    for (size_t i = 0; i < m; ++i) prefix[i + 1] = prefix[i] + mass[i];
    for (size_t i = 0; i < m; ++i) {
        for (size_t j = i; j < m; ++j) {
            double gap = v[j] - v[i];
            if (gap / 2.0 >= 1.0 || gap / 2.0 >= 1.0 / L) break; // qualifying t < M/L <= 1/L
            double M = prefix[j + 1] - prefix[i];
            double cap = std::min(M / L, 1.0);
            if (cap > gap / 2.0) best = std::max(best, cap);
        }
    }
    return std::min(best, 1.0);
}
} // namespace detail

inline void require_unit(const std::vector<double>& x, double tol = 1e-10) {
    double n2 = 0;
    for (double v : x) n2 += v * v;
    if (std::abs(std::sqrt(n2) - 1.0) > tol) throw ValidationError("expected a unit vector");
}

inline double threshold_scale(const DiscreteDist& d, const std::vector<double>& x, double L,
                              double grid = 0.0, uint64_t budget = (1ULL << 24),
                              const std::optional<SliceConstraint>& cond = std::nullopt) {
    if (L < 1.0) throw ValidationError("threshold: L must be >= 1");
    require_unit(x);
    SumDist s = cond ? conditional_sum_dist(d, x, *cond, budget) : sum_dist(d, x, budget);
    std::vector<double> mass;
    mass.reserve(s.size());
    for (const auto& m : s.masses) mass.push_back(m.to_double());
    double t = detail::threshold_from_atoms(s.values, mass, L);
    if (grid > 0.0) t = std::floor(t / grid) * grid;
    return t;
}

} // namespace rmlab
