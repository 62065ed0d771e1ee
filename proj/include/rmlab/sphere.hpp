#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "rmlab/distribution.hpp"
#include "rmlab/rng.hpp"

namespace rmlab {

struct ConsParams {
    double delta = 0.1; // in (0, 1/4)
    double rho = 0.1;   // > 0
};

struct ConsWitness {
    double lambda = 0.0;
    std::vector<int> covered; // indices i with |x_i - lambda| <= rho/sqrt(n)
};

// almost-constant test: slide a window of width 2 rho / sqrt(n) over the
// sorted coordinates and look for one covering at least (1 - delta) n of them
inline std::optional<ConsWitness> cons_membership(const std::vector<double>& x, ConsParams p) {
    const size_t n = x.size();
    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return x[a] < x[b]; });
    const double width = 2.0 * p.rho / std::sqrt(static_cast<double>(n));
    const double needed = (1.0 - p.delta) * static_cast<double>(n);
    size_t best_i = 0, best_count = 0;
    size_t j = 0;
    for (size_t i = 0; i < n; ++i) {
        if (j < i) j = i;
        while (j < n && x[order[j]] - x[order[i]] <= width + 1e-15) ++j;
        if (j - i > best_count) {
            best_count = j - i;
            best_i = i;
        }
    }
    if (static_cast<double>(best_count) + 1e-12 < needed) return std::nullopt;
    ConsWitness w;
    double lo = x[order[best_i]], hi = x[order[best_i + best_count - 1]];
    w.lambda = 0.5 * (lo + hi);
    for (size_t t = best_i; t < best_i + best_count; ++t) w.covered.push_back(static_cast<int>(order[t]));
    std::sort(w.covered.begin(), w.covered.end());
    return w;
}

// classification against the elementary centers e_i, (e_i - e_j)/sqrt 2,
// (e_i + e_j)/sqrt 2
struct ElemClass {
    enum Kind { None, Single, PairMinus, PairPlus } kind = None;
    int i = -1, j = -1;
    double distance = 0.0;
};

// Candidates are restricted to the two largest-magnitude coordinates: any
// center built on other coordinates is at distance > delta' for delta' < 1/4.
inline ElemClass elem_classify(const std::vector<double>& x, double delta_prime) {
    const int n = static_cast<int>(x.size());
    int i1 = 0, i2 = -1;
    for (int t = 1; t < n; ++t)
        if (std::abs(x[static_cast<size_t>(t)]) > std::abs(x[static_cast<size_t>(i1)])) i1 = t;
    for (int t = 0; t < n; ++t) {
        if (t == i1) continue;
        if (i2 < 0 || std::abs(x[static_cast<size_t>(t)]) > std::abs(x[static_cast<size_t>(i2)])) i2 = t;
    }
    double norm2 = 0;
    for (double v : x) norm2 += v * v;
    auto dist_to_single = [&](int i) {
        // || x - e_i ||^2 = |x|^2 + 1 - 2 x_i
        return std::sqrt(std::max(0.0, norm2 + 1.0 - 2.0 * x[static_cast<size_t>(i)]));
    };
    auto dist_to_pair = [&](int i, int j, double sj) {
        const double r = 1.0 / std::sqrt(2.0);
        return std::sqrt(std::max(
            0.0, norm2 + 1.0 - 2.0 * r * (x[static_cast<size_t>(i)] + sj * x[static_cast<size_t>(j)])));
    };
    ElemClass best;
    best.distance = delta_prime;
    auto consider = [&](ElemClass::Kind kind, int i, int j, double dist) {
        // ties broken by smallest i, then j, then class order
        if (dist > best.distance + 1e-15) return;
        bool better = dist < best.distance - 1e-15;
        if (!better && best.kind != ElemClass::None) {
            auto rank = [](const ElemClass& e) {
                return std::tuple<int, int, int>(e.i, e.j, static_cast<int>(e.kind));
            };
            ElemClass cand{kind, i, j, dist};
            if (rank(cand) >= rank(best)) return;
        }
        best = ElemClass{kind, i, j, dist};
    };
    for (int i : {i1, i2}) {
        if (i < 0) continue;
        consider(ElemClass::Single, i, -1, dist_to_single(i));
    }
    if (i2 >= 0) {
        for (auto [i, j] : {std::pair<int, int>{i1, i2}, std::pair<int, int>{i2, i1}}) {
            consider(ElemClass::PairMinus, i, j, dist_to_pair(i, j, -1.0));
        }
        int pi = std::min(i1, i2), pj = std::max(i1, i2);
        consider(ElemClass::PairPlus, pi, pj, dist_to_pair(pi, pj, 1.0));
    }
    if (best.kind == ElemClass::None) best.distance = 0.0;
    return best;
}

// two-group witness for vectors that are not almost-constant
struct NonconsWitness {
    int which_case = 0; // 1 or 2
    double kappa = 0.0, kappa_prime = 0.0;
    double nu = 0.0, nu_prime = 0.0;
    std::vector<int> group1, group2;
};

// Searches kappa over the sorted |x_i| sqrt(n) grid and nu over a fixed
// lattice; returns the first witness found. The universal finite set of
// candidate levels is not constructed; realized values are reported instead.
inline std::optional<NonconsWitness> noncons_witness(const std::vector<double>& x, ConsParams p,
                                                     double nu_step = 0.01) {
    const int n = static_cast<int>(x.size());
    if (cons_membership(x, p)) throw ValidationError("noncons_witness: input is almost-constant");
    const double rt = std::sqrt(static_cast<double>(n));
    std::vector<double> mags(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) mags[static_cast<size_t>(i)] = std::abs(x[static_cast<size_t>(i)]) * rt;
    std::vector<double> grid = mags;
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    const double kmax = grid.back() + 1.0;

    for (double nu = nu_step; nu < 0.5 + 1e-9; nu += nu_step) {
        const int need = static_cast<int>(std::ceil(nu * n));
        if (need < 1) continue;
        // case 1: nu n small coordinates, and nu n in a separated band above
        for (double kappa : grid) {
            int small = 0;
            for (double m : mags)
                if (m <= kappa + 1e-12) ++small;
            if (small < need) continue;
            double nu_prime = nu_step;
            int band = 0;
            for (double m : mags)
                if (m > kappa + nu_prime - 1e-12 && m <= kmax + 1e-12) ++band;
            if (band < need) continue;
            NonconsWitness w;
            w.which_case = 1;
            w.kappa = kappa;
            w.kappa_prime = kmax;
            w.nu = nu;
            w.nu_prime = nu_prime;
            for (int i = 0; i < n; ++i) {
                double m = mags[static_cast<size_t>(i)];
                if (m <= kappa + 1e-12) w.group1.push_back(i);
                else if (m > kappa + nu_prime - 1e-12) w.group2.push_back(i);
            }
            return w;
        }
        // case 2: nu n positive and nu n negative coordinates in (kappa, kappa')
        {
            double kappa = nu_step; // strictly positive lower level
            int pos = 0, neg = 0;
            for (int i = 0; i < n; ++i) {
                double v = x[static_cast<size_t>(i)] * rt;
                if (v > kappa && v < kmax) ++pos;
                if (v < -kappa && v > -kmax) ++neg;
            }
            if (pos >= need && neg >= need) {
                NonconsWitness w;
                w.which_case = 2;
                w.kappa = kappa;
                w.kappa_prime = kmax;
                w.nu = nu;
                w.nu_prime = nu_step;
                for (int i = 0; i < n; ++i) {
                    double v = x[static_cast<size_t>(i)] * rt;
                    if (v > kappa && v < kmax) w.group1.push_back(i);
                    if (v < -kappa && v > -kmax) w.group2.push_back(i);
                }
                return w;
            }
        }
    }
    return std::nullopt;
}

// randomized rounding to the integer lattice: each coordinate rounds to
// floor or ceil with probability equal to its fractional part, retried until
// the coordinate-sum drift satisfies (R4)
struct RoundResult {
    std::vector<double> rounded;
    int retries = 0;
};

inline RoundResult randomized_round(const std::vector<double>& y, double /*lambda*/, double /*mu*/,
                                    const DiscreteDist& d_delta, int trials, Rng& rng) {
    double max_support = 0.0;
    for (const auto& a : d_delta.atoms()) max_support = std::max(max_support, std::abs(a.to_double()));
    const double c_bound = 2.0 + max_support;
    const double n = static_cast<double>(y.size());
    double ysum = 0;
    for (double v : y) ysum += v;
    RoundResult out;
    for (int t = 0; t < trials; ++t) {
        std::vector<double> r(y.size());
        double rsum = 0;
        for (size_t i = 0; i < y.size(); ++i) {
            double fl = std::floor(y[i]);
            double frac = y[i] - fl;
            r[i] = fl + ((rng.next_unit() < frac) ? 1.0 : 0.0);
            rsum += r[i];
        }
        if (std::abs(ysum - rsum) <= c_bound * std::sqrt(n)) {
            out.rounded = std::move(r);
            out.retries = t;
            return out;
        }
    }
    throw BudgetError("randomized_round: retries exhausted without satisfying the sum bound");
}

// random point on the unit sphere (test and experiment helper)
inline std::vector<double> random_unit_vector(int n, Rng& rng) {
    std::vector<double> x(static_cast<size_t>(n));
    double norm2 = 0;
    do {
        norm2 = 0;
        for (auto& v : x) {
            v = rng.next_gaussian();
            norm2 += v * v;
        }
    } while (norm2 == 0);
    double inv = 1.0 / std::sqrt(norm2);
    for (auto& v : x) v *= inv;
    return x;
}

} // namespace rmlab
