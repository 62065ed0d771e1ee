#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "rmlab/rational.hpp"
#include "rmlab/rng.hpp"

namespace rmlab {

struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct BudgetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Discrete distribution with finite support: strictly increasing rational
// atoms (k >= 2), strictly positive rational probabilities summing to one.
// Immutable after construction; safe to share across threads.
class DiscreteDist {
public:
    static DiscreteDist construct(std::vector<Rational> atoms, std::vector<Rational> probs) {
        if (atoms.size() != probs.size()) throw ValidationError("dist: atoms/probs length mismatch");
        if (atoms.size() < 2) throw ValidationError("dist: support needs at least two points");
        std::vector<size_t> order(atoms.size());
        std::iota(order.begin(), order.end(), size_t{0});
        std::sort(order.begin(), order.end(),
                  [&](size_t a, size_t b) { return atoms[a] < atoms[b]; });
        DiscreteDist d;
        for (size_t i : order) {
            d.atoms_.push_back(atoms[i]);
            d.probs_.push_back(probs[i]);
        }
        for (size_t i = 0; i + 1 < d.atoms_.size(); ++i)
            if (d.atoms_[i] == d.atoms_[i + 1]) throw ValidationError("dist: duplicate atoms");
        Rational total;
        for (const auto& p : d.probs_) {
            if (p.sign() <= 0) throw ValidationError("dist: nonpositive probability");
            total += p;
        }
        if (total != Rational(1)) throw ValidationError("dist: probabilities must sum to 1");
        return d;
    }

    static DiscreteDist bernoulli(const Rational& p) {
        return construct({Rational(0), Rational(1)}, {Rational(1) - p, p});
    }
    static DiscreteDist rademacher() {
        return construct({Rational(-1), Rational(1)}, {Rational(1, 2), Rational(1, 2)});
    }
    static DiscreteDist uniform_on(std::vector<Rational> atoms) {
        size_t k = atoms.size();
        std::vector<Rational> probs(k, Rational(1, static_cast<int64_t>(k)));
        return construct(std::move(atoms), std::move(probs));
    }

    size_t k() const { return atoms_.size(); }
    const std::vector<Rational>& atoms() const { return atoms_; }
    const std::vector<Rational>& probs() const { return probs_; }

    // atoms scaled by the lcm of denominators; entries exact integers
    struct ScaledAtoms {
        std::vector<int64_t> values;
        Rational scale; // original atom = value / scale
    };
    ScaledAtoms scaled_atoms() const {
        ScaledAtoms s;
        s.scale = lcm_rational_dens(atoms_);
        for (const auto& a : atoms_) {
            Rational v = a * s.scale;
            if (!v.num().fits_int64()) throw ValidationError("dist: scaled atom exceeds int64");
            s.values.push_back(v.num().to_int64());
        }
        return s;
    }

    std::vector<double> atoms_double() const {
        std::vector<double> r;
        for (const auto& a : atoms_) r.push_back(a.to_double());
        return r;
    }

    Rational prob_of_atom(const Rational& a) const {
        for (size_t i = 0; i < atoms_.size(); ++i)
            if (atoms_[i] == a) return probs_[i];
        return Rational(0);
    }

    bool is_bernoulli01() const {
        return k() == 2 && atoms_[0] == Rational(0) && atoms_[1] == Rational(1);
    }

private:
    DiscreteDist() = default;
    std::vector<Rational> atoms_;
    std::vector<Rational> probs_;
};

struct DistStats {
    double entropy = 0.0; // nats
    Rational p_inf;
    Rational p2_sq;
    Rational p0;
    bool is_uniform = false;
    std::optional<Rational> symmetric_shift;
};

struct DerivedDists {
    DiscreteDist diff;   // law of xi - xi'
    DiscreteDist sum;    // law of xi + xi'
    DiscreteDist tilted; // atoms of xi with prob proportional to p_i^2
};

namespace detail {
inline DiscreteDist convolve_pair(const DiscreteDist& d, bool negate_second) {
    std::vector<Rational> atoms, probs;
    for (size_t i = 0; i < d.k(); ++i) {
        for (size_t j = 0; j < d.k(); ++j) {
            Rational v = negate_second ? d.atoms()[i] - d.atoms()[j] : d.atoms()[i] + d.atoms()[j];
            Rational m = d.probs()[i] * d.probs()[j];
            auto it = std::find(atoms.begin(), atoms.end(), v);
            if (it == atoms.end()) {
                atoms.push_back(v);
                probs.push_back(m);
            } else {
                probs[static_cast<size_t>(it - atoms.begin())] += m;
            }
        }
    }
    return DiscreteDist::construct(std::move(atoms), std::move(probs));
}
} // namespace detail

inline DerivedDists derived_dists(const DiscreteDist& d) {
    std::vector<Rational> tilt_probs;
    Rational norm;
    for (const auto& p : d.probs()) norm += p * p;
    for (const auto& p : d.probs()) tilt_probs.push_back(p * p / norm);
    return DerivedDists{detail::convolve_pair(d, true), detail::convolve_pair(d, false),
                        DiscreteDist::construct(d.atoms(), std::move(tilt_probs))};
}

inline DistStats stats(const DiscreteDist& d) {
    DistStats s;
    for (const auto& p : d.probs()) {
        double pd = p.to_double();
        s.entropy -= pd * std::log(pd);
        if (p > s.p_inf) s.p_inf = p;
        s.p2_sq += p * p;
    }
    s.p0 = d.prob_of_atom(Rational(0));
    s.is_uniform = true;
    for (const auto& p : d.probs())
        if (p != d.probs()[0]) { s.is_uniform = false; break; }
    // a shift of an origin-symmetric law must pair the extreme atoms, so the
    // only candidate is a_min + a_max
    Rational cand = d.atoms().front() + d.atoms().back();
    bool sym = true;
    for (size_t i = 0; i < d.k(); ++i) {
        if (d.prob_of_atom(cand - d.atoms()[i]) != d.probs()[i]) { sym = false; break; }
    }
    if (sym) s.symmetric_shift = cand;
    return s;
}

// Closed forms attached to the dominant singular events: a zero column, and
// two columns equal resp. opposite.
struct PredictedProbabilities {
    Rational pE1;      // P[some fixed column is zero] = p0^n
    Rational pE1minus; // P[two fixed columns equal] = (sum p_i^2)^n
    Rational pE1plus;  // P[two fixed columns opposite] = P[xi = -xi']^n
    Rational conjecture; // 2n pE1 + n(n-1)(pE1minus + pE1plus)
    std::optional<double> bernoulli_two_term; // 2n(1-p)^n + n(n-1)(p^2+(1-p)^2)^n
};

inline PredictedProbabilities predicted_probabilities(const DiscreteDist& d, int n) {
    if (n < 1) throw ValidationError("predicted_probabilities: n must be >= 1");
    auto st = stats(d);
    auto der = derived_dists(d);
    PredictedProbabilities r;
    uint32_t un = static_cast<uint32_t>(n);
    r.pE1 = st.p0.pow(un);
    r.pE1minus = st.p2_sq.pow(un);
    r.pE1plus = der.sum.prob_of_atom(Rational(0)).pow(un);
    Rational nn(n), pairs(static_cast<int64_t>(n) * (n - 1));
    r.conjecture = Rational(2) * nn * r.pE1 + pairs * (r.pE1minus + r.pE1plus);
    if (d.is_bernoulli01()) {
        double p = d.probs()[1].to_double();
        r.bernoulli_two_term = 2.0 * n * std::pow(1.0 - p, n) +
                               static_cast<double>(n) * (n - 1) *
                                   std::pow(p * p + (1.0 - p) * (1.0 - p), n);
    }
    return r;
}

// inverse-CDF sampler over exact cumulative probabilities, 64-bit draws
class AtomSampler {
public:
    explicit AtomSampler(const DiscreteDist& d) {
        Rational cum;
        BigInt two64 = BigInt(2).pow(64);
        for (size_t i = 0; i + 1 < d.k(); ++i) {
            cum += d.probs()[i];
            BigInt t = cum.num() * two64 / cum.den(); // floor(cum * 2^64)
            // thresholds in [2^63, 2^64) are recovered via two's complement
            uint64_t tv = t.fits_int64() ? static_cast<uint64_t>(t.to_int64())
                                         : static_cast<uint64_t>((t - two64).to_int64());
            thresholds_.push_back(tv);
        }
    }
    uint8_t sample(Rng& rng) const {
        uint64_t u = rng.next_u64();
        uint8_t i = 0;
        while (i < thresholds_.size() && u >= thresholds_[i]) ++i;
        return i;
    }

private:
    std::vector<uint64_t> thresholds_;
};

} // namespace rmlab
