#include "doctest.h"

#include <vector>

#include "rmlab/exact.hpp"

using namespace rmlab;

namespace {

// Independent oracle pieces: cofactor-expansion determinant and a plain
// recursive walk over all assignments, no pruning, no shared kernels.
int64_t det_cofactor(const std::vector<int64_t>& m, int n) {
    if (n == 1) return m[0];
    int64_t acc = 0;
    std::vector<int64_t> minor(static_cast<size_t>((n - 1) * (n - 1)));
    for (int c = 0; c < n; ++c) {
        for (int i = 1; i < n; ++i) {
            int mc = 0;
            for (int j = 0; j < n; ++j) {
                if (j == c) continue;
                minor[static_cast<size_t>((i - 1) * (n - 1) + mc++)] = m[static_cast<size_t>(i * n + j)];
            }
        }
        int64_t term = m[static_cast<size_t>(c)] * det_cofactor(minor, n - 1);
        acc += (c % 2 == 0) ? term : -term;
    }
    return acc;
}

struct OracleCount {
    BigInt hits;
    BigInt total_weight; // sanity: must equal denom
};

template <class Pred>
void oracle_walk(const DiscreteDist& d, int n, std::vector<int64_t>& m,
                 const std::vector<int64_t>& scaled, const std::vector<BigInt>& wnum, int cell,
                 BigInt weight, OracleCount& out, Pred&& pred) {
    const int cells = n * n;
    if (cell == cells) {
        out.total_weight += weight;
        if (pred(m)) out.hits += weight;
        return;
    }
    for (size_t j = 0; j < d.k(); ++j) {
        m[static_cast<size_t>(cell)] = scaled[j];
        oracle_walk(d, n, m, scaled, wnum, cell + 1, weight * wnum[j], out, pred);
    }
}

template <class Pred>
Rational oracle_probability(const DiscreteDist& d, int n, Pred&& pred) {
    BigInt den(1);
    for (const auto& p : d.probs()) {
        BigInt g = BigInt::gcd(den, p.den());
        den = den / g * p.den();
    }
    std::vector<BigInt> wnum;
    for (const auto& p : d.probs()) wnum.push_back(p.num() * (den / p.den()));
    auto sa = d.scaled_atoms();
    std::vector<int64_t> m(static_cast<size_t>(n) * n);
    OracleCount out;
    oracle_walk(d, n, m, sa.values, wnum, 0, BigInt(1), out, pred);
    BigInt denom = den.pow(static_cast<uint32_t>(n * n));
    REQUIRE(out.total_weight == denom);
    return Rational(out.hits, denom);
}

Rational oracle_singularity(const DiscreteDist& d, int n) {
    return oracle_probability(d, n, [n](const std::vector<int64_t>& m) {
        return det_cofactor(m, n) == 0;
    });
}

} // namespace

TEST_SUITE("exact") {

TEST_CASE("bareiss matches cofactor expansion") {
    Rng rng({21, 0});
    for (int it = 0; it < 300; ++it) {
        int n = 1 + static_cast<int>(rng.next_below(6));
        std::vector<int64_t> m(static_cast<size_t>(n) * n);
        for (auto& v : m) v = static_cast<int64_t>(rng.next_below(7)) - 3;
        CHECK(static_cast<int64_t>(det_bareiss_i128(m, n)) == det_cofactor(m, n));
        CHECK(det_bareiss_big(m, n).to_int64() == det_cofactor(m, n));
    }
}

TEST_CASE("modular determinant screen is exact") {
    auto primes = make_screen_primes({5, 0});
    CHECK(detail::is_prime_u64(primes.p1));
    CHECK(detail::is_prime_u64(primes.p2));
    CHECK((primes.p1 >> 61) != 0);
    Rng rng({22, 0});
    for (int it = 0; it < 300; ++it) {
        int n = 1 + static_cast<int>(rng.next_below(6));
        std::vector<int64_t> m(static_cast<size_t>(n) * n);
        for (auto& v : m) v = static_cast<int64_t>(rng.next_below(5)) - 2;
        bool truth = det_cofactor(m, n) == 0;
        CHECK(is_singular_exact(m, n, primes) == truth);
    }
}

TEST_CASE("enumerate_singularity: bernoulli(p) at n=1 equals 1-p") {
    auto d = DiscreteDist::bernoulli(Rational(3, 10));
    auto res = enumerate_singularity(d, 1);
    CHECK(res.probability == Rational(7, 10));
    CHECK(res.matrices_scanned == 2);
}

TEST_CASE("enumerate_singularity matches the no-pruning oracle") {
    auto b = DiscreteDist::bernoulli(Rational(1, 2));
    CHECK(enumerate_singularity(b, 2).probability == Rational(10, 16));
    CHECK(enumerate_singularity(b, 2).probability == oracle_singularity(b, 2));
    CHECK(enumerate_singularity(b, 3).probability == Rational(338, 512));
    CHECK(enumerate_singularity(b, 3).probability == oracle_singularity(b, 3));

    auto b3 = DiscreteDist::bernoulli(Rational(1, 3));
    CHECK(enumerate_singularity(b3, 2).probability == oracle_singularity(b3, 2));
    auto rad = DiscreteDist::rademacher();
    CHECK(enumerate_singularity(rad, 3).probability == oracle_singularity(rad, 3));
}

TEST_CASE("multithreaded enumeration is deterministic") {
    auto b = DiscreteDist::bernoulli(Rational(1, 3));
    auto r1 = enumerate_singularity(b, 3, 1ULL << 28, 1);
    auto r3 = enumerate_singularity(b, 3, 1ULL << 28, 3);
    CHECK(r1.probability == r3.probability);
}

TEST_CASE("budget errors") {
    auto b = DiscreteDist::bernoulli(Rational(1, 2));
    CHECK_THROWS_AS(enumerate_singularity(b, 6, 1ULL << 20), BudgetError);
    CHECK_THROWS_AS(enumerate_singularity(b, 0), ValidationError);
}

TEST_CASE("dominant union: worked examples and oracle") {
    auto rad = DiscreteDist::rademacher();
    CHECK(enumerate_dominant_union(rad, 1).probability == Rational(0));

    auto b = DiscreteDist::bernoulli(Rational(1, 2));
    auto u2 = enumerate_dominant_union(b, 2).probability;
    CHECK(u2 == Rational(10, 16)); // every singular 2x2 binary matrix is in the union
    auto oracle2 = oracle_probability(b, 2, [](const std::vector<int64_t>& m) {
        return in_dominant_union(m, 2);
    });
    CHECK(u2 == oracle2);

    auto u3 = enumerate_dominant_union(b, 3).probability;
    auto s3 = enumerate_singularity(b, 3).probability;
    CHECK(u3 <= s3);
    auto oracle3 = oracle_probability(b, 3, [](const std::vector<int64_t>& m) {
        return in_dominant_union(m, 3);
    });
    CHECK(u3 == oracle3);
}

TEST_CASE("union implies singularity, exactly, on random distributions") {
    Rng rng({23, 0});
    for (int it = 0; it < 2000; ++it) {
        int n = 2 + static_cast<int>(rng.next_below(4));
        std::vector<int64_t> m(static_cast<size_t>(n) * n);
        for (auto& v : m) v = static_cast<int64_t>(rng.next_below(3)) - 1;
        if (in_dominant_union(m, n)) CHECK(det_cofactor(m, n) == 0);
    }
}

TEST_CASE("enumeration invariant under atom permutation and scaling") {
    auto d1 = DiscreteDist::construct({Rational(0), Rational(1), Rational(3)},
                                      {Rational(1, 2), Rational(1, 4), Rational(1, 4)});
    // same distribution built in a different order
    auto d2 = DiscreteDist::construct({Rational(3), Rational(0), Rational(1)},
                                      {Rational(1, 4), Rational(1, 2), Rational(1, 4)});
    CHECK(enumerate_singularity(d1, 2).probability == enumerate_singularity(d2, 2).probability);
    // atoms scaled by a nonzero rational preserve singularity
    auto d3 = DiscreteDist::construct({Rational(0), Rational(-5, 2), Rational(-15, 2)},
                                      {Rational(1, 2), Rational(1, 4), Rational(1, 4)});
    CHECK(enumerate_singularity(d1, 2).probability == enumerate_singularity(d3, 2).probability);
}

TEST_CASE("bonferroni brackets the exact union at n <= 3") {
    for (auto d : {DiscreteDist::bernoulli(Rational(1, 2)), DiscreteDist::bernoulli(Rational(1, 3)),
                   DiscreteDist::rademacher()}) {
        for (int n = 1; n <= 3; ++n) {
            auto [lo, hi] = bonferroni_dominant(d, n, 2);
            double exact = enumerate_dominant_union(d, n).probability.to_double();
            CHECK(lo <= exact + 1e-12);
            CHECK(exact <= hi + 1e-12);
            auto [lo1, hi1] = bonferroni_dominant(d, n, 1);
            CHECK(lo1 <= exact + 1e-12);
            CHECK(exact <= hi1 + 1e-12);
            CHECK(lo <= hi);
        }
    }
}

TEST_CASE("bonferroni singles and pair terms match direct inclusion-exclusion at n=3") {
    // brute-force the unfolded event family over all 2^9 bernoulli matrices
    auto d = DiscreteDist::bernoulli(Rational(2, 5));
    const int n = 3;
    double p = 0.4;
    auto prob_of = [&](auto&& event) {
        double total = 0;
        for (int mask = 0; mask < 512; ++mask) {
            std::vector<int64_t> m(9);
            double w = 1;
            for (int c = 0; c < 9; ++c) {
                m[static_cast<size_t>(c)] = (mask >> c) & 1;
                w *= m[static_cast<size_t>(c)] ? p : 1 - p;
            }
            if (event(m)) total += w;
        }
        return total;
    };
    // all unfolded events
    struct Ev {
        int kind; // 0 zero-row, 1 zero-col, 2 row-pair, 3 col-pair
        int a, b, sign;
    };
    std::vector<Ev> evs;
    for (int i = 0; i < n; ++i) evs.push_back({0, i, -1, 0});
    for (int i = 0; i < n; ++i) evs.push_back({1, i, -1, 0});
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            for (int s : {1, -1}) {
                evs.push_back({2, i, j, s});
                evs.push_back({3, i, j, s});
            }
    auto holds = [&](const Ev& e, const std::vector<int64_t>& m) {
        auto at = [&](int r, int c) { return m[static_cast<size_t>(r * n + c)]; };
        switch (e.kind) {
        case 0:
            return at(e.a, 0) == 0 && at(e.a, 1) == 0 && at(e.a, 2) == 0;
        case 1:
            return at(0, e.a) == 0 && at(1, e.a) == 0 && at(2, e.a) == 0;
        case 2:
            for (int c = 0; c < n; ++c)
                if (at(e.a, c) != e.sign * at(e.b, c)) return false;
            return true;
        default:
            for (int r = 0; r < n; ++r)
                if (at(r, e.a) != e.sign * at(r, e.b)) return false;
            return true;
        }
    };
    double singles = 0, pairs = 0;
    for (size_t i = 0; i < evs.size(); ++i) {
        singles += prob_of([&](const std::vector<int64_t>& m) { return holds(evs[i], m); });
        for (size_t j = i + 1; j < evs.size(); ++j)
            pairs += prob_of(
                [&](const std::vector<int64_t>& m) { return holds(evs[i], m) && holds(evs[j], m); });
    }
    auto [lo, hi] = bonferroni_dominant(d, n, 2);
    CHECK(hi == doctest::Approx(std::min(1.0, singles)).epsilon(1e-10));
    CHECK(lo == doctest::Approx(std::max(0.0, singles - pairs)).epsilon(1e-10));
}

TEST_CASE("bonferroni worked example: rademacher n=2 upper saturates") {
    auto [lo, hi] = bonferroni_dominant(DiscreteDist::rademacher(), 2, 1);
    CHECK(hi == doctest::Approx(1.0));
    CHECK(lo <= hi);
}

TEST_CASE("bonferroni vs conjecture at Ber(1/5), n=30") {
    auto d = DiscreteDist::bernoulli(Rational(1, 5));
    auto [lo, hi] = bonferroni_dominant(d, 30, 2);
    double conj = predicted_probabilities(d, 30).conjecture.to_double();
    CHECK(hi <= 2.0 * conj);
    CHECK(conj <= 2.0 * hi);
    CHECK(lo <= hi);
    CHECK(0.0 <= lo);
    CHECK(hi <= 1.0);
}

} // TEST_SUITE
