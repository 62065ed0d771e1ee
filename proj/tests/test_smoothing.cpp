#include "doctest.h"

#include <cmath>

#include "rmlab/levy.hpp"
#include "rmlab/smoothing.hpp"

using namespace rmlab;

namespace {

AdmissibleSpec tiny_spec(int n, int64_t N, AdmissibleSpec::Mode mode, Rng& rng) {
    return generate_admissible(N, n, 2, 4, 8, 0.1, mode, rng);
}

// checked on the region carrying mass; values below 2^-45 of the peak are
// zero-fill truncation artifacts at the widened grid's rim
double log_lipschitz_excess(const GridFunction& g, double eta) {
    double peak = -1e300;
    for (double lv : g.log2v) peak = std::max(peak, lv);
    double worst = 0;
    for (size_t i = 0; i + 1 < g.size(); ++i) {
        double a = g.log2v[i], b = g.log2v[i + 1];
        if (a < peak - 45.0 || b < peak - 45.0) continue;
        worst = std::max(worst, std::abs(a - b) - eta * g.h());
    }
    return worst;
}

} // namespace

TEST_SUITE("smoothing") {

TEST_CASE("admissible validation: constructed specs pass, broken ones name the clause") {
    Rng rng({90, 0});
    auto q = tiny_spec(32, 16, AdmissibleSpec::Q, rng);
    CHECK_FALSE(validate_admissible(q).has_value());
    auto p = tiny_spec(32, 16, AdmissibleSpec::P, rng);
    CHECK_FALSE(validate_admissible(p).has_value());

    auto broken = q;
    broken.blocks[20] = {{0, 2 * broken.N - 1}}; // size 2N < 2N+1
    auto why = validate_admissible(broken);
    REQUIRE(why.has_value());
    CHECK(*why == "tail interval size");

    auto inflated = q;
    inflated.K3 = 4.01; // keeps the ordering; the bound itself now fails
    for (size_t i = 8; i < inflated.blocks.size(); ++i)
        inflated.blocks[i] = {{-inflated.n * inflated.N, inflated.n * inflated.N}};
    auto why2 = validate_admissible(inflated);
    REQUIRE(why2.has_value());
    CHECK(*why2 == "cardinality product");

    auto ranged = q;
    ranged.blocks[5] = {{-ranged.n * ranged.N - 5, -ranged.n * ranged.N + 2 * ranged.N}};
    auto why3 = validate_admissible(ranged);
    REQUIRE(why3.has_value());
    CHECK(*why3 == "element range");

    Rng rng2({91, 0});
    CHECK_THROWS_AS(generate_admissible(16, 32, 2, 4, 1.01, 0.1, AdmissibleSpec::Q, rng2),
                    ValidationError);
}

TEST_CASE("generated specs sample inside their blocks") {
    Rng rng({92, 0});
    for (int it = 0; it < 20; ++it) {
        auto spec = tiny_spec(16, 8, it % 2 ? AdmissibleSpec::P : AdmissibleSpec::Q, rng);
        auto x = sample_from_blocks(spec, rng);
        REQUIRE(x.size() == 16);
        for (size_t i = 0; i < x.size(); ++i) {
            bool inside = false;
            for (auto [lo, hi] : spec.blocks[i]) inside |= (x[i] >= lo && x[i] <= hi);
            CHECK(inside);
        }
    }
}

TEST_CASE("default profile is normalized and log-lipschitz") {
    auto f = default_profile(16, -3000, 3000, 4);
    CHECK(f.mass() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(log_lipschitz_excess(f, f.lipschitz) <= 1e-12);
}

TEST_CASE("averaging trivial cases") {
    Rng rng({93, 0});
    auto d = DiscreteDist::bernoulli(Rational(1, 2));
    auto spec = tiny_spec(16, 8, AdmissibleSpec::Q, rng);
    auto X = sample_from_blocks(spec, rng);
    const int64_t den = resolving_den(d, 0.25);
    auto [ulo, uhi] = widened_grid(d, spec, den, 16);
    auto f = default_profile(16, ulo, uhi, den);

    // ell = 0 returns f unchanged
    auto r0 = average(f, d, X, {0, 0}, spec);
    CHECK(r0.result.log2v == f.log2v);

    // all mass on the zero atom: every shift is by zero
    auto rz = average(f, d, X, {6, 0}, spec);
    for (size_t i = 0; i < f.size(); ++i)
        CHECK(std::exp2(rz.result.log2v[i]) == doctest::Approx(std::exp2(f.log2v[i])).epsilon(1e-12));

    // all mass on atom one: f shifted by the sum of the first ell coordinates
    const int ell = 5;
    auto rs = average(f, d, X, {0, ell}, spec);
    int64_t shift_units = 0;
    for (int i = 0; i < ell; ++i) shift_units += X[static_cast<size_t>(i)] * den;
    for (size_t i = 0; i < f.size(); ++i) {
        int64_t j = static_cast<int64_t>(i) + shift_units;
        double expect = (j >= 0 && j < static_cast<int64_t>(f.size()))
                            ? std::exp2(f.log2v[static_cast<size_t>(j)])
                            : 0.0;
        CHECK(std::exp2(rs.result.log2v[i]) == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("two-level recursion matches hand enumeration") {
    auto d = DiscreteDist::construct({Rational(0), Rational(1)}, {Rational(1, 3), Rational(2, 3)});
    AdmissibleSpec spec;
    spec.N = 1;
    spec.n = 2;
    spec.delta = 0.2;
    spec.mode = AdmissibleSpec::Q;
    spec.blocks = {{{-1, 1}}, {{-1, 1}}};
    std::vector<int64_t> X{1, -1};
    GridFunction f;
    f.u_lo = -4;
    f.den = 1;
    f.lipschitz = 1.0;
    f.log2v = {-6, -3, -2, -1, 0, -1, -2, -3, -6};
    AverageOptions opts;
    opts.retain_levels = true;
    opts.require_coverage = false;
    auto run = average(f, d, X, {1, 1}, spec, opts);
    auto at = [&](const GridFunction& g, int64_t u) {
        return std::exp2(g.log2v[static_cast<size_t>(u - g.u_lo)]);
    };
    auto fv = [&](int64_t u) { return (u >= -4 && u <= 4) ? at(f, u) : 0.0; };
    // f_{(1,1),2}(t) = 1/2 f_{(0,1),1}(t + 0 X2) + 1/2 f_{(1,0),1}(t + 1 X2)
    //   with f_{(0,1),1}(u) = f(u + 1 X1) and f_{(1,0),1}(u) = f(u + 0 X1)
    for (int64_t u = -3; u <= 3; ++u) {
        double expect = 0.5 * fv(u + X[0]) + 0.5 * fv(u + X[1]);
        CHECK(at(run.result, u) == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("mass conservation and lipschitz preservation on random instances") {
    Rng rng({94, 0});
    for (int it = 0; it < 25; ++it) {
        auto d = (it % 3 == 0) ? DiscreteDist::rademacher()
                               : DiscreteDist::bernoulli(Rational(1 + it % 2, 3));
        int n = (it % 2) ? 16 : 24;
        auto spec = tiny_spec(n, 8, it % 2 ? AdmissibleSpec::P : AdmissibleSpec::Q, rng);
        auto X = sample_from_blocks(spec, rng);
        const int64_t den = resolving_den(d, 1.0 / std::sqrt(static_cast<double>(n)), 4e-3);
        auto [ulo, uhi] = widened_grid(d, spec, den, n);
        auto f = default_profile(n, ulo, uhi, den);
        auto m = central_counts(d, 8 + static_cast<int>(rng.next_below(5)));
        auto run = average(f, d, X, m, spec);
        CHECK(run.result.mass() == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(log_lipschitz_excess(run.result, f.lipschitz) <= 1e-3);
    }
}

TEST_CASE("step records: forced steps, monotone levels, trace consistency") {
    Rng rng({95, 0});
    auto d = DiscreteDist::bernoulli(Rational(1, 2));
    auto spec = tiny_spec(16, 4, AdmissibleSpec::Q, rng);
    auto X = sample_from_blocks(spec, rng);
    const int64_t den = resolving_den(d, 0.25);
    auto [ulo, uhi] = widened_grid(d, spec, den, 16);
    auto f = default_profile(16, ulo, uhi, den);
    AverageOptions opts;
    opts.retain_levels = true;

    // forced steps: only atom 1 available
    auto run_forced = average(f, d, X, {0, 4}, spec, opts);
    auto tr = extract_step_record(run_forced, 0.0, 0.25, 1.0);
    REQUIRE(tr.w.size() == 4);
    for (int w : tr.w) CHECK(w == 1);
    for (bool r : tr.robust) CHECK_FALSE(r); // running frequency is always 1
    for (size_t i = 0; i + 1 < tr.h_seq.size(); ++i)
        CHECK(tr.h_seq[i] <= tr.h_seq[i + 1] * (1 + 1e-12));

    // mixed counts: descent stays consistent with the stored recursion
    auto run_mixed = average(f, d, X, {3, 3}, spec, opts);
    double best_t = 0, best = -1;
    for (size_t i = 0; i < run_mixed.result.size(); ++i) {
        if (std::exp2(run_mixed.result.log2v[i]) > best) {
            best = std::exp2(run_mixed.result.log2v[i]);
            best_t = run_mixed.result.node(i);
        }
    }
    auto tm = extract_step_record(run_mixed, best_t, 0.25, 1.0);
    CHECK(verify_trace(run_mixed, tm) <= 1e-9);
    for (size_t i = 0; i + 1 < tm.h_seq.size(); ++i)
        CHECK(tm.h_seq[i] <= tm.h_seq[i + 1] * (1 + 1e-12));
}

TEST_CASE("hand-checked two-step trace on a small grid") {
    auto d = DiscreteDist::bernoulli(Rational(1, 2));
    AdmissibleSpec spec;
    spec.N = 1;
    spec.n = 2;
    spec.delta = 0.2;
    spec.mode = AdmissibleSpec::Q;
    spec.blocks = {{{1, 1}}, {{1, 1}}};
    std::vector<int64_t> X{1, 1};
    GridFunction f;
    f.u_lo = -3;
    f.den = 1;
    f.lipschitz = 2.0;
    f.log2v = {-8, -4, -1, 0, -2, -5, -8};
    AverageOptions opts;
    opts.retain_levels = true;
    opts.require_coverage = false;
    auto run = average(f, d, X, {1, 1}, spec, opts);
    // by hand at t = -1: f_{(1,1),2}(-1) = 1/2 f_{(0,1),1}(-1) + 1/2 f_{(1,0),1}(0)
    //   f_{(0,1),1}(-1) = f(-1 + X1) = f(0) = 1; f_{(1,0),1}(0) = f(0) = 1
    auto tr = extract_step_record(run, -1.0, 0.25, 0.5);
    CHECK(tr.h_seq[0] == doctest::Approx(1.0));
    CHECK(tr.w[0] == 0); // smallest index with child value >= 1
    CHECK(tr.t_seq[1] == doctest::Approx(-1.0));
    CHECK(tr.w[1] == 1); // forced: remaining count vector is (0,1)
    CHECK(tr.t_seq[2] == doctest::Approx(0.0));
    CHECK(verify_trace(run, tr) <= 1e-12);
}

TEST_CASE("window mass of the averaged function never beats the conditional levy bound") {
    Rng rng({96, 0});
    for (int it = 0; it < 20; ++it) {
        auto d = (it % 2) ? DiscreteDist::bernoulli(Rational(1, 2)) : DiscreteDist::rademacher();
        const int n = 12;
        auto spec = tiny_spec(n, 4, AdmissibleSpec::Q, rng);
        auto X = sample_from_blocks(spec, rng);
        const int64_t den = resolving_den(d, 1.0 / std::sqrt(static_cast<double>(n)), 4e-3);
        auto [ulo, uhi] = widened_grid(d, spec, den, n);
        auto f = default_profile(n, ulo, uhi, den);
        auto m = central_counts(d, n);
        auto run = average(f, d, X, m, spec);
        std::vector<Rational> xr;
        for (int64_t xi : X) xr.emplace_back(xi);
        auto cond = SliceConstraint::exact_counts(m);
        auto bound = levy_conditional(d, xr, cond, Rational(spec.N, 2));
        double width = static_cast<double>(spec.N);
        double worst = 0;
        for (int probe = 0; probe < 40; ++probe) {
            double a = run.result.node(0) +
                       rng.next_unit() *
                           (run.result.node(run.result.size() - 1) - width - run.result.node(0));
            worst = std::max(worst, run.result.mass_on(a, a + width));
        }
        CHECK(worst <= bound.value.to_double() + 1e-6);
    }
}

TEST_CASE("inversion experiment: exceedance curve shape at tiny scale") {
    InversionConfig cfg;
    cfg.dist = DiscreteDist::bernoulli(Rational(1, 2));
    cfg.N = 8;
    cfg.n = 12;
    cfg.trials = 40;
    cfg.L_grid = {0.0, 0.25, 1.0, 4.0};
    cfg.seed = {97, 0};
    cfg.workers = 2;
    auto res = inversion_experiment(cfg);
    REQUIRE(res.curve.size() == 4);
    CHECK(res.curve[0].exceedance == 1.0); // L = 0 is always exceeded
    for (size_t i = 0; i + 1 < res.curve.size(); ++i)
        CHECK(res.curve[i].exceedance >= res.curve[i + 1].exceedance);
}

} // TEST_SUITE
