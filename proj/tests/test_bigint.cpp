#include "doctest.h"

#include "rmlab/bigint.hpp"
#include "rmlab/rational.hpp"
#include "rmlab/rng.hpp"

using namespace rmlab;

TEST_SUITE("bigint") {

TEST_CASE("small arithmetic round trips") {
    CHECK(BigInt(0).to_string() == "0");
    CHECK(BigInt(-42).to_string() == "-42");
    CHECK((BigInt(1000000007) * BigInt(998244353)).to_string() == "998244359987710471");
    CHECK((BigInt(-7) + BigInt(7)).is_zero());
    CHECK((BigInt(-7) * BigInt(-6)).to_int64() == 42);
    CHECK(BigInt::from_string("-123456789012345678901234567890").to_string() ==
          "-123456789012345678901234567890");
}

TEST_CASE("multi-limb multiply and divide agree") {
    Rng rng({99, 0});
    for (int it = 0; it < 500; ++it) {
        BigInt a(static_cast<int64_t>(rng.next_u64() >> 1));
        BigInt b(static_cast<int64_t>(rng.next_u64() >> 1));
        for (int e = 0; e < static_cast<int>(rng.next_below(3)); ++e) a *= a;
        for (int e = 0; e < static_cast<int>(rng.next_below(2)); ++e) b *= b;
        if (rng.next_below(2)) a = -a;
        if (b.is_zero()) b = BigInt(3);
        BigInt q, r;
        BigInt::divrem(a, b, q, r);
        CHECK(q * b + r == a);
        CHECK(cmp_abs(r, b) < 0);
        // remainder carries the dividend's sign
        if (!r.is_zero()) CHECK(r.negative() == a.negative());
    }
}

TEST_CASE("gcd basics") {
    CHECK(BigInt::gcd(BigInt(12), BigInt(18)).to_int64() == 6);
    CHECK(BigInt::gcd(BigInt(0), BigInt(-5)).to_int64() == 5);
    BigInt big = BigInt::from_string("123456789123456789123456789");
    CHECK(BigInt::gcd(big * BigInt(1024), big * BigInt(768)) == big * BigInt(256));
}

TEST_CASE("pow and bit length") {
    CHECK(BigInt(2).pow(100).to_string() == "1267650600228229401496703205376");
    CHECK(BigInt(2).pow(100).bit_length() == 100);
}

TEST_CASE("rational normalization and ordering") {
    Rational a(6, 8), b(3, 4);
    CHECK(a == b);
    CHECK(Rational(1, -2) == Rational(-1, 2));
    CHECK(Rational(1, 3) + Rational(1, 6) == Rational(1, 2));
    CHECK(Rational(7, 10) * Rational(10, 7) == Rational(1));
    CHECK(Rational(1, 3) < Rational(1, 2));
    CHECK(Rational::from_string("7/10").to_double() == doctest::Approx(0.7));
    CHECK(Rational::from_string("-3").to_string() == "-3");
}

TEST_CASE("floor and ceil") {
    CHECK(Rational(7, 2).floor_i64() == 3);
    CHECK(Rational(7, 2).ceil_i64() == 4);
    CHECK(Rational(-7, 2).floor_i64() == -4);
    CHECK(Rational(-7, 2).ceil_i64() == -3);
    CHECK(Rational(4).floor_i64() == 4);
    CHECK(Rational(4).ceil_i64() == 4);
}

TEST_CASE("exact double conversion") {
    CHECK(Rational::from_double_exact(0.5) == Rational(1, 2));
    CHECK(Rational::from_double_exact(-3.0) == Rational(-3));
    double third = 1.0 / 3.0;
    CHECK(Rational::from_double_exact(third).to_double() == third);
}

} // TEST_SUITE
