#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "rmlab/bigint.hpp"

namespace rmlab {

// Exact rational, always normalized: den > 0, gcd(num, den) = 1.
class Rational {
public:
    Rational() : num_(0), den_(1) {}
    Rational(int64_t v) : num_(v), den_(1) {}
    Rational(BigInt n, BigInt d) : num_(std::move(n)), den_(std::move(d)) { normalize(); }
    Rational(int64_t n, int64_t d) : num_(n), den_(d) { normalize(); }

    // accepts "3", "-3", "7/10", "-7/10"
    static Rational from_string(const std::string& s) {
        auto slash = s.find('/');
        if (slash == std::string::npos) return Rational(BigInt::from_string(s), BigInt(1));
        return Rational(BigInt::from_string(s.substr(0, slash)),
                        BigInt::from_string(s.substr(slash + 1)));
    }

    // exact value of a double (all finite doubles are rational)
    static Rational from_double_exact(double v) {
        if (!std::isfinite(v)) throw std::invalid_argument("Rational: non-finite double");
        if (v == 0.0) return Rational();
        int e = 0;
        double m = std::frexp(v, &e); // v = m * 2^e, |m| in [0.5, 1)
        int64_t mi = static_cast<int64_t>(std::ldexp(m, 53));
        e -= 53;
        Rational r(mi, 1);
        BigInt two(2);
        if (e > 0) r.num_ *= two.pow(static_cast<uint32_t>(e));
        else if (e < 0) r.den_ = two.pow(static_cast<uint32_t>(-e));
        r.normalize();
        return r;
    }

    const BigInt& num() const { return num_; }
    const BigInt& den() const { return den_; }
    bool is_zero() const { return num_.is_zero(); }
    bool is_integer() const { return den_ == BigInt(1); }
    int sign() const { return num_.sign(); }

    double to_double() const {
        // scale so both parts stay in double range
        int shift = std::max(num_.bit_length(), den_.bit_length()) - 500;
        if (shift <= 0) return num_.to_double() / den_.to_double();
        BigInt two(2);
        BigInt sc = two.pow(static_cast<uint32_t>(shift));
        return (num_ / sc).to_double() / (den_ / sc).to_double();
    }

    std::string to_string() const {
        if (is_integer()) return num_.to_string();
        return num_.to_string() + "/" + den_.to_string();
    }

    friend Rational operator+(const Rational& a, const Rational& b) {
        return Rational(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
    }
    friend Rational operator-(const Rational& a, const Rational& b) {
        return Rational(a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_);
    }
    friend Rational operator*(const Rational& a, const Rational& b) {
        return Rational(a.num_ * b.num_, a.den_ * b.den_);
    }
    friend Rational operator/(const Rational& a, const Rational& b) {
        if (b.is_zero()) throw std::domain_error("Rational: division by zero");
        return Rational(a.num_ * b.den_, a.den_ * b.num_);
    }
    Rational operator-() const {
        Rational r = *this;
        r.num_ = -r.num_;
        return r;
    }
    Rational& operator+=(const Rational& o) { *this = *this + o; return *this; }
    Rational& operator-=(const Rational& o) { *this = *this - o; return *this; }
    Rational& operator*=(const Rational& o) { *this = *this * o; return *this; }
    Rational& operator/=(const Rational& o) { *this = *this / o; return *this; }

    friend int cmp(const Rational& a, const Rational& b) {
        return cmp(a.num_ * b.den_, b.num_ * a.den_);
    }
    friend bool operator==(const Rational& a, const Rational& b) {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
    friend bool operator<(const Rational& a, const Rational& b) { return cmp(a, b) < 0; }
    friend bool operator<=(const Rational& a, const Rational& b) { return cmp(a, b) <= 0; }
    friend bool operator>(const Rational& a, const Rational& b) { return cmp(a, b) > 0; }
    friend bool operator>=(const Rational& a, const Rational& b) { return cmp(a, b) >= 0; }

    Rational abs() const { return sign() < 0 ? -*this : *this; }

    Rational pow(uint32_t e) const { return Rational(num_.pow(e), den_.pow(e)); }

    int64_t floor_i64() const {
        BigInt q, r;
        BigInt::divrem(num_, den_, q, r);
        if (!r.is_zero() && num_.negative()) q = q - BigInt(1);
        return q.to_int64();
    }
    int64_t ceil_i64() const {
        BigInt q, r;
        BigInt::divrem(num_, den_, q, r);
        if (!r.is_zero() && !num_.negative()) q = q + BigInt(1);
        return q.to_int64();
    }

private:
    BigInt num_, den_;

    void normalize() {
        if (den_.is_zero()) throw std::domain_error("Rational: zero denominator");
        if (den_.negative()) { num_ = -num_; den_ = -den_; }
        if (num_.is_zero()) { den_ = BigInt(1); return; }
        BigInt g = BigInt::gcd(num_, den_);
        if (g != BigInt(1)) { num_ = num_ / g; den_ = den_ / g; }
    }
};

inline Rational lcm_rational_dens(const std::vector<Rational>& xs) {
    BigInt l(1);
    for (const auto& x : xs) {
        BigInt g = BigInt::gcd(l, x.den());
        l = l / g * x.den();
    }
    return Rational(l, BigInt(1));
}

} // namespace rmlab
