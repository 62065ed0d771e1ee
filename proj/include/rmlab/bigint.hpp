#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <vector>

namespace rmlab {

// Arbitrary-precision signed integer, sign-magnitude over 64-bit limbs
// (little endian, no trailing zero limbs; zero has empty limb vector).
class BigInt {
public:
    BigInt() = default;
    BigInt(int64_t v) {
        if (v < 0) { neg_ = true; limbs_.push_back(~static_cast<uint64_t>(v) + 1); }
        else if (v > 0) limbs_.push_back(static_cast<uint64_t>(v));
    }
    BigInt(uint64_t v, bool negative) {
        if (v) { limbs_.push_back(v); neg_ = negative; }
    }

    static BigInt from_string(const std::string& s) {
        BigInt r;
        size_t i = 0;
        bool neg = false;
        if (i < s.size() && (s[i] == '-' || s[i] == '+')) { neg = s[i] == '-'; ++i; }
        if (i == s.size()) throw std::invalid_argument("BigInt: empty numeral");
        for (; i < s.size(); ++i) {
            if (s[i] < '0' || s[i] > '9') throw std::invalid_argument("BigInt: bad digit");
            r.mul_small_inplace(10);
            r.add_small_inplace(static_cast<uint64_t>(s[i] - '0'));
        }
        r.neg_ = neg && !r.is_zero();
        return r;
    }

    bool is_zero() const { return limbs_.empty(); }
    bool negative() const { return neg_; }
    int sign() const { return is_zero() ? 0 : (neg_ ? -1 : 1); }

    bool fits_int64() const {
        if (limbs_.size() > 1) return false;
        if (limbs_.empty()) return true;
        return neg_ ? limbs_[0] <= 0x8000000000000000ULL : limbs_[0] < 0x8000000000000000ULL;
    }
    int64_t to_int64() const {
        if (!fits_int64()) throw std::overflow_error("BigInt: does not fit int64");
        if (limbs_.empty()) return 0;
        return neg_ ? -static_cast<int64_t>(limbs_[0] - 1) - 1 : static_cast<int64_t>(limbs_[0]);
    }

    double to_double() const {
        double r = 0.0;
        for (size_t i = limbs_.size(); i-- > 0;) r = r * 18446744073709551616.0 + static_cast<double>(limbs_[i]);
        return neg_ ? -r : r;
    }

    // floor(log2 |x|); -1 for zero
    int bit_length() const {
        if (limbs_.empty()) return -1;
        return static_cast<int>(64 * (limbs_.size() - 1) + 63 - __builtin_clzll(limbs_.back()));
    }

    friend int cmp_abs(const BigInt& a, const BigInt& b) {
        if (a.limbs_.size() != b.limbs_.size()) return a.limbs_.size() < b.limbs_.size() ? -1 : 1;
        for (size_t i = a.limbs_.size(); i-- > 0;)
            if (a.limbs_[i] != b.limbs_[i]) return a.limbs_[i] < b.limbs_[i] ? -1 : 1;
        return 0;
    }
    friend int cmp(const BigInt& a, const BigInt& b) {
        if (a.sign() != b.sign()) return a.sign() < b.sign() ? -1 : 1;
        int c = cmp_abs(a, b);
        return a.neg_ ? -c : c;
    }
    friend bool operator==(const BigInt& a, const BigInt& b) { return cmp(a, b) == 0; }
    friend bool operator!=(const BigInt& a, const BigInt& b) { return cmp(a, b) != 0; }
    friend bool operator<(const BigInt& a, const BigInt& b) { return cmp(a, b) < 0; }
    friend bool operator<=(const BigInt& a, const BigInt& b) { return cmp(a, b) <= 0; }
    friend bool operator>(const BigInt& a, const BigInt& b) { return cmp(a, b) > 0; }
    friend bool operator>=(const BigInt& a, const BigInt& b) { return cmp(a, b) >= 0; }

    BigInt operator-() const {
        BigInt r = *this;
        if (!r.is_zero()) r.neg_ = !r.neg_;
        return r;
    }

    friend BigInt operator+(const BigInt& a, const BigInt& b) {
        if (a.neg_ == b.neg_) {
            BigInt r = add_abs(a, b);
            r.neg_ = a.neg_ && !r.is_zero();
            return r;
        }
        int c = cmp_abs(a, b);
        if (c == 0) return BigInt();
        BigInt r = c > 0 ? sub_abs(a, b) : sub_abs(b, a);
        r.neg_ = (c > 0 ? a.neg_ : b.neg_) && !r.is_zero();
        return r;
    }
    friend BigInt operator-(const BigInt& a, const BigInt& b) { return a + (-b); }

    friend BigInt operator*(const BigInt& a, const BigInt& b) {
        if (a.is_zero() || b.is_zero()) return BigInt();
        BigInt r;
        r.limbs_.assign(a.limbs_.size() + b.limbs_.size(), 0);
        for (size_t i = 0; i < a.limbs_.size(); ++i) {
            uint64_t carry = 0;
            for (size_t j = 0; j < b.limbs_.size(); ++j) {
                unsigned __int128 cur = static_cast<unsigned __int128>(a.limbs_[i]) * b.limbs_[j] +
                                        r.limbs_[i + j] + carry;
                r.limbs_[i + j] = static_cast<uint64_t>(cur);
                carry = static_cast<uint64_t>(cur >> 64);
            }
            r.limbs_[i + b.limbs_.size()] += carry;
        }
        r.trim();
        r.neg_ = a.neg_ != b.neg_;
        return r;
    }

    BigInt& operator+=(const BigInt& o) { *this = *this + o; return *this; }
    BigInt& operator-=(const BigInt& o) { *this = *this - o; return *this; }
    BigInt& operator*=(const BigInt& o) { *this = *this * o; return *this; }

    // quotient truncated toward zero, remainder with sign of dividend
    static void divrem(const BigInt& a, const BigInt& b, BigInt& q, BigInt& r) {
        if (b.is_zero()) throw std::domain_error("BigInt: division by zero");
        if (cmp_abs(a, b) < 0) { q = BigInt(); r = a; return; }
        if (b.limbs_.size() == 1) {
            q.limbs_.assign(a.limbs_.size(), 0);
            uint64_t rem = 0;
            for (size_t i = a.limbs_.size(); i-- > 0;) {
                unsigned __int128 cur = (static_cast<unsigned __int128>(rem) << 64) | a.limbs_[i];
                q.limbs_[i] = static_cast<uint64_t>(cur / b.limbs_[0]);
                rem = static_cast<uint64_t>(cur % b.limbs_[0]);
            }
            q.trim();
            q.neg_ = !q.is_zero() && (a.neg_ != b.neg_);
            r = BigInt(rem, a.neg_);
            return;
        }
        divrem_knuth(a, b, q, r);
    }
    friend BigInt operator/(const BigInt& a, const BigInt& b) {
        BigInt q, r;
        divrem(a, b, q, r);
        return q;
    }
    friend BigInt operator%(const BigInt& a, const BigInt& b) {
        BigInt q, r;
        divrem(a, b, q, r);
        return r;
    }

    static BigInt gcd(BigInt a, BigInt b) {
        a.neg_ = b.neg_ = false;
        if (a.is_zero()) return b;
        if (b.is_zero()) return a;
        int shift = std::min(a.trailing_zero_bits(), b.trailing_zero_bits());
        a.shr_inplace(a.trailing_zero_bits());
        while (!b.is_zero()) {
            b.shr_inplace(b.trailing_zero_bits());
            if (cmp_abs(a, b) > 0) std::swap(a, b);
            b = sub_abs(b, a);
        }
        a.shl_inplace(shift);
        return a;
    }

    BigInt pow(uint32_t e) const {
        BigInt r(1), base = *this;
        while (e) {
            if (e & 1) r *= base;
            base *= base;
            e >>= 1;
        }
        return r;
    }

    std::string to_string() const {
        if (is_zero()) return "0";
        BigInt t = *this;
        t.neg_ = false;
        std::string digits;
        while (!t.is_zero()) {
            uint64_t rem = 0;
            for (size_t i = t.limbs_.size(); i-- > 0;) {
                unsigned __int128 cur = (static_cast<unsigned __int128>(rem) << 64) | t.limbs_[i];
                t.limbs_[i] = static_cast<uint64_t>(cur / 10);
                rem = static_cast<uint64_t>(cur % 10);
            }
            t.trim();
            digits.push_back(static_cast<char>('0' + rem));
        }
        if (neg_) digits.push_back('-');
        std::reverse(digits.begin(), digits.end());
        return digits;
    }

private:
    std::vector<uint64_t> limbs_;
    bool neg_ = false;

    void trim() {
        while (!limbs_.empty() && limbs_.back() == 0) limbs_.pop_back();
        if (limbs_.empty()) neg_ = false;
    }
    void mul_small_inplace(uint64_t m) {
        uint64_t carry = 0;
        for (auto& l : limbs_) {
            unsigned __int128 cur = static_cast<unsigned __int128>(l) * m + carry;
            l = static_cast<uint64_t>(cur);
            carry = static_cast<uint64_t>(cur >> 64);
        }
        if (carry) limbs_.push_back(carry);
    }
    void add_small_inplace(uint64_t v) {
        uint64_t carry = v;
        for (size_t i = 0; carry && i < limbs_.size(); ++i) {
            uint64_t s = limbs_[i] + carry;
            carry = s < carry ? 1 : 0;
            limbs_[i] = s;
        }
        if (carry) limbs_.push_back(carry);
    }
    int trailing_zero_bits() const {
        for (size_t i = 0; i < limbs_.size(); ++i)
            if (limbs_[i]) return static_cast<int>(64 * i) + __builtin_ctzll(limbs_[i]);
        return 0;
    }
    void shr_inplace(int bits) {
        if (is_zero() || bits == 0) return;
        size_t drop = static_cast<size_t>(bits) / 64;
        int s = bits % 64;
        if (drop >= limbs_.size()) { limbs_.clear(); neg_ = false; return; }
        limbs_.erase(limbs_.begin(), limbs_.begin() + static_cast<long>(drop));
        if (s) {
            for (size_t i = 0; i + 1 < limbs_.size(); ++i)
                limbs_[i] = (limbs_[i] >> s) | (limbs_[i + 1] << (64 - s));
            limbs_.back() >>= s;
        }
        trim();
    }
    void shl_inplace(int bits) {
        if (is_zero() || bits == 0) return;
        size_t grow = static_cast<size_t>(bits) / 64;
        int s = bits % 64;
        limbs_.insert(limbs_.begin(), grow, 0);
        if (s) {
            uint64_t carry = 0;
            for (size_t i = grow; i < limbs_.size(); ++i) {
                uint64_t nc = limbs_[i] >> (64 - s);
                limbs_[i] = (limbs_[i] << s) | carry;
                carry = nc;
            }
            if (carry) limbs_.push_back(carry);
        }
    }

    static BigInt add_abs(const BigInt& a, const BigInt& b) {
        const auto& x = a.limbs_.size() >= b.limbs_.size() ? a.limbs_ : b.limbs_;
        const auto& y = a.limbs_.size() >= b.limbs_.size() ? b.limbs_ : a.limbs_;
        BigInt r;
        r.limbs_.resize(x.size());
        uint64_t carry = 0;
        for (size_t i = 0; i < x.size(); ++i) {
            uint64_t yi = i < y.size() ? y[i] : 0;
            uint64_t s = x[i] + yi;
            uint64_t c1 = s < x[i] ? 1 : 0;
            uint64_t s2 = s + carry;
            uint64_t c2 = s2 < s ? 1 : 0;
            r.limbs_[i] = s2;
            carry = c1 | c2;
        }
        if (carry) r.limbs_.push_back(1);
        return r;
    }
    // requires |a| >= |b|
    static BigInt sub_abs(const BigInt& a, const BigInt& b) {
        BigInt r;
        r.limbs_.resize(a.limbs_.size());
        uint64_t borrow = 0;
        for (size_t i = 0; i < a.limbs_.size(); ++i) {
            uint64_t bi = i < b.limbs_.size() ? b.limbs_[i] : 0;
            uint64_t d = a.limbs_[i] - bi;
            uint64_t b1 = a.limbs_[i] < bi ? 1 : 0;
            uint64_t d2 = d - borrow;
            uint64_t b2 = d < borrow ? 1 : 0;
            r.limbs_[i] = d2;
            borrow = b1 | b2;
        }
        r.trim();
        return r;
    }

    // Knuth algorithm D; divisor has at least two limbs
    static void divrem_knuth(const BigInt& a, const BigInt& b, BigInt& q, BigInt& r) {
        const int shift = __builtin_clzll(b.limbs_.back());
        BigInt u = a, v = b;
        u.neg_ = v.neg_ = false;
        u.shl_inplace(shift);
        v.shl_inplace(shift);
        const size_t n = v.limbs_.size();
        const size_t m = u.limbs_.size() - n;
        u.limbs_.push_back(0);
        q.limbs_.assign(m + 1, 0);
        const uint64_t vtop = v.limbs_[n - 1], vsec = v.limbs_[n - 2];
        for (size_t j = m + 1; j-- > 0;) {
            unsigned __int128 num = (static_cast<unsigned __int128>(u.limbs_[j + n]) << 64) | u.limbs_[j + n - 1];
            unsigned __int128 qhat = num / vtop;
            unsigned __int128 rhat = num % vtop;
            while (qhat >> 64 ||
                   qhat * vsec > ((rhat << 64) | u.limbs_[j + n - 2])) {
                --qhat;
                rhat += vtop;
                if (rhat >> 64) break;
            }
            // multiply-subtract qhat*v from u[j .. j+n]
            uint64_t qh = static_cast<uint64_t>(qhat);
            unsigned __int128 borrow = 0, carry = 0;
            for (size_t i = 0; i < n; ++i) {
                unsigned __int128 prod = static_cast<unsigned __int128>(qh) * v.limbs_[i] + carry;
                carry = prod >> 64;
                uint64_t plo = static_cast<uint64_t>(prod);
                unsigned __int128 diff = static_cast<unsigned __int128>(u.limbs_[j + i]) - plo - borrow;
                u.limbs_[j + i] = static_cast<uint64_t>(diff);
                borrow = (diff >> 64) ? 1 : 0;
            }
            unsigned __int128 diff = static_cast<unsigned __int128>(u.limbs_[j + n]) - carry - borrow;
            u.limbs_[j + n] = static_cast<uint64_t>(diff);
            if (diff >> 64) { // qhat was one too large: add back
                --qh;
                uint64_t c = 0;
                for (size_t i = 0; i < n; ++i) {
                    unsigned __int128 s = static_cast<unsigned __int128>(u.limbs_[j + i]) + v.limbs_[i] + c;
                    u.limbs_[j + i] = static_cast<uint64_t>(s);
                    c = static_cast<uint64_t>(s >> 64);
                }
                u.limbs_[j + n] += c;
            }
            q.limbs_[j] = qh;
        }
        u.limbs_.resize(n);
        u.trim();
        u.shr_inplace(shift);
        q.trim();
        q.neg_ = !q.is_zero() && (a.neg_ != b.neg_);
        u.neg_ = !u.is_zero() && a.neg_;
        r = u;
    }
};

} // namespace rmlab
