// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace contlog {

using integer = boost::multiprecision::cpp_int;
using rational = boost::multiprecision::cpp_rational;

inline integer numerator(const rational& q) { return boost::multiprecision::numerator(q); }
inline integer denominator(const rational& q) { return boost::multiprecision::denominator(q); }

inline int sign_of(const integer& n) { return n.sign(); }
inline int sign_of(const rational& q) { return q.sign(); }

// floor(log2(p/q)) for p/q > 0.
inline long floor_log2(const rational& q) {
    if (q <= 0) throw std::invalid_argument("floor_log2: nonpositive argument");
    const integer p = numerator(q), d = denominator(q);
    long k = static_cast<long>(boost::multiprecision::msb(p)) -
             static_cast<long>(boost::multiprecision::msb(d));
    // msb difference is within one of the true exponent
    auto le_pow2 = [&](long e) { // 2^e <= p/d ?
        return e >= 0 ? (d << static_cast<unsigned>(e)) <= p : d <= (p << static_cast<unsigned>(-e));
    };
    if (!le_pow2(k)) --k;
    if (le_pow2(k + 1)) ++k;
    return k;
}

// Extended rational: a finite rational or a signed infinity.
class ext_rational {
public:
    ext_rational() = default;
    ext_rational(rational v) : value_(std::move(v)) {}
    ext_rational(const integer& v) : value_(rational(v)) {}
    ext_rational(long v) : value_(rational(v)) {}

    static ext_rational pos_inf() { return ext_rational(tag::pos); }
    static ext_rational neg_inf() { return ext_rational(tag::neg); }

    bool finite() const { return inf_ == 0; }
    bool is_pos_inf() const { return inf_ > 0; }
    bool is_neg_inf() const { return inf_ < 0; }
    const rational& value() const { return value_; } // finite() only

    int sign() const { return inf_ != 0 ? inf_ : value_.sign(); }

    ext_rational operator-() const {
        if (inf_ != 0) return inf_ > 0 ? neg_inf() : pos_inf();
        return ext_rational(rational(-value_));
    }

    friend bool operator==(const ext_rational& a, const ext_rational& b) {
        if (a.inf_ != b.inf_) return false;
        return a.inf_ != 0 || a.value_ == b.value_;
    }
    friend std::strong_ordering operator<=>(const ext_rational& a, const ext_rational& b) {
        if (a.inf_ != 0 || b.inf_ != 0) return a.inf_ <=> b.inf_;
        if (a.value_ < b.value_) return std::strong_ordering::less;
        if (a.value_ > b.value_) return std::strong_ordering::greater;
        return std::strong_ordering::equal;
    }

    std::string str() const {
        if (inf_ > 0) return "inf";
        if (inf_ < 0) return "-inf";
        std::string s = numerator(value_).str();
        if (denominator(value_) != 1) s += "/" + denominator(value_).str();
        return s;
    }

private:
    enum class tag { pos, neg };
    explicit ext_rational(tag t) : inf_(t == tag::pos ? 1 : -1) {}

    int inf_ = 0; // 0 finite, +1 / -1 signed infinity
    rational value_{};
};

// p/q as an extended rational; q may be zero (signed by p), 0/0 is invalid.
inline ext_rational ratio(const integer& p, const integer& q) {
    if (q == 0) {
        if (p == 0) throw std::domain_error("ratio: 0/0");
        return p > 0 ? ext_rational::pos_inf() : ext_rational::neg_inf();
    }
    return ext_rational(rational(p, q));
}

} // namespace contlog
