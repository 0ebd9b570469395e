// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <clog/number.hpp>

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

namespace contlog {

// Exact interval with extended-rational endpoints. The open flags mark
// endpoints that are limits rather than attainable values; they refine digit
// decisions but are ignored by the containment/width queries, which treat the
// interval as its closed hull.
struct rat_interval {
    ext_rational lo;
    ext_rational hi;
    bool lo_open = false;
    bool hi_open = false;

    rat_interval() : lo(ext_rational::neg_inf()), hi(ext_rational::pos_inf()) {}
    rat_interval(ext_rational l, ext_rational h, bool lopen = false, bool hopen = false)
        : lo(std::move(l)), hi(std::move(h)), lo_open(lopen), hi_open(hopen) {
        if (hi < lo) throw std::invalid_argument("rat_interval: lo > hi");
    }

    static rat_interval full() { return {}; }
    static rat_interval point(ext_rational v) { return {v, v}; }

    bool is_point() const { return lo == hi; }
    bool bounded() const { return lo.finite() && hi.finite(); }

    ext_rational width() const {
        if (!bounded()) return ext_rational::pos_inf();
        return ext_rational(rational(hi.value() - lo.value()));
    }

    rational midpoint() const {
        if (!bounded()) throw std::domain_error("midpoint of unbounded interval");
        return (lo.value() + hi.value()) / 2;
    }

    bool contains(const ext_rational& v) const { return lo <= v && v <= hi; }
    bool contains(const rat_interval& other) const { return lo <= other.lo && other.hi <= hi; }

    std::string str() const { return "[" + lo.str() + ", " + hi.str() + "]"; }
};

// Dyadic outward rounding to about `frac_bits` fractional bits: a cheap,
// still-sound enclosure once exact endpoints have grown large.
inline rat_interval round_outward(const rat_interval& r, unsigned frac_bits = 64) {
    auto round_ep = [&](const ext_rational& v, bool up) {
        if (!v.finite()) return v;
        const integer p = numerator(v.value()), q = denominator(v.value()); // q > 0
        if (q <= (integer(1) << frac_bits)) return v; // already coarse enough
        integer a = p << frac_bits;
        integer t = a / q; // truncates toward zero
        if (a % q != 0) {
            if (up && a > 0) ++t;  // ceil
            if (!up && a < 0) --t; // floor
        }
        return ext_rational(rational(t, integer(1) << frac_bits));
    };
    rat_interval out = r;
    out.lo = round_ep(r.lo, false);
    out.hi = round_ep(r.hi, true);
    return out;
}

// Intersection; nullopt when disjoint. Tighter endpoints win, ties keep the
// open flag if either side has it.
inline std::optional<rat_interval> intersect(const rat_interval& a, const rat_interval& b) {
    rat_interval r = a;
    if (b.lo > r.lo) {
        r.lo = b.lo;
        r.lo_open = b.lo_open;
    } else if (b.lo == r.lo) {
        r.lo_open = r.lo_open || b.lo_open;
    }
    if (b.hi < r.hi) {
        r.hi = b.hi;
        r.hi_open = b.hi_open;
    } else if (b.hi == r.hi) {
        r.hi_open = r.hi_open || b.hi_open;
    }
    if (r.hi < r.lo) return std::nullopt;
    return r;
}

} // namespace contlog
