// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <clog/bihom.hpp>
#include <clog/compact.hpp>
#include <clog/stream.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <utility>

namespace contlog {

namespace detail {

// Inverse digit maps: the value before reading digit d as a function of the
// tail after it.
inline hom inverse_map(digit d) {
    switch (d) {
    case digit::one: return {2, 0, 0, 1};   // v = 2t
    case digit::zero: return {1, 1, 1, 0};  // v = 1 + 1/t
    case digit::recip: return {0, 1, 1, 0}; // v = 1/t
    case digit::neg: return {-1, 0, 0, 1};  // v = -t
    case digit::end: break;
    }
    throw domain_error("inverse_map: end carries no map");
}

inline hom compose(const hom& p, const hom& q) { // (p o q) as matrices
    return canonical(hom{p.a * q.a + p.b * q.c, p.a * q.b + p.b * q.d, p.c * q.a + p.d * q.c,
                         p.c * q.b + p.d * q.d});
}

inline ext_rational eval_hom_endpoint(const hom& H, const ext_rational& t, int side) {
    if (!t.finite()) {
        int s = t.sign();
        if (H.c != 0 || H.a != 0) {
            if (H.c != 0) return ratio(H.a, H.c);
            // denominator tends to the constant d
            integer lead = H.a * s;
            return lead.sign() * H.d.sign() > 0 ? ext_rational::pos_inf()
                                                : ext_rational::neg_inf();
        }
        return ratio(H.b, H.d);
    }
    const rational& p = t.value();
    rational num = H.a * p + rational(H.b);
    rational den = H.c * p + rational(H.d);
    if (den != 0) return ext_rational(num / den);
    // pole at the endpoint: approached from inside the interval
    int sgn = num.sign() * H.c.sign() * side;
    return sgn > 0 ? ext_rational::pos_inf() : ext_rational::neg_inf();
}

// Image of an interval under a Moebius map, as an interval. Exact when the
// pole is outside the closed interval; collapses to the full line otherwise.
inline rat_interval apply_hom(const hom& H, const rat_interval& I) {
    integer det = H.a * H.d - H.b * H.c;
    if (det == 0) { // constant map
        ext_rational v = H.c != 0 ? ratio(H.a, H.c) : ratio(H.b, H.d);
        return rat_interval::point(v);
    }
    if (H.c != 0) {
        ext_rational pole{rational(-H.d, H.c)};
        if (I.lo < pole && pole < I.hi) return rat_interval::full();
    }
    ext_rational vlo = eval_hom_endpoint(H, I.lo, +1);
    ext_rational vhi = eval_hom_endpoint(H, I.hi, -1);
    bool increasing = det > 0;
    if (increasing) return rat_interval(vlo, vhi, I.lo_open, I.hi_open);
    return rat_interval(vhi, vlo, I.hi_open, I.lo_open);
}

// Residual-domain class keyed on the next digit of the stream.
inline rat_interval peek_class(std::optional<digit> d) {
    if (!d) return rat_interval::point(ext_rational::pos_inf());
    switch (*d) {
    case digit::one:
    case digit::zero: return {ext_rational(rational(1)), ext_rational::pos_inf()};
    case digit::recip: return {ext_rational(rational(0)), ext_rational(rational(1))};
    case digit::neg: return {ext_rational::neg_inf(), ext_rational(rational(0))};
    case digit::end: return rat_interval::point(ext_rational(rational(1)));
    }
    return rat_interval::full();
}

// Residual-domain class of the tail once digit d has been read.
inline rat_interval tail_class(digit d) {
    switch (d) {
    case digit::one:
    case digit::zero:
    case digit::recip: return {ext_rational(rational(1)), ext_rational::pos_inf()};
    case digit::neg: return {ext_rational(rational(0)), ext_rational::pos_inf()};
    case digit::end: break;
    }
    throw domain_error("tail_class: end leaves no tail");
}

// All values a stream may denote given its first digit (zero's non-canonical
// spellings included, so these are sound enclosures).
inline rat_interval value_region(digit d) {
    switch (d) {
    case digit::one: return {ext_rational(rational(2)), ext_rational::pos_inf()};
    case digit::zero: return {ext_rational(rational(1)), ext_rational(rational(2)), true, true};
    case digit::recip: return {ext_rational(rational(0)), ext_rational(rational(1)), false, true};
    case digit::neg: return {ext_rational::neg_inf(), ext_rational(rational(0))};
    case digit::end: return rat_interval::point(ext_rational(rational(1)));
    }
    return rat_interval::full();
}

// Tail as a function of the value, for the digit just consumed.
inline hom forward_map(digit d) {
    switch (d) {
    case digit::one: return {1, 0, 0, 2};   // t = v/2
    case digit::zero: return {0, 1, 1, -1}; // t = 1/(v-1)
    case digit::recip: return {0, 1, 1, 0}; // t = 1/v
    case digit::neg: return {-1, 0, 0, 1};  // t = -v
    case digit::end: break;
    }
    throw domain_error("forward_map: end consumes the variable");
}

} // namespace detail

// Exact interval guaranteed to contain the stream's value after consuming k
// digits: the k inverse digit maps applied to the residual domain. Nested in
// k; a point once the stream is over. Never throws: a stalled pull contributes
// the stall's own value interval.
inline rat_interval prefix_bound(const cl_stream& s, std::size_t k) {
    hom H{1, 0, 0, 1};
    for (std::size_t i = 0; i < k; ++i) {
        std::optional<digit> d;
        try {
            d = s.at(i);
        } catch (const stall_error& e) {
            return detail::apply_hom(H, e.residual);
        }
        if (!d) return detail::apply_hom(H, rat_interval::point(ext_rational::pos_inf()));
        if (*d == digit::end)
            return detail::apply_hom(H, rat_interval::point(ext_rational(rational(1))));
        H = detail::compose(H, detail::inverse_map(*d));
    }
    std::optional<digit> peeked;
    try {
        peeked = s.at(k);
    } catch (const stall_error& e) {
        return detail::apply_hom(H, e.residual);
    }
    return detail::apply_hom(H, detail::peek_class(peeked));
}

struct decimal_result {
    std::string text;     // midpoint truncated toward zero
    rat_interval interval; // exact enclosure of the value
    bool exact = false;    // interval is a single point
    std::size_t digits_used = 0;
};

namespace detail {

inline integer pow10(unsigned n) {
    integer r = 1;
    for (unsigned i = 0; i < n; ++i) r *= 10;
    return r;
}

inline std::string truncate_decimal(const rational& v, unsigned places) {
    integer scaled = numerator(v) * pow10(places) / denominator(v); // trunc toward zero
    bool negative = scaled < 0;
    integer mag = negative ? integer(-scaled) : scaled;
    integer ip = mag / pow10(places);
    integer fp = mag % pow10(places);
    std::string frac = fp.str();
    if (frac.size() < places) frac.insert(frac.begin(), places - frac.size(), '0');
    std::string out = (negative && mag != 0 ? "-" : "") + ip.str();
    if (places > 0) out += "." + frac;
    return out;
}

// largest E >= 0 with w <= 10^-E (0 if w > 1); w must be positive
inline long decimal_exponent_bound(const rational& w) {
    if (w > 1) return 0;
    long e = 0;
    rational t = w;
    // coarse jump using digit counts, then settle exactly
    long guess = static_cast<long>(denominator(t).str().size()) -
                 static_cast<long>(numerator(t).str().size()) - 1;
    if (guess > 0) {
        if (t * pow10(static_cast<unsigned>(guess)) <= 1)
            e = guess, t = t * pow10(static_cast<unsigned>(guess));
    }
    while (t * 10 <= 1) {
        t *= 10;
        ++e;
    }
    return e;
}

} // namespace detail

// Decimal rendering with a certified enclosure: pull digits until the interval
// is narrower than 10^-digits or `fuel` pulls are spent; a stalled pull ends
// the loop with the stall's interval. Always terminates.
inline decimal_result to_decimal(const cl_stream& s, unsigned digits,
                                 std::uint64_t fuel = default_fuel) {
    hom H{1, 0, 0, 1};
    rat_interval iv = rat_interval::full();
    const rational eps(1, detail::pow10(digits));
    std::size_t pulled = 0;
    bool over = false, stalled = false;
    while (true) {
        std::optional<digit> d;
        try {
            d = s.at(pulled);
        } catch (const stall_error& e) {
            iv = detail::apply_hom(H, e.residual);
            stalled = true;
            break;
        }
        if (!d) {
            iv = detail::apply_hom(H, rat_interval::point(ext_rational::pos_inf()));
            over = true;
            break;
        }
        if (*d == digit::end) {
            iv = detail::apply_hom(H, rat_interval::point(ext_rational(rational(1))));
            over = true;
            break;
        }
        H = detail::compose(H, detail::inverse_map(*d));
        ++pulled;
        iv = detail::apply_hom(H, detail::tail_class(*d));
        ext_rational w = iv.width();
        if (w.finite() && w.value() < eps) break;
        if (pulled >= fuel) break;
    }
    (void)stalled;
    decimal_result out;
    out.interval = iv;
    out.exact = over && iv.is_point();
    out.digits_used = pulled;
    if (iv.is_point() && !iv.lo.finite()) {
        out.text = iv.lo.is_pos_inf() ? "inf" : "-inf";
    } else if (!iv.bounded()) {
        out.text = "?";
    } else {
        out.text = detail::truncate_decimal(iv.midpoint(), digits);
    }
    return out;
}

// Outcome of an exact comparison from prefixes.
struct compare_result {
    enum class ordering { less, equal, greater, stall };
    ordering o;
    rat_interval a, b; // best enclosures at the point of decision/stall

    bool is(ordering x) const { return o == x; }
};

namespace detail {

// Order rank of a digit class: the residual-value regions of distinct digits
// are pairwise disjoint intervals for canonical streams, ordered
//   neg (<0)  <  recip (0,1)  <  end {1}  <  zero (1,2)  <  one [2,inf)  <  exhausted {inf}
inline int class_rank(std::optional<digit> d) {
    if (!d) return 5;
    switch (*d) {
    case digit::neg: return 0;
    case digit::recip: return 1;
    case digit::end: return 2;
    case digit::zero: return 3;
    case digit::one: return 4;
    }
    return 5;
}

} // namespace detail

// Digit-walk comparison: identical prefixes narrow both values together; the
// first differing digit class decides the order (monotonicity of the shared
// prefix map fixes the direction). Equality is certified only for streams that
// are both over with identical digits; everything else stalls at `fuel` pulls.
inline compare_result compare(const cl_stream& a, const cl_stream& b,
                              std::uint64_t fuel = default_fuel) {
    hom H{1, 0, 0, 1};
    bool increasing = true;
    std::size_t i = 0;
    std::uint64_t pulls = 0;
    while (true) {
        std::optional<digit> da, db;
        rat_interval cls_a = rat_interval::full(), cls_b = rat_interval::full();
        bool sa = false, sb = false;
        try {
            da = a.at(i);
        } catch (const stall_error& e) {
            sa = true;
            cls_a = e.residual;
        }
        try {
            db = b.at(i);
        } catch (const stall_error& e) {
            sb = true;
            cls_b = e.residual;
        }
        pulls += 2;
        if (!sa) cls_a = detail::peek_class(da);
        if (!sb) cls_b = detail::peek_class(db);
        rat_interval ia = detail::apply_hom(H, cls_a);
        rat_interval ib = detail::apply_hom(H, cls_b);
        if (sa || sb) return {compare_result::ordering::stall, ia, ib};
        if (da == db) {
            if (!da) return {compare_result::ordering::equal, ia, ib};
            if (*da == digit::end) return {compare_result::ordering::equal, ia, ib};
            if (pulls >= fuel) return {compare_result::ordering::stall, ia, ib};
            if (*da != digit::one) increasing = !increasing; // zero/recip/neg maps decrease
            H = detail::compose(H, detail::inverse_map(*da));
            ++i;
            continue;
        }
        bool a_less = detail::class_rank(da) < detail::class_rank(db);
        if (!increasing) a_less = !a_less;
        return {a_less ? compare_result::ordering::less : compare_result::ordering::greater, ia, ib};
    }
}

} // namespace contlog
