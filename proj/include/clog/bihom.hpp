// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <clog/digit.hpp>
#include <clog/interval.hpp>
#include <clog/number.hpp>
#include <clog/stream.hpp>

#include <array>
#include <optional>
#include <string>
#include <utility>

namespace contlog {

// M(x) = (a x + b) / (c x + d)
struct hom {
    integer a, b, c, d;

    friend bool operator==(const hom&, const hom&) = default;
    std::string str() const {
        return "[[" + a.str() + "," + b.str() + "],[" + c.str() + "," + d.str() + "]]";
    }
};

// M(x,y) = (a xy + b x + c y + d) / (e xy + f x + g y + h)
struct bihom {
    integer a, b, c, d, e, f, g, h;

    friend bool operator==(const bihom&, const bihom&) = default;
    std::string str() const {
        return "[[" + a.str() + "," + b.str() + "," + c.str() + "," + d.str() + "],[" + e.str() +
               "," + f.str() + "," + g.str() + "," + h.str() + "]]";
    }
};

inline const bihom add_matrix{0, 1, 1, 0, 0, 0, 0, 1};
inline const bihom sub_matrix{0, 1, -1, 0, 0, 0, 0, 1};
inline const bihom mul_matrix{1, 0, 0, 0, 0, 0, 0, 1};
inline const bihom div_matrix{0, 1, 0, 0, 0, 0, 1, 0};

namespace detail {

template <class... Ts> integer coeff_gcd(const Ts&... vs) {
    using boost::multiprecision::gcd;
    integer g = 0;
    auto step = [&](const integer& v) {
        if (g == 1) return;
        g = gcd(g, v);
    };
    (step(vs), ...);
    return g;
}

// Common power of two (cheap: trailing zero counts).
template <class... Ts> unsigned coeff_shift(const Ts&... vs) {
    unsigned s = ~0u;
    auto step = [&](const integer& v) {
        if (s == 0) return;
        if (v != 0) s = std::min(s, boost::multiprecision::lsb(boost::multiprecision::abs(v)));
    };
    (step(vs), ...);
    return s == ~0u ? 0 : s;
}

template <class... Ts> bool all_small(const Ts&... vs) {
    auto small = [](const integer& v) {
        return v == 0 || boost::multiprecision::msb(boost::multiprecision::abs(v)) < 192;
    };
    return (small(vs) && ...);
}

} // namespace detail

// Strip the common integer factor. All-zero matrices denote no function at
// all. Powers of two (the factors the digit transforms introduce) are always
// stripped; the full gcd is only computed while entries are small, since a
// large common odd factor can enter only through initial matrix construction.
inline hom canonical(hom m) {
    if (m.a == 0 && m.b == 0 && m.c == 0 && m.d == 0)
        throw degenerate_error("hom: all coefficients zero");
    if (unsigned s = detail::coeff_shift(m.a, m.b, m.c, m.d)) {
        m.a >>= s; m.b >>= s; m.c >>= s; m.d >>= s;
    }
    if (detail::all_small(m.a, m.b, m.c, m.d)) {
        integer g = detail::coeff_gcd(m.a, m.b, m.c, m.d);
        if (g > 1) { m.a /= g; m.b /= g; m.c /= g; m.d /= g; }
    }
    return m;
}

inline bihom canonical(bihom m) {
    if (m.a == 0 && m.b == 0 && m.c == 0 && m.d == 0 && m.e == 0 && m.f == 0 && m.g == 0 &&
        m.h == 0)
        throw degenerate_error("bihom: all coefficients zero");
    if (unsigned s = detail::coeff_shift(m.a, m.b, m.c, m.d, m.e, m.f, m.g, m.h)) {
        m.a >>= s; m.b >>= s; m.c >>= s; m.d >>= s; m.e >>= s; m.f >>= s; m.g >>= s; m.h >>= s;
    }
    if (detail::all_small(m.a, m.b, m.c, m.d, m.e, m.f, m.g, m.h)) {
        integer g = detail::coeff_gcd(m.a, m.b, m.c, m.d, m.e, m.f, m.g, m.h);
        if (g > 1) {
            m.a /= g; m.b /= g; m.c /= g; m.d /= g; m.e /= g; m.f /= g; m.g /= g; m.h /= g;
        }
    }
    return m;
}

// ---- produce / consume transforms ----

// Rewrites M after emitting an output digit: the new matrix is d^-1 o M.
inline bihom produce(const bihom& m, digit d) {
    switch (d) {
    case digit::zero: // residual 1/(M-1)
        return canonical(bihom{m.e, m.f, m.g, m.h, m.a - m.e, m.b - m.f, m.c - m.g, m.d - m.h});
    case digit::one: // residual M/2
        return canonical(bihom{m.a, m.b, m.c, m.d, 2 * m.e, 2 * m.f, 2 * m.g, 2 * m.h});
    case digit::recip: // residual 1/M
        return canonical(bihom{m.e, m.f, m.g, m.h, m.a, m.b, m.c, m.d});
    case digit::neg: // residual -M
        return canonical(bihom{-m.a, -m.b, -m.c, -m.d, m.e, m.f, m.g, m.h});
    case digit::end: break;
    }
    throw domain_error("produce: end is not producible");
}

inline hom produce(const hom& m, digit d) {
    switch (d) {
    case digit::zero: return canonical(hom{m.c, m.d, m.a - m.c, m.b - m.d});
    case digit::one: return canonical(hom{m.a, m.b, 2 * m.c, 2 * m.d});
    case digit::recip: return canonical(hom{m.c, m.d, m.a, m.b});
    case digit::neg: return canonical(hom{-m.a, -m.b, m.c, m.d});
    case digit::end: break;
    }
    throw domain_error("produce: end is not producible");
}

// Rewrites M after reading a digit of x: substitutes the digit's inverse map.
inline bihom consume_x(const bihom& m, digit d) {
    switch (d) {
    case digit::zero: // x <- 1 + 1/x
        return canonical(bihom{m.a + m.c, m.b + m.d, m.a, m.b, m.e + m.g, m.f + m.h, m.e, m.f});
    case digit::one: // x <- 2x
        return canonical(bihom{2 * m.a, 2 * m.b, m.c, m.d, 2 * m.e, 2 * m.f, m.g, m.h});
    case digit::recip: // x <- 1/x
        return canonical(bihom{m.c, m.d, m.a, m.b, m.g, m.h, m.e, m.f});
    case digit::neg: // x <- -x
        return canonical(bihom{-m.a, -m.b, m.c, m.d, -m.e, -m.f, m.g, m.h});
    case digit::end: break;
    }
    throw domain_error("consume_x: end has its own substitution");
}

inline bihom consume_y(const bihom& m, digit d) {
    switch (d) {
    case digit::zero:
        return canonical(bihom{m.a + m.b, m.a, m.c + m.d, m.c, m.e + m.f, m.e, m.g + m.h, m.g});
    case digit::one:
        return canonical(bihom{2 * m.a, m.b, 2 * m.c, m.d, 2 * m.e, m.f, 2 * m.g, m.h});
    case digit::recip:
        return canonical(bihom{m.b, m.a, m.d, m.c, m.f, m.e, m.h, m.g});
    case digit::neg:
        return canonical(bihom{-m.a, m.b, -m.c, m.d, -m.e, m.f, -m.g, m.h});
    case digit::end: break;
    }
    throw domain_error("consume_y: end has its own substitution");
}

inline hom consume(const hom& m, digit d) {
    switch (d) {
    case digit::zero: return canonical(hom{m.a + m.b, m.a, m.c + m.d, m.c});
    case digit::one: return canonical(hom{2 * m.a, m.b, 2 * m.c, m.d});
    case digit::recip: return canonical(hom{m.b, m.a, m.d, m.c});
    case digit::neg: return canonical(hom{-m.a, m.b, -m.c, m.d});
    case digit::end: break;
    }
    throw domain_error("consume: end has its own substitution");
}

// End means the residual tail is exactly 1: substitute x = 1.
inline hom consume_x_end(const bihom& m) {
    return canonical(hom{m.a + m.c, m.b + m.d, m.e + m.g, m.f + m.h});
}
inline hom consume_y_end(const bihom& m) {
    return canonical(hom{m.a + m.b, m.c + m.d, m.e + m.f, m.g + m.h});
}

// Exhaustion without end means the tail is +infinity: substitute x = inf,
// keeping the lower-order coefficients when the leading ones vanish.
inline hom consume_x_inf(const bihom& m) {
    if (m.a != 0 || m.b != 0 || m.e != 0 || m.f != 0)
        return canonical(hom{m.a, m.b, m.e, m.f});
    return canonical(hom{m.c, m.d, m.g, m.h});
}
inline hom consume_y_inf(const bihom& m) {
    if (m.a != 0 || m.c != 0 || m.e != 0 || m.g != 0)
        return canonical(hom{m.a, m.c, m.e, m.g});
    return canonical(hom{m.b, m.d, m.f, m.h});
}

inline rational consume_end(const hom& m) { // x = 1, constant left
    if (m.c + m.d == 0) {
        if (m.a + m.b == 0) throw degenerate_error("hom at 1: 0/0");
        throw domain_error("hom at 1: infinite constant"); // callers use ext version
    }
    return rational(m.a + m.b, m.c + m.d);
}

inline ext_rational consume_end_ext(const hom& m) {
    integer n = m.a + m.b, d = m.c + m.d;
    if (n == 0 && d == 0) throw degenerate_error("hom at 1: 0/0");
    return ratio(n, d);
}

inline ext_rational consume_inf_ext(const hom& m) {
    if (m.a != 0 || m.c != 0) return ratio(m.a, m.c);
    if (m.b == 0 && m.d == 0) throw degenerate_error("hom at inf: 0/0");
    return ratio(m.b, m.d);
}

// ---- exact evaluation (tests and properties) ----

inline std::optional<rational> eval(const bihom& m, const rational& x, const rational& y) {
    rational num = m.a * x * y + m.b * x + m.c * y + rational(m.d);
    rational den = m.e * x * y + m.f * x + m.g * y + rational(m.h);
    if (den == 0) return std::nullopt;
    return num / den;
}

inline std::optional<rational> eval(const hom& m, const rational& x) {
    rational num = m.a * x + rational(m.b);
    rational den = m.c * x + rational(m.d);
    if (den == 0) return std::nullopt;
    return num / den;
}

// ---- residual domains ----

// One endpoint of a residual domain; `attained` marks values an actual tail can
// take (as opposed to limits).
struct vbound {
    ext_rational v;
    bool attained;
};

// Set of values the unread tail of an input may denote, keyed by the last
// digit consumed from it. End may follow a one (tail exactly 1) but never a
// zero, and a tail can be +infinity only where a canonical stream may exhaust.
struct var_domain {
    vbound lo, hi;

    static var_domain fresh() {
        return {{ext_rational::neg_inf(), true}, {ext_rational::pos_inf(), true}};
    }
    static var_domain after(digit d) {
        switch (d) {
        case digit::one: return {{ext_rational(1), true}, {ext_rational::pos_inf(), false}};
        case digit::zero: return {{ext_rational(1), false}, {ext_rational::pos_inf(), false}};
        case digit::recip: return {{ext_rational(1), false}, {ext_rational::pos_inf(), true}};
        case digit::neg: return {{ext_rational(0), false}, {ext_rational::pos_inf(), true}};
        case digit::end: break;
        }
        throw domain_error("var_domain: end eliminates the variable");
    }
    // the paper's standing assumption x >= 1
    static var_domain ge_one() {
        return {{ext_rational(1), true}, {ext_rational::pos_inf(), true}};
    }
};

namespace detail {

inline int chain_sign(std::initializer_list<integer> terms) {
    for (const integer& t : terms)
        if (t != 0) return t.sign();
    return 0;
}

// Sign of e*xy + f*x + g*y + h at a (possibly infinite) corner, by dominance.
inline int den_corner_sign(const bihom& m, const ext_rational& cx, const ext_rational& cy) {
    const bool fx = cx.finite(), fy = cy.finite();
    if (fx && fy) {
        const rational &x = cx.value(), &y = cy.value();
        rational v = m.e * x * y + m.f * x + m.g * y + rational(m.h);
        return v.sign();
    }
    if (!fx && fy) {
        const rational& y = cy.value();
        integer sx = cx.sign();
        rational lead = (m.e * y + rational(m.f)) * sx;
        if (lead != 0) return lead.sign();
        rational rest = m.g * y + rational(m.h);
        return rest.sign();
    }
    if (fx && !fy) {
        const rational& x = cx.value();
        integer sy = cy.sign();
        rational lead = (m.e * x + rational(m.g)) * sy;
        if (lead != 0) return lead.sign();
        rational rest = m.f * x + rational(m.h);
        return rest.sign();
    }
    integer sx = cx.sign(), sy = cy.sign();
    return chain_sign({m.e * sx * sy, m.f * sx + m.g * sy, m.h});
}

inline int den_corner_sign(const hom& m, const ext_rational& cx) {
    if (cx.finite()) {
        rational v = m.c * cx.value() + rational(m.d);
        return v.sign();
    }
    integer lead = m.c * cx.sign();
    if (lead != 0) return lead.sign();
    return m.d.sign();
}

// Ratio with a dominance chain; sigma resolves the sign of n/0 forms (the
// denominator's constant interior sign).
inline ext_rational chain_ratio(std::initializer_list<std::pair<integer, integer>> chain,
                                int sigma) {
    for (const auto& [p, q] : chain) {
        if (p == 0 && q == 0) continue;
        if (q != 0) return ext_rational(rational(p, q));
        return (p.sign() * sigma) > 0 ? ext_rational::pos_inf() : ext_rational::neg_inf();
    }
    throw degenerate_error("corner value: 0/0 after all fallbacks");
}

// Value of M at a corner with limit semantics.
inline ext_rational corner_value(const bihom& m, const ext_rational& cx, const ext_rational& cy,
                                 int sigma) {
    const bool fx = cx.finite(), fy = cy.finite();
    if (fx && fy) {
        const rational &x = cx.value(), &y = cy.value();
        rational num = m.a * x * y + m.b * x + m.c * y + rational(m.d);
        rational den = m.e * x * y + m.f * x + m.g * y + rational(m.h);
        if (den != 0) return ext_rational(num / den);
        if (num == 0) throw degenerate_error("corner value: 0/0");
        return (num.sign() * sigma) > 0 ? ext_rational::pos_inf() : ext_rational::neg_inf();
    }
    auto lin = [](const integer& u, const rational& t, const integer& v) {
        rational r = u * t + rational(v);
        return r;
    };
    if (!fx && fy) {
        const rational& y = cy.value();
        integer sx = cx.sign();
        rational pn = lin(m.a, y, m.b) * sx, pd = lin(m.e, y, m.f) * sx;
        rational qn = lin(m.c, y, m.d), qd = lin(m.g, y, m.h);
        // chain over rationals: cross-multiply to integer pairs
        auto as_pair = [](const rational& n, const rational& d) {
            return std::pair<integer, integer>(numerator(n) * denominator(d),
                                               numerator(d) * denominator(n));
        };
        return chain_ratio({as_pair(pn, pd), as_pair(qn, qd)}, sigma);
    }
    if (fx && !fy) {
        const rational& x = cx.value();
        integer sy = cy.sign();
        rational pn = lin(m.a, x, m.c) * sy, pd = lin(m.e, x, m.g) * sy;
        rational qn = lin(m.b, x, m.d), qd = lin(m.f, x, m.h);
        auto as_pair = [](const rational& n, const rational& d) {
            return std::pair<integer, integer>(numerator(n) * denominator(d),
                                               numerator(d) * denominator(n));
        };
        return chain_ratio({as_pair(pn, pd), as_pair(qn, qd)}, sigma);
    }
    integer sx = cx.sign(), sy = cy.sign();
    return chain_ratio({{m.a * sx * sy, m.e * sx * sy},
                        {m.b * sx + m.c * sy, m.f * sx + m.g * sy},
                        {m.d, m.h}},
                       sigma);
}

inline ext_rational corner_value(const hom& m, const ext_rational& cx, int sigma) {
    if (cx.finite()) {
        rational num = m.a * cx.value() + rational(m.b);
        rational den = m.c * cx.value() + rational(m.d);
        if (den != 0) return ext_rational(num / den);
        if (num == 0) throw degenerate_error("corner value: 0/0");
        return (num.sign() * sigma) > 0 ? ext_rational::pos_inf() : ext_rational::neg_inf();
    }
    integer sx = cx.sign();
    return chain_ratio({{m.a * sx, m.c * sx}, {m.b, m.d}}, sigma);
}

} // namespace detail

// Exact bounds of M over a residual box, or the reason none are available.
// corner[i][j] is M at (x_i, y_j) with i/j = 0 for lo, 1 for hi (hom ranges
// fill corner[0][0] and corner[1][0]).
struct range_bounds {
    enum class status { ok, indeterminate, zero_denominator };
    status st = status::indeterminate;
    vbound lo{}, hi{};
    ext_rational corner[2][2]{};

    bool ok() const { return st == status::ok; }
    rat_interval closed_hull() const {
        if (!ok()) return rat_interval::full();
        return rat_interval(lo.v, hi.v, !lo.attained, !hi.attained);
    }
};

// Min/max of M over dx x dy. The denominator is affine in each variable, so a
// uniform corner sign makes it sign-constant on the box; M is then monotone in
// each variable and its extrema sit on the corner set.
inline range_bounds bihom_range(const bihom& m, const var_domain& dx, const var_domain& dy) {
    range_bounds out;
    if (m.e == 0 && m.f == 0 && m.g == 0 && m.h == 0) {
        out.st = range_bounds::status::zero_denominator;
        return out;
    }
    const ext_rational xs[2] = {dx.lo.v, dx.hi.v};
    const ext_rational ys[2] = {dy.lo.v, dy.hi.v};
    int sigma = detail::den_corner_sign(m, xs[0], ys[0]);
    if (sigma == 0) return out;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            if (i == 0 && j == 0) continue;
            if (detail::den_corner_sign(m, xs[i], ys[j]) != sigma) return out;
        }
    ext_rational v[2][2];
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            v[i][j] = detail::corner_value(m, xs[i], ys[j], sigma);
            out.corner[i][j] = v[i][j];
        }
    const bool xa[2] = {dx.lo.attained, dx.hi.attained};
    const bool ya[2] = {dy.lo.attained, dy.hi.attained};
    auto attained = [&](int i, int j) {
        // a corner counts as attainable if each coordinate endpoint does, or if
        // M is constant along that edge so the endpoint does not matter
        bool ax = xa[i] || v[i][j] == v[1 - i][j];
        bool ay = ya[j] || v[i][j] == v[i][1 - j];
        return ax && ay;
    };
    out.st = range_bounds::status::ok;
    out.lo = {v[0][0], attained(0, 0)};
    out.hi = out.lo;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            const ext_rational& w = v[i][j];
            if (w < out.lo.v)
                out.lo = {w, attained(i, j)};
            else if (w == out.lo.v)
                out.lo.attained = out.lo.attained || attained(i, j);
            if (w > out.hi.v)
                out.hi = {w, attained(i, j)};
            else if (w == out.hi.v)
                out.hi.attained = out.hi.attained || attained(i, j);
        }
    return out;
}

inline range_bounds hom_range(const hom& m, const var_domain& dx) {
    range_bounds out;
    if (m.c == 0 && m.d == 0) {
        out.st = range_bounds::status::zero_denominator;
        return out;
    }
    const ext_rational xs[2] = {dx.lo.v, dx.hi.v};
    int sigma = detail::den_corner_sign(m, xs[0]);
    if (sigma == 0 || detail::den_corner_sign(m, xs[1]) != sigma) return out;
    ext_rational v[2] = {detail::corner_value(m, xs[0], sigma),
                         detail::corner_value(m, xs[1], sigma)};
    out.corner[0][0] = v[0];
    out.corner[1][0] = v[1];
    const bool xa[2] = {dx.lo.attained, dx.hi.attained};
    auto attained = [&](int i) { return xa[i] || v[0] == v[1]; };
    out.st = range_bounds::status::ok;
    if (v[0] <= v[1]) {
        out.lo = {v[0], attained(0)};
        out.hi = {v[1], attained(1)};
    } else {
        out.lo = {v[1], attained(1)};
        out.hi = {v[0], attained(0)};
    }
    if (v[0] == v[1]) {
        bool att = attained(0) || attained(1);
        out.lo.attained = out.hi.attained = att;
    }
    return out;
}

// Numerator treated as a function of its own (denominator 1); used to resolve
// matrices whose denominator is identically zero (value is a signed infinity
// once the numerator's sign is pinned).
inline range_bounds numerator_range(const bihom& m, const var_domain& dx, const var_domain& dy) {
    return bihom_range({m.a, m.b, m.c, m.d, 0, 0, 0, 1}, dx, dy);
}
inline range_bounds numerator_range(const hom& m, const var_domain& dx) {
    return hom_range({m.a, m.b, 0, 1}, dx);
}

// ---- spec-facing operations over the standard box [1,inf]^2 ----

// Corner values at (1,1), (1,inf), (inf,1), (inf,inf) with limit fallbacks.
inline std::array<ext_rational, 4> corner_values(const bihom& m) {
    using detail::chain_ratio;
    auto c11 = chain_ratio({{m.a + m.b + m.c + m.d, m.e + m.f + m.g + m.h}}, 1);
    auto c1i = chain_ratio({{m.a + m.c, m.e + m.g}, {m.b + m.d, m.f + m.h}}, 1);
    auto ci1 = chain_ratio({{m.a + m.b, m.e + m.f}, {m.c + m.d, m.g + m.h}}, 1);
    auto cii = chain_ratio({{m.a, m.e}, {m.b + m.c, m.f + m.g}, {m.d, m.h}}, 1);
    return {c11, c1i, ci1, cii};
}

// Exact range over [1,inf]^2, or nullopt when the denominator's sign is not
// pinned by its corners yet.
inline std::optional<rat_interval> range(const bihom& m) {
    auto r = bihom_range(m, var_domain::ge_one(), var_domain::ge_one());
    if (r.st == range_bounds::status::zero_denominator)
        throw degenerate_error("range: denominator identically zero");
    if (!r.ok()) return std::nullopt;
    return r.closed_hull();
}

// The emission decision, in precedence order. Open endpoints admit boundary
// values: a supremum that is never attained cannot keep a digit from being
// correct for every actual value.
inline std::optional<digit> decide_digit(const rat_interval& r, bool x_live, bool y_live) {
    const ext_rational zero{0}, one_v{1}, two{2};
    if (!x_live && !y_live && r.lo == one_v && r.hi == one_v) return digit::end;
    if (r.hi < zero || (r.hi == zero && r.hi_open)) return digit::neg;
    if ((r.lo > zero || (r.lo == zero && r.lo_open)) &&
        (r.hi < one_v || (r.hi == one_v && r.hi_open)))
        return digit::recip;
    if (r.lo >= two) return digit::one;
    if ((r.lo > one_v || (r.lo == one_v && r.lo_open)) &&
        (r.hi < two || (r.hi == two && r.hi_open)))
        return digit::zero;
    return std::nullopt;
}

namespace detail {

// Engine-side decision: same regions, but One is withheld while the residual
// may still be exactly +infinity (a divisor that could be exactly zero), so
// infinite outputs stay canonical (empty stream).
inline std::optional<digit> engine_decide(const range_bounds& r) {
    if (!r.ok()) return std::nullopt;
    // value may still be exactly +infinity: no digit region contains it
    if (r.hi.v.is_pos_inf() && r.hi.attained) return std::nullopt;
    return decide_digit(r.closed_hull(), true, true); // end is handled by constant mode
}

} // namespace detail

} // namespace contlog
