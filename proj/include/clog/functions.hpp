// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <clog/bounds.hpp>
#include <clog/compact.hpp>
#include <clog/engine.hpp>
#include <clog/series.hpp>
#include <clog/stream.hpp>

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>

namespace contlog {

namespace detail {

// Defers a stream-producing computation to the first pull. The builder only
// reads memoized streams, so re-invoking it after a stall resumes cleanly.
class deferred_source final : public digit_source {
public:
    explicit deferred_source(std::function<cl_stream()> make) : make_(std::move(make)) {}
    std::optional<digit> next() override {
        if (!cur_) cur_.emplace(make_());
        return cur_->next();
    }

private:
    std::function<cl_stream()> make_;
    std::optional<cursor> cur_;
};

inline cl_stream deferred(std::function<cl_stream()> make) {
    return cl_stream(std::make_unique<deferred_source>(std::move(make)));
}

// x - y, except that subtracting a stream from itself is exactly zero. Used by
// the trig range reduction (where the argument is often the shared pi
// constant); the public sub never short-circuits.
inline cl_stream sub_shared(cl_stream a, cl_stream b, std::uint64_t fuel = default_fuel) {
    if (a.same_object(b)) return rational_stream(rational(0));
    return sub(std::move(a), std::move(b), fuel);
}

inline std::size_t count_leading_ones(const cl_stream& s) {
    std::size_t j = 0;
    while (true) {
        auto d = s.at(j);
        if (!d || *d != digit::one) return j;
        ++j;
    }
}

} // namespace detail

cl_stream exp_cl(cl_stream x, std::uint64_t fuel);
cl_stream log_cl(cl_stream x, std::uint64_t fuel);
cl_stream asin_cl(cl_stream x, std::uint64_t fuel);
cl_stream cos_cl(cl_stream x, std::uint64_t fuel);

// e = exp(1), evaluated once per process.
inline const cl_stream& e_const() {
    static const cl_stream e = eval_series(exp_family(), rational_stream(1));
    return e;
}

// arcsin(1/2) = pi/6, the seed for all pi-derived constants.
inline const cl_stream& asin_half_const() {
    static const cl_stream v = [] {
        cl_stream half = rational_stream(1, 2);
        return mul(half, eval_series(asin_family(), mul(half, half)));
    }();
    return v;
}

inline const cl_stream& pi_cl() {
    static const cl_stream v = scale(6, asin_half_const());
    return v;
}
inline const cl_stream& pi_half_const() {
    static const cl_stream v = scale(3, asin_half_const());
    return v;
}
inline const cl_stream& two_pi_const() {
    static const cl_stream v = scale(12, asin_half_const());
    return v;
}

// log(2), via z = (2-1)/(2+1) = 1/3 exactly.
inline const cl_stream& ln2_const() {
    static const cl_stream v =
        mul(rational_stream(2, 3), eval_series(log_family(), rational_stream(1, 9)));
    return v;
}

inline const cl_stream& phi_cl() {
    static const cl_stream v = periodic_stream({digit::zero});
    return v;
}

namespace detail {

// exp of a stream with no leading sign: strip 2^j, evaluate the series on an
// argument certified <= 109/100 (the series tolerates up to ln 3), square back.
inline cl_stream exp_nonneg(const cl_stream& x, std::uint64_t fuel) {
    std::size_t j = count_leading_ones(x);
    cl_stream t = j ? suffix(x, j) : x;
    auto d = t.at(0);
    cl_stream s;
    if (!d) return infinity_stream(); // exp(+inf)
    if (*d == digit::end) {
        s = e_const();
    } else if (*d == digit::recip) {
        s = eval_series(exp_family(), t, fuel);
    } else { // zero: 1 < t < 2
        rat_interval iv = prefix_bound(t, 24);
        if (iv.hi.finite() && iv.hi.value() < rational(109, 100)) {
            s = eval_series(exp_family(), t, fuel);
        } else {
            cl_stream r = eval_series(exp_family(), half(t, fuel), fuel);
            s = mul(r, r, fuel);
        }
    }
    for (std::size_t i = 0; i < j; ++i) s = mul(s, s, fuel);
    return s;
}

} // namespace detail

inline cl_stream exp_cl(cl_stream x, std::uint64_t fuel = default_fuel) {
    return detail::deferred([x = std::move(x), fuel] {
        auto d = x.at(0);
        if (!d) return infinity_stream();
        if (*d == digit::neg) return reciprocal(detail::exp_nonneg(suffix(x, 1), fuel));
        return detail::exp_nonneg(x, fuel);
    });
}

namespace detail {

// log on (1,2): z = (x-1)/(x+1) in (0,1/3), log(x) = 2 z g(z^2).
inline cl_stream log_window(const cl_stream& x, std::uint64_t fuel) {
    cl_stream z = run_hom(hom{1, -1, 1, 1}, x, fuel);
    cl_stream g = eval_series(log_family(), mul(z, z, fuel), fuel);
    return mul(run_hom(hom{2, 0, 0, 1}, z, fuel), g, fuel);
}

} // namespace detail

inline cl_stream log_cl(cl_stream x, std::uint64_t fuel = default_fuel) {
    return detail::deferred([x = std::move(x), fuel]() -> cl_stream {
        auto d = x.at(0);
        if (!d) return infinity_stream(); // log(+inf)
        switch (*d) {
        case digit::neg: throw domain_error("log of a negative number");
        case digit::end: return rational_stream(rational(0));
        case digit::recip: {
            if (!x.at(1)) throw domain_error("log of zero");
            return negate(log_cl(suffix(x, 1), fuel)); // log x = -log(1/x)
        }
        case digit::zero: return detail::log_window(x, fuel);
        case digit::one: {
            // x = 2^j * t with 1 <= t < 2: log x = j log 2 + log t
            std::size_t j = detail::count_leading_ones(x);
            cl_stream t = suffix(x, j);
            cl_stream base = scale(integer(j), ln2_const(), fuel);
            auto dt = t.at(0);
            if (!dt) return infinity_stream();
            if (*dt == digit::end) return base;
            return add(base, detail::log_window(t, fuel), fuel);
        }
        }
        return x; // unreachable
    });
}

inline cl_stream asin_cl(cl_stream x, std::uint64_t fuel = default_fuel) {
    return detail::deferred([x = std::move(x), fuel]() -> cl_stream {
        auto d = x.at(0);
        if (!d) throw domain_error("asin beyond [-1, 1]");
        switch (*d) {
        case digit::neg: return negate(asin_cl(suffix(x, 1), fuel));
        case digit::end: return pi_half_const(); // asin(1)
        case digit::one:
        case digit::zero: throw domain_error("asin beyond [-1, 1]");
        case digit::recip: {
            cl_stream w = mul(x, x, fuel);
            return mul(x, eval_series(asin_family(), std::move(w), fuel), fuel);
        }
        }
        return x; // unreachable
    });
}

namespace detail {

inline integer nearest_integer(const rational& q) {
    integer twice = numerator(q) * 2;
    integer den2 = denominator(q) * 2;
    integer shifted = twice + denominator(q);
    integer k = shifted / den2; // floor for positive; fix up for negative
    if (shifted < 0 && shifted % den2 != 0) --k;
    return k;
}

// Reduce x into |theta| < 158/100 with cos(x) = (-1)^flips * cos(theta):
// cos(t) = -cos(pi - t) on (157/100, 118/25), evenness mirrors the negative
// side, and multiples of 2pi are subtracted wholesale. The windows overlap, so
// every finite value is eventually certified into one of them.
inline cl_stream cos_reduced(cl_stream x, std::uint64_t fuel) {
    const rational a_lo(-79, 50), a_hi(79, 50);
    const rational b_lo(157, 100), b_hi(118, 25);
    cl_stream cur = std::move(x);
    bool flip = false;
    for (int round = 0; round < 64; ++round) {
        std::size_t pulls = 32u * static_cast<std::size_t>(round + 1);
        rat_interval iv = prefix_bound(cur, pulls);
        if (iv.is_point() && !iv.lo.finite())
            throw domain_error("cos at infinity");
        if (iv.bounded()) {
            const rational lo = iv.lo.value(), hi = iv.hi.value();
            if (lo > a_lo && hi < a_hi) {
                cl_stream w = mul(cur, cur, fuel);
                cl_stream c = eval_series(cos_family(), std::move(w), fuel);
                return flip ? negate(std::move(c)) : c;
            }
            if (lo > b_lo && hi < b_hi) {
                cur = sub_shared(pi_cl(), cur, fuel);
                flip = !flip;
                continue;
            }
            if (lo > -b_hi && hi < -b_lo) {
                cur = add(pi_cl(), cur, fuel); // cos(x) = cos(-x) = -cos(pi + x)
                flip = !flip;
                continue;
            }
            rational mid2pi = prefix_bound(two_pi_const(), 48).midpoint();
            integer k = nearest_integer(((lo + hi) / 2) / mid2pi);
            if (k != 0) {
                cur = sub(cur, scale(k, two_pi_const(), fuel), fuel);
                continue;
            }
        }
        // not certified yet: next round reads more digits
    }
    throw stall_error(rat_interval(ext_rational(rational(-1)), ext_rational(rational(1))), 0);
}

} // namespace detail

inline cl_stream cos_cl(cl_stream x, std::uint64_t fuel = default_fuel) {
    return detail::deferred(
        [x = std::move(x), fuel] { return detail::cos_reduced(x, fuel); });
}

inline cl_stream sin_cl(cl_stream x, std::uint64_t fuel = default_fuel) {
    return cos_cl(detail::sub_shared(std::move(x), pi_half_const(), fuel), fuel);
}

inline cl_stream tan_cl(cl_stream x, std::uint64_t fuel = default_fuel) {
    return div(sin_cl(x, fuel), cos_cl(x, fuel), fuel);
}

} // namespace contlog
