// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <clog/bihom.hpp>
#include <clog/bounds.hpp>
#include <clog/compact.hpp>
#include <clog/engine.hpp>
#include <clog/stream.hpp>

#include <algorithm>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

namespace contlog {

// A nested product M_1(w, M_2(w, ...)) whose n-th tail has digits known ahead
// of time. matrix(n) is the n-th factor and prefix(n, w) the a-priori digits
// of the n-th tail. bracket(n, ...) encloses the n-th tail by partial sums
// with a certified remainder; it backs both the engine's seed enclosure and
// on-demand prefix extension, which is what keeps deep evaluation productive
// (digit-by-digit recursion alone loses its 2-bit-per-level margin to digit
// granularity). domain_sup is the least upper bound of valid arguments.
// Unnormalized endpoints of a partial-sum enclosure; denominators positive.
// Kept raw because the sums grow large and per-operation gcd normalization
// dominates everything else.
struct raw_bracket {
    integer lo_num, lo_den, hi_num, hi_den;

    rat_interval to_interval() const {
        return {ext_rational(rational(lo_num, lo_den)), ext_rational(rational(hi_num, hi_den))};
    }
    // width < 1/2^bits ?
    bool narrower_than(unsigned bits) const {
        integer cross = hi_num * lo_den - lo_num * hi_den;
        if (cross < 0) cross = -cross;
        return (cross << bits) < lo_den * hi_den;
    }
    bool wider_than(const raw_bracket& other) const {
        integer a = hi_num * lo_den - lo_num * hi_den;
        integer b = other.hi_num * other.lo_den - other.lo_num * other.hi_den;
        return a * other.lo_den * other.hi_den > b * lo_den * hi_den;
    }
};

struct series_family {
    const char* name;
    bihom (*matrix)(long n);
    std::vector<digit> (*prefix)(long n, const cl_stream& w);
    rat_interval (*bracket)(long n, const rational& wlo, const rational& whi, int terms);
    raw_bracket (*bracket_raw)(long n, const rational& wlo, const rational& whi, int terms);
    rational domain_sup;
    void (*guard)(const cl_stream& w); // cheap flagrant-domain check, may be null
};

namespace detail {

inline std::vector<digit> zero_then_ones(long ones_count) {
    std::vector<digit> v;
    v.reserve(static_cast<std::size_t>(ones_count) + 1);
    v.push_back(digit::zero);
    for (long i = 0; i < ones_count; ++i) v.push_back(digit::one);
    return v;
}

// ---- exp: y_n = 1 + x*y_{n+1}/n,  0 <= x <= 109/100 ----
// y_n < 1 + (e^x - 1)/n < 2 for n >= 2, and 1/(y_n - 1) > n/2, so the tail
// starts with a zero and floor(log2 n) - 1 ones.

inline bihom exp_matrix(long n) {
    integer k = n;
    return {1, 0, 0, k, 0, 0, 0, k};
}

inline std::vector<digit> exp_prefix(long n, const cl_stream&) {
    if (n < 2) return {};
    return zero_then_ones(floor_log2(rational(n)) - 1);
}

// partial sums of y_n = sum_j x^j / (n(n+1)...(n+j-1)); the tail after k
// terms is below term_k * r/(1-r) with r = xhi/(n+k) < 1
inline raw_bracket exp_bracket_raw(long n, const rational& xlo, const rational& xhi, int terms) {
    const integer pl = numerator(xlo), ql = denominator(xlo);
    const integer ph = numerator(xhi), qh = denominator(xhi);
    integer sl = 1, tl = 1, dl = 1; // lo running sum: sl/dl, term tl/dl
    integer sh = 1, th = 1, dh = 1;
    for (int i = 1; i <= terms; ++i) {
        integer bl = ql * (n + i - 1), bh = qh * (n + i - 1);
        tl *= pl;
        sl = sl * bl + tl;
        dl *= bl;
        th *= ph;
        sh = sh * bh + th;
        dh *= bh;
    }
    // tail: th/dh * r/(1-r) with r = ph/(qh (n+terms))
    integer rden = qh * (n + terms) - ph; // > 0 on the accepted domain
    return {sl, dl, sh * rden + th * ph, dh * rden};
}

inline rat_interval exp_bracket(long n, const rational& xlo, const rational& xhi, int terms) {
    return exp_bracket_raw(n, xlo, xhi, terms).to_interval();
}

inline void exp_guard(const cl_stream& w) {
    auto d = w.at(0);
    if (d && (*d == digit::one || *d == digit::neg))
        throw domain_error("exp series: argument outside [0, 109/100]");
}

// ---- arcsin: a_n = 1 + ((2n-1)^2 / (2n(2n+1))) * w * a_{n+1},  0 <= w < 1 ----
// No fixed prefix: bracket a_n between partial sums (geometric tail bound) and
// use the longest common digit prefix of the bracket's endpoints.

inline bihom asin_matrix(long n) {
    integer odd = 2 * integer(n) - 1;
    integer k = 2 * integer(n) * (2 * integer(n) + 1);
    return {odd * odd, 0, 0, k, 0, 0, 0, k};
}

// S_k(wlo) <= a_n(w) <= S_{k-1}(whi) + c_k whi^k / (1 - whi); both sides are
// monotone in w, so interval endpoints give sound bounds under partial
// knowledge of w
inline raw_bracket asin_bracket_raw(long n, const rational& wlo, const rational& whi, int terms) {
    const integer pl = numerator(wlo), ql = denominator(wlo);
    const integer ph = numerator(whi), qh = denominator(whi);
    integer sl = 1, tl = 1, dl = 1;
    integer sh = 1, th = 1, dh = 1;
    for (int i = 1; i <= terms; ++i) {
        integer m = n + i - 1;
        integer cnum = (2 * m - 1) * (2 * m - 1);
        integer cden = 2 * m * (2 * m + 1);
        tl *= cnum * pl;
        sl = sl * (cden * ql) + tl;
        dl *= cden * ql;
        th *= cnum * ph;
        sh = sh * (cden * qh) + th;
        dh *= cden * qh;
    }
    // geometric tail th/dh * whi/(1-whi)
    integer rden = qh - ph; // > 0 for whi < 1
    return {sl, dl, sh * rden + th * ph, dh * rden};
}

inline rat_interval asin_bracket(long n, const rational& wlo, const rational& whi, int terms) {
    return asin_bracket_raw(n, wlo, whi, terms).to_interval();
}

inline std::vector<digit> asin_prefix(long n, const cl_stream& w) {
    constexpr int max_rounds = 16;
    for (int round = 0; round < max_rounds; ++round) {
        std::size_t pulls = 64u * static_cast<std::size_t>(round + 1);
        rat_interval wi = prefix_bound(w, pulls);
        if (!wi.hi.finite() || wi.hi.value() >= 1) {
            if (wi.lo.finite() && wi.lo.value() >= 1)
                throw domain_error("asin series: argument at or beyond 1");
            continue; // upper bound not yet below 1
        }
        rational wlo = wi.lo.finite() && wi.lo.value() > 0 ? wi.lo.value() : rational(0);
        rational whi = wi.hi.value();
        rat_interval br = asin_bracket(n, wlo, whi, round + 1);
        if (br.hi >= ext_rational(rational(2))) continue; // too loose: more terms next round
        auto p = common_digit_prefix(br.lo.value(), br.hi.value());
        if (!p.empty()) return p;
    }
    throw stall_error(rat_interval(ext_rational(rational(1)), ext_rational::pos_inf()), 0);
}

// ---- cos: c_n = 1 - w*c_{n+1}/(2n(2n-1)),  0 <= w < 5/2 ----
// For n >= 2, 1 < 1/c_n <= 1 + 5/(8n^2-4n-5) < 2: the tail starts with a
// reciprocal, a zero, and floor(log2((8n^2-4n-5)/5)) ones.

inline bihom cos_matrix(long n) {
    integer k = 2 * integer(n) * (2 * integer(n) - 1);
    return {-1, 0, 0, k, 0, 0, 0, k};
}

inline std::vector<digit> cos_prefix(long n, const cl_stream&) {
    if (n < 2) return {};
    integer nn = n;
    std::vector<digit> v{digit::recip};
    long ones_count = floor_log2(rational(8 * nn * nn - 4 * nn - 5, 5));
    auto rest = zero_then_ones(ones_count);
    v.insert(v.end(), rest.begin(), rest.end());
    return v;
}

// alternating series: consecutive partial sums bracket c_n; subtracted terms
// take the w endpoint that makes the respective bound safe, and one extra
// alternating step past each side closes the bracket
inline raw_bracket cos_bracket_raw(long n, const rational& wlo, const rational& whi, int terms) {
    const integer pl = numerator(wlo), ql = denominator(wlo);
    const integer ph = numerator(whi), qh = denominator(whi);
    integer sl = 1, tl = 1, dl = 1;
    integer sh = 1, th = 1, dh = 1;
    for (int i = 1; i <= terms; ++i) {
        integer m = n + i - 1;
        integer den = 2 * m * (2 * m - 1);
        bool sub = i % 2 == 1;
        // subtracted terms take the larger w in the lower sum and vice versa
        const integer& lp = sub ? ph : pl;
        const integer& lq = sub ? qh : ql;
        const integer& hp = sub ? pl : ph;
        const integer& hq = sub ? ql : qh;
        tl *= lp;
        sl = sl * (den * lq) + (sub ? -tl : tl);
        dl *= den * lq;
        th *= hp;
        sh = sh * (den * hq) + (sub ? -th : th);
        dh *= den * hq;
    }
    integer m = n + terms;
    integer den = 2 * m * (2 * m - 1);
    integer lo_n, lo_d, hi_n, hi_d;
    if (terms % 2 == 1) { // last term subtracted: add one positive step above
        lo_n = sl;
        lo_d = dl;
        hi_n = sh * (den * qh) + th * ph;
        hi_d = dh * den * qh;
    } else { // last term added: subtract one step below
        lo_n = sl * (den * qh) - tl * ph;
        lo_d = dl * den * qh;
        hi_n = sh;
        hi_d = dh;
    }
    if (lo_n * hi_d > hi_n * lo_d) {
        std::swap(lo_n, hi_n);
        std::swap(lo_d, hi_d);
    }
    return {lo_n, lo_d, hi_n, hi_d};
}

inline rat_interval cos_bracket(long n, const rational& wlo, const rational& whi, int terms) {
    return cos_bracket_raw(n, wlo, whi, terms).to_interval();
}

// ---- log: g_n = 1 + ((2n-1)/(2n+1)) * w * g_{n+1},  0 < w <= 1/9 ----
// w/(1-w) <= 1/8 gives 1/(g_n - 1) >= 8(2n+1)/(2n-1): a zero then
// floor(log2(8(2n+1)/(2n-1))) ones.

inline bihom log_matrix(long n) {
    integer lo = 2 * integer(n) - 1, hi = 2 * integer(n) + 1;
    return {lo, 0, 0, hi, 0, 0, 0, hi};
}

inline std::vector<digit> log_prefix(long n, const cl_stream&) {
    integer nn = n;
    return zero_then_ones(floor_log2(rational(8 * (2 * nn + 1), 2 * nn - 1)));
}

// partial sums of g_n = 1 + sum_i ((2n-1)/(2n+2i-1)) w^i with a geometric
// tail bound; monotone in w
inline raw_bracket log_bracket_raw(long n, const rational& wlo, const rational& whi, int terms) {
    const integer pl = numerator(wlo), ql = denominator(wlo);
    const integer ph = numerator(whi), qh = denominator(whi);
    // t_i = ((2n-1)/(2n+2i-1)) w^i: ratio t_i/t_{i-1} = w (2n+2i-3)/(2n+2i-1)
    integer sl = 1, tl = 1, dl = 1;
    integer sh = 1, th = 1, dh = 1;
    for (int i = 1; i <= terms; ++i) {
        integer anum = i == 1 ? integer(2 * integer(n) - 1) : integer(2 * integer(n + i) - 3);
        integer aden = 2 * integer(n + i) - 1;
        tl *= anum * pl;
        sl = sl * (aden * ql) + tl;
        dl *= aden * ql;
        th *= anum * ph;
        sh = sh * (aden * qh) + th;
        dh *= aden * qh;
    }
    integer rden = qh - ph;
    return {sl, dl, sh * rden + th * ph, dh * rden};
}

inline rat_interval log_bracket(long n, const rational& wlo, const rational& whi, int terms) {
    return log_bracket_raw(n, wlo, whi, terms).to_interval();
}

inline void log_guard(const cl_stream& w) {
    auto d = w.at(0);
    if (!d || *d != digit::recip)
        throw domain_error("log series: argument outside (0, 1/9]");
}

// Certified enclosure of the n-th tail's value: the family bracket sharpened
// until it stops paying or reaches ~2^-40.
inline rat_interval family_tail_bounds(const series_family& fam, long n, const cl_stream& w,
                                       rat_interval coarse) {
    rat_interval wi = prefix_bound(w, 64);
    if (!wi.hi.finite() || wi.hi.value() >= fam.domain_sup) return coarse;
    rational wlo = wi.lo.finite() && wi.lo.value() > 0 ? wi.lo.value() : rational(0);
    rational whi = wi.hi.value();
    rat_interval best = fam.bracket(n, wlo, whi, 2);
    for (int terms = 4; terms <= 32; terms *= 2) {
        if (best.width() < ext_rational(rational(1, integer(1) << 40))) break;
        best = fam.bracket(n, wlo, whi, terms);
    }
    if (auto tighter = intersect(best, coarse)) return *tighter;
    return coarse;
}

inline rat_interval coarse_tail_bounds(const series_family& fam, long n) {
    const ext_rational one{rational(1)};
    if (fam.matrix == cos_matrix) {
        if (n < 2) return {ext_rational(rational(-1)), one, true, false};
        integer k = 4 * integer(n) * (2 * integer(n) - 1);
        return {ext_rational(rational(k - 5, k)), one, true, false};
    }
    if (fam.matrix == exp_matrix)
        return {one, ext_rational(rational(n + 2, n)), false, true};
    if (fam.matrix == log_matrix) {
        integer lo = 2 * integer(n) - 1, hi = 2 * integer(n) + 1;
        return {one, ext_rational(rational(8 * hi + lo, 8 * hi)), true, false};
    }
    return {one, ext_rational::pos_inf()}; // asin: unbounded until w is known
}

// One node of the nested evaluation. Digits come from three places, in order:
// the certified prefix, prefix extensions from ever-sharper brackets (as long
// as the argument's own precision supports them), and finally the Gosper
// engine over (w, next tail), created on demand.
class series_source final : public digit_source {
public:
    series_source(const series_family* fam, long n, cl_stream w, std::uint64_t fuel)
        : fam_(fam), n_(n), w_(std::move(w)), fuel_(fuel) {}

    std::optional<digit> next() override {
        if (!planned_) {
            if (!extend_prefix()) prefix_ = fam_->prefix(n_, w_); // may pull w; retries cleanly
            planned_ = true;
        }
        if (pos_ < prefix_.size()) return prefix_[pos_++];
        if (!engine_ && extend_prefix() && pos_ < prefix_.size()) return prefix_[pos_++];
        if (!engine_) {
            bihom m = fam_->matrix(n_);
            for (digit d : prefix_) m = produce(m, d);
            cl_stream child(std::make_unique<series_source>(fam_, n_ + 1, w_, fuel_));
            rat_interval env =
                family_tail_bounds(*fam_, n_ + 1, w_, coarse_tail_bounds(*fam_, n_ + 1));
            engine_ = std::make_unique<bihom_source>(std::move(m), w_, std::move(child),
                                                     consume_policy::widest_first, fuel_,
                                                     std::nullopt, env);
        }
        return engine_->next();
    }

private:
    // Grow the certified prefix from a sharper bracket. Returns false once the
    // argument's known precision cannot certify any further digits.
    bool extend_prefix() {
        // geometric growth keeps the number of re-bracketings logarithmic in
        // the digits served
        const std::size_t target = std::max(prefix_.size() + 48, prefix_.size() * 3 / 2);
        rat_interval wi = prefix_bound(w_, 2 * target + 64);
        if (!wi.hi.finite() || wi.hi.value() >= fam_->domain_sup) return false;
        rational wlo = wi.lo.finite() && wi.lo.value() > 0 ? wi.lo.value() : rational(0);
        rational whi = wi.hi.value();
        const unsigned goal_bits = static_cast<unsigned>(target) + 8;
        int terms = std::max(8, last_terms_);
        raw_bracket br = fam_->bracket_raw(n_, wlo, whi, terms);
        const long cap = 8 * static_cast<long>(target) + 64;
        while (!br.narrower_than(goal_bits) && terms < cap) {
            raw_bracket finer = fam_->bracket_raw(n_, wlo, whi, terms * 2);
            bool improving = br.wider_than(finer);
            br = std::move(finer);
            terms *= 2;
            if (!improving) break; // limited by the argument, not the sum depth
        }
        auto p = common_digit_prefix_raw(br.lo_num, br.lo_den, br.hi_num, br.hi_den);
        if (p.size() <= prefix_.size()) return false;
        prefix_ = std::move(p);
        last_terms_ = terms;
        return true;
    }

    const series_family* fam_;
    long n_;
    cl_stream w_;
    std::uint64_t fuel_;
    bool planned_ = false;
    std::vector<digit> prefix_;
    std::size_t pos_ = 0;
    int last_terms_ = 0;
    std::unique_ptr<bihom_source> engine_;
};

} // namespace detail

inline const series_family& exp_family() {
    static const series_family f{"exp",           detail::exp_matrix,      detail::exp_prefix,
                                 detail::exp_bracket, detail::exp_bracket_raw, rational(11, 10),
                                 detail::exp_guard};
    return f;
}
inline const series_family& asin_family() {
    static const series_family f{"asin",           detail::asin_matrix,      detail::asin_prefix,
                                 detail::asin_bracket, detail::asin_bracket_raw, rational(1),
                                 nullptr};
    return f;
}
inline const series_family& cos_family() {
    static const series_family f{"cos",           detail::cos_matrix,      detail::cos_prefix,
                                 detail::cos_bracket, detail::cos_bracket_raw, rational(5, 2),
                                 nullptr};
    return f;
}
inline const series_family& log_family() {
    static const series_family f{"log",           detail::log_matrix,      detail::log_prefix,
                                 detail::log_bracket, detail::log_bracket_raw, rational(1),
                                 detail::log_guard};
    return f;
}

// Digit stream of the n-th tail; n = 1 is the function value itself.
inline cl_stream eval_series_tail(const series_family& fam, long n, cl_stream w,
                                  std::uint64_t fuel = default_fuel) {
    return cl_stream(std::make_unique<detail::series_source>(&fam, n, std::move(w), fuel));
}

inline cl_stream eval_series(const series_family& fam, cl_stream w,
                             std::uint64_t fuel = default_fuel) {
    if (fam.guard) fam.guard(w);
    return eval_series_tail(fam, 1, std::move(w), fuel);
}

} // namespace contlog
