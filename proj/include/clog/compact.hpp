// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <clog/number.hpp>
#include <clog/stream.hpp>

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace contlog {

// Integer-term continued-logarithm form [a0, a1, ...]: term k >= 0 stands for
// k `one` digits closed by a `zero` (or by `end` if it is the last term);
// a0 = -1 is the reciprocal marker, a0 = -2 (optionally followed by -1) the
// sign marker. The empty sequence is +infinity.
using compact_cl = std::vector<integer>;

namespace detail {

// The dynamical system behind the digit expansion of an exact rational, on a
// raw numerator/denominator pair (no per-step normalization: the maps are
// subtractive, so the entries never grow beyond the input size plus the run
// lengths).
class digit_walker {
public:
    digit_walker(integer p, integer q) : p_(std::move(p)), q_(std::move(q)) {}

    std::optional<digit> next() {
        if (done_) return std::nullopt;
        if (p_ == 0) { // value 0: reciprocal of infinity
            done_ = true;
            return digit::recip;
        }
        if (p_ < 0) {
            p_ = -p_;
            return digit::neg;
        }
        if (p_ == q_) {
            done_ = true;
            return digit::end;
        }
        if (p_ < q_) {
            p_.swap(q_);
            return digit::recip;
        }
        if (p_ >= 2 * q_) {
            q_ <<= 1;
            return digit::one;
        }
        integer r = p_ - q_;
        p_.swap(q_);
        q_ = std::move(r);
        return digit::zero;
    }

private:
    integer p_, q_;
    bool done_ = false;
};

class rational_source final : public digit_source {
public:
    explicit rational_source(const rational& v) : walk_(numerator(v), denominator(v)) {}

    // +infinity / -infinity constants
    static std::unique_ptr<digit_source> infinite(int sign) {
        struct inf_source final : digit_source {
            bool negative, emitted = false;
            explicit inf_source(bool neg) : negative(neg) {}
            std::optional<digit> next() override {
                if (negative && !emitted) {
                    emitted = true;
                    return digit::neg;
                }
                return std::nullopt;
            }
        };
        return std::make_unique<inf_source>(sign < 0);
    }

    std::optional<digit> next() override { return walk_.next(); }

private:
    digit_walker walk_;
};

class compact_source final : public digit_source {
public:
    explicit compact_source(compact_cl terms) : terms_(std::move(terms)) {}

    std::optional<digit> next() override {
        while (idx_ < terms_.size()) {
            const integer& t = terms_[idx_];
            if (t == -2) {
                ++idx_;
                return digit::neg;
            }
            if (t == -1) {
                ++idx_;
                return digit::recip;
            }
            if (ones_ < t) {
                ++ones_;
                return digit::one;
            }
            ones_ = 0;
            ++idx_;
            return idx_ == terms_.size() ? digit::end : digit::zero;
        }
        return std::nullopt;
    }

private:
    compact_cl terms_;
    std::size_t idx_ = 0;
    integer ones_ = 0;
};

} // namespace detail

inline cl_stream rational_stream(rational v) {
    return cl_stream(std::make_unique<detail::rational_source>(std::move(v)));
}
inline cl_stream rational_stream(long p, long q = 1) { return rational_stream(rational(p, q)); }
inline cl_stream infinity_stream(int sign = 1) {
    return cl_stream(detail::rational_source::infinite(sign));
}

// Exact finite compact form of p/q (q > 0 not required; reduced internally).
inline compact_cl encode_rational(const rational& v) {
    compact_cl out;
    detail::rational_source src(v);
    integer run = 0;
    bool counting = false;
    while (auto d = src.next()) {
        switch (*d) {
        case digit::neg: out.push_back(-2); break;
        case digit::recip: out.push_back(-1); break;
        case digit::one:
            ++run;
            counting = true;
            break;
        case digit::zero:
        case digit::end:
            out.push_back(run);
            run = 0;
            counting = false;
            break;
        }
    }
    (void)counting; // a dangling run cannot happen for exact rationals
    return out;
}

inline compact_cl encode_rational(const integer& p, const integer& q) {
    if (q <= 0) throw domain_error("encode_rational: denominator must be positive");
    return encode_rational(rational(p, q));
}

// Structural validity of a finite compact form (the digit-grammar image).
inline void validate_compact(const compact_cl& c) {
    for (std::size_t i = 0; i < c.size(); ++i) {
        const integer& t = c[i];
        if (t == -2) {
            if (i != 0) throw representation_error("compact: -2 only allowed as first term");
        } else if (t == -1) {
            if (!(i == 0 || (i == 1 && c[0] == -2)))
                throw representation_error("compact: -1 only allowed as first term or after -2");
        } else if (t < 0) {
            throw representation_error("compact: negative term");
        } else if (t == 0 && i + 1 == c.size() && i > 0 && c[i - 1] >= 0) {
            // a final 0 after a closed run would put `end` right after a `zero`
            throw representation_error("compact: final zero term is not expressible");
        }
    }
}

// Exact rational value of a finite compact form.
inline rational decode_rational(const compact_cl& c) {
    validate_compact(c);
    if (c.empty()) throw representation_error("decode_rational: empty form denotes infinity");
    // fold from the right: value = 2^t * (1 + 1/y), empty tail y = infinity
    bool tail_infinite = true;
    rational y;
    for (std::size_t k = c.size(); k-- > 0;) {
        const integer& t = c[k];
        rational v;
        if (t == -2) {
            if (tail_infinite) throw representation_error("decode_rational: lone sign marker");
            v = -y;
        } else if (t == -1) {
            v = tail_infinite ? rational(0) : 1 / y;
            tail_infinite = false;
        } else {
            rational base = tail_infinite ? rational(1) : 1 + 1 / y;
            integer num = 1;
            num <<= static_cast<unsigned>(t);
            v = base * num;
            tail_infinite = false;
        }
        if (!tail_infinite && v == 0 && t >= 0)
            throw representation_error("decode_rational: zero tail");
        y = v;
    }
    return y;
}

// Run-length expansion, lazily.
inline cl_stream compact_to_digits(compact_cl c) {
    validate_compact(c);
    return cl_stream(std::make_unique<detail::compact_source>(std::move(c)));
}

// Lazy inverse of compact_to_digits: one term per closed run of ones.
class compact_reader {
public:
    explicit compact_reader(cl_stream s) : cur_(std::move(s)) {}

    // Next compact term; nullopt when the stream is over. A run of ones left
    // open by exhaustion (non-canonical spelling of infinity) yields no term.
    std::optional<integer> next_term() {
        while (true) {
            auto d = cur_.next();
            if (!d) return std::nullopt;
            switch (*d) {
            case digit::neg: return integer(-2);
            case digit::recip: return integer(-1);
            case digit::one: ++run_; break;
            case digit::zero:
            case digit::end: {
                integer t = run_;
                run_ = 0;
                return t;
            }
            }
        }
    }

private:
    cursor cur_;
    integer run_ = 0;
};

// First `n` compact terms of a stream (fewer if it is over before that).
inline compact_cl compact_terms(const cl_stream& s, std::size_t n) {
    compact_cl out;
    compact_reader r(s);
    while (out.size() < n) {
        auto t = r.next_term();
        if (!t) break;
        out.push_back(*t);
    }
    return out;
}

inline compact_cl digits_to_compact(const cl_stream& s) {
    return compact_terms(s, static_cast<std::size_t>(-1));
}

// Longest common digit prefix of the expansions of lo and hi. Every real in
// [lo, hi] carries this prefix: digit regions are intervals and every digit
// map is monotone, so agreement of the endpoint expansions pins the digit.
inline std::vector<digit> common_digit_prefix_raw(const integer& lo_num, const integer& lo_den,
                                                  const integer& hi_num, const integer& hi_den) {
    detail::digit_walker a(lo_num, lo_den);
    detail::digit_walker b(hi_num, hi_den);
    std::vector<digit> out;
    while (true) {
        auto da = a.next(), db = b.next();
        if (!da || !db || *da != *db) break;
        out.push_back(*da);
        if (*da == digit::end) break;
    }
    return out;
}

inline std::vector<digit> common_digit_prefix(const rational& lo, const rational& hi) {
    if (hi < lo) throw domain_error("common_digit_prefix: lo > hi");
    return common_digit_prefix_raw(numerator(lo), denominator(lo), numerator(hi),
                                   denominator(hi));
}

// ---- bit-exact text formats ----

inline std::string format_compact(const compact_cl& c) {
    std::string s = "[";
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (i) s += ",";
        s += c[i].str();
    }
    return s + "]";
}

inline compact_cl parse_compact(std::string_view text) {
    std::size_t i = 0;
    auto skip_ws = [&] { while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i; };
    skip_ws();
    if (i >= text.size() || text[i] != '[') throw representation_error("compact: expected '['");
    ++i;
    compact_cl out;
    skip_ws();
    if (i < text.size() && text[i] == ']') {
        ++i;
    } else {
        while (true) {
            skip_ws();
            std::size_t start = i;
            if (i < text.size() && (text[i] == '-' || text[i] == '+')) ++i;
            while (i < text.size() && text[i] >= '0' && text[i] <= '9') ++i;
            if (i == start) throw representation_error("compact: expected integer term");
            out.emplace_back(std::string(text.substr(start, i - start)));
            skip_ws();
            if (i < text.size() && text[i] == ',') {
                ++i;
                continue;
            }
            if (i < text.size() && text[i] == ']') {
                ++i;
                break;
            }
            throw representation_error("compact: expected ',' or ']'");
        }
    }
    skip_ws();
    if (i != text.size()) throw representation_error("compact: trailing characters");
    validate_compact(out);
    return out;
}

inline std::string format_digits(std::span<const digit> ds) { return to_string(ds); }

inline std::vector<digit> parse_digits(std::string_view text) {
    std::vector<digit> out;
    out.reserve(text.size());
    for (char c : text) {
        auto d = digit_from_char(c);
        if (!d) throw representation_error(std::string("digit form: invalid character '") + c + "'");
        out.push_back(*d);
    }
    if (!valid_digits(out)) throw representation_error("digit form: grammar violation");
    return out;
}

} // namespace contlog
