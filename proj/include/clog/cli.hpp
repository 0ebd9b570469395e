// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <clog/bounds.hpp>
#include <clog/compact.hpp>
#include <clog/expr.hpp>

#include <cstdint>
#include <cstdlib>
#include <string>
#include <string_view>

namespace contlog::cli {

// Exit-code contract: 0 success, 2 parse error, 3 stall, 4 domain error.
inline constexpr int exit_ok = 0;
inline constexpr int exit_internal = 1;
inline constexpr int exit_parse = 2;
inline constexpr int exit_stall = 3;
inline constexpr int exit_domain = 4;

struct command_result {
    int code = exit_ok;
    std::string out; // stdout payload, newline-terminated when nonempty
    std::string err; // stderr payload
};

inline constexpr unsigned default_digits = 12;
inline constexpr std::size_t default_count = 15;

inline std::uint64_t fuel_from_env() {
    if (const char* v = std::getenv("CLOG_FUEL")) {
        char* end = nullptr;
        unsigned long long n = std::strtoull(v, &end, 10);
        if (end && *end == '\0' && n > 0) return n;
    }
    return default_fuel;
}

namespace detail_cli {

// "<value> (exact)" / "<value> (±<1e-E)" / "<value> (unbounded)"
inline std::string describe(const decimal_result& r, unsigned digits) {
    if (r.exact) return r.text + " (exact)";
    if (!r.interval.bounded()) return r.text + " (unbounded)";
    rational w = r.interval.width().value();
    if (w == 0) return r.text + " (exact)";
    long e = contlog::detail::decimal_exponent_bound(w);
    if (w <= rational(1, contlog::detail::pow10(digits)) && e < static_cast<long>(digits))
        e = digits; // width certified below the requested precision
    return r.text + " (±<1e-" + std::to_string(e) + ")";
}

inline std::string describe_interval(const rat_interval& iv, unsigned digits) {
    decimal_result r;
    r.interval = iv;
    r.exact = iv.is_point();
    if (iv.is_point() && !iv.lo.finite())
        r.text = iv.lo.is_pos_inf() ? "inf" : "-inf";
    else if (!iv.bounded())
        r.text = "?";
    else
        r.text = contlog::detail::truncate_decimal(iv.midpoint(), digits);
    return describe(r, digits);
}

template <class Fn> command_result guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const parse_error& e) {
        return {exit_parse, "", std::string(e.what()) + "\n"};
    } catch (const stall_error& e) {
        return {exit_stall,
                "",
                "stall after " + std::to_string(e.consumed) + " consumptions; value " +
                    describe_interval(e.residual, default_digits) + "\n"};
    } catch (const domain_error& e) {
        return {exit_domain, "", std::string("domain error: ") + e.what() + "\n"};
    } catch (const representation_error& e) {
        return {exit_domain, "", std::string("representation error: ") + e.what() + "\n"};
    } catch (const degenerate_error& e) {
        return {exit_domain, "", std::string("degenerate expression: ") + e.what() + "\n"};
    } catch (const std::exception& e) {
        return {exit_internal, "", std::string("error: ") + e.what() + "\n"};
    }
}

} // namespace detail_cli

// clog eval EXPR --digits N --fuel F
inline command_result cmd_eval(std::string_view text, unsigned digits, std::uint64_t fuel) {
    return detail_cli::guarded([&]() -> command_result {
        cl_stream s = evaluate(text, fuel);
        decimal_result r = to_decimal(s, digits, fuel);
        return {exit_ok, detail_cli::describe(r, digits) + "\n", ""};
    });
}

// clog terms EXPR --count N --form compact|binary --fuel F
inline command_result cmd_terms(std::string_view text, std::size_t count, bool binary_form,
                                std::uint64_t fuel) {
    return detail_cli::guarded([&]() -> command_result {
        cl_stream s = evaluate(text, fuel);
        hom H{1, 0, 0, 1};
        std::string out;
        if (binary_form) {
            std::size_t i = 0;
            try {
                for (; i < count; ++i) {
                    auto d = s.at(i);
                    if (!d) break;
                    out.push_back(to_char(*d));
                    if (*d == digit::end) break;
                    H = contlog::detail::compose(H, contlog::detail::inverse_map(*d));
                }
            } catch (const stall_error& e) {
                rat_interval iv = contlog::detail::apply_hom(H, e.residual);
                return {exit_stall, "",
                        "stall after " + std::to_string(e.consumed) + " consumptions; value " +
                            detail_cli::describe_interval(iv, default_digits) + "\n"};
            }
            return {exit_ok, out + "\n", ""};
        }
        compact_cl terms;
        integer run = 0;
        std::size_t i = 0;
        try {
            while (terms.size() < count) {
                auto d = s.at(i);
                if (!d) break;
                ++i;
                switch (*d) {
                case digit::neg: terms.push_back(-2); break;
                case digit::recip: terms.push_back(-1); break;
                case digit::one: ++run; break;
                case digit::zero:
                case digit::end:
                    terms.push_back(run);
                    run = 0;
                    break;
                }
                if (*d == digit::end) break;
                H = contlog::detail::compose(H, contlog::detail::inverse_map(*d));
            }
        } catch (const stall_error& e) {
            rat_interval iv = contlog::detail::apply_hom(H, e.residual);
            return {exit_stall, "",
                    "stall after " + std::to_string(e.consumed) + " consumptions; value " +
                        detail_cli::describe_interval(iv, default_digits) + "\n"};
        }
        return {exit_ok, format_compact(terms) + "\n", ""};
    });
}

namespace detail_cli {

enum class value_form { rational_text, compact_text, binary_text };

inline value_form detect_form(std::string_view text) {
    std::size_t i = 0;
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i < text.size() && text[i] == '[') return value_form::compact_text;
    bool numeric = true, digitform = !text.empty();
    for (char c : text.substr(i)) {
        if (!(std::isdigit(static_cast<unsigned char>(c)) || c == '/' || c == '-' || c == '+' ||
              c == '.'))
            numeric = false;
        if (c != '0' && c != '1' && c != 'r' && c != 'n' && c != '$') digitform = false;
    }
    if (numeric) return value_form::rational_text;
    if (digitform) return value_form::binary_text;
    return value_form::rational_text; // let the rational parser report the error
}

inline rational parse_rational_text(std::string_view text) {
    // integer, p/q, or decimal literal; exact
    auto e = parse(text);
    if (e->k == expr::kind::literal) return e->lit;
    if (e->k == expr::kind::binary && e->op == '/' && e->lhs->k == expr::kind::literal &&
        e->rhs->k == expr::kind::literal) {
        if (e->rhs->lit == 0) throw domain_error("rational text: zero denominator");
        return e->lhs->lit / e->rhs->lit;
    }
    throw representation_error("not a rational literal");
}

inline std::string format_rational(const rational& v) {
    std::string s = numerator(v).str();
    if (denominator(v) != 1) s += "/" + denominator(v).str();
    return s;
}

} // namespace detail_cli

// clog convert VALUE --to rational|compact|binary
inline command_result cmd_convert(std::string_view text, std::string_view to) {
    using detail_cli::value_form;
    return detail_cli::guarded([&]() -> command_result {
        compact_cl c;
        switch (detail_cli::detect_form(text)) {
        case value_form::compact_text: c = parse_compact(text); break;
        case value_form::binary_text: {
            auto digits = parse_digits(text);
            c = digits_to_compact(fixed_stream(std::move(digits)));
            break;
        }
        case value_form::rational_text:
            c = encode_rational(detail_cli::parse_rational_text(text));
            break;
        }
        std::string out;
        if (to == "rational") {
            out = detail_cli::format_rational(decode_rational(c));
        } else if (to == "compact") {
            out = format_compact(c);
        } else if (to == "binary") {
            out = to_string(take(compact_to_digits(c), static_cast<std::size_t>(-1)));
        } else {
            throw representation_error("unknown target form '" + std::string(to) + "'");
        }
        return {exit_ok, out + "\n", ""};
    });
}

// clog compare EXPR EXPR --fuel F
inline command_result cmd_compare(std::string_view a, std::string_view b, std::uint64_t fuel) {
    return detail_cli::guarded([&]() -> command_result {
        cl_stream sa = evaluate(a, fuel);
        cl_stream sb = evaluate(b, fuel);
        if (sa.same_object(sb)) return {exit_ok, "=\n", ""}; // one memoized stream, one value
        compare_result r = compare(sa, sb, fuel);
        switch (r.o) {
        case compare_result::ordering::less: return {exit_ok, "<\n", ""};
        case compare_result::ordering::greater: return {exit_ok, ">\n", ""};
        case compare_result::ordering::equal: return {exit_ok, "=\n", ""};
        case compare_result::ordering::stall: break;
        }
        return {exit_stall, "",
                "stall: left " + detail_cli::describe_interval(r.a, default_digits) + ", right " +
                    detail_cli::describe_interval(r.b, default_digits) + "\n"};
    });
}

} // namespace contlog::cli
