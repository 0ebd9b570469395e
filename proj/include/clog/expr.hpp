// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <clog/engine.hpp>
#include <clog/functions.hpp>
#include <clog/number.hpp>
#include <clog/stream.hpp>

#include <cctype>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <utility>

namespace contlog {

struct parse_error : error {
    std::size_t offset;
    parse_error(const std::string& what, std::size_t off)
        : error("syntax error at offset " + std::to_string(off) + ": " + what), offset(off) {}
};

// Expression tree: exact rational literals, the constants pi/e/phi, unary
// minus, left-associative + - * / and the function applications the kernel
// supports.
struct expr;
using expr_ptr = std::shared_ptr<const expr>;

struct expr {
    enum class kind { literal, constant, negate, binary, call };
    kind k;
    rational lit;      // literal
    std::string name;  // constant / call
    char op = 0;       // binary
    expr_ptr lhs, rhs; // negate/call use lhs only
};

namespace detail {

inline bool known_function(std::string_view n) {
    return n == "exp" || n == "log" || n == "sin" || n == "cos" || n == "tan" || n == "asin";
}
inline bool known_constant(std::string_view n) { return n == "pi" || n == "e" || n == "phi"; }

class parser {
public:
    explicit parser(std::string_view src) : src_(src) {}

    expr_ptr run() {
        auto e = parse_sum();
        skip_ws();
        if (pos_ != src_.size()) throw parse_error("unexpected trailing input", pos_);
        return e;
    }

private:
    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }
    bool at_end() {
        skip_ws();
        return pos_ >= src_.size();
    }
    char peek() {
        skip_ws();
        return pos_ < src_.size() ? src_[pos_] : '\0';
    }

    expr_ptr parse_sum() {
        auto lhs = parse_product();
        while (true) {
            char c = peek();
            if (c != '+' && c != '-') return lhs;
            ++pos_;
            auto rhs = parse_product();
            auto node = std::make_shared<expr>();
            node->k = expr::kind::binary;
            node->op = c;
            node->lhs = std::move(lhs);
            node->rhs = std::move(rhs);
            lhs = std::move(node);
        }
    }

    expr_ptr parse_product() {
        auto lhs = parse_unary();
        while (true) {
            char c = peek();
            if (c != '*' && c != '/') return lhs;
            ++pos_;
            auto rhs = parse_unary();
            auto node = std::make_shared<expr>();
            node->k = expr::kind::binary;
            node->op = c;
            node->lhs = std::move(lhs);
            node->rhs = std::move(rhs);
            lhs = std::move(node);
        }
    }

    expr_ptr parse_unary() {
        if (peek() == '-') {
            ++pos_;
            auto inner = parse_unary();
            if (inner->k == expr::kind::literal) { // fold -literal
                auto node = std::make_shared<expr>();
                node->k = expr::kind::literal;
                node->lit = -inner->lit;
                return node;
            }
            auto node = std::make_shared<expr>();
            node->k = expr::kind::negate;
            node->lhs = std::move(inner);
            return node;
        }
        return parse_primary();
    }

    expr_ptr parse_primary() {
        if (at_end()) throw parse_error("expected an operand", pos_);
        char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            auto e = parse_sum();
            if (peek() != ')') throw parse_error("expected ')'", pos_);
            ++pos_;
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_name();
        throw parse_error(std::string("unexpected character '") + c + "'", pos_);
    }

    // integer or decimal literal, converted exactly (no floating point)
    expr_ptr parse_number() {
        std::size_t start = pos_;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        integer ip(std::string(src_.substr(start, pos_ - start)));
        rational v(ip);
        if (pos_ < src_.size() && src_[pos_] == '.') {
            ++pos_;
            std::size_t fstart = pos_;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
            if (pos_ == fstart) throw parse_error("expected digits after '.'", pos_);
            integer fp(std::string(src_.substr(fstart, pos_ - fstart)));
            integer den = 1;
            for (std::size_t i = fstart; i < pos_; ++i) den *= 10;
            v += rational(fp, den);
        }
        auto node = std::make_shared<expr>();
        node->k = expr::kind::literal;
        node->lit = std::move(v);
        return node;
    }

    expr_ptr parse_name() {
        std::size_t start = pos_;
        while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
                                      src_[pos_] == '_'))
            ++pos_;
        std::string name(src_.substr(start, pos_ - start));
        if (peek() == '(') {
            if (!known_function(name)) throw parse_error("unknown function '" + name + "'", start);
            ++pos_;
            auto arg = parse_sum();
            if (peek() != ')') throw parse_error("expected ')'", pos_);
            ++pos_;
            auto node = std::make_shared<expr>();
            node->k = expr::kind::call;
            node->name = std::move(name);
            node->lhs = std::move(arg);
            return node;
        }
        if (!known_constant(name)) throw parse_error("unknown name '" + name + "'", start);
        auto node = std::make_shared<expr>();
        node->k = expr::kind::constant;
        node->name = std::move(name);
        return node;
    }

    std::string_view src_;
    std::size_t pos_ = 0;
};

} // namespace detail

inline expr_ptr parse(std::string_view src) { return detail::parser(src).run(); }

namespace detail {

inline cl_stream apply_function(const std::string& name, cl_stream arg, std::uint64_t fuel) {
    if (name == "exp") return exp_cl(std::move(arg), fuel);
    if (name == "log") return log_cl(std::move(arg), fuel);
    if (name == "sin") return sin_cl(std::move(arg), fuel);
    if (name == "cos") return cos_cl(std::move(arg), fuel);
    if (name == "tan") return tan_cl(std::move(arg), fuel);
    if (name == "asin") return asin_cl(std::move(arg), fuel);
    throw domain_error("unknown function " + name);
}

// Streams for function-of-exact-rational applications are memoized process
// wide, so `e` and `exp(1)` share one stream object (and one digit cache).
inline cl_stream cached_call(const std::string& name, const rational& arg, std::uint64_t fuel) {
    static std::map<std::pair<std::string, rational>, cl_stream> cache;
    static std::mutex mu;
    std::scoped_lock lock(mu);
    auto key = std::make_pair(name, arg);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    cl_stream s = apply_function(name, rational_stream(arg), fuel);
    cache.emplace(std::move(key), s);
    return s;
}

} // namespace detail

// Evaluate an expression tree to a digit stream. Constants and
// function-of-literal applications resolve to shared memoized streams.
inline cl_stream evaluate(const expr_ptr& e, std::uint64_t fuel = default_fuel) {
    switch (e->k) {
    case expr::kind::literal: return rational_stream(e->lit);
    case expr::kind::constant:
        if (e->name == "pi") return pi_cl();
        if (e->name == "e") return detail::cached_call("exp", rational(1), fuel);
        return phi_cl();
    case expr::kind::negate: return negate(evaluate(e->lhs, fuel));
    case expr::kind::call:
        if (e->lhs->k == expr::kind::literal)
            return detail::cached_call(e->name, e->lhs->lit, fuel);
        return detail::apply_function(e->name, evaluate(e->lhs, fuel), fuel);
    case expr::kind::binary: {
        cl_stream l = evaluate(e->lhs, fuel);
        cl_stream r = evaluate(e->rhs, fuel);
        switch (e->op) {
        case '+': return add(std::move(l), std::move(r), fuel);
        case '-': return sub(std::move(l), std::move(r), fuel);
        case '*': return mul(std::move(l), std::move(r), fuel);
        case '/': return div(std::move(l), std::move(r), fuel);
        }
        throw domain_error("unknown operator");
    }
    }
    throw domain_error("malformed expression tree");
}

inline cl_stream evaluate(std::string_view src, std::uint64_t fuel = default_fuel) {
    return evaluate(parse(src), fuel);
}

} // namespace contlog
