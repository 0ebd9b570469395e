// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <clog/digit.hpp>
#include <clog/interval.hpp>

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace contlog {

inline constexpr std::uint64_t default_fuel = 4096;

struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Fuel ran out before the next digit was determined. Carries the exact value
// interval of the *residual* (the part of the stream after the digits already
// produced) and the number of input digits consumed by the failed pull.
struct stall_error : error {
    rat_interval residual;
    std::uint64_t consumed;
    stall_error(rat_interval r, std::uint64_t used)
        : error("stall: no digit determined within fuel"), residual(std::move(r)), consumed(used) {}
};

struct domain_error : error {
    using error::error;
};

struct representation_error : error {
    using error::error;
};

struct degenerate_error : error {
    using error::error;
};

// Producer side of a stream: yields digits until exhausted (nullopt) or an
// `end` digit. May throw stall_error; state must survive the throw so a retry
// resumes where it stopped.
class digit_source {
public:
    virtual ~digit_source() = default;
    virtual std::optional<digit> next() = 0;
};

namespace detail {

// Memoized spine of a stream. Digits are computed at most once; concurrent
// pulls serialize on the node mutex and see identical prefixes.
class stream_node {
public:
    explicit stream_node(std::unique_ptr<digit_source> src) : src_(std::move(src)) {}
    explicit stream_node(std::vector<digit> fixed) : memo_(std::move(fixed)), done_(true) {}

    std::optional<digit> at(std::size_t i) {
        std::scoped_lock lock(mu_);
        while (!done_ && memo_.size() <= i) {
            auto d = src_->next();
            if (!d) {
                finish();
                break;
            }
            memo_.push_back(*d);
            if (*d == digit::end) finish();
        }
        if (i < memo_.size()) return memo_[i];
        return std::nullopt;
    }

    std::size_t known() const {
        std::scoped_lock lock(mu_);
        return memo_.size();
    }

private:
    void finish() {
        done_ = true;
        src_.reset();
    }

    mutable std::mutex mu_;
    std::vector<digit> memo_;
    bool done_ = false;
    std::unique_ptr<digit_source> src_;
};

} // namespace detail

// An on-demand, immutable real number in continued-logarithm digit form.
// Copies share the memoized spine; a stream is a value and is safe to share
// between threads.
class cl_stream {
public:
    cl_stream() = default;
    explicit cl_stream(std::unique_ptr<digit_source> src)
        : node_(std::make_shared<detail::stream_node>(std::move(src))) {}
    explicit cl_stream(std::vector<digit> fixed)
        : node_(std::make_shared<detail::stream_node>(std::move(fixed))) {}

    // Digit at position i, pulling lazily; nullopt once the stream is over
    // (past `end`, or exhausted without one = +infinity).
    std::optional<digit> at(std::size_t i) const { return node_->at(i); }

    bool same_object(const cl_stream& other) const { return node_ == other.node_; }
    bool valid() const { return node_ != nullptr; }

private:
    std::shared_ptr<detail::stream_node> node_;
};

// Read head over a shared stream.
class cursor {
public:
    cursor() = default;
    explicit cursor(cl_stream s, std::size_t start = 0) : s_(std::move(s)), i_(start) {}

    std::optional<digit> next() {
        auto d = s_.at(i_);
        if (d) ++i_;
        return d;
    }
    std::size_t position() const { return i_; }
    const cl_stream& stream() const { return s_; }

private:
    cl_stream s_;
    std::size_t i_ = 0;
};

namespace detail {

class suffix_source final : public digit_source {
public:
    suffix_source(cl_stream s, std::size_t from) : cur_(std::move(s), from) {}
    std::optional<digit> next() override { return cur_.next(); }

private:
    cursor cur_;
};

class periodic_source final : public digit_source {
public:
    explicit periodic_source(std::vector<digit> pattern) : pat_(std::move(pattern)) {}
    std::optional<digit> next() override {
        digit d = pat_[i_];
        i_ = (i_ + 1) % pat_.size();
        return d;
    }

private:
    std::vector<digit> pat_;
    std::size_t i_ = 0;
};

} // namespace detail

// View of `s` with the first `from` digits dropped.
inline cl_stream suffix(cl_stream s, std::size_t from) {
    return cl_stream(std::make_unique<detail::suffix_source>(std::move(s), from));
}

// Infinitely repeating digit pattern (e.g. {zero} is the golden ratio).
inline cl_stream periodic_stream(std::vector<digit> pattern) {
    if (pattern.empty()) throw std::invalid_argument("periodic_stream: empty pattern");
    return cl_stream(std::make_unique<detail::periodic_source>(std::move(pattern)));
}

inline cl_stream fixed_stream(std::vector<digit> digits) { return cl_stream(std::move(digits)); }

// First `n` digits (fewer if the stream is over before that).
inline std::vector<digit> take(const cl_stream& s, std::size_t n) {
    std::vector<digit> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto d = s.at(i);
        if (!d) break;
        out.push_back(*d);
    }
    return out;
}

} // namespace contlog
