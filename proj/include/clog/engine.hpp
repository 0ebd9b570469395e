// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <clog/bihom.hpp>
#include <clog/bounds.hpp>
#include <clog/compact.hpp>
#include <clog/stream.hpp>

#include <cstdint>
#include <memory>
#include <optional>
#include <utility>

namespace contlog {

// Which input to read when no output digit is determined. Exhausted inputs are
// always skipped. widest_first reads the input whose remaining uncertainty
// dominates the value range (the series evaluator uses it: the argument is
// drained while it dominates, and the lazily built tail is only asked for
// digits that are actually needed).
enum class consume_policy { strict_alternation, widest_first };

namespace detail {

// Gosper's arithmetic: a bihomographic state machine that narrows its value
// range by consuming input digits and emits an output digit whenever the range
// fits a digit region. Degenerates to one variable as inputs end and to plain
// rational emission once the value is pinned exactly.
class bihom_source final : public digit_source {
public:
    // The optional enclosures are externally certified value intervals for the
    // inputs (tighter than anything digits alone say); the series evaluator
    // seeds them with the tail bounds so lazy evaluation stays productive.
    bihom_source(bihom m, cl_stream x, cl_stream y, consume_policy policy, std::uint64_t fuel,
                 std::optional<rat_interval> x_env = std::nullopt,
                 std::optional<rat_interval> y_env = std::nullopt)
        : bi_(canonical(std::move(m))), cx_(std::move(x)), cy_(std::move(y)),
          dx_(var_domain::fresh()), dy_(var_domain::fresh()), envx_(std::move(x_env)),
          envy_(std::move(y_env)), policy_(policy), fuel_(fuel) {
        if (envx_) envx_ = round_outward(*envx_);
        if (envy_) envy_ = round_outward(*envy_);
        mx_ = merged(dx_, envx_);
        my_ = merged(dy_, envy_);
    }

    // single-variable engine (run_hom)
    bihom_source(hom m, cl_stream x, std::uint64_t fuel,
                 std::optional<rat_interval> x_env = std::nullopt)
        : ho_(canonical(std::move(m))), cx_(std::move(x)), dx_(var_domain::fresh()),
          envx_(std::move(x_env)), fuel_(fuel) {
        shape_ = shape::one_var;
        if (envx_) envx_ = round_outward(*envx_);
        mx_ = merged(dx_, envx_);
    }

    std::optional<digit> next() override {
        if (shape_ == shape::constant) return const_src_->next();
        std::uint64_t used = 0;
        while (true) {
            range_bounds r = current_range();
            if (r.st == range_bounds::status::zero_denominator) {
                if (auto d = resolve_zero_denominator()) return d;
                // sign of the numerator not pinned yet: fall through and consume
                r = range_bounds{};
            } else if (r.ok()) {
                if (shape_ == shape::constant) return const_src_->next();
                if (r.lo.v == r.hi.v) {
                    to_constant(r.lo.v);
                    return const_src_->next();
                }
                if (auto d = detail::engine_decide(r)) {
                    apply_produce(*d);
                    return d;
                }
            }
            if (used >= fuel_) throw stall_error(r.closed_hull(), used);
            try {
                consume_one(r);
            } catch (const stall_error&) {
                // an input could not deliver its next digit; report our own
                // value interval, not the input's
                throw stall_error(r.closed_hull(), used);
            }
            ++used;
            if (shape_ == shape::constant) return const_src_->next();
        }
    }

private:
    enum class shape { two_var, one_var, constant };

    // table domain sharpened by the tracked value enclosure
    static var_domain merged(const var_domain& table, const std::optional<rat_interval>& env) {
        if (!env) return table;
        var_domain d = table;
        if (env->lo > d.lo.v)
            d.lo = {env->lo, !env->lo_open};
        else if (env->lo == d.lo.v)
            d.lo.attained = d.lo.attained && !env->lo_open;
        if (env->hi < d.hi.v)
            d.hi = {env->hi, !env->hi_open};
        else if (env->hi == d.hi.v)
            d.hi.attained = d.hi.attained && !env->hi_open;
        if (d.hi.v < d.lo.v) return table; // inconsistent hint: fall back
        return d;
    }

    range_bounds current_range() const {
        if (shape_ == shape::two_var) return bihom_range(bi_, mx_, my_);
        return hom_range(ho_, mx_);
    }

    void apply_produce(digit d) {
        if (shape_ == shape::two_var)
            bi_ = produce(bi_, d);
        else
            ho_ = produce(ho_, d);
    }

    // denominator identically zero: the value is a signed infinity as soon as
    // the numerator's sign is certain; an exactly-zero numerator would be 0/0
    std::optional<digit> resolve_zero_denominator() {
        range_bounds n = shape_ == shape::two_var ? numerator_range(bi_, mx_, my_)
                                                  : numerator_range(ho_, mx_);
        if (!n.ok()) return std::nullopt;
        const ext_rational zero{0};
        if (n.lo.v == zero && n.hi.v == zero)
            throw degenerate_error("bihom engine: 0/0");
        if (n.lo.v > zero || (n.lo.v == zero && !n.lo.attained)) {
            to_constant(ext_rational::pos_inf());
            return const_src_->next();
        }
        if (n.hi.v < zero || (n.hi.v == zero && !n.hi.attained)) {
            to_constant(ext_rational::neg_inf());
            return const_src_->next();
        }
        return std::nullopt;
    }

    void to_constant(const ext_rational& v) {
        if (v.finite())
            const_src_ = std::make_unique<rational_source>(v.value());
        else
            const_src_ = rational_source::infinite(v.sign());
        shape_ = shape::constant;
    }

    // spread of the corner values across one variable: how much of the range's
    // width that input is responsible for
    static ext_rational corner_spread(const ext_rational& a, const ext_rational& b) {
        if (a == b) return ext_rational(rational(0));
        if (!a.finite() || !b.finite()) return ext_rational::pos_inf();
        return ext_rational(rational(boost::multiprecision::abs(
            rational(a.value() - b.value()))));
    }

    void consume_one(const range_bounds& r) {
        if (shape_ != shape::two_var) {
            consume_single();
            return;
        }
        bool pick_x = next_x_;
        if (policy_ == consume_policy::widest_first && r.ok()) {
            ext_rational wx = std::max(corner_spread(r.corner[0][0], r.corner[1][0]),
                                       corner_spread(r.corner[0][1], r.corner[1][1]));
            ext_rational wy = std::max(corner_spread(r.corner[0][0], r.corner[0][1]),
                                       corner_spread(r.corner[1][0], r.corner[1][1]));
            if (wx != wy) pick_x = wx > wy;
        }
        next_x_ = !pick_x;
        consume_two(pick_x);
    }

    // carry the enclosure through the digit's substitution
    static void advance_env(std::optional<rat_interval>& env, digit d) {
        if (!env) return;
        auto narrowed = intersect(*env, value_region(d));
        if (!narrowed) {
            env.reset(); // enclosure contradicted the digit: drop the hint
            return;
        }
        env = round_outward(apply_hom(forward_map(d), *narrowed));
        if (!env->bounded() && env->lo.is_neg_inf() && env->hi.is_pos_inf()) env.reset();
    }

    void consume_two(bool from_x) {
        cursor& cur = from_x ? cx_ : cy_;
        auto d = cur.next();
        if (!d) {
            ho_ = from_x ? consume_x_inf(bi_) : consume_y_inf(bi_);
            collapse_to(from_x);
            return;
        }
        if (*d == digit::end) {
            ho_ = from_x ? consume_x_end(bi_) : consume_y_end(bi_);
            collapse_to(from_x);
            return;
        }
        if (from_x) {
            bi_ = consume_x(bi_, *d);
            dx_ = var_domain::after(*d);
            advance_env(envx_, *d);
            mx_ = merged(dx_, envx_);
        } else {
            bi_ = consume_y(bi_, *d);
            dy_ = var_domain::after(*d);
            advance_env(envy_, *d);
            my_ = merged(dy_, envy_);
        }
    }

    void collapse_to(bool x_ended) {
        shape_ = shape::one_var;
        if (x_ended) { // remaining variable is y; move it into the x slot
            cx_ = std::move(cy_);
            dx_ = dy_;
            envx_ = std::move(envy_);
            mx_ = my_;
        }
        cy_ = cursor();
        envy_.reset();
    }

    void consume_single() {
        auto d = cx_.next();
        if (!d) {
            to_constant(consume_inf_ext(ho_));
            return;
        }
        if (*d == digit::end) {
            to_constant(consume_end_ext(ho_));
            return;
        }
        ho_ = consume(ho_, *d);
        dx_ = var_domain::after(*d);
        advance_env(envx_, *d);
        mx_ = merged(dx_, envx_);
    }

    shape shape_ = shape::two_var;
    bihom bi_{};
    hom ho_{};
    cursor cx_, cy_;
    var_domain dx_{}, dy_{};
    std::optional<rat_interval> envx_, envy_;
    var_domain mx_ = var_domain::fresh(), my_ = var_domain::fresh();
    consume_policy policy_ = consume_policy::strict_alternation;
    bool next_x_ = true;
    std::uint64_t fuel_;
    std::unique_ptr<digit_source> const_src_;
};

// Digit-level negation: -x differs from x by the sign marker only. Two digits
// of lookahead keep zero canonical ("r" stays "r").
class negate_source final : public digit_source {
public:
    explicit negate_source(cl_stream s) : s_(std::move(s)) {}

    std::optional<digit> next() override {
        if (!planned_) plan();
        if (qpos_ < qlen_) return queue_[qpos_++];
        if (!pass_) return std::nullopt;
        return pass_->next();
    }

private:
    void plan() {
        qlen_ = qpos_ = 0;
        pass_.reset();
        std::optional<digit> d0;
        try {
            d0 = s_.at(0);
        } catch (stall_error& e) {
            // nothing emitted yet: our value is the negation of the inner one
            throw stall_error(negate_interval(e.residual), e.consumed);
        }
        if (!d0) {
            push(digit::neg); // -(+inf)
        } else if (*d0 == digit::neg) {
            pass_.emplace(s_, 1);
        } else if (*d0 == digit::end) {
            push(digit::neg);
            push(digit::end);
        } else if (*d0 == digit::recip) {
            std::optional<digit> d1;
            try {
                d1 = s_.at(1);
            } catch (stall_error& e) {
                // inner value is in [0,1), so ours is in (-1, 0]
                throw stall_error(rat_interval(ext_rational(rational(-1)), ext_rational(rational(0)),
                                               true, false),
                                  e.consumed);
            }
            if (!d1)
                pass_.emplace(s_, 0); // -0 = 0
            else {
                push(digit::neg);
                pass_.emplace(s_, 0);
            }
        } else {
            push(digit::neg);
            pass_.emplace(s_, 0);
        }
        planned_ = true;
    }

    static rat_interval negate_interval(const rat_interval& r) {
        return rat_interval(-r.hi, -r.lo, r.hi_open, r.lo_open);
    }

    void push(digit d) { queue_[qlen_++] = d; }

    cl_stream s_;
    bool planned_ = false;
    digit queue_[2]{};
    int qlen_ = 0, qpos_ = 0;
    std::optional<cursor> pass_;
};

// Digit-level reciprocal: the impatient convention makes 1/x a prefix edit.
class recip_source final : public digit_source {
public:
    explicit recip_source(cl_stream s) : s_(std::move(s)) {}

    std::optional<digit> next() override {
        if (!planned_) plan();
        if (qpos_ < qlen_) return queue_[qpos_++];
        if (!pass_) return std::nullopt;
        return pass_->next();
    }

private:
    void plan() {
        qlen_ = qpos_ = 0;
        pass_.reset();
        std::optional<digit> d0;
        try {
            d0 = s_.at(0);
        } catch (stall_error& e) {
            throw stall_error(recip_interval(e.residual), e.consumed);
        }
        if (!d0) {
            push(digit::recip); // 1/inf = 0
        } else if (*d0 == digit::end) {
            push(digit::end); // 1/1
        } else if (*d0 == digit::recip) {
            pass_.emplace(s_, 1); // 1/(1/t) = t
        } else if (*d0 == digit::neg) {
            std::optional<digit> d1;
            try {
                d1 = s_.at(1);
            } catch (stall_error& e) {
                // inner value negative: ours is in [-inf, 0]
                throw stall_error(
                    rat_interval(ext_rational::neg_inf(), ext_rational(rational(0)), false, true),
                    e.consumed);
            }
            if (!d1) {
                push(digit::recip); // 1/(-inf) = 0, canonically unsigned
            } else if (*d1 == digit::end) {
                push(digit::neg); // 1/(-1) = -1
                push(digit::end);
            } else if (*d1 == digit::recip) {
                push(digit::neg);
                pass_.emplace(s_, 2);
            } else {
                push(digit::neg);
                push(digit::recip);
                pass_.emplace(s_, 1);
            }
        } else {
            push(digit::recip);
            pass_.emplace(s_, 0);
        }
        planned_ = true;
    }

    // 1/I for an interval not straddling zero in its interior; full otherwise
    static rat_interval recip_interval(const rat_interval& r) {
        const ext_rational zero{rational(0)};
        if (r.lo < zero && r.hi > zero) return rat_interval::full();
        auto inv = [](const ext_rational& v, int side) {
            if (!v.finite()) return ext_rational(rational(0));
            if (v.value() == 0) return side > 0 ? ext_rational::pos_inf() : ext_rational::neg_inf();
            return ext_rational(rational(1 / v.value()));
        };
        // 1/x is decreasing on a sign-constant domain
        int side = r.lo >= zero ? 1 : -1;
        return rat_interval(inv(r.hi, side), inv(r.lo, side), r.hi_open, r.lo_open);
    }

    void push(digit d) { queue_[qlen_++] = d; }

    cl_stream s_;
    bool planned_ = false;
    digit queue_[2]{};
    int qlen_ = 0, qpos_ = 0;
    std::optional<cursor> pass_;
};

} // namespace detail

// z = M(x, y), digits on demand.
inline cl_stream run_bihom(bihom m, cl_stream x, cl_stream y,
                           consume_policy policy = consume_policy::strict_alternation,
                           std::uint64_t fuel = default_fuel) {
    return cl_stream(std::make_unique<detail::bihom_source>(std::move(m), std::move(x),
                                                            std::move(y), policy, fuel));
}

// z = M(x), digits on demand.
inline cl_stream run_hom(hom m, cl_stream x, std::uint64_t fuel = default_fuel) {
    return cl_stream(std::make_unique<detail::bihom_source>(std::move(m), std::move(x), fuel));
}

inline cl_stream add(cl_stream x, cl_stream y, std::uint64_t fuel = default_fuel) {
    return run_bihom(add_matrix, std::move(x), std::move(y), consume_policy::strict_alternation, fuel);
}
inline cl_stream sub(cl_stream x, cl_stream y, std::uint64_t fuel = default_fuel) {
    return run_bihom(sub_matrix, std::move(x), std::move(y), consume_policy::strict_alternation, fuel);
}
inline cl_stream mul(cl_stream x, cl_stream y, std::uint64_t fuel = default_fuel) {
    return run_bihom(mul_matrix, std::move(x), std::move(y), consume_policy::strict_alternation, fuel);
}
inline cl_stream div(cl_stream x, cl_stream y, std::uint64_t fuel = default_fuel) {
    return run_bihom(div_matrix, std::move(x), std::move(y), consume_policy::strict_alternation, fuel);
}

inline cl_stream negate(cl_stream s) {
    return cl_stream(std::make_unique<detail::negate_source>(std::move(s)));
}
inline cl_stream reciprocal(cl_stream s) {
    return cl_stream(std::make_unique<detail::recip_source>(std::move(s)));
}
inline cl_stream scale(const integer& k, cl_stream s, std::uint64_t fuel = default_fuel) {
    return run_hom(hom{k, 0, 0, 1}, std::move(s), fuel);
}
inline cl_stream half(cl_stream s, std::uint64_t fuel = default_fuel) {
    return run_hom(hom{1, 0, 0, 2}, std::move(s), fuel);
}

} // namespace contlog
