// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>

namespace contlog {

// One symbol of the binary-form continued-logarithm alphabet.
//
//   one   "1"  value >= 2,      continue with value/2
//   zero  "0"  1 < value < 2,   continue with 1/(value-1)
//   recip "r"  0 < value < 1,   continue with 1/value   (also 0 itself: "r" + empty tail)
//   neg   "n"  value < 0,       continue with -value
//   end   "$"  value = 1 exactly, final symbol
//
// A stream that exhausts without `end` denotes +infinity.
enum class digit : std::uint8_t { one, zero, recip, neg, end };

inline char to_char(digit d) {
    switch (d) {
    case digit::one: return '1';
    case digit::zero: return '0';
    case digit::recip: return 'r';
    case digit::neg: return 'n';
    case digit::end: return '$';
    }
    return '?';
}

inline std::optional<digit> digit_from_char(char c) {
    switch (c) {
    case '1': return digit::one;
    case '0': return digit::zero;
    case 'r': return digit::recip;
    case 'n': return digit::neg;
    case '$': return digit::end;
    default: return std::nullopt;
    }
}

inline std::string to_string(std::span<const digit> ds) {
    std::string s;
    s.reserve(ds.size());
    for (digit d : ds) s.push_back(to_char(d));
    return s;
}

// Grammar of well-formed digit sequences: neg only at position 0, recip only at
// position 0 or right after neg, end (if present) final and never right after a
// zero. `complete` distinguishes a whole stream from a prefix of one.
inline bool valid_digits(std::span<const digit> ds, bool complete = true) {
    for (std::size_t i = 0; i < ds.size(); ++i) {
        switch (ds[i]) {
        case digit::neg:
            if (i != 0) return false;
            break;
        case digit::recip:
            if (!(i == 0 || (i == 1 && ds[0] == digit::neg))) return false;
            break;
        case digit::end:
            if (i + 1 != ds.size()) return false;
            if (i > 0 && ds[i - 1] == digit::zero) return false;
            break;
        default:
            break;
        }
    }
    (void)complete;
    return true;
}

} // namespace contlog
