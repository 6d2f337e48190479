#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

namespace cardmed {

/// A non-negative count, or the Unbounded sentinel. Unbounded compares
/// greater than every finite count; arithmetic on it never overflows.
class Bound {
public:
    constexpr Bound() noexcept = default;
    constexpr Bound(std::uint64_t value) noexcept : value_(value) {}  // NOLINT: implicit by intent

    static constexpr Bound unbounded() noexcept {
        Bound b;
        b.unbounded_ = true;
        return b;
    }

    constexpr bool is_unbounded() const noexcept { return unbounded_; }
    constexpr bool is_bounded() const noexcept { return !unbounded_; }

    /// Finite value. Calling this on Unbounded is a logic error.
    constexpr std::uint64_t value() const {
        if (unbounded_) throw std::logic_error("value() of an unbounded count");
        return value_;
    }

    /// Finite value, or `cap` when unbounded.
    constexpr std::uint64_t value_or(std::uint64_t cap) const noexcept {
        return unbounded_ ? cap : value_;
    }

    friend constexpr bool operator==(const Bound& a, const Bound& b) noexcept {
        return a.unbounded_ == b.unbounded_ && (a.unbounded_ || a.value_ == b.value_);
    }
    friend constexpr std::strong_ordering operator<=>(const Bound& a, const Bound& b) noexcept {
        if (a.unbounded_ || b.unbounded_) return a.unbounded_ <=> b.unbounded_;
        return a.value_ <=> b.value_;
    }

    std::string to_string() const { return unbounded_ ? std::string("*") : std::to_string(value_); }

private:
    std::uint64_t value_ = 0;
    bool unbounded_ = false;
};

inline constexpr Bound unbounded = Bound::unbounded();

inline std::ostream& operator<<(std::ostream& os, const Bound& b) { return os << b.to_string(); }

/// Integer interval [lo, hi] over counts; hi may be Unbounded.
/// Holds any pair so malformed input can be reported rather than rejected
/// at construction; operations below require well_formed().
struct Interval {
    std::uint64_t lo = 0;
    Bound hi = 0;

    constexpr bool well_formed() const noexcept { return Bound(lo) <= hi; }

    constexpr bool contains(std::uint64_t v) const noexcept { return lo <= v && Bound(v) <= hi; }

    friend constexpr bool operator==(const Interval&, const Interval&) noexcept = default;

    std::string to_string() const { return "[" + std::to_string(lo) + "," + hi.to_string() + "]"; }
};

/// Cardinality constraint k_r = [minCard, maxCard] on a schema relationship.
using CardinalityConstraint = Interval;

inline std::ostream& operator<<(std::ostream& os, const Interval& k) { return os << k.to_string(); }

namespace detail {
inline std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
    if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a)
        throw std::overflow_error("cardinality product overflows 64 bits");
    return a * b;
}
}  // namespace detail

/// m * [lo, hi] = [m*lo, m*hi]: the instance counts obtainable from m invocations.
inline Interval interval_scale(const Interval& k, std::uint64_t m) {
    if (m == 0) throw std::domain_error("interval_scale: invocation count must be at least 1");
    if (!k.well_formed()) throw std::domain_error("interval_scale: malformed interval " + k.to_string());
    Interval out;
    out.lo = detail::checked_mul(k.lo, m);
    out.hi = k.hi.is_unbounded() ? unbounded : Bound(detail::checked_mul(k.hi.value(), m));
    return out;
}

/// p ⊆ q.
constexpr bool interval_subset(const Interval& p, const Interval& q) noexcept {
    return q.lo <= p.lo && p.hi <= q.hi;
}

/// p ∩ q ≠ ∅.
constexpr bool interval_intersects(const Interval& p, const Interval& q) noexcept {
    return Bound(std::max(p.lo, q.lo)) <= std::min(p.hi, q.hi);
}

}  // namespace cardmed
