#pragma once

#include <array>
#include <string>

#include "cardmed/interval.hpp"

namespace cardmed {

/// How a sender's output constraint [i, j] relates to a receiver's input [m, n].
enum class CompatibilityCase {
    GuaranteedLack,                 ///< a: j < m
    PotentialLack,                  ///< b: i < m, m <= j <= n
    Compatible,                     ///< c: i >= m, j <= n
    PotentialOverabundance,         ///< d: m <= i <= n, j > n
    GuaranteedOverabundance,        ///< e: i > n
    PotentialLackAndOverabundance,  ///< f: i < m, j > n
};

inline constexpr std::array<CompatibilityCase, 6> all_cases = {
    CompatibilityCase::GuaranteedLack,         CompatibilityCase::PotentialLack,
    CompatibilityCase::Compatible,             CompatibilityCase::PotentialOverabundance,
    CompatibilityCase::GuaranteedOverabundance, CompatibilityCase::PotentialLackAndOverabundance,
};

/// Single-letter tag a..f.
inline char case_letter(CompatibilityCase c) { return static_cast<char>('a' + static_cast<int>(c)); }

inline const char* to_string(CompatibilityCase c) {
    switch (c) {
        case CompatibilityCase::GuaranteedLack: return "GuaranteedLack";
        case CompatibilityCase::PotentialLack: return "PotentialLack";
        case CompatibilityCase::Compatible: return "Compatible";
        case CompatibilityCase::PotentialOverabundance: return "PotentialOverabundance";
        case CompatibilityCase::GuaranteedOverabundance: return "GuaranteedOverabundance";
        case CompatibilityCase::PotentialLackAndOverabundance: return "PotentialLackAndOverabundance";
    }
    return "Unknown";
}

/// The literal predicate of one case. Exactly one holds for well-formed
/// intervals; classify_pair relies on that and the tests enumerate it.
constexpr bool case_holds(CompatibilityCase c, const Interval& sender, const Interval& receiver) noexcept {
    const Bound i = sender.lo, j = sender.hi;
    const Bound m = receiver.lo, n = receiver.hi;
    switch (c) {
        case CompatibilityCase::GuaranteedLack: return j < m;
        case CompatibilityCase::PotentialLack: return i < m && m <= j && j <= n;
        case CompatibilityCase::Compatible: return i >= m && j <= n;
        case CompatibilityCase::PotentialOverabundance: return m <= i && i <= n && j > n;
        case CompatibilityCase::GuaranteedOverabundance: return i > n;
        case CompatibilityCase::PotentialLackAndOverabundance: return i < m && j > n;
    }
    return false;
}

inline CompatibilityCase classify_pair(const Interval& sender_out, const Interval& receiver_in) {
    const Bound i = sender_out.lo, j = sender_out.hi;
    const Bound m = receiver_in.lo, n = receiver_in.hi;
    if (j < m) return CompatibilityCase::GuaranteedLack;
    if (i < m) return j <= n ? CompatibilityCase::PotentialLack : CompatibilityCase::PotentialLackAndOverabundance;
    if (j <= n) return CompatibilityCase::Compatible;
    return i <= n ? CompatibilityCase::PotentialOverabundance : CompatibilityCase::GuaranteedOverabundance;
}

struct MediationGroup {
    bool lack_possible = false;
    bool overabundance_possible = false;
    bool compatible = false;
    friend bool operator==(const MediationGroup&, const MediationGroup&) = default;
};

inline MediationGroup mediation_group(CompatibilityCase c) {
    switch (c) {
        case CompatibilityCase::GuaranteedLack:
        case CompatibilityCase::PotentialLack: return {true, false, false};
        case CompatibilityCase::Compatible: return {false, false, true};
        case CompatibilityCase::PotentialOverabundance:
        case CompatibilityCase::GuaranteedOverabundance: return {false, true, false};
        case CompatibilityCase::PotentialLackAndOverabundance: return {true, true, false};
    }
    return {};
}

inline std::string group_label(const MediationGroup& g) {
    if (g.compatible) return "compatible";
    if (g.lack_possible && g.overabundance_possible) return "lack+overabundance";
    return g.lack_possible ? "lack" : "overabundance";
}

}  // namespace cardmed
