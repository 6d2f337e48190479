#pragma once

#include <algorithm>
#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "cardmed/interval.hpp"
#include "cardmed/schema.hpp"

namespace cardmed {

// ============================================================================
// Strategy policies
// ============================================================================

struct SelectFirst {
    friend bool operator==(const SelectFirst&, const SelectFirst&) = default;
};
/// Every `step`-th element starting from the first ("each two elements" is step 2).
struct SelectStride {
    std::size_t step = 2;
    friend bool operator==(const SelectStride&, const SelectStride&) = default;
};
struct SelectLast {
    friend bool operator==(const SelectLast&, const SelectLast&) = default;
};
struct SelectExplicit {
    std::vector<std::size_t> indices;
    friend bool operator==(const SelectExplicit&, const SelectExplicit&) = default;
};
using SelectStrategy = std::variant<SelectFirst, SelectStride, SelectLast, SelectExplicit>;

struct MergeConcatAB {
    friend bool operator==(const MergeConcatAB&, const MergeConcatAB&) = default;
};
struct MergeInterleavePairs {
    friend bool operator==(const MergeInterleavePairs&, const MergeInterleavePairs&) = default;
};
struct MergeConcatBA {
    friend bool operator==(const MergeConcatBA&, const MergeConcatBA&) = default;
};
/// Permutation applied to the ConcatAB result: output[i] = concat[permutation[i]].
struct MergeExplicit {
    std::vector<std::size_t> permutation;
    friend bool operator==(const MergeExplicit&, const MergeExplicit&) = default;
};
using MergeStrategy = std::variant<MergeConcatAB, MergeInterleavePairs, MergeConcatBA, MergeExplicit>;

enum class DedupStrategy {
    remove_first,  ///< drop earlier occurrences, keep the last one of each key
    remove_last,   ///< drop later occurrences, keep the first one of each key
};

struct StrategyPolicy {
    SelectStrategy select = SelectFirst{};
    MergeStrategy merge = MergeConcatAB{};
    DedupStrategy dedup = DedupStrategy::remove_last;
    friend bool operator==(const StrategyPolicy&, const StrategyPolicy&) = default;
};

inline const char* strategy_name(const SelectStrategy& s) {
    constexpr const char* names[] = {"first", "stride", "last", "explicit"};
    return names[s.index()];
}
inline const char* strategy_name(const MergeStrategy& s) {
    constexpr const char* names[] = {"concat_ab", "interleave_pairs", "concat_ba", "explicit"};
    return names[s.index()];
}
inline const char* strategy_name(DedupStrategy s) {
    return s == DedupStrategy::remove_first ? "remove_first" : "remove_last";
}

// ============================================================================
// Services, flows, compositions
// ============================================================================

struct ServiceSpec {
    std::string id;
    ConstrainedSchema input_schema;
    ConstrainedSchema output_schema;
    Bound inv_max = 1;
    bool is_provider = false;

    /// Service whose input and output schemas each hold one active constraint.
    static ServiceSpec simple(std::string id, Interval in, Interval out, Bound inv_max,
                              bool provider = false) {
        ServiceSpec s;
        s.input_schema = ConstrainedSchema::single(id + ".in", "item", in);
        s.output_schema = ConstrainedSchema::single(id + ".out", "item", out);
        s.id = std::move(id);
        s.inv_max = inv_max;
        s.is_provider = provider;
        return s;
    }

    friend bool operator==(const ServiceSpec&, const ServiceSpec&) = default;
};

struct DataFlow {
    std::string sender;
    std::string receiver;
    bool dup = true;   ///< duplicates tolerated
    bool sel = false;  ///< selection allowed
    bool ord = false;  ///< order must be conserved
    StrategyPolicy policies;

    std::string label() const { return sender + "->" + receiver; }

    friend bool operator==(const DataFlow&, const DataFlow&) = default;
};

/// Services keep descriptor order; planning orders them by id.
struct Composition {
    std::vector<ServiceSpec> services;
    std::vector<DataFlow> flows;

    const ServiceSpec* find(const std::string& id) const {
        for (const auto& s : services)
            if (s.id == id) return &s;
        return nullptr;
    }

    const ServiceSpec& at(const std::string& id) const {
        if (const auto* s = find(id)) return *s;
        throw std::out_of_range("unknown service '" + id + "'");
    }

    std::vector<std::string> ids_sorted() const {
        std::vector<std::string> ids;
        ids.reserve(services.size());
        for (const auto& s : services) ids.push_back(s.id);
        std::sort(ids.begin(), ids.end());
        return ids;
    }

    friend bool operator==(const Composition&, const Composition&) = default;
};

// ============================================================================
// Validation
// ============================================================================

enum class ValidationCode {
    DuplicateId,
    DanglingEndpoint,
    SelfLoop,
    DuplicateFlow,
    ProviderBounded,
    ZeroInvocationCap,
    InvertedInterval,
    MissingConstraint,
    MalformedSchema,
    DuplicateExplicitIndex,
    InvalidStride,
};

inline const char* to_string(ValidationCode c) {
    switch (c) {
        case ValidationCode::DuplicateId: return "DuplicateId";
        case ValidationCode::DanglingEndpoint: return "DanglingEndpoint";
        case ValidationCode::SelfLoop: return "SelfLoop";
        case ValidationCode::DuplicateFlow: return "DuplicateFlow";
        case ValidationCode::ProviderBounded: return "ProviderBounded";
        case ValidationCode::ZeroInvocationCap: return "ZeroInvocationCap";
        case ValidationCode::InvertedInterval: return "InvertedInterval";
        case ValidationCode::MissingConstraint: return "MissingConstraint";
        case ValidationCode::MalformedSchema: return "MalformedSchema";
        case ValidationCode::DuplicateExplicitIndex: return "DuplicateExplicitIndex";
        case ValidationCode::InvalidStride: return "InvalidStride";
    }
    return "Unknown";
}

struct ValidationIssue {
    ValidationCode code;
    std::string where;  ///< "services[WS1].out", "flows[0]" ...
    std::string message;
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;

    bool ok() const noexcept { return issues.empty(); }
    bool has(ValidationCode c) const {
        return std::any_of(issues.begin(), issues.end(), [c](const auto& i) { return i.code == c; });
    }
};

namespace detail {

inline void validate_schema(const ConstrainedSchema& s, const std::string& where, ValidationReport& r) {
    if (s.element_types().empty())
        r.issues.push_back({ValidationCode::MalformedSchema, where, "schema has no element types"});
    for (const auto& rel : s.relationships()) {
        if (!s.has_element_type(rel.source) || !s.has_element_type(rel.target))
            r.issues.push_back({ValidationCode::MalformedSchema, where,
                                "relationship '" + rel.name + "' connects unknown element types"});
    }
    for (const auto& [key, value] : s.properties()) {
        if (const auto* k = std::get_if<CardinalityConstraint>(&value); k && !k->well_formed())
            r.issues.push_back({ValidationCode::InvertedInterval, where + "." + key.first.name,
                                "cardinality constraint " + k->to_string() + " has min > max"});
    }
    if (!s.active_constraint())
        r.issues.push_back({ValidationCode::MissingConstraint, where,
                            "no active relationship carrying a cardinality constraint"});
}

inline bool has_duplicates(std::vector<std::size_t> v) {
    std::sort(v.begin(), v.end());
    return std::adjacent_find(v.begin(), v.end()) != v.end();
}

}  // namespace detail

/// Accumulates every violated invariant; an empty report means well-formed.
inline ValidationReport validate_composition(const Composition& c) {
    ValidationReport r;
    std::set<std::string> seen;
    for (const auto& s : c.services) {
        const std::string where = "services[" + s.id + "]";
        if (!seen.insert(s.id).second)
            r.issues.push_back({ValidationCode::DuplicateId, where, "service id '" + s.id + "' is not unique"});
        if (s.inv_max.is_bounded() && s.inv_max.value() == 0)
            r.issues.push_back({ValidationCode::ZeroInvocationCap, where, "inv_max must be at least 1"});
        if (s.is_provider && s.inv_max.is_bounded())
            r.issues.push_back({ValidationCode::ProviderBounded, where,
                                "data providers must have unbounded inv_max"});
        detail::validate_schema(s.input_schema, where + ".in", r);
        detail::validate_schema(s.output_schema, where + ".out", r);
    }

    std::set<std::pair<std::string, std::string>> edges;
    for (std::size_t i = 0; i < c.flows.size(); ++i) {
        const auto& f = c.flows[i];
        const std::string where = "flows[" + std::to_string(i) + "]";
        for (const auto* end : {&f.sender, &f.receiver}) {
            if (!c.find(*end))
                r.issues.push_back({ValidationCode::DanglingEndpoint, where,
                                    "flow endpoint '" + *end + "' is not a service of the composition"});
        }
        if (f.sender == f.receiver)
            r.issues.push_back({ValidationCode::SelfLoop, where, "flow sender and receiver are the same service"});
        if (!edges.insert({f.sender, f.receiver}).second)
            r.issues.push_back({ValidationCode::DuplicateFlow, where, "more than one flow " + f.label()});
        if (const auto* e = std::get_if<SelectExplicit>(&f.policies.select);
            e && detail::has_duplicates(e->indices))
            r.issues.push_back({ValidationCode::DuplicateExplicitIndex, where + ".policies.select",
                                "explicit selection lists an index twice"});
        if (const auto* st = std::get_if<SelectStride>(&f.policies.select); st && st->step == 0)
            r.issues.push_back({ValidationCode::InvalidStride, where + ".policies.select",
                                "stride must be at least 1"});
    }
    return r;
}

}  // namespace cardmed
