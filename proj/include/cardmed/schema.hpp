#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "cardmed/interval.hpp"

namespace cardmed {

/// User-defined label value in a property set (distinct from a plain string).
struct Label {
    std::string text;
    friend bool operator==(const Label&, const Label&) = default;
};

/// Property values: null, numbers, strings, user labels, cardinality constraints.
using PropertyValue =
    std::variant<std::monostate, std::int64_t, double, std::string, Label, CardinalityConstraint>;

struct Relationship {
    std::string name;
    std::string source;
    std::string target;
    friend bool operator==(const Relationship&, const Relationship&) = default;
};

/// Property-set owner: either an element type (node) or a relationship (edge).
struct PropertyOwner {
    enum class Kind { node, edge };
    Kind kind = Kind::node;
    std::string name;

    static PropertyOwner node(std::string n) { return {Kind::node, std::move(n)}; }
    static PropertyOwner edge(std::string n) { return {Kind::edge, std::move(n)}; }

    friend auto operator<=>(const PropertyOwner&, const PropertyOwner&) = default;
};

/// Property name under which a relationship stores its cardinality constraint.
inline constexpr const char* cardinality_property = "cardinality";

/// Labeled directed graph of element types whose property sets carry
/// cardinality constraints. Mediation reads only the active constraint.
class ConstrainedSchema {
public:
    ConstrainedSchema() = default;

    /// Two element types joined by one relationship carrying `k`, designated active.
    /// This is the shape every descriptor-defined service uses.
    static ConstrainedSchema single(const std::string& container, const std::string& item,
                                    const CardinalityConstraint& k) {
        ConstrainedSchema s;
        s.add_element_type(container);
        s.add_element_type(item);
        const std::string rel = container + "/" + item;
        s.add_relationship({rel, container, item});
        s.set_property(PropertyOwner::edge(rel), cardinality_property, k);
        s.set_active_constraint(rel);
        return s;
    }

    void add_element_type(std::string name) { element_types_.push_back(std::move(name)); }
    void add_relationship(Relationship r) { relationships_.push_back(std::move(r)); }
    void set_property(const PropertyOwner& owner, const std::string& key, PropertyValue v) {
        properties_[{owner, key}] = std::move(v);
    }
    void set_active_constraint(std::string relationship) { active_ = std::move(relationship); }

    const std::vector<std::string>& element_types() const noexcept { return element_types_; }
    const std::vector<Relationship>& relationships() const noexcept { return relationships_; }
    const std::map<std::pair<PropertyOwner, std::string>, PropertyValue>& properties() const noexcept {
        return properties_;
    }
    const std::optional<std::string>& active_relationship() const noexcept { return active_; }

    std::optional<PropertyValue> property(const PropertyOwner& owner, const std::string& key) const {
        auto it = properties_.find({owner, key});
        if (it == properties_.end()) return std::nullopt;
        return it->second;
    }

    bool has_element_type(const std::string& name) const {
        for (const auto& e : element_types_)
            if (e == name) return true;
        return false;
    }

    const Relationship* find_relationship(const std::string& name) const {
        for (const auto& r : relationships_)
            if (r.name == name) return &r;
        return nullptr;
    }

    /// The constraint the mediator works on; nullopt if the schema has no
    /// active relationship or that relationship carries no constraint.
    std::optional<CardinalityConstraint> active_constraint() const {
        if (!active_ || !find_relationship(*active_)) return std::nullopt;
        auto v = property(PropertyOwner::edge(*active_), cardinality_property);
        if (!v) return std::nullopt;
        if (const auto* k = std::get_if<CardinalityConstraint>(&*v)) return *k;
        return std::nullopt;
    }

    friend bool operator==(const ConstrainedSchema&, const ConstrainedSchema&) = default;

private:
    std::vector<std::string> element_types_;
    std::vector<Relationship> relationships_;
    std::map<std::pair<PropertyOwner, std::string>, PropertyValue> properties_;
    std::optional<std::string> active_;
};

}  // namespace cardmed
