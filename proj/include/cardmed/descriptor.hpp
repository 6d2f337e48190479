#pragma once

// Composition descriptor: a strict JSON document (schema in
// docs/descriptor.schema.json). Unknown fields are rejected; every error
// names a line/column (syntax) or a JSON pointer (content).

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "cardmed/errors.hpp"
#include "cardmed/planner.hpp"
#include "cardmed/model.hpp"

namespace cardmed {

inline constexpr const char* descriptor_version = "cardmed/1";

class descriptor_error : public error {
public:
    descriptor_error(std::string locus, const std::string& message,
                     std::optional<ValidationCode> code = std::nullopt)
        : error(locus + ": " + (code ? std::string(to_string(*code)) + ": " : std::string()) + message),
          locus_(std::move(locus)), code_(code) {}

    const std::string& locus() const noexcept { return locus_; }
    std::optional<ValidationCode> code() const noexcept { return code_; }

private:
    std::string locus_;
    std::optional<ValidationCode> code_;
};

struct Descriptor {
    Composition composition;
    /// Per-service seeds and duplicate rates from the optional "simulation" section.
    std::map<std::string, std::uint64_t> seeds;
    std::map<std::string, double> duplicate_rates;

    friend bool operator==(const Descriptor&, const Descriptor&) = default;
};

namespace detail {

using json = nlohmann::json;

inline std::string line_column(const std::string& text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

inline std::string child(const std::string& ptr, const std::string& key) { return ptr + "/" + key; }
inline std::string child(const std::string& ptr, std::size_t i) { return ptr + "/" + std::to_string(i); }

/// JSON pointer for a validation locus such as "services[WS1].out" or "flows[2].policies.select".
inline std::string pointer_of(const Composition& c, const std::string& where) {
    const auto open = where.find('[');
    const auto close = where.find(']');
    if (open == std::string::npos || close == std::string::npos) return "/" + where;
    const std::string section = where.substr(0, open);
    std::string index = where.substr(open + 1, close - open - 1);
    if (section == "services") {
        for (std::size_t i = 0; i < c.services.size(); ++i)
            if (c.services[i].id == index) {
                index = std::to_string(i);
                break;
            }
    }
    std::string rest = where.substr(close + 1);
    std::replace(rest.begin(), rest.end(), '.', '/');
    return "/" + section + "/" + index + rest;
}

inline void expect_fields(const json& j, const std::string& ptr, const std::set<std::string>& required,
                          const std::set<std::string>& optional = {}) {
    if (!j.is_object()) throw descriptor_error(ptr.empty() ? "/" : ptr, "expected an object");
    for (const auto& [k, v] : j.items()) {
        if (!required.count(k) && !optional.count(k)) throw descriptor_error(child(ptr, k), "unknown field");
    }
    for (const auto& k : required)
        if (!j.contains(k)) throw descriptor_error(child(ptr, k), "missing required field");
}

inline std::uint64_t get_count(const json& j, const std::string& ptr) {
    if (!j.is_number_unsigned()) throw descriptor_error(ptr, "expected a non-negative integer");
    return j.get<std::uint64_t>();
}

inline bool get_bool(const json& j, const std::string& ptr) {
    if (!j.is_boolean()) throw descriptor_error(ptr, "expected true or false");
    return j.get<bool>();
}

inline std::string get_string(const json& j, const std::string& ptr) {
    if (!j.is_string()) throw descriptor_error(ptr, "expected a string");
    return j.get<std::string>();
}

inline Bound get_bound(const json& j, const std::string& ptr) {
    if (j.is_string() && j.get<std::string>() == "unbounded") return unbounded;
    if (!j.is_number_unsigned()) throw descriptor_error(ptr, "expected a non-negative integer or \"unbounded\"");
    return j.get<std::uint64_t>();
}

inline std::vector<std::size_t> get_index_list(const json& j, const std::string& ptr) {
    if (!j.is_array()) throw descriptor_error(ptr, "expected an array of indices");
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(get_count(j[i], child(ptr, i)));
    return out;
}

inline Interval parse_interval(const json& j, const std::string& ptr) {
    expect_fields(j, ptr, {"min", "max"});
    Interval k{get_count(j["min"], child(ptr, "min")), get_bound(j["max"], child(ptr, "max"))};
    if (!k.well_formed())
        throw descriptor_error(ptr, "min " + std::to_string(k.lo) + " exceeds max " + k.hi.to_string(),
                               ValidationCode::InvertedInterval);
    return k;
}

inline SelectStrategy parse_select(const json& j, const std::string& ptr) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "first") return SelectFirst{};
        if (s == "last") return SelectLast{};
        throw descriptor_error(ptr, "unknown selection strategy '" + s + "'");
    }
    if (j.is_object() && j.size() == 1 && j.contains("stride")) {
        const auto step = get_count(j["stride"], child(ptr, "stride"));
        if (step == 0) throw descriptor_error(child(ptr, "stride"), "stride must be at least 1", ValidationCode::InvalidStride);
        return SelectStride{step};
    }
    if (j.is_object() && j.size() == 1 && j.contains("explicit"))
        return SelectExplicit{get_index_list(j["explicit"], child(ptr, "explicit"))};
    throw descriptor_error(ptr, "expected \"first\", \"last\", {\"stride\": k} or {\"explicit\": [...]}");
}

inline MergeStrategy parse_merge(const json& j, const std::string& ptr) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "concat_ab") return MergeConcatAB{};
        if (s == "interleave_pairs") return MergeInterleavePairs{};
        if (s == "concat_ba") return MergeConcatBA{};
        throw descriptor_error(ptr, "unknown merge strategy '" + s + "'");
    }
    if (j.is_object() && j.size() == 1 && j.contains("explicit"))
        return MergeExplicit{get_index_list(j["explicit"], child(ptr, "explicit"))};
    throw descriptor_error(ptr, "expected \"concat_ab\", \"interleave_pairs\", \"concat_ba\" or {\"explicit\": [...]}");
}

inline DedupStrategy parse_dedup(const json& j, const std::string& ptr) {
    const auto s = get_string(j, ptr);
    if (s == "remove_first") return DedupStrategy::remove_first;
    if (s == "remove_last") return DedupStrategy::remove_last;
    throw descriptor_error(ptr, "unknown dedup strategy '" + s + "'");
}

inline json select_to_json(const SelectStrategy& s) {
    if (const auto* st = std::get_if<SelectStride>(&s)) return {{"stride", st->step}};
    if (const auto* e = std::get_if<SelectExplicit>(&s)) return {{"explicit", e->indices}};
    return strategy_name(s);
}

inline json merge_to_json(const MergeStrategy& s) {
    if (const auto* e = std::get_if<MergeExplicit>(&s)) return {{"explicit", e->permutation}};
    return strategy_name(s);
}

inline json bound_to_json(const Bound& b) { return b.is_unbounded() ? json("unbounded") : json(b.value()); }

inline json interval_to_json(const Interval& k) {
    json j = json::object();
    j["min"] = k.lo;
    j["max"] = bound_to_json(k.hi);
    return j;
}

}  // namespace detail

inline Descriptor parse_descriptor(const std::string& text) {
    using detail::child;
    using detail::json;

    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw descriptor_error(detail::line_column(text, e.byte == 0 ? 0 : e.byte - 1), "syntax error: " + std::string(e.what()));
    }

    detail::expect_fields(root, "", {"version", "services", "flows"}, {"simulation"});
    const auto version = detail::get_string(root["version"], "/version");
    if (version != descriptor_version)
        throw descriptor_error("/version", "unsupported version '" + version + "' (expected " + descriptor_version + ")");

    Descriptor d;
    const auto& services = root["services"];
    if (!services.is_array()) throw descriptor_error("/services", "expected an array");
    for (std::size_t i = 0; i < services.size(); ++i) {
        const std::string ptr = child("/services", i);
        const auto& s = services[i];
        detail::expect_fields(s, ptr, {"id", "in", "out", "inv_max"}, {"provider"});
        const auto id = detail::get_string(s["id"], child(ptr, "id"));
        const auto in = detail::parse_interval(s["in"], child(ptr, "in"));
        const auto out = detail::parse_interval(s["out"], child(ptr, "out"));
        const auto inv_max = detail::get_bound(s["inv_max"], child(ptr, "inv_max"));
        const bool provider = s.contains("provider") && detail::get_bool(s["provider"], child(ptr, "provider"));
        d.composition.services.push_back(ServiceSpec::simple(id, in, out, inv_max, provider));
    }

    const auto& flows = root["flows"];
    if (!flows.is_array()) throw descriptor_error("/flows", "expected an array");
    for (std::size_t i = 0; i < flows.size(); ++i) {
        const std::string ptr = child("/flows", i);
        const auto& f = flows[i];
        detail::expect_fields(f, ptr, {"from", "to", "duplicates_tolerated", "selection_allowed", "ordering_required"},
                              {"policies"});
        DataFlow flow;
        flow.sender = detail::get_string(f["from"], child(ptr, "from"));
        flow.receiver = detail::get_string(f["to"], child(ptr, "to"));
        flow.dup = detail::get_bool(f["duplicates_tolerated"], child(ptr, "duplicates_tolerated"));
        flow.sel = detail::get_bool(f["selection_allowed"], child(ptr, "selection_allowed"));
        flow.ord = detail::get_bool(f["ordering_required"], child(ptr, "ordering_required"));
        for (const auto* end : {"from", "to"}) {
            const auto& id = std::string(end) == "from" ? flow.sender : flow.receiver;
            if (!d.composition.find(id))
                throw descriptor_error(child(ptr, end), "unknown service '" + id + "'", ValidationCode::DanglingEndpoint);
        }
        if (f.contains("policies")) {
            const std::string pp = child(ptr, "policies");
            const auto& p = f["policies"];
            detail::expect_fields(p, pp, {}, {"select", "merge", "dedup"});
            if (p.contains("select")) flow.policies.select = detail::parse_select(p["select"], child(pp, "select"));
            if (p.contains("merge")) flow.policies.merge = detail::parse_merge(p["merge"], child(pp, "merge"));
            if (p.contains("dedup")) flow.policies.dedup = detail::parse_dedup(p["dedup"], child(pp, "dedup"));
        }
        d.composition.flows.push_back(std::move(flow));
    }

    if (root.contains("simulation")) {
        const auto& sim = root["simulation"];
        detail::expect_fields(sim, "/simulation", {}, {"seeds", "duplicate_rates"});
        auto check_known = [&](const std::string& id, const std::string& ptr) {
            if (!d.composition.find(id))
                throw descriptor_error(ptr, "unknown service '" + id + "'", ValidationCode::DanglingEndpoint);
        };
        if (sim.contains("seeds")) {
            const auto& seeds = sim["seeds"];
            if (!seeds.is_object()) throw descriptor_error("/simulation/seeds", "expected an object");
            for (const auto& [id, v] : seeds.items()) {
                const std::string ptr = child("/simulation/seeds", id);
                check_known(id, ptr);
                d.seeds[id] = detail::get_count(v, ptr);
            }
        }
        if (sim.contains("duplicate_rates")) {
            const auto& rates = sim["duplicate_rates"];
            if (!rates.is_object()) throw descriptor_error("/simulation/duplicate_rates", "expected an object");
            for (const auto& [id, v] : rates.items()) {
                const std::string ptr = child("/simulation/duplicate_rates", id);
                check_known(id, ptr);
                if (!v.is_number() || v.get<double>() < 0.0 || v.get<double>() > 1.0)
                    throw descriptor_error(ptr, "expected a probability in [0, 1]");
                d.duplicate_rates[id] = v.get<double>();
            }
        }
    }

    const auto report = validate_composition(d.composition);
    if (!report.ok()) {
        const auto& first = report.issues.front();
        std::string msg = first.message;
        if (report.issues.size() > 1)
            msg += " (and " + std::to_string(report.issues.size() - 1) + " more issue(s))";
        throw descriptor_error(detail::pointer_of(d.composition, first.where), msg, first.code);
    }
    return d;
}

/// Canonical text of `d`; parse_descriptor(serialize_descriptor(d)) == d.
inline std::string serialize_descriptor(const Descriptor& d) {
    using detail::json;
    nlohmann::ordered_json root;
    root["version"] = descriptor_version;
    root["services"] = nlohmann::ordered_json::array();
    for (const auto& s : d.composition.services) {
        nlohmann::ordered_json j;
        j["id"] = s.id;
        j["in"] = detail::interval_to_json(receiver_constraint(s));
        j["out"] = detail::interval_to_json(sender_constraint(s));
        j["inv_max"] = detail::bound_to_json(s.inv_max);
        j["provider"] = s.is_provider;
        root["services"].push_back(std::move(j));
    }
    root["flows"] = nlohmann::ordered_json::array();
    for (const auto& f : d.composition.flows) {
        nlohmann::ordered_json j;
        j["from"] = f.sender;
        j["to"] = f.receiver;
        j["duplicates_tolerated"] = f.dup;
        j["selection_allowed"] = f.sel;
        j["ordering_required"] = f.ord;
        j["policies"] = {{"select", detail::select_to_json(f.policies.select)},
                         {"merge", detail::merge_to_json(f.policies.merge)},
                         {"dedup", strategy_name(f.policies.dedup)}};
        root["flows"].push_back(std::move(j));
    }
    if (!d.seeds.empty() || !d.duplicate_rates.empty()) {
        root["simulation"] = nlohmann::ordered_json::object();
        if (!d.seeds.empty()) root["simulation"]["seeds"] = d.seeds;
        if (!d.duplicate_rates.empty()) root["simulation"]["duplicate_rates"] = d.duplicate_rates;
    }
    return root.dump(2) + "\n";
}

}  // namespace cardmed
