#pragma once

// Human tables and json-lines renderings for the command-line front end.
// Each json-lines record carries the same facts as one table row.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "cardmed/classifier.hpp"
#include "cardmed/harness.hpp"
#include "cardmed/model.hpp"
#include "cardmed/planner.hpp"

namespace cardmed::report {

enum class Format { text, json_lines };

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int runtime_error = 1;
inline constexpr int parse_error = 2;
inline constexpr int not_certain = 3;  ///< some flow is Probable or RuntimeOnly
inline constexpr int infeasible = 4;
inline constexpr int simulation_failed = 5;
}  // namespace exit_code

namespace detail {

using ojson = nlohmann::ordered_json;

inline ojson interval_json(const Interval& k) {
    return ojson::array({ojson(k.lo), k.hi.is_unbounded() ? ojson("unbounded") : ojson(k.hi.value())});
}

/// Left-aligned columns separated by two spaces; no trailing blanks.
inline std::string table(const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> width;
    for (const auto& r : rows) {
        width.resize(std::max(width.size(), r.size()), 0);
        for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
    }
    std::string out;
    for (const auto& r : rows) {
        std::string line;
        for (std::size_t c = 0; c < r.size(); ++c) {
            line += r[c];
            if (c + 1 < r.size()) line += std::string(width[c] - r[c].size() + 2, ' ');
        }
        out += line + "\n";
    }
    return out;
}

inline std::string ratio(double r) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", r);
    return buf;
}

}  // namespace detail

// ============================================================================
// classify
// ============================================================================

inline std::string render_classify(const Composition& c, Format fmt) {
    std::vector<std::vector<std::string>> rows{{"flow", "sender", "receiver", "case", "name", "group"}};
    std::string lines;
    for (const auto& f : c.flows) {
        const Interval out = sender_constraint(c.at(f.sender));
        const Interval in = receiver_constraint(c.at(f.receiver));
        const auto cc = classify_pair(out, in);
        const auto g = mediation_group(cc);
        rows.push_back({f.label(), out.to_string(), in.to_string(), std::string(1, case_letter(cc)), to_string(cc),
                        group_label(g)});
        detail::ojson j;
        j["flow"] = f.label();
        j["sender"] = detail::interval_json(out);
        j["receiver"] = detail::interval_json(in);
        j["case"] = std::string(1, case_letter(cc));
        j["name"] = to_string(cc);
        j["lack"] = g.lack_possible;
        j["overabundance"] = g.overabundance_possible;
        j["compatible"] = g.compatible;
        lines += j.dump() + "\n";
    }
    return fmt == Format::text ? detail::table(rows) : lines;
}

// ============================================================================
// plan
// ============================================================================

inline int plan_exit_code(const CompositionPlan& plan) {
    if (!plan.feasible) return exit_code::infeasible;
    int code = exit_code::ok;
    for (const auto& f : plan.flows) {
        if (std::holds_alternative<Infeasible>(f.grade)) return exit_code::infeasible;
        if (!std::holds_alternative<Certain>(f.grade)) code = exit_code::not_certain;
    }
    return code;
}

inline std::string grade_detail(const Grade& g) {
    if (auto mn = planned_counts(g)) return "sender_calls=" + std::to_string(mn->first) + ", receiver_calls=" + std::to_string(mn->second);
    if (const auto* i = std::get_if<Infeasible>(&g)) return i->reason;
    return "decided at runtime";
}

inline std::string render_plan(const Composition& c, const CompositionPlan& plan, Format fmt) {
    std::string out;
    if (fmt == Format::text) {
        if (plan.feasible) {
            for (const auto& [id, n] : plan.invocations)
                out += id + ": " + std::to_string(n) + (n == 1 ? " invocation" : " invocations") + "\n";
            out += "total: " + std::to_string(plan.total_invocations) + " invocations\n";
        } else {
            out += "infeasible: no joint invocation counts satisfy every flow\n";
            std::string names;
            for (auto i : plan.conflicting_flows) names += (names.empty() ? "" : ", ") + c.flows[i].label();
            out += "conflicting flows (leave-one-out): " + (names.empty() ? std::string("none isolated") : names) + "\n";
        }
        for (const auto& f : plan.flows) {
            out += f.flow.label() + ": grade " + grade_name(f.grade) + " (" + grade_detail(f.grade) + "), case " +
                   case_letter(f.compat) + " " + to_string(f.compat) + (f.at_ceiling ? ", at search ceiling" : "") +
                   "\n";
        }
        return out;
    }

    for (const auto& [id, n] : plan.invocations) {
        detail::ojson j;
        j["type"] = "service";
        j["id"] = id;
        j["invocations"] = n;
        out += j.dump() + "\n";
    }
    for (const auto& f : plan.flows) {
        detail::ojson j;
        j["type"] = "flow";
        j["flow"] = f.flow.label();
        j["grade"] = grade_name(f.grade);
        if (auto mn = planned_counts(f.grade)) {
            j["sender_calls"] = mn->first;
            j["receiver_calls"] = mn->second;
        }
        if (const auto* i = std::get_if<Infeasible>(&f.grade)) j["reason"] = i->reason;
        j["case"] = std::string(1, case_letter(f.compat));
        j["at_ceiling"] = f.at_ceiling;
        out += j.dump() + "\n";
    }
    detail::ojson s;
    s["type"] = "summary";
    s["feasible"] = plan.feasible;
    s["total_invocations"] = plan.total_invocations;
    s["conflicting_flows"] = detail::ojson::array();
    for (auto i : plan.conflicting_flows) s["conflicting_flows"].push_back(c.flows[i].label());
    out += s.dump() + "\n";
    return out;
}

// ============================================================================
// simulate
// ============================================================================

struct SimulationSummary {
    std::uint64_t runs = 0;
    std::uint64_t successes = 0;
    std::map<std::string, ServiceUsage> usage;  ///< planned per run, actual summed over runs

    void add(const SimulationReport& r) {
        ++runs;
        if (r.success()) ++successes;
        for (const auto& [id, u] : r.usage) {
            usage[id].planned = u.planned;
            usage[id].actual += u.actual;
        }
    }

    double success_ratio() const { return runs == 0 ? 0.0 : static_cast<double>(successes) / static_cast<double>(runs); }
};

inline std::string render_simulation(const SimulationSummary& s, Format fmt) {
    if (fmt == Format::text) {
        std::string out = "runs: " + std::to_string(s.runs) + "\n";
        out += "successes: " + std::to_string(s.successes) + "\n";
        out += "success ratio: " + detail::ratio(s.success_ratio()) + "\n";
        for (const auto& [id, u] : s.usage)
            out += id + ": planned " + std::to_string(u.planned) + " per run, " + std::to_string(u.actual) +
                   " invocations in total\n";
        return out;
    }
    std::string out;
    detail::ojson j;
    j["type"] = "summary";
    j["runs"] = s.runs;
    j["successes"] = s.successes;
    j["success_ratio"] = s.success_ratio();
    out += j.dump() + "\n";
    for (const auto& [id, u] : s.usage) {
        detail::ojson k;
        k["type"] = "service";
        k["id"] = id;
        k["planned"] = u.planned;
        k["invocations"] = u.actual;
        out += k.dump() + "\n";
    }
    return out;
}

/// Full per-run reports as one JSON array, indexed by run.
inline std::string render_reports(const std::vector<SimulationReport>& runs) {
    auto all = detail::ojson::array();
    for (const auto& r : runs) all.push_back(r.to_json());
    return all.dump(2) + "\n";
}

/// Trace lines of one simulation run, one event per line.
inline std::string render_trace(const SimulationReport& r, std::uint64_t run) {
    std::string out;
    for (const auto& f : r.flows) {
        detail::ojson prefix;
        prefix["run"] = run;
        prefix["flow"] = f.flow;
        out += f.trace.to_json_lines(prefix);
        if (!f.success && f.trace.events.empty()) {
            detail::ojson j = prefix;
            j["seq"] = 0;
            j["event"] = "fail";
            j["reason"] = f.failure;
            out += j.dump() + "\n";
        }
    }
    return out;
}

}  // namespace cardmed::report
