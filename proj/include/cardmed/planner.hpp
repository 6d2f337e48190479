#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "cardmed/classifier.hpp"
#include "cardmed/errors.hpp"
#include "cardmed/fdsolve.hpp"
#include "cardmed/interval.hpp"
#include "cardmed/model.hpp"

namespace cardmed {

struct PlannerConfig {
    /// Replaces Unbounded (and any larger) invocation caps during search.
    std::uint64_t search_ceiling = 100;
    /// Joint plans minimise total invocations; false takes the first labeled solution.
    bool optimize = true;
};

// ============================================================================
// Grades
// ============================================================================

/// m*[a,b] ⊆ n*[x,y]: every runtime outcome is deliverable.
struct Certain {
    std::uint64_t sender_calls = 1;
    std::uint64_t receiver_calls = 1;
    friend bool operator==(const Certain&, const Certain&) = default;
};
/// m*[a,b] ∩ n*[x,y] ≠ ∅: some runtime outcomes are deliverable.
struct Probable {
    std::uint64_t sender_calls = 1;
    std::uint64_t receiver_calls = 1;
    friend bool operator==(const Probable&, const Probable&) = default;
};
/// Duplicate-intolerant flow: success depends on the unique count at runtime.
struct RuntimeOnly {
    friend bool operator==(const RuntimeOnly&, const RuntimeOnly&) = default;
};
struct Infeasible {
    std::string reason;
    friend bool operator==(const Infeasible&, const Infeasible&) = default;
};

using Grade = std::variant<Certain, Probable, RuntimeOnly, Infeasible>;

inline const char* grade_name(const Grade& g) {
    constexpr const char* names[] = {"Certain", "Probable", "RuntimeOnly", "Infeasible"};
    return names[g.index()];
}

/// Planned (m, n) for Certain and Probable grades.
inline std::optional<std::pair<std::uint64_t, std::uint64_t>> planned_counts(const Grade& g) {
    if (const auto* c = std::get_if<Certain>(&g)) return std::pair{c->sender_calls, c->receiver_calls};
    if (const auto* p = std::get_if<Probable>(&g)) return std::pair{p->sender_calls, p->receiver_calls};
    return std::nullopt;
}

enum class Regime {
    DupTolerantSelIntolerant,
    DupTolerantSelTolerant,
    DupIntolerantSelIntolerant,
    DupIntolerantSelTolerant,
};

inline Regime regime_of(const DataFlow& f) noexcept {
    if (f.dup) return f.sel ? Regime::DupTolerantSelTolerant : Regime::DupTolerantSelIntolerant;
    return f.sel ? Regime::DupIntolerantSelTolerant : Regime::DupIntolerantSelIntolerant;
}

struct FlowPlan {
    DataFlow flow;
    Grade grade;
    CompatibilityCase compat = CompatibilityCase::Compatible;
    /// A count sits at search_ceiling because the real cap is larger; raise the ceiling to explore further.
    bool at_ceiling = false;
};

struct CompositionPlan {
    bool feasible = false;
    std::map<std::string, std::uint64_t> invocations;
    std::vector<FlowPlan> flows;  ///< same order as Composition::flows
    std::uint64_t total_invocations = 0;
    /// Indices of flows whose removal alone restores feasibility (when infeasible).
    std::vector<std::size_t> conflicting_flows;
    std::vector<std::string> ceiling_hits;
};

// ============================================================================
// Helpers
// ============================================================================

inline std::uint64_t effective_cap(const Bound& inv_max, const PlannerConfig& cfg) {
    return inv_max.is_unbounded() ? cfg.search_ceiling : std::min(inv_max.value(), cfg.search_ceiling);
}

inline bool capped_by_ceiling(const Bound& inv_max, const PlannerConfig& cfg) {
    return inv_max.is_unbounded() || inv_max.value() > cfg.search_ceiling;
}

inline Interval sender_constraint(const ServiceSpec& s) {
    auto k = s.output_schema.active_constraint();
    if (!k) throw configuration_error("service '" + s.id + "' has no active output constraint");
    if (!k->well_formed()) throw configuration_error("service '" + s.id + "' output constraint is inverted");
    return *k;
}

inline Interval receiver_constraint(const ServiceSpec& s) {
    auto k = s.input_schema.active_constraint();
    if (!k) throw configuration_error("service '" + s.id + "' has no active input constraint");
    if (!k->well_formed()) throw configuration_error("service '" + s.id + "' input constraint is inverted");
    return *k;
}

namespace detail {

inline fd::value_t fd_coeff(std::uint64_t v) {
    if (v > static_cast<std::uint64_t>(fd::max_magnitude))
        throw std::out_of_range("cardinality " + std::to_string(v) + " exceeds the solver range");
    return static_cast<fd::value_t>(v);
}

/// 1*u <= 0*u: wipes out u (domains start at 1).
inline void add_contradiction(fd::Problem& p, fd::VarId u) { p.add_leq(1, u, 0, u); }

enum class Window { Subset, Intersection };

/// Constraints tying sender count m and receiver count n for a dup-tolerant,
/// selection-intolerant flow. Unbounded maxima drop or contradict the
/// inequality they appear in.
inline void add_window_constraints(fd::Problem& p, fd::VarId m, fd::VarId n, const Interval& sender,
                                   const Interval& receiver, Window w) {
    const fd::value_t a = fd_coeff(sender.lo);
    const fd::value_t x = fd_coeff(receiver.lo);
    if (w == Window::Subset) {
        p.add_leq(x, n, a, m);  // n*x <= m*a
        if (receiver.hi.is_bounded()) {
            if (sender.hi.is_unbounded()) {
                add_contradiction(p, m);
            } else {
                p.add_leq(fd_coeff(sender.hi.value()), m, fd_coeff(receiver.hi.value()), n);  // m*b <= n*y
            }
        }
    } else {
        if (receiver.hi.is_bounded()) p.add_leq(a, m, fd_coeff(receiver.hi.value()), n);  // m*a <= n*y
        if (sender.hi.is_bounded()) p.add_leq(x, n, fd_coeff(sender.hi.value()), m);      // n*x <= m*b
    }
}

}  // namespace detail

// ============================================================================
// Single flow
// ============================================================================

inline FlowPlan plan_flow(const DataFlow& flow, const ServiceSpec& sender, const ServiceSpec& receiver,
                          const PlannerConfig& cfg = {}) {
    const Interval out = sender_constraint(sender);
    const Interval in = receiver_constraint(receiver);

    FlowPlan plan{flow, RuntimeOnly{}, classify_pair(out, in), false};
    const std::uint64_t mcap = effective_cap(sender.inv_max, cfg);
    const std::uint64_t ncap = effective_cap(receiver.inv_max, cfg);
    auto flag = [&](std::uint64_t m, std::uint64_t n) {
        plan.at_ceiling = (m == mcap && capped_by_ceiling(sender.inv_max, cfg)) ||
                          (n == ncap && capped_by_ceiling(receiver.inv_max, cfg));
    };

    switch (regime_of(flow)) {
        case Regime::DupTolerantSelIntolerant: {
            for (auto w : {detail::Window::Subset, detail::Window::Intersection}) {
                fd::Problem p;
                const auto m = p.add_variable("sender_calls", 1, detail::fd_coeff(mcap));
                const auto n = p.add_variable("receiver_calls", 1, detail::fd_coeff(ncap));
                detail::add_window_constraints(p, m, n, out, in, w);
                if (auto s = fd::first_solution(p)) {
                    const auto mm = static_cast<std::uint64_t>((*s)[m]);
                    const auto nn = static_cast<std::uint64_t>((*s)[n]);
                    if (w == detail::Window::Subset)
                        plan.grade = Certain{mm, nn};
                    else
                        plan.grade = Probable{mm, nn};
                    flag(mm, nn);
                    return plan;
                }
            }
            plan.grade = Infeasible{"no invocation counts within caps make " + out.to_string() + " scaled meet " +
                                    in.to_string() + " scaled"};
            return plan;
        }
        case Regime::DupTolerantSelTolerant: {
            // smallest m with m*a >= x; the receiver is called once and selection trims the surplus
            std::uint64_t m = 1;
            if (in.lo > 0) {
                if (out.lo == 0) {
                    plan.grade = Infeasible{"sender minimum is 0, so no invocation count guarantees " +
                                            std::to_string(in.lo) + " element(s)"};
                    return plan;
                }
                m = std::max<std::uint64_t>(1, (in.lo + out.lo - 1) / out.lo);
            }
            if (m > mcap) {
                plan.grade = Infeasible{"needs " + std::to_string(m) + " sender invocations, cap is " +
                                        std::to_string(mcap)};
                return plan;
            }
            plan.grade = Certain{m, 1};
            flag(m, 1);
            return plan;
        }
        case Regime::DupIntolerantSelIntolerant:
        case Regime::DupIntolerantSelTolerant: plan.grade = RuntimeOnly{}; return plan;
    }
    return plan;
}

// ============================================================================
// Whole composition
// ============================================================================

namespace detail {

struct JointModel {
    fd::Problem problem;
    std::map<std::string, fd::VarId> var_of;
};

/// One variable per service (id order) plus a constant-1 variable for
/// m*a >= x rows. Flows listed in `skip` contribute nothing.
inline JointModel build_joint(const Composition& c, const PlannerConfig& cfg, Window w,
                              std::optional<std::size_t> skip = std::nullopt) {
    JointModel jm;
    for (const auto& id : c.ids_sorted())
        jm.var_of[id] = jm.problem.add_variable(id, 1, fd_coeff(effective_cap(c.at(id).inv_max, cfg)));
    std::optional<fd::VarId> one;
    for (std::size_t i = 0; i < c.flows.size(); ++i) {
        if (skip && *skip == i) continue;
        const auto& f = c.flows[i];
        const Interval out = sender_constraint(c.at(f.sender));
        const Interval in = receiver_constraint(c.at(f.receiver));
        const fd::VarId m = jm.var_of.at(f.sender);
        const fd::VarId n = jm.var_of.at(f.receiver);
        switch (regime_of(f)) {
            case Regime::DupTolerantSelIntolerant: add_window_constraints(jm.problem, m, n, out, in, w); break;
            case Regime::DupTolerantSelTolerant:
                if (!one) one = jm.problem.add_variable("$one", 1, 1);
                jm.problem.add_leq(fd_coeff(in.lo), *one, fd_coeff(out.lo), m);  // x*1 <= a*m
                break;
            default: break;
        }
    }
    return jm;
}

inline std::optional<fd::Assignment> solve_joint(const fd::Problem& p, const PlannerConfig& cfg) {
    return cfg.optimize ? fd::minimize_sum(p) : fd::first_solution(p);
}

inline bool is_static(const DataFlow& f) { return f.dup; }

}  // namespace detail

/// Plans all flows jointly: a service's invocation count is shared by every
/// flow touching it. Subset windows are tried first; if they admit no
/// solution the intersection windows are used and grades drop to Probable
/// where the subset condition fails.
inline CompositionPlan plan_composition(const Composition& c, const PlannerConfig& cfg = {}) {
    if (auto report = validate_composition(c); !report.ok()) {
        std::string msg = "composition is not well-formed:";
        for (const auto& i : report.issues) msg += std::string(" ") + to_string(i.code) + "@" + i.where;
        throw configuration_error(msg);
    }

    CompositionPlan plan;
    plan.flows.reserve(c.flows.size());
    for (const auto& f : c.flows) {
        plan.flows.push_back(
            {f, RuntimeOnly{}, classify_pair(sender_constraint(c.at(f.sender)), receiver_constraint(c.at(f.receiver))),
             false});
    }

    std::optional<fd::Assignment> sol;
    detail::JointModel jm;
    for (auto w : {detail::Window::Subset, detail::Window::Intersection}) {
        jm = detail::build_joint(c, cfg, w);
        sol = detail::solve_joint(jm.problem, cfg);
        if (sol) break;
    }

    if (!sol) {
        auto weakest = [&](std::optional<std::size_t> skip) {
            return detail::build_joint(c, cfg, detail::Window::Intersection, skip);
        };
        for (std::size_t i = 0; i < c.flows.size(); ++i) {
            if (!detail::is_static(c.flows[i])) continue;
            const auto without = weakest(i);
            if (fd::first_solution(without.problem)) plan.conflicting_flows.push_back(i);
        }
        for (std::size_t i = 0; i < c.flows.size(); ++i) {
            const bool named = std::find(plan.conflicting_flows.begin(), plan.conflicting_flows.end(), i) !=
                               plan.conflicting_flows.end();
            plan.flows[i].grade = Infeasible{named ? "constraints of this flow conflict with the rest of the composition"
                                                   : "composition has no joint solution"};
        }
        return plan;
    }

    plan.feasible = true;
    for (const auto& [id, var] : jm.var_of) {
        const auto v = static_cast<std::uint64_t>((*sol)[var]);
        plan.invocations[id] = v;
        plan.total_invocations += v;
        const auto& spec = c.at(id);
        if (v == effective_cap(spec.inv_max, cfg) && capped_by_ceiling(spec.inv_max, cfg))
            plan.ceiling_hits.push_back(id);
    }

    for (std::size_t i = 0; i < c.flows.size(); ++i) {
        const auto& f = c.flows[i];
        auto& fp = plan.flows[i];
        const std::uint64_t m = plan.invocations.at(f.sender);
        const std::uint64_t n = plan.invocations.at(f.receiver);
        fp.at_ceiling = std::find(plan.ceiling_hits.begin(), plan.ceiling_hits.end(), f.sender) !=
                            plan.ceiling_hits.end() ||
                        std::find(plan.ceiling_hits.begin(), plan.ceiling_hits.end(), f.receiver) !=
                            plan.ceiling_hits.end();
        switch (regime_of(f)) {
            case Regime::DupTolerantSelIntolerant: {
                const Interval out = sender_constraint(c.at(f.sender));
                const Interval in = receiver_constraint(c.at(f.receiver));
                if (interval_subset(interval_scale(out, m), interval_scale(in, n)))
                    fp.grade = Certain{m, n};
                else
                    fp.grade = Probable{m, n};
                break;
            }
            case Regime::DupTolerantSelTolerant: fp.grade = Certain{m, n}; break;
            default: fp.grade = RuntimeOnly{}; break;
        }
    }
    return plan;
}

// ============================================================================
// Runtime feasibility (duplicate-intolerant flows, and runtime batching)
// ============================================================================

/// Number of receiver invocations that can absorb `unique_count` elements.
///  - sel = false: smallest n <= nmax with n*x <= count <= n*y.
///  - sel = true:  largest n <= nmax with n*x <= count (surplus is trimmed by selection).
inline std::optional<std::uint64_t> runtime_feasibility(std::uint64_t unique_count, const Interval& receiver, bool sel,
                                                        std::uint64_t nmax) {
    const std::uint64_t x = receiver.lo;
    if (nmax == 0) return std::nullopt;
    if (sel) {
        if (unique_count < x) return std::nullopt;
        if (x == 0) return nmax;
        return std::min(nmax, unique_count / x);
    }
    std::uint64_t n = 1;
    if (receiver.hi.is_bounded()) {
        const std::uint64_t y = receiver.hi.value();
        if (y == 0) {
            if (unique_count != 0) return std::nullopt;
        } else {
            n = std::max<std::uint64_t>(1, (unique_count + y - 1) / y);
        }
    }
    if (n > nmax) return std::nullopt;
    if (x != 0 && n > unique_count / x) return std::nullopt;
    return n;
}

}  // namespace cardmed
