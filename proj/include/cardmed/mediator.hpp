#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <variant>
#include <vector>

#include <json.hpp>

#include "cardmed/classifier.hpp"
#include "cardmed/errors.hpp"
#include "cardmed/interval.hpp"
#include "cardmed/model.hpp"
#include "cardmed/planner.hpp"

namespace cardmed {

// ============================================================================
// Elements and batches
// ============================================================================

struct Origin {
    std::string service;
    std::uint64_t invocation = 0;
    std::uint64_t position = 0;
    friend bool operator==(const Origin&, const Origin&) = default;
};

/// Data instance moving along a flow. Two elements are duplicates iff their keys are equal.
struct Element {
    std::string key;
    std::string payload;
    Origin origin;
    friend bool operator==(const Element&, const Element&) = default;
};

struct Batch {
    std::vector<Element> elements;
    std::string destination;
};

/// Projection used for duplicate detection.
struct key_of {
    template <class T>
    const auto& operator()(const T& e) const noexcept {
        return e.key;
    }
};

// ============================================================================
// select / merge / rm_dup
// ============================================================================

/// Picks `k` elements of `list` per `strategy`. First, Last and Stride keep
/// the relative input order; Explicit returns the listed indices in listed
/// order (its first k entries).
template <class T>
std::vector<T> select(std::span<const T> list, const SelectStrategy& strategy, std::size_t k) {
    std::vector<T> out;
    out.reserve(k);
    std::visit(
        [&](const auto& s) {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, SelectFirst>) {
                if (k > list.size()) throw selection_shortfall(k, list.size());
                out.assign(list.begin(), list.begin() + static_cast<std::ptrdiff_t>(k));
            } else if constexpr (std::is_same_v<S, SelectLast>) {
                if (k > list.size()) throw selection_shortfall(k, list.size());
                out.assign(list.end() - static_cast<std::ptrdiff_t>(k), list.end());
            } else if constexpr (std::is_same_v<S, SelectStride>) {
                if (s.step == 0) throw mediation_error("stride must be at least 1");
                const std::size_t available = list.empty() ? 0 : (list.size() - 1) / s.step + 1;
                if (k > available) throw selection_shortfall(k, available);
                for (std::size_t i = 0; out.size() < k; i += s.step) out.push_back(list[i]);
            } else {
                if (k > s.indices.size()) throw selection_shortfall(k, s.indices.size());
                for (std::size_t i = 0; i < k; ++i) {
                    const std::size_t idx = s.indices[i];
                    if (idx >= list.size())
                        throw mediation_error("explicit selection index " + std::to_string(idx) +
                                              " out of range for " + std::to_string(list.size()) + " element(s)");
                    out.push_back(list[idx]);
                }
            }
        },
        strategy);
    return out;
}

template <class T>
std::vector<T> select(const std::vector<T>& list, const SelectStrategy& strategy, std::size_t k) {
    return select(std::span<const T>(list), strategy, k);
}

/// Indices `select` would keep, in output order.
inline std::vector<std::size_t> selected_indices(std::size_t size, const SelectStrategy& strategy, std::size_t k) {
    std::vector<std::size_t> idx(size);
    for (std::size_t i = 0; i < size; ++i) idx[i] = i;
    return select(std::span<const std::size_t>(idx), strategy, k);
}

template <class T>
std::vector<T> merge(std::span<const T> first, std::span<const T> second, const MergeStrategy& strategy) {
    std::vector<T> out;
    out.reserve(first.size() + second.size());
    auto concat = [&](std::span<const T> x, std::span<const T> y) {
        out.insert(out.end(), x.begin(), x.end());
        out.insert(out.end(), y.begin(), y.end());
    };
    std::visit(
        [&](const auto& s) {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, MergeConcatAB>) {
                concat(first, second);
            } else if constexpr (std::is_same_v<S, MergeConcatBA>) {
                concat(second, first);
            } else if constexpr (std::is_same_v<S, MergeInterleavePairs>) {
                std::size_t i = 0, j = 0;
                while (i < first.size() || j < second.size()) {
                    for (int t = 0; t < 2 && i < first.size(); ++t) out.push_back(first[i++]);
                    for (int t = 0; t < 2 && j < second.size(); ++t) out.push_back(second[j++]);
                }
            } else {
                const std::size_t total = first.size() + second.size();
                if (s.permutation.size() != total)
                    throw merge_policy_error("explicit merge permutation has " + std::to_string(s.permutation.size()) +
                                             " entries for " + std::to_string(total) + " element(s)");
                std::vector<bool> seen(total, false);
                for (auto p : s.permutation) {
                    if (p >= total || seen[p])
                        throw merge_policy_error("explicit merge permutation is not a bijection on [0, " +
                                                 std::to_string(total) + ")");
                    seen[p] = true;
                }
                for (auto p : s.permutation) out.push_back(p < first.size() ? first[p] : second[p - first.size()]);
            }
        },
        strategy);
    return out;
}

template <class T>
std::vector<T> merge(const std::vector<T>& first, const std::vector<T>& second, const MergeStrategy& strategy) {
    return merge(std::span<const T>(first), std::span<const T>(second), strategy);
}

/// Drops duplicates by key. RemoveFirst keeps the last occurrence of each
/// key, RemoveLast keeps the first; survivors keep their relative order.
template <class T, class KeyFn = key_of>
std::vector<T> rm_dup(std::span<const T> list, DedupStrategy strategy, KeyFn key = {}) {
    using K = std::decay_t<decltype(key(list[0]))>;
    std::vector<T> out;
    std::unordered_set<K> seen;
    if (strategy == DedupStrategy::remove_last) {
        for (const auto& e : list)
            if (seen.insert(key(e)).second) out.push_back(e);
        return out;
    }
    std::vector<bool> keep(list.size(), false);
    for (std::size_t i = list.size(); i-- > 0;)
        keep[i] = seen.insert(key(list[i])).second;
    for (std::size_t i = 0; i < list.size(); ++i)
        if (keep[i]) out.push_back(list[i]);
    return out;
}

template <class T, class KeyFn = key_of>
std::vector<T> rm_dup(const std::vector<T>& list, DedupStrategy strategy, KeyFn key = {}) {
    return rm_dup(std::span<const T>(list), strategy, key);
}

// ============================================================================
// Batching
// ============================================================================

/// Batch sizes for `count` elements over n batches within `bounds`: the
/// first (count mod n) batches get one extra element. With n*x <= count <=
/// n*y every size lands in [x, y]: floor(count/n) >= x, and when the
/// remainder is non-zero floor(count/n) < count/n <= y.
inline std::vector<std::size_t> batch_sizes(std::size_t count, std::size_t n, const Interval& bounds) {
    if (n == 0) throw partition_error("cannot partition into zero batches");
    const Interval window = interval_scale(bounds, n);
    if (!window.contains(count))
        throw partition_error("cannot split " + std::to_string(count) + " element(s) into " + std::to_string(n) +
                              " batch(es) of size " + bounds.to_string() + " (needs " + window.to_string() + ")");
    std::vector<std::size_t> sizes(n, count / n);
    for (std::size_t i = 0; i < count % n; ++i) ++sizes[i];
    return sizes;
}

template <class T>
std::vector<std::vector<T>> partition_batches(std::span<const T> list, std::size_t n, const Interval& bounds) {
    const auto sizes = batch_sizes(list.size(), n, bounds);
    std::vector<std::vector<T>> out;
    out.reserve(n);
    auto it = list.begin();
    for (auto s : sizes) {
        out.emplace_back(it, it + static_cast<std::ptrdiff_t>(s));
        it += static_cast<std::ptrdiff_t>(s);
    }
    return out;
}

template <class T>
std::vector<std::vector<T>> partition_batches(const std::vector<T>& list, std::size_t n, const Interval& bounds) {
    return partition_batches(std::span<const T>(list), n, bounds);
}

// ============================================================================
// Trace
// ============================================================================

namespace event {
struct Invoke {
    std::string service;
    std::uint64_t ordinal;
};
struct Emit {
    std::uint64_t count;
};
struct Merge {
    std::string strategy;
    std::uint64_t size;
};
struct Dedup {
    std::uint64_t removed;  ///< over the whole merged list so far
};
struct Select {
    std::vector<std::size_t> kept;
};
struct Deliver {
    std::vector<std::size_t> batch_sizes;
};
struct Escalate {
    std::uint64_t ordinal;  ///< ordinal of the extra invocation
};
struct Fail {
    std::string reason;
    char compat_case;
    std::uint64_t emitted;
    std::uint64_t unique;
    std::uint64_t invocations;
};
}  // namespace event

using TraceEvent = std::variant<event::Invoke, event::Emit, event::Merge, event::Dedup, event::Select, event::Deliver,
                                event::Escalate, event::Fail>;

inline nlohmann::ordered_json to_json(const TraceEvent& e) {
    nlohmann::ordered_json j;
    std::visit(
        [&](const auto& ev) {
            using E = std::decay_t<decltype(ev)>;
            if constexpr (std::is_same_v<E, event::Invoke>) {
                j["event"] = "invoke";
                j["service"] = ev.service;
                j["ordinal"] = ev.ordinal;
            } else if constexpr (std::is_same_v<E, event::Emit>) {
                j["event"] = "emit";
                j["count"] = ev.count;
            } else if constexpr (std::is_same_v<E, event::Merge>) {
                j["event"] = "merge";
                j["strategy"] = ev.strategy;
                j["size"] = ev.size;
            } else if constexpr (std::is_same_v<E, event::Dedup>) {
                j["event"] = "dedup";
                j["removed"] = ev.removed;
            } else if constexpr (std::is_same_v<E, event::Select>) {
                j["event"] = "select";
                j["kept"] = ev.kept;
            } else if constexpr (std::is_same_v<E, event::Deliver>) {
                j["event"] = "deliver";
                j["batch_sizes"] = ev.batch_sizes;
            } else if constexpr (std::is_same_v<E, event::Escalate>) {
                j["event"] = "escalate";
                j["ordinal"] = ev.ordinal;
            } else {
                j["event"] = "fail";
                j["reason"] = ev.reason;
                j["case"] = std::string(1, ev.compat_case);
                j["emitted"] = ev.emitted;
                j["unique"] = ev.unique;
                j["invocations"] = ev.invocations;
            }
        },
        e);
    return j;
}

struct MediationTrace {
    std::vector<TraceEvent> events;

    void push(TraceEvent e) { events.push_back(std::move(e)); }

    std::uint64_t emitted() const {
        std::uint64_t n = 0;
        for (const auto& e : events)
            if (const auto* em = std::get_if<event::Emit>(&e)) n += em->count;
        return n;
    }
    /// Removal count of the last dedup pass (it covers the whole merged list).
    std::uint64_t removed() const {
        std::uint64_t n = 0;
        for (const auto& e : events)
            if (const auto* d = std::get_if<event::Dedup>(&e)) n = d->removed;
        return n;
    }
    std::uint64_t delivered() const {
        std::uint64_t n = 0;
        for (const auto& e : events)
            if (const auto* d = std::get_if<event::Deliver>(&e))
                for (auto s : d->batch_sizes) n += s;
        return n;
    }
    /// Elements discarded by selection.
    std::uint64_t dropped() const { return dropped_; }
    void set_dropped(std::uint64_t d) { dropped_ = d; }

    /// One JSON object per line, `prefix` fields first.
    std::string to_json_lines(const nlohmann::ordered_json& prefix = nlohmann::ordered_json::object()) const {
        std::string out;
        std::size_t seq = 0;
        for (const auto& e : events) {
            nlohmann::ordered_json line = prefix;
            line["seq"] = seq++;
            const auto fields = to_json(e);
            for (const auto& [k, v] : fields.items()) line[k] = v;
            out += line.dump();
            out += '\n';
        }
        return out;
    }

private:
    std::uint64_t dropped_ = 0;
};

// ============================================================================
// Flow execution
// ============================================================================

enum class FailureReason {
    InsufficientElements,  ///< fewer elements than the receiver minimum
    InsufficientUnique,    ///< fewer unique elements than the receiver minimum after dedup
    NoFeasibleWindow,      ///< count lies outside every n*[x,y] reachable within the receiver cap
};

inline const char* to_string(FailureReason r) {
    switch (r) {
        case FailureReason::InsufficientElements: return "InsufficientElements";
        case FailureReason::InsufficientUnique: return "InsufficientUnique";
        case FailureReason::NoFeasibleWindow: return "NoFeasibleWindow";
    }
    return "Unknown";
}

/// Runtime budgets and receiver window for one flow.
struct FlowLimits {
    Interval receiver_in;                    ///< [x, y] per receiver invocation
    std::uint64_t sender_budget = 1;         ///< invocations the sender may perform in total
    std::uint64_t receiver_budget = 1;       ///< batches the receiver may accept
    std::uint64_t planned_invocations = 1;   ///< initial sender invocations for RuntimeOnly grades
};

/// Emission of the sender's invocation with the given ordinal.
using EmissionSource = std::function<std::vector<Element>(std::uint64_t ordinal)>;

struct FlowExecution {
    std::vector<Batch> batches;
    MediationTrace trace;
    std::optional<FailureReason> failure;
    std::uint64_t sender_invocations = 0;

    bool success() const noexcept { return !failure.has_value(); }
};

/// Merge policy actually applied: ordered flows concatenate unless the
/// designer supplied an explicit permutation.
inline MergeStrategy effective_merge(const DataFlow& flow) {
    if (flow.ord && !std::holds_alternative<MergeExplicit>(flow.policies.merge)) return MergeConcatAB{};
    return flow.policies.merge;
}

/// Rejects policies that would reorder elements of an ordered flow.
inline void check_order_policy(const DataFlow& flow) {
    if (!flow.ord || !flow.sel) return;
    if (const auto* e = std::get_if<SelectExplicit>(&flow.policies.select)) {
        if (!std::is_sorted(e->indices.begin(), e->indices.end()))
            throw order_violation("flow " + flow.label() +
                                  " requires ordering but its explicit selection list is not ascending");
    }
}

/// Runs one flow at the instance level: invoke the sender as planned, merge
/// the successive results, drop duplicates when they are not tolerated, pick
/// the receiver invocation count, trim by selection and deliver batches.
/// Probable and RuntimeOnly plans escalate one sender invocation at a time
/// up to the sender budget before failing.
inline FlowExecution execute_flow(const FlowPlan& plan, const DataFlow& flow, const EmissionSource& source,
                                  const FlowLimits& limits) {
    if (std::holds_alternative<Infeasible>(plan.grade))
        throw mediation_error("flow " + flow.label() + " has an infeasible plan");
    check_order_policy(flow);

    FlowExecution ex;
    auto& trace = ex.trace;
    const MergeStrategy merge_policy = effective_merge(flow);
    const bool may_escalate = !std::holds_alternative<Certain>(plan.grade);
    const std::uint64_t initial =
        std::min(limits.sender_budget, planned_counts(plan.grade) ? planned_counts(plan.grade)->first
                                                                  : limits.planned_invocations);

    std::vector<Element> merged;
    std::uint64_t invoked = 0;
    auto invoke_next = [&] {
        auto out = source(invoked);
        trace.push(event::Invoke{flow.sender, invoked});
        trace.push(event::Emit{out.size()});
        if (invoked == 0) {
            merged = std::move(out);
        } else {
            merged = merge(merged, out, merge_policy);
            trace.push(event::Merge{strategy_name(merge_policy), merged.size()});
        }
        ++invoked;
    };

    while (invoked < std::max<std::uint64_t>(initial, 1)) invoke_next();

    std::vector<Element> working;
    std::optional<std::uint64_t> n;
    for (;;) {
        if (flow.dup) {
            working = merged;
        } else {
            working = rm_dup(merged, flow.policies.dedup);
            trace.push(event::Dedup{merged.size() - working.size()});
        }
        n = runtime_feasibility(working.size(), limits.receiver_in, flow.sel, limits.receiver_budget);
        if (n || !may_escalate || invoked >= limits.sender_budget) break;
        trace.push(event::Escalate{invoked});
        invoke_next();
    }
    ex.sender_invocations = invoked;

    if (!n) {
        FailureReason reason = FailureReason::NoFeasibleWindow;
        if (working.size() < limits.receiver_in.lo)
            reason = flow.dup ? FailureReason::InsufficientElements : FailureReason::InsufficientUnique;
        ex.failure = reason;
        trace.push(event::Fail{to_string(reason), case_letter(plan.compat), merged.size(), working.size(), invoked});
        return ex;
    }

    const Interval window = interval_scale(limits.receiver_in, *n);
    if (flow.sel && !window.contains(working.size())) {
        const auto k = static_cast<std::size_t>(window.hi.value());
        auto kept = selected_indices(working.size(), flow.policies.select, k);
        std::vector<Element> chosen;
        chosen.reserve(kept.size());
        for (auto i : kept) chosen.push_back(working[i]);
        trace.set_dropped(working.size() - chosen.size());
        trace.push(event::Select{std::move(kept)});
        working = std::move(chosen);
    }

    auto parts = partition_batches(working, static_cast<std::size_t>(*n), limits.receiver_in);
    std::vector<std::size_t> sizes;
    sizes.reserve(parts.size());
    for (auto& p : parts) {
        sizes.push_back(p.size());
        ex.batches.push_back({std::move(p), flow.receiver});
    }
    trace.push(event::Deliver{std::move(sizes)});
    return ex;
}

}  // namespace cardmed
