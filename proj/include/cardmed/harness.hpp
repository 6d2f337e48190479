#pragma once

// Deterministic simulation of sender/receiver services.
//
// Generator (portable, so golden traces can be reproduced elsewhere):
//   * splitmix64(z): z += 0x9E3779B97F4A7C15; z = (z ^ z>>30) * 0xBF58476D1CE4E5B9;
//                    z = (z ^ z>>27) * 0x94D049BB133111EB; return z ^ z>>31.
//   * invocation `o` of a service with seed `s` draws from
//     std::mt19937_64(splitmix64(s ^ splitmix64(o))), whose output sequence
//     is fixed by the C++ standard.
//   * uniform integer below k: draw 64-bit words until w < 2^64 - (2^64 mod k),
//     return w mod k.
//   * unit real: (w >> 11) * 2^-53.
// Per invocation: count = a + uniform(b - a + 1); then for each position a
// unit real u, and the key is recycled iff some key was emitted before and
// u < duplicate_rate, in which case uniform(#prior keys) picks it.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <queue>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "cardmed/errors.hpp"
#include "cardmed/mediator.hpp"
#include "cardmed/model.hpp"
#include "cardmed/planner.hpp"

namespace cardmed {

namespace rng {

constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline std::mt19937_64 engine_for(std::uint64_t seed, std::uint64_t ordinal) {
    return std::mt19937_64(splitmix64(seed ^ splitmix64(ordinal)));
}

/// Uniform in [0, k). k must be positive.
inline std::uint64_t uniform_below(std::mt19937_64& g, std::uint64_t k) {
    // 2^64 mod k, computed without 128-bit arithmetic
    const std::uint64_t excess = (0 - k) % k;
    const std::uint64_t limit = 0 - excess;  // 2^64 - excess, with 0 meaning "accept everything"
    for (;;) {
        const std::uint64_t w = g();
        if (excess == 0 || w < limit) return w % k;
    }
}

inline double unit_real(std::mt19937_64& g) { return static_cast<double>(g() >> 11) * 0x1.0p-53; }

/// FNV-1a, used to give services without an explicit seed a stable one.
constexpr std::uint64_t fnv1a(std::string_view s) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace rng

/// Span added to an unbounded output minimum when sampling emission counts.
inline constexpr std::uint64_t unbounded_emission_span = 100;

struct MockServiceSpec {
    ServiceSpec service;
    std::uint64_t seed = 0;
    double duplicate_rate = 0.0;
    bool provider_mode = false;

    /// Provider mode forces fresh keys.
    static MockServiceSpec for_service(const ServiceSpec& s, std::uint64_t seed, double duplicate_rate) {
        return {s, seed, s.is_provider ? 0.0 : duplicate_rate, s.is_provider};
    }

    Interval count_range() const {
        const Interval out = sender_constraint(service);
        Interval r = out;
        if (out.hi.is_unbounded()) r.hi = out.lo + unbounded_emission_span;
        return r;
    }
};

namespace detail {

inline std::vector<Element> generate_invocation(const MockServiceSpec& spec, std::uint64_t ordinal,
                                                std::vector<std::string>& prior_keys) {
    auto g = rng::engine_for(spec.seed, ordinal);
    const Interval range = spec.count_range();
    const std::uint64_t count = range.lo + rng::uniform_below(g, range.hi.value() - range.lo + 1);
    const double rate = spec.provider_mode ? 0.0 : spec.duplicate_rate;

    std::vector<Element> out;
    out.reserve(count);
    for (std::uint64_t p = 0; p < count; ++p) {
        const double u = rng::unit_real(g);
        std::string key;
        if (!prior_keys.empty() && u < rate) {
            key = prior_keys[rng::uniform_below(g, prior_keys.size())];
        } else {
            key = spec.service.id + ":" + std::to_string(ordinal) + ":" + std::to_string(p);
        }
        prior_keys.push_back(key);
        out.push_back({key, "payload/" + spec.service.id + "/" + std::to_string(ordinal) + "/" + std::to_string(p),
                       {spec.service.id, ordinal, p}});
    }
    return out;
}

}  // namespace detail

/// Emission of invocation `ordinal`. A pure function of (spec, ordinal):
/// earlier invocations are replayed to know which keys can be recycled.
inline std::vector<Element> mock_invoke(const MockServiceSpec& spec, std::uint64_t ordinal) {
    if (spec.service.inv_max.is_bounded() && ordinal >= spec.service.inv_max.value())
        throw invocation_budget_exceeded(spec.service.id, spec.service.inv_max.value());
    std::vector<std::string> prior;
    for (std::uint64_t o = 0; o < ordinal; ++o) detail::generate_invocation(spec, o, prior);
    return detail::generate_invocation(spec, ordinal, prior);
}

/// Stateful wrapper that caches emissions; invocation i yields mock_invoke(spec, i).
class MockService {
public:
    explicit MockService(MockServiceSpec spec) : spec_(std::move(spec)) {}

    const std::vector<Element>& invoke(std::uint64_t ordinal) {
        if (spec_.service.inv_max.is_bounded() && ordinal >= spec_.service.inv_max.value())
            throw invocation_budget_exceeded(spec_.service.id, spec_.service.inv_max.value());
        while (log_.size() <= ordinal) log_.push_back(detail::generate_invocation(spec_, log_.size(), prior_));
        return log_[ordinal];
    }

    std::uint64_t invocations() const noexcept { return log_.size(); }
    const MockServiceSpec& spec() const noexcept { return spec_; }

private:
    MockServiceSpec spec_;
    std::vector<std::vector<Element>> log_;
    std::vector<std::string> prior_;
};

// ============================================================================
// Simulation
// ============================================================================

struct SimulationConfig {
    std::map<std::string, std::uint64_t> seeds;           ///< per service; missing ids use fnv1a(id)
    std::map<std::string, double> duplicate_rates;        ///< per service; default 0
    std::uint64_t search_ceiling = PlannerConfig{}.search_ceiling;  ///< budget for unbounded services
};

struct FlowOutcome {
    std::string flow;
    bool success = false;
    std::size_t batches = 0;
    std::uint64_t emitted = 0;
    std::uint64_t delivered = 0;
    std::string failure;  ///< reason when !success
    MediationTrace trace;
    std::vector<Batch> delivered_batches;
};

struct ServiceUsage {
    std::uint64_t planned = 0;
    std::uint64_t actual = 0;
};

struct SimulationReport {
    bool short_circuited = false;  ///< plan infeasible: nothing was invoked
    std::map<std::string, std::uint64_t> seeds;
    std::vector<FlowOutcome> flows;  ///< execution (topological) order
    std::map<std::string, ServiceUsage> usage;

    bool success() const {
        if (short_circuited) return false;
        return std::all_of(flows.begin(), flows.end(), [](const auto& f) { return f.success; });
    }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["generator"] = "mt19937_64/splitmix64";
        j["success"] = success();
        j["short_circuited"] = short_circuited;
        j["seeds"] = nlohmann::ordered_json::object();
        for (const auto& [id, s] : seeds) j["seeds"][id] = s;
        j["flows"] = nlohmann::ordered_json::array();
        for (const auto& f : flows) {
            nlohmann::ordered_json fj;
            fj["flow"] = f.flow;
            fj["success"] = f.success;
            fj["batches"] = f.batches;
            fj["emitted"] = f.emitted;
            fj["delivered"] = f.delivered;
            if (!f.success) fj["failure"] = f.failure;
            fj["trace"] = nlohmann::ordered_json::array();
            for (const auto& e : f.trace.events) fj["trace"].push_back(cardmed::to_json(e));
            j["flows"].push_back(std::move(fj));
        }
        j["usage"] = nlohmann::ordered_json::object();
        for (const auto& [id, u] : usage) j["usage"][id] = {{"planned", u.planned}, {"actual", u.actual}};
        return j;
    }

    std::string serialize() const { return to_json().dump(2) + "\n"; }
};

/// Services in dependency order (senders before receivers), ties by id.
inline std::vector<std::string> topological_order(const Composition& c) {
    std::map<std::string, std::size_t> indegree;
    std::map<std::string, std::vector<std::string>> out;
    for (const auto& s : c.services) indegree[s.id];
    for (const auto& f : c.flows) {
        ++indegree[f.receiver];
        out[f.sender].push_back(f.receiver);
    }
    std::set<std::string> ready;
    for (const auto& [id, d] : indegree)
        if (d == 0) ready.insert(id);
    std::vector<std::string> order;
    while (!ready.empty()) {
        const std::string id = *ready.begin();
        ready.erase(ready.begin());
        order.push_back(id);
        for (const auto& r : out[id])
            if (--indegree[r] == 0) ready.insert(r);
    }
    if (order.size() != indegree.size()) throw cycle_error("composition contains a cycle; only DAGs can be simulated");
    return order;
}

/// Per-service seeds for run `run` of a batch started with `base`.
/// `explicit_seeds` (from the descriptor) override the fnv1a(id) default before mixing.
inline std::map<std::string, std::uint64_t> derive_seeds(const Composition& c, std::uint64_t base, std::uint64_t run,
                                                          const std::map<std::string, std::uint64_t>& explicit_seeds = {}) {
    std::map<std::string, std::uint64_t> seeds;
    const std::uint64_t run_seed = rng::splitmix64(base + rng::splitmix64(run));
    for (const auto& s : c.services) {
        auto it = explicit_seeds.find(s.id);
        const std::uint64_t own = it != explicit_seeds.end() ? it->second : rng::fnv1a(s.id);
        seeds[s.id] = rng::splitmix64(run_seed ^ own);
    }
    return seeds;
}

/// Executes every flow of `c` under `plan`, senders before receivers.
/// Emissions of a service are shared by all its outgoing flows; escalations
/// draw further invocations from the same log, so budgets are shared too.
inline SimulationReport run_simulation(const Composition& c, const CompositionPlan& plan, const SimulationConfig& cfg) {
    SimulationReport report;
    const auto order = topological_order(c);
    for (const auto& s : c.services) {
        auto it = cfg.seeds.find(s.id);
        report.seeds[s.id] = it != cfg.seeds.end() ? it->second : rng::fnv1a(s.id);
        report.usage[s.id].planned = plan.feasible ? plan.invocations.at(s.id) : 0;
    }
    if (!plan.feasible) {
        report.short_circuited = true;
        return report;
    }

    std::map<std::string, MockService> mocks;
    for (const auto& s : c.services) {
        auto rate = cfg.duplicate_rates.find(s.id);
        mocks.emplace(s.id, MockServiceSpec::for_service(s, report.seeds.at(s.id),
                                                         rate != cfg.duplicate_rates.end() ? rate->second : 0.0));
    }

    std::map<std::string, std::size_t> rank;
    for (std::size_t i = 0; i < order.size(); ++i) rank[order[i]] = i;
    std::vector<std::size_t> flow_order(c.flows.size());
    for (std::size_t i = 0; i < flow_order.size(); ++i) flow_order[i] = i;
    std::stable_sort(flow_order.begin(), flow_order.end(), [&](std::size_t a, std::size_t b) {
        const auto& fa = c.flows[a];
        const auto& fb = c.flows[b];
        return std::pair{rank[fa.sender], rank[fa.receiver]} < std::pair{rank[fb.sender], rank[fb.receiver]};
    });

    PlannerConfig pc;
    pc.search_ceiling = cfg.search_ceiling;
    std::map<std::string, std::uint64_t> received;
    for (auto fi : flow_order) {
        const auto& flow = c.flows[fi];
        const auto& fplan = plan.flows[fi];
        const auto& sender = c.at(flow.sender);
        const auto& receiver = c.at(flow.receiver);
        MockService& mock = mocks.at(flow.sender);

        FlowLimits limits;
        limits.receiver_in = receiver_constraint(receiver);
        limits.sender_budget = effective_cap(sender.inv_max, pc);
        limits.receiver_budget = effective_cap(receiver.inv_max, pc);
        limits.planned_invocations = plan.invocations.at(flow.sender);

        FlowOutcome outcome;
        outcome.flow = flow.label();
        try {
            auto ex = execute_flow(fplan, flow, [&](std::uint64_t o) { return mock.invoke(o); }, limits);
            outcome.success = ex.success();
            outcome.batches = ex.batches.size();
            outcome.emitted = ex.trace.emitted();
            outcome.delivered = ex.trace.delivered();
            if (!ex.success()) outcome.failure = to_string(*ex.failure);
            outcome.trace = std::move(ex.trace);
            outcome.delivered_batches = std::move(ex.batches);
            received[flow.receiver] = std::max<std::uint64_t>(received[flow.receiver], outcome.batches);
        } catch (const mediation_error& e) {
            outcome.success = false;
            outcome.failure = e.what();
        }
        const bool ok = outcome.success;
        report.flows.push_back(std::move(outcome));
        if (!ok) break;  // no compensation: stop and report
    }

    for (const auto& s : c.services) {
        const auto r = received.find(s.id);
        report.usage[s.id].actual =
            std::max<std::uint64_t>(mocks.at(s.id).invocations(), r != received.end() ? r->second : 0);
    }
    return report;
}

}  // namespace cardmed
