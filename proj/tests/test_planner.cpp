#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "cardmed/planner.hpp"

using namespace cardmed;

namespace {

DataFlow flow(std::string from, std::string to, bool dup = true, bool sel = false) {
    DataFlow f;
    f.sender = std::move(from);
    f.receiver = std::move(to);
    f.dup = dup;
    f.sel = sel;
    return f;
}

ServiceSpec svc(std::string id, Interval in, Interval out, Bound cap = 10) {
    return ServiceSpec::simple(std::move(id), in, out, cap);
}

}  // namespace

TEST_CASE("plan_flow regimes", "[planner]") {
    const auto ws1 = svc("WS1", {1, 1}, {9, 11});
    const auto ws2 = svc("WS2", {6, 8}, {1, 1});

    SECTION("dup-tolerant, sel-intolerant needs 2 sender and 3 receiver calls for [9,11] to [6,8]") {
        const auto p = plan_flow(flow("WS1", "WS2"), ws1, ws2);
        REQUIRE(p.grade == Grade{Certain{2, 3}});
        REQUIRE(p.compat == CompatibilityCase::GuaranteedOverabundance);
        REQUIRE_FALSE(p.at_ceiling);
    }
    SECTION("dup-tolerant, sel-tolerant takes the smallest m with m*a >= x") {
        const auto s = svc("S", {1, 1}, {2, 4});
        const auto r = svc("R", {6, 8}, {1, 1});
        std::uint64_t scan = 1;
        while (scan * 2 < 6) ++scan;
        REQUIRE(scan == 3);
        REQUIRE(plan_flow(flow("S", "R", true, true), s, r).grade == Grade{Certain{scan, 1}});
    }
    SECTION("zero receiver minimum with selection") {
        const auto r = svc("R", {0, 8}, {1, 1});
        REQUIRE(plan_flow(flow("WS1", "R", true, true), ws1, r).grade == Grade{Certain{1, 1}});
    }
    SECTION("duplicate-intolerant flows are decided at runtime") {
        REQUIRE(std::holds_alternative<RuntimeOnly>(plan_flow(flow("WS1", "WS2", false, false), ws1, ws2).grade));
        REQUIRE(std::holds_alternative<RuntimeOnly>(plan_flow(flow("WS1", "WS2", false, true), ws1, ws2).grade));
    }
    SECTION("probable when only the intersection window is reachable") {
        // [2,9] vs [4,6]: subset needs 9m <= 6n and 4n <= 2m, impossible; (1,1) overlaps on [4,6]
        const auto s = svc("S", {1, 1}, {2, 9});
        const auto r = svc("R", {4, 6}, {1, 1});
        REQUIRE(plan_flow(flow("S", "R"), s, r).grade == Grade{Probable{1, 1}});
    }
    SECTION("infeasible within caps") {
        const auto s = svc("S", {1, 1}, {1, 3}, 1);
        const auto r = svc("R", {5, 7}, {1, 1});
        REQUIRE(std::holds_alternative<Infeasible>(plan_flow(flow("S", "R"), s, r).grade));
        REQUIRE(std::holds_alternative<Infeasible>(plan_flow(flow("S", "R", true, true), s, r).grade));
    }
    SECTION("unbounded receiver hits the search ceiling") {
        const auto s = svc("S", {1, 1}, {7, 7}, 1);
        const auto r = svc("R", {1, 1}, {0, 0}, unbounded);
        const auto p = plan_flow(flow("S", "R"), s, r, {.search_ceiling = 7});
        REQUIRE(p.grade == Grade{Certain{1, 7}});
        REQUIRE(p.at_ceiling);
    }
    SECTION("missing constraint is a configuration error") {
        auto broken = ws2;
        broken.input_schema = ConstrainedSchema{};
        REQUIRE_THROWS_AS(plan_flow(flow("WS1", "WS2"), ws1, broken), configuration_error);
    }
}

TEST_CASE("plan_composition on a chain shares the middle count", "[planner]") {
    Composition c;
    c.services = {svc("WS1", {1, 1}, {9, 11}), svc("WS2", {6, 8}, {6, 8}), svc("WS3", {3, 4}, {1, 1})};
    c.flows = {flow("WS1", "WS2"), flow("WS2", "WS3")};

    // brute force over the 10^3 grid, smallest sum then lexicographic
    std::vector<std::uint64_t> best;
    std::uint64_t best_sum = ~std::uint64_t{0};
    for (std::uint64_t a = 1; a <= 10; ++a)
        for (std::uint64_t b = 1; b <= 10; ++b)
            for (std::uint64_t d = 1; d <= 10; ++d) {
                const bool first = interval_subset(interval_scale({9, 11}, a), interval_scale({6, 8}, b));
                const bool second = interval_subset(interval_scale({6, 8}, b), interval_scale({3, 4}, d));
                if (first && second && a + b + d < best_sum) {
                    best_sum = a + b + d;
                    best = {a, b, d};
                }
            }
    REQUIRE(best == std::vector<std::uint64_t>{2, 3, 6});

    const auto plan = plan_composition(c);
    REQUIRE(plan.feasible);
    REQUIRE(plan.invocations.at("WS1") == 2);
    REQUIRE(plan.invocations.at("WS2") == 3);
    REQUIRE(plan.invocations.at("WS3") == 6);
    REQUIRE(plan.total_invocations == 11);
    REQUIRE(plan.flows[0].grade == Grade{Certain{2, 3}});
    REQUIRE(plan.flows[1].grade == Grade{Certain{3, 6}});
}

TEST_CASE("plan_composition reports contradictory flows", "[planner]") {
    Composition c;
    c.services = {svc("S", {1, 1}, {1, 1}), svc("R5", {5, 5}, {1, 1}), svc("R7", {7, 7}, {1, 1})};
    c.flows = {flow("S", "R5"), flow("S", "R7")};
    const auto plan = plan_composition(c);
    REQUIRE_FALSE(plan.feasible);
    REQUIRE(plan.conflicting_flows == std::vector<std::size_t>{0, 1});
    for (const auto& f : plan.flows) REQUIRE(std::holds_alternative<Infeasible>(f.grade));
}

TEST_CASE("plan_composition rejects malformed compositions", "[planner]") {
    Composition c;
    c.services = {svc("S", {1, 1}, {1, 1})};
    c.flows = {flow("S", "ghost")};
    REQUIRE_THROWS_AS(plan_composition(c), configuration_error);
}

TEST_CASE("single-flow composition equals plan_flow", "[planner][property]") {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<std::uint64_t> bound(0, 12), cap(1, 10), coin(0, 1);
    for (int iter = 0; iter < 2000; ++iter) {
        std::uint64_t a = bound(rng), b = bound(rng), x = bound(rng), y = bound(rng);
        if (a > b) std::swap(a, b);
        if (x > y) std::swap(x, y);
        Composition c;
        c.services = {svc("A", {1, 1}, {a, b}, cap(rng)), svc("B", {x, y}, {1, 1}, cap(rng))};
        c.flows = {flow("A", "B", coin(rng) == 1, coin(rng) == 1)};
        const auto single = plan_flow(c.flows[0], c.services[0], c.services[1]);
        const auto joint = plan_composition(c);
        INFO(c.flows[0].label() << " [" << a << "," << b << "] -> [" << x << "," << y << "]");
        if (std::holds_alternative<Infeasible>(single.grade)) {
            REQUIRE_FALSE(joint.feasible);
            continue;
        }
        REQUIRE(joint.feasible);
        REQUIRE(joint.flows[0].grade.index() == single.grade.index());
        REQUIRE(planned_counts(joint.flows[0].grade) == planned_counts(single.grade));
        if (const auto* cert = std::get_if<Certain>(&single.grade); cert && !c.flows[0].sel)
            REQUIRE(interval_subset(interval_scale({a, b}, cert->sender_calls), interval_scale({x, y}, cert->receiver_calls)));
    }
}

TEST_CASE("joint Certain implies standalone Certain", "[planner][property]") {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<std::uint64_t> bound(1, 12), cap(1, 10);
    auto iv = [&] {
        std::uint64_t lo = bound(rng), hi = bound(rng);
        if (lo > hi) std::swap(lo, hi);
        return Interval{lo, hi};
    };
    int certain_seen = 0;
    for (int iter = 0; iter < 1000; ++iter) {
        Composition c;
        c.services = {svc("A", {1, 1}, iv(), cap(rng)), svc("B", iv(), iv(), cap(rng)), svc("C", iv(), {1, 1}, cap(rng))};
        c.flows = {flow("A", "B"), flow("B", "C"), flow("A", "C")};
        const auto plan = plan_composition(c);
        if (!plan.feasible) continue;
        for (std::size_t i = 0; i < c.flows.size(); ++i) {
            const auto& f = c.flows[i];
            if (!std::holds_alternative<Certain>(plan.flows[i].grade)) continue;
            ++certain_seen;
            const auto alone = plan_flow(f, c.at(f.sender), c.at(f.receiver));
            REQUIRE(std::holds_alternative<Certain>(alone.grade));
        }
        for (const auto& [id, n] : plan.invocations) REQUIRE(Bound(n) <= c.at(id).inv_max);
    }
    REQUIRE(certain_seen > 0);
}

TEST_CASE("runtime_feasibility", "[planner]") {
    auto scan_smallest = [](std::uint64_t count, std::uint64_t x, std::uint64_t y, std::uint64_t nmax) {
        for (std::uint64_t n = 1; n <= nmax; ++n)
            if (n * x <= count && count <= n * y) return std::optional<std::uint64_t>(n);
        return std::optional<std::uint64_t>();
    };
    auto scan_largest = [](std::uint64_t count, std::uint64_t x, std::uint64_t nmax) {
        std::optional<std::uint64_t> best;
        for (std::uint64_t n = 1; n <= nmax; ++n)
            if (n * x <= count) best = n;
        return best;
    };
    REQUIRE(scan_smallest(20, 6, 8, 10) == 3u);
    REQUIRE(scan_largest(20, 6, 10) == 3u);
    REQUIRE(runtime_feasibility(20, {6, 8}, false, 10) == 3u);
    REQUIRE_FALSE(runtime_feasibility(5, {6, 8}, false, 10));
    REQUIRE(runtime_feasibility(20, {6, 8}, true, 10) == 3u);
    REQUIRE_FALSE(runtime_feasibility(5, {6, 8}, true, 10));

    for (std::uint64_t x = 0; x <= 8; ++x)
        for (std::uint64_t y = x; y <= 8; ++y)
            for (std::uint64_t nmax = 1; nmax <= 6; ++nmax)
                for (std::uint64_t count = 0; count <= 60; ++count) {
                    const auto got = runtime_feasibility(count, {x, y}, false, nmax);
                    REQUIRE(got == scan_smallest(count, x, y, nmax));
                    if (got) REQUIRE((*got * x <= count && count <= *got * y));
                    REQUIRE(runtime_feasibility(count, {x, y}, true, nmax) == scan_largest(count, x, nmax));
                }
}
