// Acceptance gate: one PASS/FAIL line per criterion, non-zero exit if any fails.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cardmed/cardmed.hpp"

using namespace cardmed;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

int failures = 0;

void criterion(int id, const char* title, const std::function<Outcome()>& body) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.pass) ++failures;
    std::printf("%s  %d  %-34s %s (%.2fs)\n", o.pass ? "PASS" : "FAIL", id, title, o.detail.c_str(), secs);
    std::fflush(stdout);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string fixture_path(const std::string& name) { return std::string(CARDMED_FIXTURES) + "/" + name; }

using fd::value_t;

// ---------------------------------------------------------------------------

Outcome basic_mediation_example() {
    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();
    const auto got = fd::basic_mediation({9, 11, 6, 8, 10, 10});
    const auto us = std::chrono::duration<double, std::micro>(clock::now() - t0).count();
    const bool exact = got && got->sender_calls == 2 && got->receiver_calls == 3;
    char buf[96];
    std::snprintf(buf, sizeof buf, "got (%lld,%lld) in %.1f us", got ? static_cast<long long>(got->sender_calls) : -1LL,
                  got ? static_cast<long long>(got->receiver_calls) : -1LL, us);
    return {exact && us < 1000.0, buf};
}

Outcome propagation_with_fixed_sender() {
    auto with_sender_calls = [](value_t calls) {
        fd::Problem p;
        const auto sender = p.add_variable("sender_calls", calls, calls);
        const auto receiver = p.add_variable("receiver_calls", 1, 10);
        p.add_leq(6, receiver, 9, sender);   // receiver_min * receiver_calls <= sender_min * sender_calls
        p.add_leq(11, sender, 8, receiver);  // sender_max * sender_calls <= receiver_max * receiver_calls
        return fd::propagate(p);
    };
    const auto one = with_sender_calls(1);
    const auto two = with_sender_calls(2);
    const bool ok = !one && two && (*two)[1] == fd::Domain{3, 3};
    return {ok, std::string("1 sender call: ") + (one ? "receiver domain nonempty" : "receiver domain empty") +
                    "; 2 sender calls: receiver domain " +
                    (two ? "[" + std::to_string((*two)[1].lo) + "," + std::to_string((*two)[1].hi) + "]" : "empty")};
}

Outcome solver_oracle() {
    std::size_t instances = 0, mismatches = 0, solutions = 0;
    for (value_t out_lo = 0; out_lo <= 12; ++out_lo)
        for (value_t out_hi = out_lo; out_hi <= 12; ++out_hi)
            for (value_t in_lo = 0; in_lo <= 12; ++in_lo)
                for (value_t in_hi = in_lo; in_hi <= 12; ++in_hi) {
                    std::vector<std::pair<value_t, value_t>> grid, labeled;
                    for (value_t sender = 1; sender <= 10; ++sender)
                        for (value_t receiver = 1; receiver <= 10; ++receiver)
                            if (receiver * in_lo <= sender * out_lo && sender * out_hi <= receiver * in_hi) grid.emplace_back(sender, receiver);
                    for (const auto& s : fd::Labeler(fd::subset_problem({out_lo, out_hi, in_lo, in_hi, 10, 10})).all())
                        labeled.emplace_back(s[0], s[1]);
                    ++instances;
                    solutions += grid.size();
                    if (grid != labeled) ++mismatches;
                }
    return {mismatches == 0, std::to_string(instances) + " instances, " + std::to_string(solutions) +
                                 " solutions, " + std::to_string(mismatches) + " mismatches"};
}

// Exact non-negative rational, compared by 128-bit cross-multiplication.
struct Rational {
    std::int64_t num, den;  // den > 0
    Rational(std::int64_t n, std::int64_t d) {
        const auto g = std::gcd(n, d);
        num = n / g;
        den = d / g;
    }
    friend bool operator<=(const Rational& l, const Rational& r) {
        return static_cast<__int128>(l.num) * r.den <= static_cast<__int128>(r.num) * l.den;
    }
};

Outcome condition_equivalence() {
    std::size_t checked = 0, mismatches = 0;
    for (value_t out_lo = 1; out_lo <= 12; ++out_lo)
        for (value_t out_hi = out_lo; out_hi <= 12; ++out_hi)
            for (value_t in_lo = 1; in_lo <= 12; ++in_lo)
                for (value_t in_hi = in_lo; in_hi <= 12; ++in_hi) {
                    std::set<std::pair<value_t, value_t>> solved;
                    for (const auto& s : fd::Labeler(fd::subset_problem({out_lo, out_hi, in_lo, in_hi, 10, 10})).all())
                        solved.emplace(s[0], s[1]);
                    std::optional<std::pair<value_t, value_t>> first;
                    for (value_t sender = 1; sender <= 10; ++sender)
                        for (value_t receiver = 1; receiver <= 10; ++receiver) {
                            const Rational ratio(sender, receiver);
                            const bool condition = Rational(in_lo, out_lo) <= ratio && ratio <= Rational(in_hi, out_hi);
                            if (condition && !first) first = {sender, receiver};
                            if (condition != (solved.count({sender, receiver}) > 0)) ++mismatches;
                            ++checked;
                        }
                    const auto basic = fd::basic_mediation({out_lo, out_hi, in_lo, in_hi, 10, 10});
                    if (basic.has_value() != first.has_value() || (basic && (basic->sender_calls != first->first || basic->receiver_calls != first->second)))
                        ++mismatches;
                }
    return {mismatches == 0, std::to_string(checked) + " (sender,receiver) points, " + std::to_string(mismatches) + " mismatches"};
}

Outcome classifier_partition() {
    std::size_t pairs = 0, mismatches = 0;
    for (std::uint64_t out_lo = 0; out_lo <= 12; ++out_lo)
        for (std::uint64_t out_hi = out_lo; out_hi <= 12; ++out_hi)
            for (std::uint64_t in_lo = 0; in_lo <= 12; ++in_lo)
                for (std::uint64_t in_hi = in_lo; in_hi <= 12; ++in_hi) {
                    const Interval s{out_lo, out_hi}, r{in_lo, in_hi};
                    // the six predicates written out independently of the library
                    const bool preds[6] = {out_hi < in_lo,
                                           out_lo < in_lo && in_lo <= out_hi && out_hi <= in_hi,
                                           out_lo >= in_lo && out_hi <= in_hi,
                                           in_lo <= out_lo && out_lo <= in_hi && out_hi > in_hi,
                                           out_lo > in_hi,
                                           out_lo < in_lo && out_hi > in_hi};
                    int holding = 0, which = -1;
                    for (int k = 0; k < 6; ++k)
                        if (preds[k]) {
                            ++holding;
                            which = k;
                        }
                    ++pairs;
                    if (holding != 1 || static_cast<int>(classify_pair(s, r)) != which) ++mismatches;
                }
    const std::map<char, std::pair<bool, bool>> expected{{'a', {true, false}}, {'b', {true, false}},
                                                         {'c', {false, false}}, {'d', {false, true}},
                                                         {'e', {false, true}}, {'f', {true, true}}};
    for (auto c : all_cases) {
        const auto g = mediation_group(c);
        const auto [lack, over] = expected.at(case_letter(c));
        if (g.lack_possible != lack || g.overabundance_possible != over || g.compatible != (case_letter(c) == 'c'))
            ++mismatches;
    }
    return {mismatches == 0, std::to_string(pairs) + " pairs, " + std::to_string(mismatches) + " mismatches"};
}

Outcome certainty_property() {
    std::mt19937_64 gen(20240601);
    auto below = [&](std::uint64_t k) { return std::uniform_int_distribution<std::uint64_t>(0, k - 1)(gen); };
    std::size_t certain = 0, runs = 0, successes = 0;
    for (int i = 0; i < 200; ++i) {
        const std::uint64_t out_lo = below(15), out_hi = out_lo + below(8), in_lo = 1 + below(12), in_hi = in_lo + below(8);
        Composition c;
        c.services = {ServiceSpec::simple("S", {1, 1}, {out_lo, out_hi}, 1 + below(10)),
                      ServiceSpec::simple("R", {in_lo, in_hi}, {1, 1}, below(4) == 0 ? unbounded : Bound(1 + below(10)))};
        DataFlow f;
        f.sender = "S";
        f.receiver = "R";
        f.dup = true;
        f.sel = false;
        f.ord = below(2) == 1;
        c.flows = {f};
        const auto plan = plan_composition(c);
        if (!plan.feasible || !std::holds_alternative<Certain>(plan.flows[0].grade)) continue;
        ++certain;
        SimulationConfig cfg;
        cfg.duplicate_rates = {{"S", static_cast<double>(below(100)) / 100.0}};
        for (std::uint64_t seed = 0; seed < 1000; ++seed) {
            cfg.seeds = derive_seeds(c, seed, 0);
            ++runs;
            successes += run_simulation(c, plan, cfg).success();
        }
    }
    const bool ok = certain > 0 && successes == runs;
    char buf[128];
    std::snprintf(buf, sizeof buf, "%zu/200 flows Certain, %zu/%zu runs succeeded, ratio %.6f", certain, successes,
                  runs, runs ? static_cast<double>(successes) / static_cast<double>(runs) : 0.0);
    return {ok, buf};
}

Outcome mediator_properties() {
    std::mt19937_64 gen(77);
    auto below = [&](std::uint64_t k) { return std::uniform_int_distribution<std::uint64_t>(0, k - 1)(gen); };
    std::size_t cases = 0, failures_seen = 0, executions = 0;
    auto multiset = [](const std::vector<Element>& v) {
        std::map<std::pair<std::string, std::string>, int> m;
        for (const auto& e : v) ++m[{e.key, e.payload}];
        return m;
    };
    while (cases < 10000) {
        ++cases;
        bool ok = true;

        // sender with duplicate keys, receiver window [in_lo,in_hi]
        const std::uint64_t out_lo = below(8), out_hi = out_lo + below(8), in_lo = 1 + below(6), in_hi = in_lo + below(6);
        const auto sender = ServiceSpec::simple("S", {1, 1}, {out_lo, out_hi}, 1 + below(8));
        const auto receiver = ServiceSpec::simple("R", {in_lo, in_hi}, {1, 1}, 1 + below(20));
        const auto mock = MockServiceSpec::for_service(sender, gen(), static_cast<double>(below(80)) / 100.0);
        const auto l1 = mock_invoke(mock, 0);
        const auto l2 = sender.inv_max.value() > 1 ? mock_invoke(mock, 1) : std::vector<Element>{};

        for (auto s : {DedupStrategy::remove_first, DedupStrategy::remove_last}) {
            const auto once = rm_dup(l1, s);
            ok = ok && rm_dup(once, s) == once;
        }

        std::vector<std::size_t> perm(l1.size() + l2.size());
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), gen);
        auto both = l1;
        both.insert(both.end(), l2.begin(), l2.end());
        for (const MergeStrategy& m : {MergeStrategy{MergeConcatAB{}}, MergeStrategy{MergeInterleavePairs{}},
                                       MergeStrategy{MergeConcatBA{}}, MergeStrategy{MergeExplicit{perm}}})
            ok = ok && multiset(merge(l1, l2, m)) == multiset(both);

        // ordered, duplicate-tolerant, selection-intolerant execution
        DataFlow f;
        f.sender = "S";
        f.receiver = "R";
        f.dup = true;
        f.sel = false;
        f.ord = true;
        f.policies.merge = below(2) ? MergeStrategy{MergeInterleavePairs{}} : MergeStrategy{MergeConcatBA{}};
        const auto plan = plan_flow(f, sender, receiver);
        if (!std::holds_alternative<Infeasible>(plan.grade)) {
            MockService svc(mock);
            FlowLimits limits{{in_lo, in_hi}, sender.inv_max.value(), receiver.inv_max.value(), 1};
            const auto ex = execute_flow(plan, f, [&](std::uint64_t o) { return svc.invoke(o); }, limits);
            ++executions;
            if (ex.success()) {
                std::vector<Element> emitted, delivered;
                for (std::uint64_t o = 0; o < ex.sender_invocations; ++o) {
                    const auto& e = svc.invoke(o);
                    emitted.insert(emitted.end(), e.begin(), e.end());
                }
                for (const auto& batch : ex.batches) {
                    ok = ok && batch.elements.size() >= in_lo && batch.elements.size() <= in_hi;
                    delivered.insert(delivered.end(), batch.elements.begin(), batch.elements.end());
                }
                ok = ok && delivered == emitted;
            }
        }

        // direct partition check on the same window
        const std::size_t n = 1 + below(10);
        const std::size_t count = n * in_lo + below(n * (in_hi - in_lo) + 1);
        for (auto s : batch_sizes(count, n, {in_lo, in_hi})) ok = ok && s >= in_lo && s <= in_hi;

        if (!ok) ++failures_seen;
    }
    return {failures_seen == 0, std::to_string(cases) + " cases (" + std::to_string(executions) +
                                    " ordered executions), " + std::to_string(failures_seen) + " failures"};
}

Outcome editor_printer_scenario() {
    const auto d = parse_descriptor(read_file(fixture_path("editor_printer.json")));
    const auto plan = plan_composition(d.composition);
    auto simulate = [&] {
        SimulationConfig cfg;
        cfg.seeds = derive_seeds(d.composition, 42, 0, d.seeds);
        return run_simulation(d.composition, plan, cfg);
    };
    const auto first = simulate();
    const auto second = simulate();
    const auto trace = report::render_trace(first, 0);
    const auto golden_trace = read_file(fixture_path("editor_printer.seed42.trace.jsonl"));
    const auto golden_report = read_file(fixture_path("editor_printer.seed42.report.json"));

    bool ordered = first.flows.size() == 1;
    std::uint64_t pos = 0;
    if (ordered)
        for (const auto& b : first.flows[0].delivered_batches)
            for (const auto& e : b.elements) ordered = ordered && e.origin.position == pos++;
    const bool conserved = ordered && first.flows[0].emitted == first.flows[0].delivered && pos == first.flows[0].emitted;
    const bool stable = trace == report::render_trace(second, 0) && first.serialize() == second.serialize();
    const bool golden = trace == golden_trace && report::render_reports({first}) == golden_report;
    const bool ok = first.success() && conserved && stable && golden;
    return {ok, std::string("success=") + (first.success() ? "yes" : "no") + " emitted=" +
                    std::to_string(ordered ? first.flows[0].emitted : 0) + " delivered=" +
                    std::to_string(ordered ? first.flows[0].delivered : 0) + " order=" + (ordered ? "kept" : "broken") +
                    " golden=" + (golden ? "match" : "differs") + " stable=" + (stable ? "yes" : "no")};
}

}  // namespace

int main() {
    criterion(1, "basic mediation [9,11] to [6,8]", basic_mediation_example);
    criterion(2, "propagation with sender calls fixed", propagation_with_fixed_sender);
    criterion(3, "solver equals grid oracle", solver_oracle);
    criterion(4, "rational condition equivalence", condition_equivalence);
    criterion(5, "classifier partition and groups", classifier_partition);
    criterion(6, "Certain plans always succeed", certainty_property);
    criterion(7, "mediator property suite", mediator_properties);
    criterion(8, "editor/printer end to end", editor_printer_scenario);
    std::printf("%s: %d criterion(s) failed\n", failures ? "FAIL" : "PASS", failures);
    return failures == 0 ? 0 : 1;
}
