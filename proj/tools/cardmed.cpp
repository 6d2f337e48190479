// cardmed: classify, plan and simulate cardinality mediation for a
// composition descriptor.

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cardmed/cardmed.hpp"

namespace {

using namespace cardmed;
namespace ex = report::exit_code;

struct Options {
    std::string descriptor;
    std::string format = "text";
    std::uint64_t ceiling = PlannerConfig{}.search_ceiling;
    bool no_optimize = false;
    std::uint64_t seed = 0;
    std::uint64_t runs = 1;
    std::string trace;
    std::string report;
};

std::uint64_t default_ceiling() {
    if (const char* env = std::getenv("CARDMED_CEILING")) {
        try {
            std::size_t used = 0;
            const auto v = std::stoull(env, &used);
            if (used == std::string(env).size() && v >= 1) return v;
        } catch (const std::exception&) {
        }
        std::cerr << "warning: ignoring invalid CARDMED_CEILING='" << env << "'\n";
    }
    return PlannerConfig{}.search_ceiling;
}

Descriptor load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw descriptor_error(path, "cannot open descriptor");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_descriptor(buf.str());
}

report::Format format_of(const Options& o) {
    return o.format == "json-lines" ? report::Format::json_lines : report::Format::text;
}

PlannerConfig planner_config(const Options& o) {
    PlannerConfig cfg;
    cfg.search_ceiling = o.ceiling;
    cfg.optimize = !o.no_optimize;
    return cfg;
}

int cmd_classify(const Options& o) {
    const auto d = load(o.descriptor);
    std::cout << report::render_classify(d.composition, format_of(o));
    return ex::ok;
}

int cmd_plan(const Options& o) {
    const auto d = load(o.descriptor);
    const auto plan = plan_composition(d.composition, planner_config(o));
    std::cout << report::render_plan(d.composition, plan, format_of(o));
    return report::plan_exit_code(plan);
}

int cmd_simulate(const Options& o) {
    const auto d = load(o.descriptor);
    const auto cfg = planner_config(o);
    const auto plan = plan_composition(d.composition, cfg);
    if (!plan.feasible) {
        std::cout << report::render_plan(d.composition, plan, format_of(o));
        return ex::infeasible;
    }

    std::ofstream trace;
    if (!o.trace.empty()) {
        trace.open(o.trace, std::ios::binary);
        if (!trace) {
            std::cerr << "error: cannot write trace to '" << o.trace << "'\n";
            return ex::runtime_error;
        }
    }

    report::SimulationSummary summary;
    std::vector<SimulationReport> reports;
    SimulationConfig sim;
    sim.duplicate_rates = d.duplicate_rates;
    sim.search_ceiling = cfg.search_ceiling;
    for (std::uint64_t run = 0; run < o.runs; ++run) {
        sim.seeds = derive_seeds(d.composition, o.seed, run, d.seeds);
        const auto r = run_simulation(d.composition, plan, sim);
        summary.add(r);
        if (trace) trace << report::render_trace(r, run);
        if (!o.report.empty()) reports.push_back(r);
    }
    if (!o.report.empty()) {
        std::ofstream out(o.report, std::ios::binary);
        if (!out) {
            std::cerr << "error: cannot write report to '" << o.report << "'\n";
            return ex::runtime_error;
        }
        out << report::render_reports(reports);
    }
    std::cout << report::render_simulation(summary, format_of(o));
    return summary.successes == summary.runs ? ex::ok : ex::simulation_failed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cardinality mediation for composed services"};
    app.require_subcommand(1);

    Options opts;
    opts.ceiling = default_ceiling();

    auto common = [&](CLI::App* sub) {
        sub->add_option("descriptor", opts.descriptor, "Composition descriptor (JSON)")->required();
        sub->add_option("--format", opts.format, "Output format")
            ->check(CLI::IsMember({"text", "json-lines"}))
            ->capture_default_str();
    };
    auto planning = [&](CLI::App* sub) {
        sub->add_option("--ceiling", opts.ceiling, "Search ceiling for unbounded invocation caps (env CARDMED_CEILING)")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        sub->add_flag("--no-optimize", opts.no_optimize, "Take the first labeled joint solution instead of the fewest invocations");
    };

    auto* classify = app.add_subcommand("classify", "Print the compatibility case of every flow");
    common(classify);
    auto* plan = app.add_subcommand("plan", "Compute invocation counts and grade every flow");
    common(plan);
    planning(plan);
    auto* simulate = app.add_subcommand("simulate", "Plan, then run seeded simulations");
    common(simulate);
    planning(simulate);
    simulate->add_option("--seed", opts.seed, "Base seed")->capture_default_str();
    simulate->add_option("--runs", opts.runs, "Number of simulation runs")->check(CLI::PositiveNumber)->capture_default_str();
    simulate->add_option("--trace", opts.trace, "Write line-delimited trace events to this path");
    simulate->add_option("--report", opts.report, "Write the full per-run reports (JSON array) to this path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*classify) return cmd_classify(opts);
        if (*plan) return cmd_plan(opts);
        if (*simulate) return cmd_simulate(opts);
    } catch (const descriptor_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return ex::parse_error;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return ex::runtime_error;
    }
    return ex::runtime_error;
}
