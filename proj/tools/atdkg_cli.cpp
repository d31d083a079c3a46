// Command-line front end for the simulator: runs one scenario, writes the
// machine-readable report and message trace to files, and prints a human
// summary. The bench subcommand sweeps the paired good/bad measurement grid.
#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "atdkg/sim.hpp"
#include "atdkg/weights.hpp"

namespace {

using atdkg::Report;
using atdkg::SimConfig;

struct ScenarioArgs {
    std::string config_path;
    std::string report_path;
    std::string trace_path;
    SimConfig cfg;
};

// Registers the shared scenario flags; values land in args.cfg unless a
// config file overrides the base first (flags win, see materialize below).
void add_scenario_options(CLI::App* sub, ScenarioArgs& args) {
    sub->add_option("--config", args.config_path, "key=value config file");
    sub->add_option("--n", args.cfg.n, "number of nodes");
    sub->add_option("--t", args.cfg.t, "corruption bound, n >= 2t+1");
    sub->add_option("--seed", args.cfg.seed, "run seed");
    sub->add_option("--adversary", args.cfg.adversary, "adversary policy name");
    sub->add_option("--s-expected", args.cfg.s_expected,
                    "dealer/sender committee size, 0 for the default");
    sub->add_option("--c-expected", args.cfg.c_expected,
                    "vote committee size, 0 for the default");
    sub->add_option("--deliver-percent", args.cfg.deliver_percent,
                    "withhold-multicast delivery rate");
    sub->add_option("--epochs", args.cfg.epochs, "checkpoint chain length");
    sub->add_option("--payload", args.cfg.payload, "broadcast value bytes");
    sub->add_option("--senders", args.cfg.senders,
                    "broadcast sender count, 0 for the committee size");
    sub->add_option("--report", args.report_path, "report output path");
    sub->add_option("--trace", args.trace_path, "message trace output path");
}

// Starts from the config file when given, then lets explicit flags override
// single fields. The subcommand fixes the scenario either way.
SimConfig materialize(const CLI::App* sub, const ScenarioArgs& args,
                      const std::string& scenario) {
    SimConfig cfg = args.cfg;
    if (!args.config_path.empty()) {
        std::ifstream in(args.config_path);
        if (!in) throw std::runtime_error("cannot open config file: " + args.config_path);
        std::ostringstream text;
        text << in.rdbuf();
        cfg = atdkg::parse_config(text.str());
        if (sub->count("--n")) cfg.n = args.cfg.n;
        if (sub->count("--t")) cfg.t = args.cfg.t;
        if (sub->count("--seed")) cfg.seed = args.cfg.seed;
        if (sub->count("--adversary")) cfg.adversary = args.cfg.adversary;
        if (sub->count("--s-expected")) cfg.s_expected = args.cfg.s_expected;
        if (sub->count("--c-expected")) cfg.c_expected = args.cfg.c_expected;
        if (sub->count("--deliver-percent")) cfg.deliver_percent = args.cfg.deliver_percent;
        if (sub->count("--epochs")) cfg.epochs = args.cfg.epochs;
        if (sub->count("--payload")) cfg.payload = args.cfg.payload;
        if (sub->count("--senders")) cfg.senders = args.cfg.senders;
    }
    cfg.scenario = scenario;
    cfg.validate();
    return cfg;
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write: " + path);
    out << text;
}

int run_scenario(const CLI::App* sub, const ScenarioArgs& args,
                 const std::string& scenario) {
    SimConfig cfg = materialize(sub, args, scenario);
    Report rep = atdkg::run(cfg);
    if (!args.report_path.empty()) write_file(args.report_path, rep.render());
    if (!args.trace_path.empty()) write_file(args.trace_path, rep.render_trace());
    std::cout << rep.summary();
    return 0;
}

int run_allocate(const std::string& weights_path, const std::string& report_path) {
    std::ifstream in(weights_path);
    if (!in) throw std::runtime_error("cannot open weights file: " + weights_path);
    std::ostringstream text;
    text << in.rdbuf();
    std::vector<uint64_t> w = atdkg::parse_weights_text(text.str());
    atdkg::Allocation a = atdkg::allocate_sub_ids(w);
    std::string table = atdkg::allocation_report(w, a);
    if (!report_path.empty()) write_file(report_path, table);
    else std::cout << table;
    uint64_t total = 0;
    for (uint64_t d : a.d) total += d;
    std::cout << "holders=" << w.size() << " divisor=" << a.divisor
              << " sub_ids=" << total
              << " qualified=" << (atdkg::check_qualified(w, a.d) ? "yes" : "no")
              << "\n";
    return 0;
}

// Desk-scale measurement sweep: paired honest/malform key generation runs at
// a forced committee of 20 across three sizes, then the good-case broadcast
// volume at n=512. Appends every underlying report to --report when given.
int run_bench(uint64_t seed, const std::string& report_path) {
    std::ostringstream reports;
    std::cout << "scenario\tn\tt\tgood_exp\tbad_exp\tdelta\tgood_payload_bytes\n";
    for (int n : {64, 128, 256}) {
        SimConfig cfg;
        cfg.scenario = "dkg";
        cfg.n = n;
        cfg.t = 19;
        cfg.seed = seed;
        cfg.s_expected = 20;
        cfg.adversary = "honest";
        Report good = atdkg::run(cfg);
        cfg.adversary = "malform-ciphertext";
        Report bad = atdkg::run(cfg);
        uint64_t delta = 0;
        for (const auto& [id, exps] : bad.metrics.exp_by_node) {
            auto it = good.metrics.exp_by_node.find(id);
            if (it == good.metrics.exp_by_node.end()) continue;
            uint64_t d = exps > it->second ? exps - it->second : 0;
            if (d > delta) delta = d;
        }
        std::cout << "dkg\t" << n << "\t" << cfg.t << "\t"
                  << good.metrics.exp_max() << "\t" << bad.metrics.exp_max() << "\t"
                  << delta << "\t" << good.metrics.broadcast_payload_bytes << "\n";
        reports << good.render() << bad.render();
    }
    SimConfig cfg;
    cfg.scenario = "dkg";
    cfg.n = 512;
    cfg.t = 19;
    cfg.seed = seed;
    cfg.s_expected = 20;
    cfg.adversary = "honest";
    Report rep = atdkg::run(cfg);
    std::cout << "dkg\t512\t19\t" << rep.metrics.exp_max() << "\t-\t-\t"
              << rep.metrics.broadcast_payload_bytes << "\n";
    reports << rep.render();
    if (!report_path.empty()) write_file(report_path, reports.str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"any-trust key generation simulator"};
    app.require_subcommand(1);

    ScenarioArgs dkg_args, broadcast_args, checkpoint_args;
    CLI::App* dkg = app.add_subcommand("dkg", "run one key generation session");
    add_scenario_options(dkg, dkg_args);
    CLI::App* broadcast = app.add_subcommand("broadcast", "run one extended broadcast round");
    add_scenario_options(broadcast, broadcast_args);
    CLI::App* checkpoint = app.add_subcommand("checkpoint", "run a checkpointed epoch chain");
    add_scenario_options(checkpoint, checkpoint_args);

    std::string weights_path, allocate_report;
    CLI::App* allocate = app.add_subcommand("allocate", "allocate sub-IDs for a weight list");
    allocate->add_option("--weights", weights_path, "one decimal weight per line")
        ->required();
    allocate->add_option("--report", allocate_report, "table output path");

    uint64_t bench_seed = 1;
    std::string bench_report;
    CLI::App* bench = app.add_subcommand("bench", "paired cost measurement sweep");
    bench->add_option("--seed", bench_seed, "run seed");
    bench->add_option("--report", bench_report, "report output path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (dkg->parsed()) return run_scenario(dkg, dkg_args, "dkg");
        if (broadcast->parsed()) return run_scenario(broadcast, broadcast_args, "broadcast");
        if (checkpoint->parsed()) return run_scenario(checkpoint, checkpoint_args, "checkpoint");
        if (allocate->parsed()) return run_allocate(weights_path, allocate_report);
        if (bench->parsed()) return run_bench(bench_seed, bench_report);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
