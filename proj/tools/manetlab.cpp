// manetlab: run emulated MANET scenarios and poke at them with the usual
// field tools. See README.md for the scenario file format.

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "manetlab/harness/metrics.hpp"
#include "manetlab/harness/runner.hpp"
#include "manetlab/harness/scenario.hpp"
#include "manetlab/harness/taxonomy.hpp"
#include "manetlab/harness/workbench.hpp"
#include "manetlab/netconfig/ipv4.hpp"
#include "manetlab/sim/errors.hpp"

namespace {

using namespace manetlab;

std::string fmt(const char* pattern, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof(buf), pattern, v);
    return buf;
}

harness::Scenario resolve_scenario(const std::string& ref)
{
    if (std::filesystem::exists(ref))
        return harness::load_scenario(ref);
    if (harness::is_builtin(ref))
        return harness::builtin_scenario(ref);
    throw IoError("no scenario file or builtin named \"" + ref + "\" (try `manetlab scenarios`)");
}

void print_summary(const harness::MetricsBundle& b)
{
    std::printf("scenario %s: %s simulated seconds%s\n", b.scenario.c_str(),
                fmt("%.0f", b.duration_s).c_str(),
                b.stopped_on_depletion ? ", stopped at first battery depletion" : "");
    for (const auto& f : b.setup_failures)
        std::printf("  setup failed on %s: %s\n", f.node.c_str(), f.error.c_str());
    for (const auto& [flow, bits] : b.delivered_bits)
        std::printf("  %s: mean %s Mbit/s\n", flow.c_str(),
                    fmt("%.2f", b.mean_goodput_bps(flow) / 1e6).c_str());
    for (const auto& p : b.pings) {
        if (!p.series)
            continue;
        std::string median = p.series->median_rtt_s()
                                 ? fmt("%.3f", *p.series->median_rtt_s() * 1000.0) + " ms"
                                 : std::string("n/a");
        std::printf("  %s: %zu sent, %d received, median rtt %s\n", p.flow.c_str(),
                    p.series->records.size(), p.series->received(), median.c_str());
    }
    for (const auto& d : b.discoveries)
        std::printf("  %s: %s, session %s\n", d.flow.c_str(),
                    d.found ? "found" : "not found", d.session_ok ? "ok" : "incomplete");
    if (!b.battery.empty()) {
        std::printf("  battery left:");
        for (const auto& [node, state] : b.battery)
            std::printf(" %s %s%%%s", node.c_str(), fmt("%.2f", state.percent).c_str(),
                        state.depleted ? " (depleted)" : "");
        std::printf("\n");
    }
}

int cmd_run(const std::string& ref, std::uint64_t seed, bool seed_set, int repeat,
            const std::string& out)
{
    for (int rep = 0; rep < repeat; ++rep) {
        harness::Scenario sc = resolve_scenario(ref);
        if (seed_set)
            sc.seed = seed;
        sc.seed += static_cast<std::uint64_t>(rep);

        std::string dir = out;
        if (repeat > 1)
            dir += "/rep_" + std::to_string(rep);

        harness::MetricsBundle bundle = harness::run(sc);
        auto files = harness::emit_csv(bundle, dir);
        if (repeat > 1)
            std::printf("[rep %d, seed %llu]\n", rep, (unsigned long long)sc.seed);
        print_summary(bundle);
        for (const auto& f : files)
            std::printf("  wrote %s\n", f.c_str());
    }
    return 0;
}

int cmd_scenarios()
{
    std::printf("infra    A and C exchange traffic as stations of access point B\n");
    std::printf("ibss_sh  A and C within mutual range on the ad hoc network\n");
    std::printf("ibss_mh  A-B-C chain; A and C reach each other only through B\n");
    return 0;
}

// Brings the scenario's network up without its traffic flows and waits until
// the destination is reachable (routing needs a few simulated seconds).
harness::Workbench& warm_up(harness::Workbench& wb, const link::NodeId& src,
                            const link::NodeId& dst)
{
    if (!wb.scenario().find_node(src))
        throw ValidationError("--src names no node: " + src);
    if (!wb.scenario().find_node(dst))
        throw ValidationError("--dst names no node: " + dst);
    for (int s = 0; s < 20 && !wb.reachable(src, dst); ++s)
        wb.sched.run_until(wb.sched.now() + sim::from_seconds(1.0));
    return wb;
}

int cmd_ping(const std::string& ref, const std::string& src, const std::string& dst)
{
    harness::Scenario sc = resolve_scenario(ref);
    sc.flows.clear();
    harness::Workbench wb(sc);
    warm_up(wb, src, dst);

    auto target = wb.address_of(dst);
    if (!target)
        throw ValidationError("destination " + dst + " has no address (setup failed?)");

    diag::PingOptions opts;
    opts.count = 10;
    auto series = wb.dx.ping(src, *target, opts);
    wb.sched.run_until(wb.sched.now() +
                       sim::from_seconds(opts.count * opts.interval_s + opts.timeout_s + 1.0));

    std::printf("PING %s (%s): %u byte payload\n", dst.c_str(),
                netconfig::to_string(*target).c_str(), opts.size_bytes);
    for (const auto& rec : series->records) {
        if (rec.received_at)
            std::printf("reply from %s: seq=%d time=%s ms\n",
                        netconfig::to_string(*target).c_str(), rec.seq,
                        fmt("%.3f", *rec.rtt_s() * 1000.0).c_str());
        else
            std::printf("seq=%d timed out\n", rec.seq);
    }
    std::printf("--- %s ping statistics ---\n", dst.c_str());
    std::printf("%zu packets transmitted, %d received, %s%% packet loss\n",
                series->records.size(), series->received(),
                fmt("%.0f", series->loss_rate() * 100.0).c_str());
    if (auto median = series->median_rtt_s())
        std::printf("rtt median/max = %s/%s ms\n", fmt("%.3f", *median * 1000.0).c_str(),
                    fmt("%.3f", *series->max_rtt_s() * 1000.0).c_str());
    return 0;
}

int cmd_traceroute(const std::string& ref, const std::string& src, const std::string& dst)
{
    harness::Scenario sc = resolve_scenario(ref);
    sc.flows.clear();
    harness::Workbench wb(sc);
    warm_up(wb, src, dst);

    auto target = wb.address_of(dst);
    if (!target)
        throw ValidationError("destination " + dst + " has no address (setup failed?)");

    const int max_ttl = 16;
    auto result = wb.dx.traceroute(src, *target, max_ttl);
    for (int s = 0; s < 8 * max_ttl && !result->done; ++s)
        wb.sched.run_until(wb.sched.now() + sim::from_seconds(1.0));

    std::printf("traceroute to %s (%s), %d hops max\n", dst.c_str(),
                netconfig::to_string(*target).c_str(), max_ttl);
    int level = 1;
    for (const auto& hop : result->hops) {
        std::string name = wb.net.node_by_address(hop.addr).value_or("?");
        std::printf("%2d  %s (%s)  %s ms\n", level++, name.c_str(),
                    netconfig::to_string(hop.addr).c_str(),
                    fmt("%.3f", hop.rtt_s * 1000.0).c_str());
    }
    if (!result->reached) {
        std::printf("%2d  * destination not reached\n", level);
        return 1;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"deterministic MANET emulation testbed"};
    app.require_subcommand(1);

    std::string scenario_ref, out_dir = "out", format = "table";
    std::string src, dst;
    std::uint64_t seed = 0;
    int repeat = 1;

    CLI::App* run = app.add_subcommand("run", "execute a scenario and write CSV reports");
    run->add_option("--scenario", scenario_ref, "scenario file or builtin name")->required();
    CLI::Option* seed_opt = run->add_option("--seed", seed, "override the scenario seed");
    run->add_option("--repeat", repeat, "repetitions with seeds seed+0..seed+K-1")
        ->check(CLI::PositiveNumber);
    run->add_option("--out", out_dir, "output directory (default: out)");

    app.add_subcommand("scenarios", "list the builtin scenarios");

    CLI::App* taxo = app.add_subcommand("taxonomy", "print the MANET technology check-list");
    taxo->add_option("--format", format, "csv or table")
        ->check(CLI::IsMember({"csv", "table"}));

    CLI::App* ping = app.add_subcommand("ping", "ping across an emulated scenario");
    ping->add_option("--scenario", scenario_ref, "scenario file or builtin name")->required();
    ping->add_option("--src", src, "source node id")->required();
    ping->add_option("--dst", dst, "destination node id")->required();

    CLI::App* trace = app.add_subcommand("traceroute", "trace the path across a scenario");
    trace->add_option("--scenario", scenario_ref, "scenario file or builtin name")->required();
    trace->add_option("--src", src, "source node id")->required();
    trace->add_option("--dst", dst, "destination node id")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (run->parsed())
            return cmd_run(scenario_ref, seed, seed_opt->count() > 0, repeat, out_dir);
        if (app.get_subcommand("scenarios")->parsed())
            return cmd_scenarios();
        if (taxo->parsed()) {
            std::printf("%s", (format == "csv" ? harness::taxonomy_csv()
                                               : harness::taxonomy_table())
                                  .c_str());
            return 0;
        }
        if (ping->parsed())
            return cmd_ping(scenario_ref, src, dst);
        if (trace->parsed())
            return cmd_traceroute(scenario_ref, src, dst);
    } catch (const Error& e) {
        std::fprintf(stderr, "manetlab: %s\n", e.what());
        return 2;
    }
    return 0;
}
