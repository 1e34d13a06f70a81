// Acceptance gate for the testbed. Each numbered criterion prints exactly one
// PASS/FAIL line with the measured values; the process exits nonzero if any
// criterion fails. Run through ctest or directly from the build tree.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "manetlab/diag/diag.hpp"
#include "manetlab/energy/battery.hpp"
#include "manetlab/harness/metrics.hpp"
#include "manetlab/harness/runner.hpp"
#include "manetlab/harness/scenario.hpp"
#include "manetlab/harness/workbench.hpp"
#include "manetlab/netconfig/netconfig.hpp"
#include "manetlab/routing/olsr.hpp"
#include "manetlab/sim/errors.hpp"

using namespace manetlab;
using harness::FlowKind;
using harness::FlowSpec;
using harness::MetricsBundle;
using harness::NodeSpec;
using harness::Scenario;

namespace {

int g_failures = 0;

void report(int num, const char* name, bool ok, const std::string& detail)
{
    std::printf("criterion %d (%s): %s  [%s]\n", num, name, ok ? "PASS" : "FAIL",
                detail.c_str());
    if (!ok)
        ++g_failures;
}

std::string fmt(const char* pattern, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof(buf), pattern, v);
    return buf;
}

bool within(double value, double target, double tolerance)
{
    return std::abs(value - target) <= tolerance * target;
}

double median(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

NodeSpec node(const char* id, double x, double y)
{
    NodeSpec n;
    n.id = id;
    n.pos = {x, y};
    return n;
}

FlowSpec flow(FlowKind kind, const char* src, const char* dst, double start, double stop)
{
    FlowSpec f;
    f.kind = kind;
    f.src = src;
    f.dst = dst;
    f.start_s = start;
    f.stop_s = stop;
    return f;
}

MetricsBundle run_builtin(const std::string& name, std::uint64_t seed)
{
    Scenario sc = harness::builtin_scenario(name);
    sc.seed = seed;
    return harness::run(sc);
}

const char* kFlow = "udp-saturation:A->C";

// --- 1. throughput ratios ---------------------------------------------------

void criterion1()
{
    auto t0 = std::chrono::steady_clock::now();
    MetricsBundle sh = run_builtin("ibss_sh", 1);
    MetricsBundle mh = run_builtin("ibss_mh", 1);
    MetricsBundle infra = run_builtin("infra", 1);
    double wall = seconds_since(t0);

    double g_sh = sh.mean_goodput_bps(kFlow);
    double g_mh = mh.mean_goodput_bps(kFlow);
    double g_infra = infra.mean_goodput_bps(kFlow);

    bool ok = g_sh / g_mh >= 2.0 && std::abs(g_mh - g_infra) <= 0.10 * g_infra &&
              within(g_sh, 24e6, 0.01) && within(g_mh, 10.8e6, 0.01) && wall < 10.0;
    report(1, "throughput ratios", ok,
           "sh " + fmt("%.2f", g_sh / 1e6) + " mh " + fmt("%.2f", g_mh / 1e6) + " infra " +
               fmt("%.2f", g_infra / 1e6) + " Mbit/s, sh/mh " + fmt("%.2f", g_sh / g_mh) +
               ", wall " + fmt("%.1f", wall) + " s");
}

// --- 2. round-trip times ------------------------------------------------------

std::vector<double> pooled_rtts(const std::string& name, int reps)
{
    std::vector<double> rtts;
    for (int rep = 0; rep < reps; ++rep) {
        MetricsBundle b = run_builtin(name, 1 + static_cast<std::uint64_t>(rep));
        for (const auto& p : b.pings)
            if (p.series)
                for (const auto& rec : p.series->records)
                    if (auto rtt = rec.rtt_s())
                        rtts.push_back(*rtt);
    }
    return rtts;
}

void criterion2()
{
    std::vector<double> sh = pooled_rtts("ibss_sh", 6);
    std::vector<double> mh = pooled_rtts("ibss_mh", 6);
    std::vector<double> infra = pooled_rtts("infra", 6);

    double med_sh = median(sh);
    double med_mh = median(mh);
    double max_infra = *std::max_element(infra.begin(), infra.end());
    double ratio = med_mh / med_sh;

    bool ok = ratio >= 1.7 && ratio <= 2.3 && max_infra >= 0.300 &&
              max_infra >= 5.0 * med_sh;
    report(2, "ping series", ok,
           "median sh " + fmt("%.3f", med_sh * 1e3) + " ms, mh " + fmt("%.3f", med_mh * 1e3) +
               " ms (ratio " + fmt("%.2f", ratio) + "), infra max " +
               fmt("%.0f", max_infra * 1e3) + " ms over " + std::to_string(infra.size()) +
               " pings");
}

// --- 3. idle battery ----------------------------------------------------------

double idle_rate_of_a(harness::ScenarioMode mode, bool olsr)
{
    Scenario sc;
    sc.name = "idle";
    sc.duration_s = 7200;
    sc.mode = mode;
    sc.nodes = {node("A", 0, 0), node("B", 20, 0), node("C", 40, 0)};
    if (mode == harness::ScenarioMode::Infrastructure)
        sc.ap = "B";
    if (olsr)
        sc.routing_package = "olsr";
    MetricsBundle b = harness::run(sc);
    return (100.0 - b.battery.at("A").percent) / 2.0; // percent per hour
}

void criterion3()
{
    double ibss = idle_rate_of_a(harness::ScenarioMode::Ibss, false);
    double infra = idle_rate_of_a(harness::ScenarioMode::Infrastructure, false);
    double routed = idle_rate_of_a(harness::ScenarioMode::Ibss, true);

    bool ok = ibss >= 1.5 * infra && std::abs(routed - ibss) <= 0.05 * ibss;
    report(3, "idle battery", ok,
           "ibss " + fmt("%.2f", ibss) + " %/h, infra station " + fmt("%.2f", infra) +
               " %/h (ratio " + fmt("%.2f", ibss / infra) + "), ibss+olsr " +
               fmt("%.2f", routed) + " %/h");
}

// --- 4. battery under load -----------------------------------------------------

energy::EnergyCoefficients accelerated()
{
    energy::EnergyCoefficients c;
    c.idle_ibss *= 100;
    c.idle_infra_ps *= 100;
    c.busy_tx *= 100;
    c.busy_rx *= 100;
    c.routing_cpu *= 100;
    return c;
}

// Mean seconds per percentage point over the node's recorded crossings.
double mean_interval(const MetricsBundle& b, const char* id)
{
    auto series = energy::discharge_series(b.battery.at(id));
    double sum = 0;
    for (const auto& iv : series)
        sum += iv.interval_s;
    return series.empty() ? 0.0 : sum / static_cast<double>(series.size());
}

void criterion4()
{
    Scenario sat;
    sat.name = "drain-sat";
    sat.duration_s = 4000;
    sat.nodes = {node("A", 0, 0), node("B", 40, 0), node("C", 80, 0)};
    sat.routing_package = "olsr";
    sat.energy = accelerated();
    FlowSpec f = flow(FlowKind::UdpSaturation, "A", "C", 6, 4000);
    f.until_depletion = true;
    sat.flows = {f};

    MetricsBundle b = harness::run(sat);
    double a = mean_interval(b, "A"), r = mean_interval(b, "B"), c = mean_interval(b, "C");
    bool sat_ok = b.stopped_on_depletion && a < r && a < c && std::abs(r - c) <= 0.10 * c;

    Scenario cbr = sat;
    cbr.name = "drain-cbr";
    cbr.flows[0].kind = FlowKind::Cbr;
    cbr.flows[0].rate_bps = 6e6;

    MetricsBundle b2 = harness::run(cbr);
    double a2 = mean_interval(b2, "A"), r2 = mean_interval(b2, "B"),
           c2 = mean_interval(b2, "C");
    double lo = std::min({a2, r2, c2}), hi = std::max({a2, r2, c2});
    bool cbr_ok = b2.stopped_on_depletion && hi <= 1.10 * lo;

    report(4, "battery under load", sat_ok && cbr_ok,
           "saturated s/%: A " + fmt("%.2f", a) + " B " + fmt("%.2f", r) + " C " +
               fmt("%.2f", c) + "; 6 Mbit/s spread " + fmt("%.1f", (hi / lo - 1) * 100) + "%");
}

// --- 5. olsr vs BFS oracle ------------------------------------------------------

void criterion5()
{
    auto t0 = std::chrono::steady_clock::now();
    sim::SeededRng graph_rng(20260815);
    int checked_pairs = 0;
    std::string why = "ok";
    bool ok = true;

    for (int trial = 0; trial < 200 && ok; ++trial) {
        std::size_t n = static_cast<std::size_t>(graph_rng.uniform_int(2, 8));
        std::vector<std::pair<double, double>> pos;
        std::vector<std::vector<int>> adj;
        while (true) { // redraw until the 50 m unit-disk graph is connected
            pos.clear();
            for (std::size_t i = 0; i < n; ++i)
                pos.emplace_back(graph_rng.uniform(0.0, 120.0), graph_rng.uniform(0.0, 120.0));
            adj.assign(n, {});
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = i + 1; j < n; ++j) {
                    double dx = pos[i].first - pos[j].first, dy = pos[i].second - pos[j].second;
                    if (std::sqrt(dx * dx + dy * dy) <= 50.0) {
                        adj[i].push_back(static_cast<int>(j));
                        adj[j].push_back(static_cast<int>(i));
                    }
                }
            std::vector<int> seen(n, 0), stack{0};
            seen[0] = 1;
            std::size_t count = 1;
            while (!stack.empty()) {
                int u = stack.back();
                stack.pop_back();
                for (int v : adj[u])
                    if (!seen[v]) {
                        seen[v] = 1;
                        ++count;
                        stack.push_back(v);
                    }
            }
            if (count == n)
                break;
        }

        Scenario sc;
        sc.name = "graph";
        sc.seed = 1000 + static_cast<std::uint64_t>(trial);
        sc.duration_s = 15;
        sc.routing_package = "olsr";
        for (std::size_t i = 0; i < n; ++i) {
            NodeSpec spec;
            spec.id = "n" + std::to_string(i);
            spec.pos = {pos[i].first, pos[i].second};
            sc.nodes.push_back(spec);
        }

        harness::Workbench wb(sc);
        bool coverage_ok = true;
        for (const NodeSpec& spec : sc.nodes) {
            auto* olsr = dynamic_cast<routing::OlsrPlugin*>(wb.engine.plugin(spec.id));
            olsr->set_mpr_observer([&coverage_ok](const routing::OlsrPlugin& p) {
                auto sym = p.symmetric_neighbors();
                auto two = p.two_hop();
                for (const auto& [nbr, set] : two) {
                    if (sym.count(nbr) == 0)
                        continue;
                    for (routing::Ipv4 target : set) {
                        if (sym.count(target) != 0)
                            continue; // not a strict two-hop neighbor
                        bool covered = false;
                        for (routing::Ipv4 m : p.mpr_set()) {
                            auto it = two.find(m);
                            if (it != two.end() && it->second.count(target) != 0)
                                covered = true;
                        }
                        coverage_ok = coverage_ok && covered;
                    }
                }
            });
        }
        wb.sched.run_until(sim::from_seconds(15.0));
        if (!coverage_ok) {
            ok = false;
            why = "MPR coverage violated in trial " + std::to_string(trial);
            break;
        }

        // Independent BFS oracle over the same unit-disk graph.
        for (std::size_t i = 0; i < n && ok; ++i) {
            std::vector<int> d(n, -1);
            std::vector<int> q{static_cast<int>(i)};
            d[i] = 0;
            for (std::size_t head = 0; head < q.size(); ++head)
                for (int v : adj[q[head]])
                    if (d[v] < 0) {
                        d[v] = d[q[head]] + 1;
                        q.push_back(v);
                    }

            routing::RouteTable table = wb.engine.routes(sc.nodes[i].id);
            for (std::size_t j = 0; j < n; ++j) {
                if (i == j)
                    continue;
                auto addr = wb.address_of(sc.nodes[j].id);
                auto entry = table.entries.find(*addr);
                if (entry == table.entries.end() || entry->second.hop_count != d[j]) {
                    ok = false;
                    why = "trial " + std::to_string(trial) + ": " + sc.nodes[i].id + "->" +
                          sc.nodes[j].id + " expected " + std::to_string(d[j]) + " hops";
                    break;
                }
                ++checked_pairs;
            }
        }
    }

    double wall = seconds_since(t0);
    ok = ok && wall < 60.0;
    report(5, "olsr on random graphs", ok,
           "200 graphs, " + std::to_string(checked_pairs) + " routes vs BFS, wall " +
               fmt("%.1f", wall) + " s" + (why == "ok" ? "" : "; " + why));
}

// --- 6. multicast confinement ----------------------------------------------------

harness::DiscoveryOutcome run_discovery(Scenario sc, double start)
{
    FlowSpec f = flow(FlowKind::Discovery, "A", "C", start, sc.duration_s);
    sc.flows = {f};
    MetricsBundle b = harness::run(sc);
    return b.discoveries.at(0);
}

void criterion6()
{
    Scenario sh = harness::builtin_scenario("ibss_sh");
    sh.duration_s = 45;
    auto d_sh = run_discovery(sh, 8);

    Scenario mh = harness::builtin_scenario("ibss_mh");
    mh.duration_s = 45;
    auto d_mh = run_discovery(mh, 8);

    // C walks out of A's direct range while B keeps bridging.
    Scenario walk;
    walk.name = "walk";
    walk.duration_s = 75;
    walk.routing_package = "olsr";
    NodeSpec c = node("C", 45, 0);
    c.waypoints = {{sim::from_seconds(30), {45, 0}}, {sim::from_seconds(35), {80, 0}}};
    walk.nodes = {node("A", 0, 0), node("B", 40, 0), c};
    auto d_walk = run_discovery(walk, 25);

    bool ok = d_sh.found && d_sh.session_ok && !d_mh.found && d_mh.session_ok &&
              d_walk.found && d_walk.session_ok;
    report(6, "multicast confinement", ok,
           std::string("sh found=") + (d_sh.found ? "yes" : "no") +
               " session=" + (d_sh.session_ok ? "ok" : "broken") +
               ", mh found=" + (d_mh.found ? "yes" : "no") +
               " session=" + (d_mh.session_ok ? "ok" : "broken") +
               ", sh->mh transition session=" + (d_walk.session_ok ? "ok" : "broken"));
}

// --- 7. taxonomy through the installed binary --------------------------------------

void criterion7()
{
    std::string cmd = std::string(MANETLAB_BIN) + " taxonomy --format csv 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    std::string out;
    if (pipe) {
        char buf[256];
        while (std::size_t got = std::fread(buf, 1, sizeof(buf), pipe))
            out.append(buf, got);
        pclose(pipe);
    }
    const std::string expected =
        "technology,no_internet_needed,multi_hop,any_app,no_other_wireless,other_systems\n"
        "802.11s,yes,yes,yes,yes,partial\n"
        "Open Garden,yes,partial,no,no,no\n"
        "Serval,yes,yes,no,yes,no\n"
        "WiFi Direct,yes,no,no,yes,yes\n"
        "AdHocDroid,yes,yes,yes,yes,partial\n";
    bool ok = out == expected;
    report(7, "taxonomy matrix", ok,
           ok ? "all 25 cells exact" : "cli output diverged from the published matrix");
}

// --- 8. determinism -----------------------------------------------------------------

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void criterion8()
{
    namespace fs = std::filesystem;
    fs::remove_all("acceptance_out");
    Scenario sc = harness::builtin_scenario("ibss_mh");

    MetricsBundle b1 = harness::run(sc);
    MetricsBundle b2 = harness::run(sc);
    harness::emit_csv(b1, "acceptance_out/det1");
    harness::emit_csv(b2, "acceptance_out/det2");

    bool ok = true;
    for (const char* f : {"throughput.csv", "ping.csv", "battery.csv", "routes.csv", "drops.csv"})
        ok = ok && slurp(fs::path("acceptance_out/det1") / f) ==
                       slurp(fs::path("acceptance_out/det2") / f);
    report(8, "determinism", ok,
           ok ? "equal seeds give byte-identical CSV reports"
              : "outputs diverged between equal-seed runs");
}

// --- 9. fault models ------------------------------------------------------------------

void criterion9()
{
    // A driver that cannot join ad hoc networks fails the one-step setup.
    sim::Scheduler sched;
    link::Medium medium(sched, link::MediumModel{}, link::PowerSaveModel{},
                        sim::SeededRng(2 ^ 0x6d656469756dULL));
    netconfig::NetConfig net(sched, medium);
    medium.add_node("A", {0, 0});
    medium.set_fault("A", link::Fault::DriverNoIbss);
    auto setup = net.one_step_setup("A", {"manet", netconfig::ProfileMode::Ibss, 0});
    bool driver_ok = !setup.success && setup.error == netconfig::SetupError::DriverError;

    // A fake-AP cell partitions the moment its hub leaves.
    sim::Scheduler sched2;
    link::Medium medium2(sched2, link::MediumModel{}, link::PowerSaveModel{},
                         sim::SeededRng(3 ^ 0x6d656469756dULL));
    netconfig::NetConfig net2(sched2, medium2);
    routing::Engine engine2(sched2, medium2, net2, sim::SeededRng(3));
    diag::Diag dx2(sched2, engine2, net2);
    medium2.add_node("A", {0, 0});
    medium2.add_node("B", {20, 0});
    medium2.add_node("C", {40, 0});
    medium2.set_fault("B", link::Fault::FakeApIbss);
    for (const char* id : {"B", "A", "C"}) { // hub first, members bind to it
        net2.one_step_setup(id, {"manet", netconfig::ProfileMode::Ibss, 0});
        engine2.attach(id);
        dx2.install_node(id);
    }
    diag::PingOptions opts;
    opts.count = 10;
    auto series = dx2.ping("A", net2.address("C")->address, opts);
    sched2.schedule(sim::from_seconds(4.5), [&] { medium2.dissociate("B"); });
    sched2.run_until(sim::from_seconds(13.0));

    int before_recv = 0, after_sent = 0, after_lost = 0;
    for (const auto& rec : series->records) {
        if (sim::to_seconds(rec.sent_at) < 4.5)
            before_recv += rec.received_at ? 1 : 0;
        else {
            ++after_sent;
            after_lost += rec.lost() ? 1 : 0;
        }
    }
    bool hub_ok = before_recv > 0 && after_sent > 0 && after_lost == after_sent;

    report(9, "fault models", driver_ok && hub_ok,
           std::string("driver-no-ibss -> ") +
               (driver_ok ? "DriverError" : "unexpected result") + "; hub departure: " +
               std::to_string(after_lost) + "/" + std::to_string(after_sent) +
               " subsequent pings lost");
}

} // namespace

int main()
{
    criterion1();
    criterion2();
    criterion3();
    criterion4();
    criterion5();
    criterion6();
    criterion7();
    criterion8();
    criterion9();

    if (g_failures)
        std::printf("%d criterion(s) failed\n", g_failures);
    else
        std::printf("all acceptance criteria hold\n");
    return g_failures ? 1 : 0;
}
