#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "manetlab/diag/diag.hpp"
#include "manetlab/energy/battery.hpp"
#include "manetlab/routing/types.hpp"

namespace manetlab::harness {

// One second of one flow: `bits` is the exact payload bit count delivered in
// [time_s, time_s + 1), so the series sums to the delivered total.
struct ThroughputSample
{
    std::int64_t time_s = 0;
    std::string flow;
    std::uint64_t bits = 0;
};

struct PingFlowResult
{
    std::string flow;
    std::shared_ptr<diag::PingSeries> series;
};

struct DiscoveryOutcome
{
    std::string flow;
    bool found = false;      // a responder answered the multicast query
    bool session_ok = false; // the follow-up unicast session completed
};

struct PairConvergence
{
    link::NodeId src;
    link::NodeId dst;
    double converged_s = -1.0; // earliest poll from which the route held; -1 = never
};

struct SetupFailure
{
    link::NodeId node;
    std::string error;
};

struct MetricsBundle
{
    std::string scenario;
    double duration_s = 0.0; // simulated time actually executed
    bool stopped_on_depletion = false;

    std::vector<ThroughputSample> throughput; // flow-major, time ascending
    std::map<std::string, std::uint64_t> delivered_bits;
    std::vector<PingFlowResult> pings;
    std::vector<DiscoveryOutcome> discoveries;
    std::map<link::NodeId, energy::BatteryState> battery;
    std::map<link::NodeId, routing::RouteTable> final_routes;
    std::vector<PairConvergence> convergence;
    std::map<link::DropReason, std::uint64_t> drops;
    std::map<link::NodeId, routing::Ipv4> addresses;
    std::vector<SetupFailure> setup_failures;

    double mean_goodput_bps(const std::string& flow) const;
};

// Writes throughput.csv, ping.csv, battery.csv, routes.csv and drops.csv and
// returns their paths. Output is byte-deterministic for a given bundle.
std::vector<std::string> emit_csv(const MetricsBundle& bundle, const std::string& out_dir);

} // namespace manetlab::harness
