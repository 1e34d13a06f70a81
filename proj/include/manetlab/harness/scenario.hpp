#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "manetlab/energy/battery.hpp"
#include "manetlab/link/types.hpp"

namespace manetlab::harness {

struct NodeSpec
{
    link::NodeId id;
    link::Position pos;
    std::vector<link::Waypoint> waypoints;
    link::Fault fault = link::Fault::None;
    double battery_percent = 100.0;
};

enum class FlowKind { UdpSaturation, Cbr, PingSeries, Discovery };

struct FlowSpec
{
    FlowKind kind = FlowKind::UdpSaturation;
    link::NodeId src;
    link::NodeId dst;
    double start_s = 0.0;
    double stop_s = 0.0; // defaults to the scenario duration
    std::optional<std::uint32_t> packet_size;
    double rate_bps = 0.0;    // cbr only
    int count = 30;           // ping-series only
    double interval_s = 1.0;  // ping-series only
    bool until_depletion = false;

    std::uint32_t size_or(std::uint32_t fallback) const
    {
        return packet_size ? *packet_size : fallback;
    }
    std::string label() const;
};

enum class ScenarioMode { Ibss, Infrastructure };

struct Scenario
{
    std::string name;
    std::uint64_t seed = 1;
    double duration_s = 60.0;
    ScenarioMode mode = ScenarioMode::Ibss;
    link::NodeId ap; // infrastructure only
    std::string ssid = "manet";
    std::vector<NodeSpec> nodes;
    link::MediumModel medium;
    std::optional<std::string> routing_package;
    nlohmann::json routing_params = nlohmann::json::object();
    energy::EnergyCoefficients energy;
    std::vector<FlowSpec> flows;

    const NodeSpec* find_node(const link::NodeId& id) const;
    void validate() const;
};

// Parses and validates the JSON scenario document described in
// docs/scenario-format.md. Unknown keys are rejected so typos fail loudly.
Scenario parse_scenario(const std::string& json_text);
Scenario load_scenario(const std::string& path);

// The three canonical testbed layouts, ready to run.
std::vector<std::string> builtin_names();
Scenario builtin_scenario(const std::string& name);
bool is_builtin(const std::string& name);

} // namespace manetlab::harness
