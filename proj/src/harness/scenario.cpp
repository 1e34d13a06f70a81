#include "manetlab/harness/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "manetlab/netconfig/ipv4.hpp"
#include "manetlab/sim/errors.hpp"
#include "manetlab/sim/time.hpp"

namespace manetlab::harness {

namespace {

const char* kind_name(FlowKind kind)
{
    switch (kind) {
    case FlowKind::UdpSaturation: return "udp-saturation";
    case FlowKind::Cbr: return "cbr";
    case FlowKind::PingSeries: return "ping-series";
    case FlowKind::Discovery: return "discovery";
    }
    return "?";
}

FlowKind parse_kind(const std::string& s)
{
    if (s == "udp-saturation")
        return FlowKind::UdpSaturation;
    if (s == "cbr")
        return FlowKind::Cbr;
    if (s == "ping-series")
        return FlowKind::PingSeries;
    if (s == "discovery")
        return FlowKind::Discovery;
    throw ValidationError("unknown flow kind: " + s);
}

link::Fault parse_fault(const std::string& s)
{
    if (s == "none")
        return link::Fault::None;
    if (s == "driver-no-ibss")
        return link::Fault::DriverNoIbss;
    if (s == "fake-ap-ibss")
        return link::Fault::FakeApIbss;
    throw ValidationError("unknown fault: " + s);
}

void expect_keys(const nlohmann::json& obj, const std::set<std::string>& allowed,
                 const std::string& where)
{
    for (const auto& [key, value] : obj.items())
        if (!allowed.count(key))
            throw ValidationError("unknown key \"" + key + "\" in " + where);
}

link::MediumModel parse_medium(const nlohmann::json& obj)
{
    expect_keys(obj,
                {"nominal_capacity_bps", "contention_overhead", "per_hop_processing_s",
                 "radio_range_m"},
                "medium");
    link::MediumModel m;
    if (obj.contains("nominal_capacity_bps"))
        m.nominal_capacity_bps = obj["nominal_capacity_bps"].get<double>();
    if (obj.contains("contention_overhead"))
        m.contention_overhead = obj["contention_overhead"].get<double>();
    if (obj.contains("per_hop_processing_s"))
        m.per_hop_processing_s = obj["per_hop_processing_s"].get<double>();
    if (obj.contains("radio_range_m"))
        m.radio_range_m = obj["radio_range_m"].get<double>();
    if (m.nominal_capacity_bps <= 0 || m.radio_range_m <= 0 || m.contention_overhead < 0 ||
        m.contention_overhead >= 1 || m.per_hop_processing_s < 0)
        throw ValidationError("medium overrides out of range");
    return m;
}

NodeSpec parse_node(const nlohmann::json& obj)
{
    expect_keys(obj, {"id", "x", "y", "waypoints", "fault", "battery"}, "node");
    NodeSpec n;
    n.id = obj.at("id").get<std::string>();
    n.pos.x = obj.value("x", 0.0);
    n.pos.y = obj.value("y", 0.0);
    if (obj.contains("fault"))
        n.fault = parse_fault(obj["fault"].get<std::string>());
    n.battery_percent = obj.value("battery", 100.0);
    if (obj.contains("waypoints"))
        for (const auto& wp : obj["waypoints"]) {
            expect_keys(wp, {"at_s", "x", "y"}, "waypoint");
            n.waypoints.push_back({sim::from_seconds(wp.at("at_s").get<double>()),
                                   {wp.at("x").get<double>(), wp.at("y").get<double>()}});
        }
    return n;
}

FlowSpec parse_flow(const nlohmann::json& obj, double duration_s)
{
    expect_keys(obj,
                {"kind", "src", "dst", "start_s", "stop_s", "packet_size", "rate_bps", "count",
                 "interval_s", "until_depletion"},
                "flow");
    FlowSpec f;
    f.kind = parse_kind(obj.at("kind").get<std::string>());
    f.src = obj.at("src").get<std::string>();
    f.dst = obj.at("dst").get<std::string>();
    f.start_s = obj.value("start_s", 0.0);
    f.stop_s = obj.value("stop_s", duration_s);
    if (obj.contains("packet_size"))
        f.packet_size = obj["packet_size"].get<std::uint32_t>();
    f.rate_bps = obj.value("rate_bps", 0.0);
    f.count = obj.value("count", 30);
    f.interval_s = obj.value("interval_s", 1.0);
    f.until_depletion = obj.value("until_depletion", false);
    return f;
}

bool sane_id(const link::NodeId& id)
{
    if (id.empty())
        return false;
    return std::all_of(id.begin(), id.end(), [](unsigned char c) {
        return std::isgraph(c) && c != ',';
    });
}

} // namespace

std::string FlowSpec::label() const
{
    return std::string(kind_name(kind)) + ":" + src + "->" + dst;
}

const NodeSpec* Scenario::find_node(const link::NodeId& id) const
{
    for (const NodeSpec& n : nodes)
        if (n.id == id)
            return &n;
    return nullptr;
}

void Scenario::validate() const
{
    if (nodes.empty())
        throw ValidationError("scenario needs at least one node");
    if (duration_s <= 0)
        throw ValidationError("duration must be positive");

    std::set<link::NodeId> ids;
    std::map<netconfig::Ipv4, link::NodeId> by_ip;
    for (const NodeSpec& n : nodes) {
        if (!sane_id(n.id))
            throw ValidationError("node id must be printable, comma-free and non-empty");
        if (!ids.insert(n.id).second)
            throw ValidationError("duplicate node id: " + n.id);
        if (n.battery_percent < 0 || n.battery_percent > 100)
            throw ValidationError("battery percent out of range for node " + n.id);
        netconfig::Ipv4 ip = netconfig::default_ip(n.id).address;
        auto [it, fresh] = by_ip.emplace(ip, n.id);
        if (!fresh)
            throw ValidationError("duplicate IP " + netconfig::to_string(ip) + " for nodes " +
                                  it->second + " and " + n.id);
    }

    if (mode == ScenarioMode::Infrastructure) {
        if (ap.empty())
            throw ValidationError("infrastructure mode needs an ap");
        if (!ids.count(ap))
            throw ValidationError("ap names an unknown node: " + ap);
    }

    if (routing_package && *routing_package != "olsr" && *routing_package != "static")
        throw ValidationError("unknown routing package: " + *routing_package);

    energy.validate();

    for (const FlowSpec& f : flows) {
        if (!ids.count(f.src))
            throw ValidationError("flow src is not a node: " + f.src);
        if (!ids.count(f.dst))
            throw ValidationError("flow dst is not a node: " + f.dst);
        if (!(f.start_s < f.stop_s))
            throw ValidationError("flow must start before it stops: " + f.label());
        if (f.stop_s > duration_s)
            throw ValidationError("flow runs past the scenario duration: " + f.label());
        if (f.kind == FlowKind::Cbr && f.rate_bps <= 0)
            throw ValidationError("cbr flow needs a positive rate: " + f.label());
        if (f.kind == FlowKind::PingSeries && (f.count < 1 || f.interval_s <= 0))
            throw ValidationError("ping series needs count >= 1 and a positive interval");
    }
}

Scenario parse_scenario(const std::string& json_text)
{
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("scenario: ") + e.what());
    }
    if (!doc.is_object())
        throw ParseError("scenario: top level must be an object");

    Scenario sc;
    try {
        expect_keys(doc,
                    {"name", "seed", "duration_s", "mode", "ap", "ssid", "nodes", "medium",
                     "routing", "energy", "flows"},
                    "scenario");
        sc.name = doc.value("name", std::string("unnamed"));
        sc.seed = doc.value("seed", std::uint64_t{1});
        sc.duration_s = doc.value("duration_s", 60.0);
        if (doc.contains("mode")) {
            std::string mode = doc["mode"].get<std::string>();
            if (mode == "ibss")
                sc.mode = ScenarioMode::Ibss;
            else if (mode == "infrastructure")
                sc.mode = ScenarioMode::Infrastructure;
            else
                throw ValidationError("unknown mode: " + mode);
        }
        sc.ap = doc.value("ap", std::string());
        sc.ssid = doc.value("ssid", std::string("manet"));
        for (const auto& n : doc.value("nodes", nlohmann::json::array()))
            sc.nodes.push_back(parse_node(n));
        if (doc.contains("medium"))
            sc.medium = parse_medium(doc["medium"]);
        if (doc.contains("routing")) {
            expect_keys(doc["routing"], {"package", "params"}, "routing");
            sc.routing_package = doc["routing"].at("package").get<std::string>();
            sc.routing_params = doc["routing"].value("params", nlohmann::json::object());
        }
        if (doc.contains("energy"))
            sc.energy = energy::EnergyCoefficients::from_json(doc["energy"]);
        for (const auto& f : doc.value("flows", nlohmann::json::array()))
            sc.flows.push_back(parse_flow(f, sc.duration_s));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("scenario: ") + e.what());
    }

    sc.validate();
    return sc;
}

Scenario load_scenario(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot read scenario file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

namespace {

FlowSpec saturation_flow()
{
    FlowSpec f;
    f.kind = FlowKind::UdpSaturation;
    f.src = "A";
    f.dst = "C";
    f.start_s = 10.0; // routing gets a head start to converge
    f.stop_s = 70.0;  // measured minute
    return f;
}

FlowSpec ping_flow()
{
    FlowSpec f;
    f.kind = FlowKind::PingSeries;
    f.src = "A";
    f.dst = "C";
    f.start_s = 70.0; // after the load test, on a quiet channel
    f.stop_s = 105.0;
    f.count = 30;
    f.interval_s = 1.0;
    return f;
}

Scenario base_scenario(const std::string& name)
{
    Scenario sc;
    sc.name = name;
    sc.duration_s = 105.0;
    sc.flows = {saturation_flow(), ping_flow()};
    return sc;
}

NodeSpec node_at(const char* id, double x, double y)
{
    NodeSpec n;
    n.id = id;
    n.pos = {x, y};
    return n;
}

} // namespace

std::vector<std::string> builtin_names()
{
    return {"infra", "ibss_sh", "ibss_mh"};
}

bool is_builtin(const std::string& name)
{
    auto names = builtin_names();
    return std::find(names.begin(), names.end(), name) != names.end();
}

Scenario builtin_scenario(const std::string& name)
{
    if (name == "infra") {
        Scenario sc = base_scenario(name);
        sc.mode = ScenarioMode::Infrastructure;
        sc.ap = "B";
        sc.nodes = {node_at("A", 0, 0), node_at("B", 20, 0), node_at("C", 40, 0)};
        return sc;
    }
    if (name == "ibss_sh") {
        Scenario sc = base_scenario(name);
        sc.nodes = {node_at("A", 0, 0), node_at("C", 40, 0)};
        sc.routing_package = "olsr";
        return sc;
    }
    if (name == "ibss_mh") {
        Scenario sc = base_scenario(name);
        sc.nodes = {node_at("A", 0, 0), node_at("B", 40, 0), node_at("C", 80, 0)};
        sc.routing_package = "olsr";
        return sc;
    }
    throw ValidationError("unknown builtin scenario: " + name);
}

} // namespace manetlab::harness
