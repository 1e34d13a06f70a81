#include <doctest.h>

#include <algorithm>
#include <vector>

#include "manetlab/link/medium.hpp"
#include "manetlab/sim/errors.hpp"
#include "manetlab/sim/scheduler.hpp"

using namespace manetlab;
using namespace manetlab::link;
using manetlab::sim::Scheduler;
using manetlab::sim::SeededRng;
using manetlab::sim::SimTime;

namespace {

struct Rig
{
    Scheduler sched;
    Medium medium;

    explicit Rig(MediumModel model = {}, PowerSaveModel ps = {}, std::uint64_t seed = 1)
        : medium(sched, model, ps, SeededRng(seed))
    {
    }

    void add_ibss(const NodeId& id, double x, double y)
    {
        medium.add_node(id, {x, y});
        REQUIRE(medium.associate(id, LinkMode::Ibss, "manet"));
    }
};

Frame data_frame(const NodeId& dst, std::uint32_t size)
{
    Frame f;
    f.dst = dst;
    f.size_bytes = size;
    return f;
}

// Keeps `node`'s transmit queue topped up to depth two, mimicking an
// application that always has more to send than the channel can carry.
void saturate(Rig& rig, const NodeId& node, const NodeId& dst, std::uint32_t size)
{
    auto feed = [&rig, node, dst, size](FrameId) {
        while (rig.medium.queue_length(node) < 2)
            rig.medium.transmit(data_frame(dst, size), node);
    };
    rig.medium.set_transmit_complete_handler(node, feed);
    feed(0);
}

} // namespace

TEST_CASE("chain neighborhoods with default 50 m range")
{
    Rig rig;
    rig.add_ibss("A", 0, 0);
    rig.add_ibss("B", 40, 0);
    rig.add_ibss("C", 80, 0);

    CHECK(rig.medium.neighbors("B") == std::vector<NodeId>{"A", "C"});
    CHECK(rig.medium.neighbors("A") == std::vector<NodeId>{"B"});
    CHECK(rig.medium.neighbors("C") == std::vector<NodeId>{"B"});
}

TEST_CASE("nodes on different ssids or unassociated are not neighbors")
{
    Rig rig;
    rig.add_ibss("A", 0, 0);
    rig.medium.add_node("B", {10, 0});
    REQUIRE(rig.medium.associate("B", LinkMode::Ibss, "other"));
    rig.medium.add_node("C", {20, 0});

    CHECK(rig.medium.neighbors("A").empty());
    CHECK_THROWS_AS(rig.medium.transmit(data_frame("A", 100), "C"), NotAssociated);
}

TEST_CASE("single 1500-byte frame occupies 500 us of airtime")
{
    Rig rig;
    rig.add_ibss("A", 0, 0);
    rig.add_ibss("B", 40, 0);
    rig.add_ibss("C", 80, 0);
    rig.medium.enable_delivery_trace(true);

    rig.medium.transmit(data_frame("B", 1500), "A");
    rig.sched.run_until(sim::from_seconds(1.0));

    BusyAirtime a = rig.medium.busy_airtime("A", 0, sim::kMicrosPerSecond);
    CHECK(a.tx_s == doctest::Approx(0.0005));
    CHECK(a.rx_s == 0.0);
    BusyAirtime b = rig.medium.busy_airtime("B", 0, sim::kMicrosPerSecond);
    CHECK(b.tx_s == 0.0);
    CHECK(b.rx_s == doctest::Approx(0.0005));
    // C cannot decode A's frame but its radio still senses the energy.
    BusyAirtime c = rig.medium.busy_airtime("C", 0, sim::kMicrosPerSecond);
    CHECK(c.rx_s == doctest::Approx(0.0005));

    // Delivery lands after airtime plus one processing delay.
    REQUIRE(rig.medium.delivery_trace().size() == 1);
    const auto& d = rig.medium.delivery_trace()[0];
    CHECK(d.from == "A");
    CHECK(d.to == "B");
    CHECK(d.at == 1000); // 500 us airtime + 500 us processing
}

TEST_CASE("idle node reports zero busy airtime")
{
    Rig rig;
    rig.add_ibss("A", 0, 0);
    rig.sched.run_until(sim::from_seconds(2.0));
    BusyAirtime a = rig.medium.busy_airtime("A", 0, 2 * sim::kMicrosPerSecond);
    CHECK(a.tx_s == 0.0);
    CHECK(a.rx_s == 0.0);
}

TEST_CASE("unicast to an out-of-range destination transmits but never delivers")
{
    Rig rig;
    rig.add_ibss("A", 0, 0);
    rig.add_ibss("B", 40, 0);
    rig.add_ibss("C", 80, 0);
    rig.medium.enable_delivery_trace(true);

    rig.medium.transmit(data_frame("C", 1000), "A");
    rig.sched.run_until(sim::from_seconds(1.0));

    CHECK(rig.medium.delivery_trace().empty());
    CHECK(rig.medium.drops().at(DropReason::OutOfRange) == 1);
    // Airtime was still spent.
    CHECK(rig.medium.busy_airtime("A", 0, sim::kMicrosPerSecond).tx_s > 0.0);
}

TEST_CASE("broadcast reaches every current neighbor exactly once")
{
    Rig rig;
    rig.add_ibss("A", 0, 0);
    rig.add_ibss("B", 40, 0);
    rig.add_ibss("C", 80, 0);
    rig.medium.enable_delivery_trace(true);

    Frame f;
    f.size_bytes = 100;
    f.multicast = true; // dst empty: broadcast
    rig.medium.transmit(f, "B");
    rig.sched.run_until(sim::from_seconds(1.0));

    std::vector<NodeId> got;
    for (const auto& d : rig.medium.delivery_trace())
        got.push_back(d.to);
    std::sort(got.begin(), got.end());
    CHECK(got == std::vector<NodeId>{"A", "C"});
}

TEST_CASE("saturated single hop sustains the nominal 24 Mbit/s")
{
    Rig rig;
    rig.add_ibss("A", 0, 0);
    rig.add_ibss("B", 40, 0);

    std::uint64_t delivered_bits = 0;
    rig.medium.set_receive_handler("B", [&](const Frame& f, SimTime) {
        delivered_bits += static_cast<std::uint64_t>(f.size_bytes) * 8;
    });
    saturate(rig, "A", "B", 1470);
    rig.sched.run_until(sim::from_seconds(10.0));

    double goodput = static_cast<double>(delivered_bits) / 10.0;
    CHECK(goodput == doctest::Approx(24e6).epsilon(0.01));
    // Channel fully occupied by the sender.
    BusyAirtime a = rig.medium.busy_airtime("A", sim::from_seconds(5), sim::from_seconds(6));
    CHECK(a.tx_s == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("relay in a saturated chain: 10.8 Mbit/s through, 0.45 s tx and rx each")
{
    Rig rig;
    rig.add_ibss("A", 0, 0);
    rig.add_ibss("B", 40, 0);
    rig.add_ibss("C", 80, 0);

    // B forwards everything it hears on to C, preserving the origin mark the
    // way a network-layer relay would.
    rig.medium.set_receive_handler("B", [&](const Frame& f, SimTime) {
        Frame fwd;
        fwd.dst = "C";
        fwd.origin = f.origin;
        fwd.size_bytes = f.size_bytes;
        rig.medium.transmit(fwd, "B");
    });
    std::uint64_t delivered_bits = 0;
    std::uint64_t delivered_bits_5_to_6 = 0;
    rig.medium.set_receive_handler("C", [&](const Frame& f, SimTime at) {
        std::uint64_t bits = static_cast<std::uint64_t>(f.size_bytes) * 8;
        delivered_bits += bits;
        if (at >= sim::from_seconds(5) && at < sim::from_seconds(6))
            delivered_bits_5_to_6 += bits;
    });
    saturate(rig, "A", "B", 1470);
    rig.sched.run_until(sim::from_seconds(10.0));

    double goodput = static_cast<double>(delivered_bits) / 10.0;
    CHECK(goodput == doctest::Approx(10.8e6).epsilon(0.015));
    CHECK(static_cast<double>(delivered_bits_5_to_6) == doctest::Approx(10.8e6).epsilon(0.02));

    // Steady-state airtime split at the relay.
    BusyAirtime b = rig.medium.busy_airtime("B", sim::from_seconds(5), sim::from_seconds(6));
    CHECK(b.tx_s == doctest::Approx(0.45).epsilon(0.02));
    CHECK(b.rx_s == doctest::Approx(0.45).epsilon(0.02));

    // The gaps belong to the saturated source, not the relay.
    CHECK(rig.medium.contend_airtime("A", sim::from_seconds(5), sim::from_seconds(6)) > 0.0);
    CHECK(rig.medium.contend_airtime("B", sim::from_seconds(5), sim::from_seconds(6)) == 0.0);
}

TEST_CASE("infrastructure BSS relays station traffic through the AP")
{
    Rig rig;
    rig.medium.add_node("B", {40, 0});
    REQUIRE(rig.medium.associate("B", LinkMode::InfrastructureAp, "net"));
    rig.medium.add_node("A", {0, 0});
    REQUIRE(rig.medium.associate("A", LinkMode::InfrastructureStation, "net"));
    rig.medium.add_node("C", {80, 0});
    REQUIRE(rig.medium.associate("C", LinkMode::InfrastructureStation, "net"));

    // Stations see each other through the AP even though they are 80 m apart.
    CHECK(rig.medium.neighbors("A") == std::vector<NodeId>{"B", "C"});

    SUBCASE("two transmissions per station-to-station frame")
    {
        Rig quiet(MediumModel{}, PowerSaveModel{.enabled = false});
        quiet.medium.add_node("B", {40, 0});
        REQUIRE(quiet.medium.associate("B", LinkMode::InfrastructureAp, "net"));
        quiet.medium.add_node("A", {0, 0});
        REQUIRE(quiet.medium.associate("A", LinkMode::InfrastructureStation, "net"));
        quiet.medium.add_node("C", {80, 0});
        REQUIRE(quiet.medium.associate("C", LinkMode::InfrastructureStation, "net"));
        quiet.medium.enable_delivery_trace(true);

        quiet.medium.transmit(data_frame("C", 1500), "A");
        quiet.sched.run_until(sim::from_seconds(1.0));

        REQUIRE(quiet.medium.delivery_trace().size() == 1);
        const auto& d = quiet.medium.delivery_trace()[0];
        CHECK(d.from == "A");
        CHECK(d.to == "C");
        CHECK(d.at == 2000); // two hops of 500 us airtime + 500 us processing
        CHECK(quiet.medium.busy_airtime("B", 0, sim::kMicrosPerSecond).tx_s ==
              doctest::Approx(0.0005));
    }

    SUBCASE("power save delays an isolated downlink frame to an idle station")
    {
        rig.medium.enable_delivery_trace(true);
        rig.medium.transmit(data_frame("C", 1500), "A");
        rig.sched.run_until(sim::from_seconds(2.0));

        REQUIRE(rig.medium.delivery_trace().size() == 1);
        SimTime at = rig.medium.delivery_trace()[0].at;
        CHECK(at >= 2000);
        CHECK(at <= 2000 + sim::from_seconds(0.2048));
    }
}

TEST_CASE("power save delay draw covers one DTIM cycle")
{
    PowerSaveModel ps;
    SeededRng rng(9);
    double lo = 1e9, hi = -1;
    for (int i = 0; i < 2000; ++i) {
        double d = power_save_delay(rng, ps);
        lo = std::min(lo, d);
        hi = std::max(hi, d);
        CHECK(d >= 0.0);
        CHECK(d <= 2 * 0.1024);
    }
    CHECK(lo < 0.01);
    CHECK(hi > 0.19);
}

TEST_CASE("teardown while a frame is in flight loses the frame")
{
    Rig rig;
    rig.add_ibss("A", 0, 0);
    rig.add_ibss("B", 40, 0);
    rig.medium.enable_delivery_trace(true);

    rig.medium.transmit(data_frame("B", 1500), "A");
    rig.sched.schedule(700, [&] { rig.medium.dissociate("B"); }); // mid flight
    rig.sched.run_until(sim::from_seconds(1.0));

    CHECK(rig.medium.delivery_trace().empty());
    CHECK(rig.medium.drops().at(DropReason::Unassociated) == 1);
}

TEST_CASE("mobility: waypoint motion breaks and forms links")
{
    Rig rig;
    rig.add_ibss("A", 0, 0);
    rig.add_ibss("B", 40, 0);
    rig.medium.set_waypoints("B", {{sim::from_seconds(10), {40, 0}},
                                   {sim::from_seconds(20), {140, 0}}});

    rig.sched.run_until(sim::from_seconds(10));
    CHECK(rig.medium.neighbors("A") == std::vector<NodeId>{"B"});
    rig.sched.run_until(sim::from_seconds(15)); // B at 90 m
    CHECK(rig.medium.position("B").x == doctest::Approx(90.0));
    CHECK(rig.medium.neighbors("A").empty());
}

TEST_CASE("fake AP cell: hub relays everything and its loss partitions the cell")
{
    Rig rig;
    rig.medium.add_node("D", {20, 20});
    rig.medium.set_fault("D", Fault::FakeApIbss);
    REQUIRE(rig.medium.associate("D", LinkMode::Ibss, "manet"));
    rig.add_ibss("A", 0, 0);
    rig.add_ibss("C", 40, 0);
    rig.medium.enable_delivery_trace(true);

    // A and C are in mutual radio range, yet traffic flows through D.
    rig.medium.transmit(data_frame("C", 1500), "A");
    rig.sched.run_until(sim::from_seconds(1.0));
    REQUIRE(rig.medium.delivery_trace().size() == 1);
    CHECK(rig.medium.delivery_trace()[0].at == 2000); // hub-relayed, two hops
    CHECK(rig.medium.busy_airtime("D", 0, sim::kMicrosPerSecond).tx_s > 0.0);

    // The hub departs; its cell cannot recover.
    rig.medium.dissociate("D");
    rig.medium.transmit(data_frame("C", 1500), "A");
    rig.sched.run_until(sim::from_seconds(2.0));
    CHECK(rig.medium.delivery_trace().size() == 1); // nothing new
    CHECK(rig.medium.drops().at(DropReason::HubLost) == 1);
    CHECK(rig.medium.neighbors("A").empty());
}

TEST_CASE("driver that cannot do IBSS never associates")
{
    Rig rig;
    rig.add_ibss("A", 0, 0);
    rig.medium.add_node("B", {10, 0});
    rig.medium.set_fault("B", Fault::DriverNoIbss);
    CHECK_FALSE(rig.medium.associate("B", LinkMode::Ibss, "manet"));
    CHECK_FALSE(rig.medium.associated("B"));
    CHECK(rig.medium.neighbors("A").empty());
    CHECK_THROWS_AS(rig.medium.transmit(data_frame("A", 100), "B"), NotAssociated);
}

TEST_CASE("delivery traces are identical across equal-seed runs")
{
    auto run = [] {
        Rig rig(MediumModel{}, PowerSaveModel{}, 77);
        rig.add_ibss("A", 0, 0);
        rig.add_ibss("B", 40, 0);
        rig.add_ibss("C", 80, 0);
        rig.medium.enable_delivery_trace(true);
        rig.medium.set_receive_handler("B", [&](const Frame& f, SimTime) {
            Frame fwd;
            fwd.dst = "C";
            fwd.origin = f.origin;
            fwd.size_bytes = f.size_bytes;
            rig.medium.transmit(fwd, "B");
        });
        saturate(rig, "A", "B", 1470);
        rig.sched.run_until(sim::from_seconds(2.0));
        std::vector<std::tuple<FrameId, NodeId, NodeId, SimTime>> out;
        for (const auto& d : rig.medium.delivery_trace())
            out.emplace_back(d.id, d.from, d.to, d.at);
        return out;
    };
    CHECK(run() == run());
}
