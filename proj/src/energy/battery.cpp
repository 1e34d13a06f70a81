#include "manetlab/energy/battery.hpp"

#include <algorithm>
#include <cmath>

#include "manetlab/sim/errors.hpp"

namespace manetlab::energy {

void EnergyCoefficients::validate() const
{
    for (double v : {idle_ibss, idle_infra_ps, busy_tx, busy_rx, routing_cpu})
        if (v < 0.0)
            throw ValidationError("energy coefficients must be non-negative");
    if (!(idle_ibss > idle_infra_ps))
        throw ValidationError("idle_ibss must exceed idle_infra_ps");
}

EnergyCoefficients EnergyCoefficients::from_json(const nlohmann::json& overrides)
{
    EnergyCoefficients c;
    for (const auto& [key, value] : overrides.items()) {
        if (key == "idle_ibss")
            c.idle_ibss = value.get<double>();
        else if (key == "idle_infra_ps")
            c.idle_infra_ps = value.get<double>();
        else if (key == "busy_tx")
            c.busy_tx = value.get<double>();
        else if (key == "busy_rx")
            c.busy_rx = value.get<double>();
        else if (key == "routing_cpu")
            c.routing_cpu = value.get<double>();
        else
            throw ValidationError("unknown energy coefficient: " + key);
    }
    c.validate();
    return c;
}

bool energy_step(BatteryState& state, const EnergyCoefficients& coeffs, double dt_s,
                 double tx_airtime_s, double rx_airtime_s, link::LinkMode mode, bool power_save,
                 bool routing_active)
{
    if (tx_airtime_s + rx_airtime_s > dt_s + 1e-9)
        throw ValidationError("busy airtime exceeds the accounting epoch");

    sim::SimTime t0 = state.clock;
    state.clock += sim::from_seconds(dt_s);
    if (state.depleted)
        return false;

    bool dozing = mode == link::LinkMode::InfrastructureStation && power_save;
    double idle = dozing ? coeffs.idle_infra_ps : coeffs.idle_ibss;
    double drop = (idle * dt_s + coeffs.busy_tx * tx_airtime_s + coeffs.busy_rx * rx_airtime_s +
                   coeffs.routing_cpu * dt_s * (routing_active ? 1.0 : 0.0)) /
                  3600.0;

    double old_percent = state.percent;
    double new_percent = old_percent - drop;

    // Record every integer boundary this step crossed, at the time linear
    // interpolation puts the crossing inside the epoch.
    if (drop > 0.0) {
        int n = static_cast<int>(std::floor(old_percent));
        if (static_cast<double>(n) == old_percent)
            --n;
        for (; n >= 0 && static_cast<double>(n) >= new_percent; --n) {
            double frac = (old_percent - n) / drop;
            state.history.push_back(
                {t0 + static_cast<sim::SimTime>(std::llround(frac * dt_s * 1e6)), n});
        }
    }

    state.percent = std::max(new_percent, 0.0);
    if (new_percent <= 0.0) {
        state.depleted = true;
        return true;
    }
    return false;
}

std::vector<DischargeInterval> discharge_series(const BatteryState& state)
{
    std::vector<DischargeInterval> out;
    out.reserve(state.history.size());
    sim::SimTime prev = state.start_clock;
    for (const Crossing& c : state.history) {
        out.push_back({c.percent, sim::to_seconds(c.at - prev)});
        prev = c.at;
    }
    return out;
}

} // namespace manetlab::energy
