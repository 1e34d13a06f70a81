#pragma once

#include <vector>

#include <json.hpp>

#include "manetlab/link/types.hpp"
#include "manetlab/sim/time.hpp"

namespace manetlab::energy {

// Discharge rates in percent per hour. The radio coefficients apply to the
// fraction of each accounting epoch the interface spent busy; idle draw
// covers the whole epoch on top. All values are calibration constants and
// can be overridden per scenario.
struct EnergyCoefficients
{
    double idle_ibss = 5.0;     // ad-hoc mode cannot doze
    double idle_infra_ps = 2.0; // dozing infrastructure station
    double busy_tx = 20.0;
    double busy_rx = 17.0; // receive plus overheard (carrier-sense) airtime
    double routing_cpu = 0.1;   // per active routing daemon

    void validate() const; // all >= 0, idle_ibss > idle_infra_ps
    static EnergyCoefficients from_json(const nlohmann::json& overrides);
};

struct Crossing
{
    sim::SimTime at = 0;
    int percent = 0;
};

struct BatteryState
{
    double percent = 100.0;
    bool depleted = false;
    sim::SimTime clock = 0;       // advanced by each accounting step
    sim::SimTime start_clock = 0; // baseline for the first interval
    std::vector<Crossing> history;
};

// Integrates one accounting epoch of length dt_s. tx/rx airtime must fit in
// the epoch. Idle draw depends on the mode: only a dozing infrastructure
// station gets the power-save rate; IBSS members and access points keep the
// radio awake. Returns true when this step depleted the battery.
bool energy_step(BatteryState& state, const EnergyCoefficients& coeffs, double dt_s,
                 double tx_airtime_s, double rx_airtime_s, link::LinkMode mode, bool power_save,
                 bool routing_active);

struct DischargeInterval
{
    int percent = 0;      // integer level just reached
    double interval_s = 0; // time it took to drop this point
};

// The per-percent-point drop times, the unit battery plots are made of.
std::vector<DischargeInterval> discharge_series(const BatteryState& state);

} // namespace manetlab::energy
