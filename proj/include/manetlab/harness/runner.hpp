#pragma once

#include "manetlab/harness/metrics.hpp"
#include "manetlab/harness/scenario.hpp"

namespace manetlab::harness {

// Executes a scenario to its duration, or to the first battery depletion if
// a flow asks for that, and collects every metric the CSV emitter knows how
// to write. Deterministic for a given scenario and seed.
MetricsBundle run(const Scenario& scenario);

} // namespace manetlab::harness
