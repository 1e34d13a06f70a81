#include "manetlab/diag/diag.hpp"

namespace manetlab::diag {

PositionLog::PositionLog(sim::Scheduler& sched, link::Medium& medium,
                         std::vector<link::NodeId> nodes, double period_s)
    : m_sched(sched), m_medium(medium), m_nodes(std::move(nodes)), m_period_s(period_s)
{
}

void PositionLog::start(double duration_s)
{
    sim::SimTime begin = m_sched.now();
    sim::SimTime period = sim::from_seconds(m_period_s);
    sim::SimTime end = begin + sim::from_seconds(duration_s);
    for (sim::SimTime t = begin; t <= end; t += period)
        m_sched.schedule(t, [this] {
            for (const auto& node : m_nodes)
                m_samples.push_back({m_sched.now(), node, m_medium.position(node)});
        });
}

} // namespace manetlab::diag
