#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <utility>

#include "manetlab/sim/errors.hpp"
#include "manetlab/sim/time.hpp"

namespace manetlab::sim {

using EventId = std::uint64_t;
using EventFn = std::function<void()>;

// Discrete-event scheduler. Events fire in (time, insertion order); equal
// timestamps never race because insertion order is the tiebreak. run_until
// is inclusive: an event that schedules a child at the current bound still
// gets the child executed within the same call.
class Scheduler
{
  public:
    SimTime now() const { return m_now; }

    EventId schedule(SimTime fire_time, EventFn fn)
    {
        if (fire_time < m_now)
            throw SchedulingInPast("schedule: fire_time " + std::to_string(fire_time) +
                                   " earlier than now " + std::to_string(m_now));
        EventId id = m_next_id++;
        m_queue.emplace(Key{fire_time, id}, std::move(fn));
        return id;
    }

    EventId schedule_in(SimTime delay, EventFn fn)
    {
        return schedule(m_now + delay, std::move(fn));
    }

    // True if the event was still pending and has been removed.
    bool cancel(EventId id)
    {
        for (auto it = m_queue.begin(); it != m_queue.end(); ++it) {
            if (it->first.id == id) {
                m_queue.erase(it);
                return true;
            }
        }
        return false;
    }

    // Executes every event with fire_time <= t_end, then sets now() == t_end.
    void run_until(SimTime t_end)
    {
        if (t_end < m_now)
            throw SchedulingInPast("run_until: target earlier than now");
        while (!m_queue.empty() && m_queue.begin()->first.time <= t_end) {
            auto it = m_queue.begin();
            m_now = it->first.time;
            EventFn fn = std::move(it->second);
            EventId id = it->first.id;
            m_queue.erase(it);
            if (m_trace)
                m_trace(m_now, id);
            fn();
        }
        m_now = t_end;
    }

    void run_all()
    {
        while (!m_queue.empty()) {
            auto it = m_queue.begin();
            m_now = it->first.time;
            EventFn fn = std::move(it->second);
            EventId id = it->first.id;
            m_queue.erase(it);
            if (m_trace)
                m_trace(m_now, id);
            fn();
        }
    }

    std::size_t pending() const { return m_queue.size(); }

    // Test hook: observes (fire_time, event id) of every executed event.
    using TraceFn = std::function<void(SimTime, EventId)>;
    void set_trace(TraceFn fn) { m_trace = std::move(fn); }

  private:
    struct Key
    {
        SimTime time;
        EventId id;
        bool operator<(const Key& o) const
        {
            return time != o.time ? time < o.time : id < o.id;
        }
    };

    SimTime m_now = 0;
    EventId m_next_id = 0;
    std::map<Key, EventFn> m_queue;
    TraceFn m_trace;
};

} // namespace manetlab::sim
