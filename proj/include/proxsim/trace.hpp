#pragma once

// Audit log of attacker actions, consumed by the violation classifier.

#include <cstdint>
#include <string>
#include <vector>

namespace proxsim::report {

enum class EventKind { Probe, ProfilePoll, LocalizeResult, IdentifyRound, Export };

const char* to_string(EventKind k);

struct TraceEvent {
    EventKind kind = EventKind::Probe;
    double t_s = 0.0;
    std::uint64_t target = 0; // user id the action was aimed at; 0 = none
    double x_m = 0.0;         // probe position or estimate, attacker frame
    double y_m = 0.0;
    double value = 0.0;       // reported distance, residual, pool size, ...
    std::vector<std::size_t> refs; // LocalizeResult: indices of its Probe events
    std::string detail;
};

class AttackTrace {
public:
    /// Throws ValidationError when t_s goes backwards or a LocalizeResult
    /// references something other than an earlier Probe. Returns the index.
    std::size_t append(TraceEvent e);

    const std::vector<TraceEvent>& events() const { return events_; }
    std::size_t size() const { return events_.size(); }
    bool empty() const { return events_.empty(); }
    double last_t() const { return events_.empty() ? 0.0 : events_.back().t_s; }

private:
    std::vector<TraceEvent> events_;
};

} // namespace proxsim::report
