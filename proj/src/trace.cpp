#include "proxsim/trace.hpp"

#include <cmath>

#include "proxsim/error.hpp"

namespace proxsim::report {

const char* to_string(EventKind k) {
    switch (k) {
    case EventKind::Probe: return "probe";
    case EventKind::ProfilePoll: return "profile_poll";
    case EventKind::LocalizeResult: return "localize_result";
    case EventKind::IdentifyRound: return "identify_round";
    case EventKind::Export: return "export";
    }
    return "?";
}

std::size_t AttackTrace::append(TraceEvent e) {
    if (!std::isfinite(e.t_s)) throw ValidationError("trace timestamp must be finite");
    if (!events_.empty() && e.t_s < events_.back().t_s) {
        throw ValidationError("trace timestamps must be non-decreasing");
    }
    if (e.kind == EventKind::LocalizeResult) {
        if (e.refs.empty()) throw ValidationError("localize_result must reference its probes");
        for (auto r : e.refs) {
            if (r >= events_.size() || events_[r].kind != EventKind::Probe) {
                throw ValidationError("localize_result references a non-probe event");
            }
        }
    }
    events_.push_back(std::move(e));
    return events_.size() - 1;
}

} // namespace proxsim::report
