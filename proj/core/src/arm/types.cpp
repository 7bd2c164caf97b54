#include "activetrace/arm/types.hpp"

#include <fmt/format.h>

namespace activetrace::arm {

std::string_view to_string(TraceStrategyKind k) {
    switch (k) {
        case TraceStrategyKind::PPM: return "PPM";
        case TraceStrategyKind::SWT: return "SWT";
        case TraceStrategyKind::IngressCheck: return "IngressCheck";
        case TraceStrategyKind::InputDebugging: return "InputDebugging";
        case TraceStrategyKind::ControlledFlooding: return "ControlledFlooding";
        case TraceStrategyKind::Logging: return "Logging";
    }
    return "?";
}

std::string_view to_string(TraceStatus s) {
    switch (s) {
        case TraceStatus::Resolved: return "Resolved";
        case TraceStatus::Partial: return "Partial";
        case TraceStatus::Failed: return "Failed";
    }
    return "?";
}

std::string_view to_string(ActionKind k) {
    switch (k) {
        case ActionKind::Warn: return "Warn";
        case ActionKind::BlockTraffic: return "BlockTraffic";
        case ActionKind::ReconfigureFirewall: return "ReconfigureFirewall";
        case ActionKind::ClosePort: return "ClosePort";
        case ActionKind::IsolateHost: return "IsolateHost";
        case ActionKind::RemoteMonitor: return "RemoteMonitor";
        case ActionKind::ChangePermissions: return "ChangePermissions";
        case ActionKind::CounterStrike: return "CounterStrike";
    }
    return "?";
}

std::string ResponseAction::describe() const {
    std::string out(to_string(kind));
    if (rule) return out + "(" + rule->describe() + ")";
    if (port) return fmt::format("{}({})", out, *port);
    if (target && !resource.empty()) return fmt::format("{}({}, {})", out, target->to_string(), resource);
    if (target) return fmt::format("{}({})", out, target->to_string());
    return out;
}

}  // namespace activetrace::arm
