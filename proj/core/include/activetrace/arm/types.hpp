#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "activetrace/defense/firewall.hpp"
#include "activetrace/defense/ids.hpp"
#include "activetrace/ppm/reconstruct.hpp"
#include "activetrace/swt/session.hpp"

namespace activetrace::arm {

enum class TraceStrategyKind { PPM, SWT, IngressCheck, InputDebugging, ControlledFlooding, Logging };

std::string_view to_string(TraceStrategyKind k);

enum class TraceStatus { Resolved, Partial, Failed };

std::string_view to_string(TraceStatus s);

/// What a watermark trace left behind, for reports.
struct SwtTranscript {
    std::string token;
    std::vector<swt::Awakening> awakenings;
    std::vector<swt::Sighting> sightings;
    std::string session_status;
};

struct TraceResult {
    std::uint64_t alert_id{0};
    defense::AlertClass cls{defense::AlertClass::DoSFlood};
    TraceStrategyKind strategy{TraceStrategyKind::PPM};
    TraceStatus status{TraceStatus::Failed};
    /// Resolved origins, from tracer evidence only.
    std::vector<net::Address> origins;
    /// Partial: the farthest point the trace reached.
    std::optional<net::Address> farthest;
    std::string reason;
    std::optional<ppm::AttackGraph> graph;
    std::optional<SwtTranscript> transcript;
    /// Marked samples (PPM) or payload inspections (SWT) spent on the trace.
    std::uint64_t consumed{0};
    net::Tick started{0};
    net::Tick finished{0};
    /// Prior origins from the spoof database handed to the tracer.
    std::vector<net::Address> candidates;
    bool resolved_by_candidate{false};

    net::Tick ticks() const { return finished - started; }
};

enum class ActionKind {
    Warn,
    BlockTraffic,
    ReconfigureFirewall,
    ClosePort,
    IsolateHost,
    RemoteMonitor,
    ChangePermissions,
    CounterStrike,
};

std::string_view to_string(ActionKind k);

/// One response step. Which fields are set depends on `kind`:
/// origin-targeted actions use `target`, ReconfigureFirewall carries `rule`,
/// ClosePort carries `port`, IsolateHost and RemoteMonitor carry `target` as
/// the node address, ChangePermissions adds `resource`.
struct ResponseAction {
    ActionKind kind{ActionKind::Warn};
    std::optional<net::Address> target;
    std::optional<defense::FirewallRule> rule;
    std::optional<std::uint16_t> port;
    std::string resource;

    std::string describe() const;
    bool operator==(const ResponseAction&) const = default;

    static ResponseAction warn(net::Address origin) { return {ActionKind::Warn, origin, {}, {}, {}}; }
    static ResponseAction block(net::Address origin) { return {ActionKind::BlockTraffic, origin, {}, {}, {}}; }
    static ResponseAction reconfigure(defense::FirewallRule r) { return {ActionKind::ReconfigureFirewall, {}, r, {}, {}}; }
    static ResponseAction close_port(std::uint16_t port) { return {ActionKind::ClosePort, {}, {}, port, {}}; }
    static ResponseAction isolate(net::Address node) { return {ActionKind::IsolateHost, node, {}, {}, {}}; }
    static ResponseAction monitor(net::Address gateway) { return {ActionKind::RemoteMonitor, gateway, {}, {}, {}}; }
    static ResponseAction change_permissions(net::Address host, std::string resource) {
        return {ActionKind::ChangePermissions, host, {}, {}, std::move(resource)};
    }
    static ResponseAction counter_strike(net::Address origin) { return {ActionKind::CounterStrike, origin, {}, {}, {}}; }
};

}  // namespace activetrace::arm
