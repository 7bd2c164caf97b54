#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "activetrace/arm/spoof_db.hpp"
#include "activetrace/arm/types.hpp"
#include "activetrace/defense/firewall.hpp"
#include "activetrace/net/topology.hpp"
#include "activetrace/swt/gateway.hpp"

namespace activetrace::arm {

ACTIVETRACE_DEFINE_ERROR(TracerUnavailable);

/// Alert class to tracer. Total over alert classes.
TraceStrategyKind classify(const defense::Alert& a);

struct PolicyTier {
    std::uint64_t min_offense{1};
    std::vector<ActionKind> actions;
};

/// Escalation ladder keyed on a real origin's offense count.
struct ResponsePolicy {
    std::vector<PolicyTier> tiers;

    static ResponsePolicy standard();
    /// Tiers sorted by threshold with non-decreasing severity. Throws Error.
    void validate() const;
    const PolicyTier& tier_for(std::uint64_t offense) const;
};

/// Severity rank used to check the ladder is monotone.
int severity(ActionKind k);

/// What select_response needs to phrase concrete actions.
struct ResponseContext {
    const net::Topology& topology;
    net::Address victim;
    /// Where reconfiguration rules start looking for a free priority.
    std::int32_t rule_priority_base{1};
};

/// Actions for a Resolved or Partial trace. Offense count per origin is
/// 1 + the database's prior offenses for that origin. A Partial result yields
/// Warn plus RemoteMonitor at the farthest point. Failed yields nothing.
std::vector<ResponseAction> select_response(const TraceResult& r, const SpoofDb& db, const ResponsePolicy& policy,
                                            const ResponseContext& ctx);

/// Firewall rule that stops an origin's traffic to the victim.
/// For a router origin the rule denies traffic to the victim where it passes
/// that router; for an end host it denies the host's source address at its
/// guardian.
defense::FirewallRule deny_rule_for(const net::Topology& t, net::Address origin, net::Address victim);

struct Effect {
    ResponseAction action;
    bool mutation{false};
    std::string detail;
    std::optional<defense::RuleId> rule_id;
    std::optional<net::NodeId> isolated;
};

struct EffectsLog {
    std::vector<Effect> entries;
    std::size_t mutations() const;
};

struct ResponseTargets {
    net::Topology& topology;
    defense::RuleSet& rules;
    swt::GuardianFabric* fabric{nullptr};
};

/// Carries out the actions. Warn, BlockTraffic, ChangePermissions and
/// CounterStrike only log; the rest mutate the rule set, topology or fabric.
/// Throws UnknownNode for a target address with no node.
EffectsLog apply_response(std::span<const ResponseAction> actions, ResponseTargets targets);

/// Undoes rule additions from an effects log. Isolation is not reverted.
void revert_rules(const EffectsLog& log, defense::RuleSet& rules);

}  // namespace activetrace::arm
