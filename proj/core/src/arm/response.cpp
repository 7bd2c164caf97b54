#include "activetrace/arm/response.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace activetrace::arm {

TraceStrategyKind classify(const defense::Alert& a) {
    switch (a.cls) {
        case defense::AlertClass::DoSFlood: return TraceStrategyKind::PPM;
        case defense::AlertClass::UnauthorizedAccess: return TraceStrategyKind::SWT;
    }
    return TraceStrategyKind::PPM;
}

int severity(ActionKind k) {
    switch (k) {
        case ActionKind::Warn: return 0;
        case ActionKind::RemoteMonitor: return 0;
        case ActionKind::ChangePermissions: return 1;
        case ActionKind::BlockTraffic: return 2;
        case ActionKind::ReconfigureFirewall: return 2;
        case ActionKind::ClosePort: return 2;
        case ActionKind::IsolateHost: return 3;
        case ActionKind::CounterStrike: return 4;
    }
    return 0;
}

ResponsePolicy ResponsePolicy::standard() {
    return ResponsePolicy{{
        {1, {ActionKind::Warn}},
        {2, {ActionKind::BlockTraffic, ActionKind::ReconfigureFirewall}},
        {3, {ActionKind::IsolateHost}},
    }};
}

namespace {

int tier_severity(const PolicyTier& t) {
    int s = 0;
    for (auto a : t.actions) s = std::max(s, severity(a));
    return s;
}

}  // namespace

void ResponsePolicy::validate() const {
    if (tiers.empty() || tiers.front().min_offense != 1) throw Error("policy ladder must start at offense 1");
    for (std::size_t i = 0; i < tiers.size(); ++i) {
        if (tiers[i].actions.empty()) throw Error(fmt::format("policy tier {} has no actions", i));
        if (i == 0) continue;
        if (tiers[i].min_offense <= tiers[i - 1].min_offense)
            throw Error("policy tiers must have strictly increasing thresholds");
        if (tier_severity(tiers[i]) < tier_severity(tiers[i - 1]))
            throw Error(fmt::format("policy tier {} is less severe than the one before it", i));
    }
}

const PolicyTier& ResponsePolicy::tier_for(std::uint64_t offense) const {
    const PolicyTier* best = &tiers.front();
    for (const auto& t : tiers)
        if (offense >= t.min_offense) best = &t;
    return *best;
}

defense::FirewallRule deny_rule_for(const net::Topology& t, net::Address origin, net::Address victim) {
    auto id = t.find(origin);
    if (!id) throw net::UnknownNode("no node with address " + origin.to_string());
    const auto& node = t.node(*id);
    defense::FirewallRule r;
    r.action = defense::Verdict::Deny;
    r.direction = defense::Direction::Both;
    r.origin = "response";
    if (net::is_forwarding(node.kind)) {
        // Spoofed sources make the source field useless; cut the flow where it enters.
        r.dst = net::AddressRange::single(victim);
        r.scope = origin;
    } else {
        r.src = net::AddressRange::single(origin);
        r.dst = net::AddressRange::single(victim);
        if (auto g = t.guardian_of(*id)) r.scope = t.node(*g).addr;
    }
    return r;
}

std::vector<ResponseAction> select_response(const TraceResult& r, const SpoofDb& db, const ResponsePolicy& policy,
                                            const ResponseContext& ctx) {
    std::vector<ResponseAction> out;
    if (r.status == TraceStatus::Failed) return out;
    if (r.status == TraceStatus::Partial) {
        if (r.farthest) {
            out.push_back(ResponseAction::warn(*r.farthest));
            out.push_back(ResponseAction::monitor(*r.farthest));
        }
        return out;
    }
    auto origins = r.origins;
    std::sort(origins.begin(), origins.end());
    for (auto origin : origins) {
        const auto offense = db.offenses(origin) + 1;
        for (auto kind : policy.tier_for(offense).actions) {
            switch (kind) {
                case ActionKind::ReconfigureFirewall: {
                    auto rule = deny_rule_for(ctx.topology, origin, ctx.victim);
                    rule.priority = 0;  // assigned when applied
                    out.push_back(ResponseAction::reconfigure(rule));
                    break;
                }
                case ActionKind::ClosePort:
                    // Nothing on the trace names a port; skip rather than guess.
                    break;
                case ActionKind::ChangePermissions:
                    out.push_back(ResponseAction::change_permissions(ctx.victim, "account:" + origin.to_string()));
                    break;
                default: out.push_back(ResponseAction{kind, origin, {}, {}, {}});
            }
        }
    }
    return out;
}

std::size_t EffectsLog::mutations() const {
    return static_cast<std::size_t>(
        std::count_if(entries.begin(), entries.end(), [](const Effect& e) { return e.mutation; }));
}

namespace {

net::NodeId require_node(const net::Topology& t, const std::optional<net::Address>& a) {
    if (!a) throw net::UnknownNode("action has no target");
    auto id = t.find(*a);
    if (!id) throw net::UnknownNode("no node with address " + a->to_string());
    return *id;
}

}  // namespace

EffectsLog apply_response(std::span<const ResponseAction> actions, ResponseTargets targets) {
    EffectsLog log;
    for (const auto& a : actions) {
        Effect e{a, false, {}, {}, {}};
        switch (a.kind) {
            case ActionKind::Warn:
                require_node(targets.topology, a.target);
                e.detail = fmt::format("warning issued to {}", a.target->to_string());
                break;
            case ActionKind::BlockTraffic:
                require_node(targets.topology, a.target);
                e.detail = fmt::format("traffic from {} flagged for blocking", a.target->to_string());
                break;
            case ActionKind::ChangePermissions:
                require_node(targets.topology, a.target);
                e.detail = fmt::format("permissions on {} revoked at {}", a.resource, a.target->to_string());
                break;
            case ActionKind::CounterStrike:
                require_node(targets.topology, a.target);
                e.detail = fmt::format("counter-strike against {} logged, not executed", a.target->to_string());
                break;
            case ActionKind::ReconfigureFirewall: {
                auto rule = a.rule.value();
                if (rule.scope && !targets.topology.find(*rule.scope))
                    throw net::UnknownNode("no node with address " + rule.scope->to_string());
                rule.priority = targets.rules.free_priority(std::max(rule.priority, 1));
                e.rule_id = targets.rules.add_rule(rule);
                e.mutation = true;
                e.detail = "added " + targets.rules.find(*e.rule_id)->describe();
                break;
            }
            case ActionKind::ClosePort: {
                defense::FirewallRule rule;
                rule.action = defense::Verdict::Deny;
                rule.port = a.port.value();
                rule.direction = defense::Direction::Inbound;
                rule.origin = "response";
                rule.priority = targets.rules.free_priority(1);
                e.rule_id = targets.rules.add_rule(rule);
                e.mutation = true;
                e.detail = "added " + targets.rules.find(*e.rule_id)->describe();
                break;
            }
            case ActionKind::IsolateHost: {
                auto n = require_node(targets.topology, a.target);
                targets.topology.detach_node(n);
                e.isolated = n;
                e.mutation = true;
                e.detail = fmt::format("detached {} from the network", targets.topology.node(n).name);
                break;
            }
            case ActionKind::RemoteMonitor: {
                auto n = require_node(targets.topology, a.target);
                auto* g = targets.fabric ? targets.fabric->gateway(n) : nullptr;
                if (!g && targets.fabric) {
                    // A router, not a gateway: monitor through the target's guardian when it has one.
                    if (auto gn = targets.topology.guardian_of(n)) g = targets.fabric->gateway(*gn);
                }
                if (g) {
                    g->set_monitoring(true);
                    e.mutation = true;
                    e.detail = fmt::format("monitoring enabled at {}", targets.topology.node(g->node()).name);
                } else {
                    e.detail = fmt::format("no guardian gateway at {} to monitor", a.target->to_string());
                }
                break;
            }
        }
        log.entries.push_back(std::move(e));
    }
    return log;
}

void revert_rules(const EffectsLog& log, defense::RuleSet& rules) {
    for (auto it = log.entries.rbegin(); it != log.entries.rend(); ++it)
        if (it->rule_id && rules.find(*it->rule_id)) rules.remove_rule(*it->rule_id);
}

}  // namespace activetrace::arm
