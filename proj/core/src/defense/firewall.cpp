#include "activetrace/defense/firewall.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace activetrace::defense {

std::string_view to_string(Verdict v) { return v == Verdict::Allow ? "allow" : "deny"; }

std::string_view to_string(Direction d) {
    switch (d) {
        case Direction::Inbound: return "inbound";
        case Direction::Outbound: return "outbound";
        case Direction::Both: return "both";
    }
    return "?";
}

std::optional<Verdict> parse_verdict(std::string_view text) {
    if (text == "allow") return Verdict::Allow;
    if (text == "deny") return Verdict::Deny;
    return std::nullopt;
}

std::optional<Direction> parse_direction(std::string_view text) {
    if (text == "inbound") return Direction::Inbound;
    if (text == "outbound") return Direction::Outbound;
    if (text == "both") return Direction::Both;
    return std::nullopt;
}

bool FirewallRule::matches(const net::PacketHeader& h, Flow flow) const {
    if (direction == Direction::Inbound && flow != Flow::Inbound) return false;
    if (direction == Direction::Outbound && flow != Flow::Outbound) return false;
    if (port && *port != h.port) return false;
    return src.contains(h.src) && dst.contains(h.dst);
}

std::string FirewallRule::describe() const {
    return fmt::format("#{} prio={} {} src={} dst={} port={} dir={}{} [{}]", id, priority, to_string(action),
                       src.to_string(), dst.to_string(), port ? std::to_string(*port) : std::string("*"),
                       to_string(direction), scope ? fmt::format(" at={}", scope->to_string()) : std::string(),
                       origin);
}

RuleId RuleSet::add_rule(FirewallRule rule) {
    if (!rule.src.well_formed() || !rule.dst.well_formed()) throw InvalidRule("address range with low > high");
    for (const auto& r : rules_)
        if (r.priority == rule.priority)
            throw PriorityConflict(fmt::format("priority {} already used by rule #{}", rule.priority, r.id));
    rule.id = next_id_++;
    auto pos = std::upper_bound(rules_.begin(), rules_.end(), rule.priority,
                                [](std::int32_t p, const FirewallRule& r) { return p < r.priority; });
    rules_.insert(pos, rule);
    return rule.id;
}

FirewallRule RuleSet::remove_rule(RuleId id) {
    auto it = std::find_if(rules_.begin(), rules_.end(), [&](const auto& r) { return r.id == id; });
    if (it == rules_.end()) throw UnknownRule(fmt::format("no rule #{}", id));
    FirewallRule out = *it;
    rules_.erase(it);
    return out;
}

const FirewallRule* RuleSet::find(RuleId id) const {
    auto it = std::find_if(rules_.begin(), rules_.end(), [&](const auto& r) { return r.id == id; });
    return it == rules_.end() ? nullptr : &*it;
}

bool RuleSet::has_scoped_rules_at(net::Address node) const {
    return std::any_of(rules_.begin(), rules_.end(), [&](const auto& r) { return r.scope && *r.scope == node; });
}

std::int32_t RuleSet::free_priority(std::int32_t from) const {
    std::int32_t p = from;
    while (std::any_of(rules_.begin(), rules_.end(), [&](const auto& r) { return r.priority == p; })) ++p;
    return p;
}

FilterDecision filter(const RuleSet& rs, const net::PacketHeader& h, Flow flow) {
    for (const auto& r : rs.rules()) {
        if (r.scope) continue;
        if (r.matches(h, flow)) return {r.action, r.id};
    }
    return {rs.default_action(), std::nullopt};
}

FilterDecision filter_at(const RuleSet& rs, const net::PacketHeader& h, Flow flow, net::Address at, bool border) {
    for (const auto& r : rs.rules()) {
        if (r.scope ? *r.scope != at : !border) continue;
        if (r.matches(h, flow)) return {r.action, r.id};
    }
    if (border) return {rs.default_action(), std::nullopt};
    return {Verdict::Allow, std::nullopt};
}

Flow classify_flow(const net::Node& node, const net::PacketHeader& h) {
    if (!node.valid_prefix) return Flow::Transit;
    const bool src_in = node.valid_prefix->contains(h.src);
    const bool dst_in = node.valid_prefix->contains(h.dst);
    if (dst_in && !src_in) return Flow::Inbound;
    if (src_in && !dst_in) return Flow::Outbound;
    return Flow::Transit;
}

net::HookVerdict FirewallHook::on_hop(const net::HopContext& ctx, net::PacketHeader& header) {
    const bool border = border_.contains(ctx.node);
    const auto& node = ctx.topology.node(ctx.node);
    if (!border && !rules_.has_scoped_rules_at(node.addr)) return net::HookVerdict::Pass;
    ++evaluations_;
    auto d = filter_at(rules_, header, classify_flow(node, header), node.addr, border);
    if (d.verdict == Verdict::Allow) return net::HookVerdict::Pass;
    ++denied_;
    ++deny_hits_[d.rule.value_or(0)];
    return net::HookVerdict::Drop;
}

}  // namespace activetrace::defense
