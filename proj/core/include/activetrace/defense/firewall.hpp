#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "activetrace/error.hpp"
#include "activetrace/net/network.hpp"

namespace activetrace::defense {

ACTIVETRACE_DEFINE_ERROR(PriorityConflict);
ACTIVETRACE_DEFINE_ERROR(UnknownRule);
ACTIVETRACE_DEFINE_ERROR(InvalidRule);

enum class Verdict { Allow, Deny };

/// Direction a rule applies to.
enum class Direction { Inbound, Outbound, Both };

/// Direction of a packet relative to the protected prefix of the node
/// evaluating it. Transit traffic is matched only by `Both` rules.
enum class Flow { Inbound, Outbound, Transit };

std::string_view to_string(Verdict v);
std::string_view to_string(Direction d);
std::optional<Verdict> parse_verdict(std::string_view text);
std::optional<Direction> parse_direction(std::string_view text);

using RuleId = std::uint32_t;

struct FirewallRule {
    RuleId id{0};  // assigned by RuleSet::add_rule
    Verdict action{Verdict::Deny};
    net::AddressRange src{net::AddressRange::any()};
    net::AddressRange dst{net::AddressRange::any()};
    std::optional<std::uint16_t> port;
    Direction direction{Direction::Both};
    std::int32_t priority{0};
    /// Enforcement point. Unset rules apply at border firewall nodes; scoped
    /// rules apply only at the node with this address.
    std::optional<net::Address> scope;
    std::string origin{"config"};

    bool matches(const net::PacketHeader& h, Flow flow) const;
    std::string describe() const;
    bool operator==(const FirewallRule&) const = default;
};

/// Priority-ordered rules; the first match wins, otherwise the default.
class RuleSet {
public:
    explicit RuleSet(Verdict default_action = Verdict::Allow) : default_(default_action) {}

    /// Throws PriorityConflict on a reused priority, InvalidRule on malformed ranges.
    RuleId add_rule(FirewallRule rule);
    /// Throws UnknownRule.
    FirewallRule remove_rule(RuleId id);

    const FirewallRule* find(RuleId id) const;
    const std::vector<FirewallRule>& rules() const { return rules_; }
    Verdict default_action() const { return default_; }
    bool has_scoped_rules_at(net::Address node) const;

    /// Smallest unused priority >= `from`.
    std::int32_t free_priority(std::int32_t from = 1) const;

    bool operator==(const RuleSet&) const = default;

private:
    Verdict default_;
    std::vector<FirewallRule> rules_;
    RuleId next_id_{1};
};

struct FilterDecision {
    Verdict verdict{Verdict::Allow};
    std::optional<RuleId> rule;  // unset when the default action decided
};

/// Border view: unscoped rules only, default action applies. Pure function of
/// (rules, header, flow).
FilterDecision filter(const RuleSet& rs, const net::PacketHeader& h, Flow flow);

/// View from a specific node. Scoped rules for `at` are always considered;
/// unscoped rules and the default only when `border` is true. A non-border
/// node with no matching scoped rule allows.
FilterDecision filter_at(const RuleSet& rs, const net::PacketHeader& h, Flow flow, net::Address at, bool border);

/// Classifies a packet against a node's protected prefix.
Flow classify_flow(const net::Node& node, const net::PacketHeader& h);

/// Enforces a shared RuleSet in the forwarding pipeline.
class FirewallHook final : public net::HopHook {
public:
    FirewallHook(RuleSet& rules, std::set<net::NodeId> border_nodes) : rules_(rules), border_(std::move(border_nodes)) {}

    net::HookStage stage() const override { return net::HookStage::Firewall; }
    std::string_view name() const override { return "firewall"; }
    net::HookVerdict on_hop(const net::HopContext& ctx, net::PacketHeader& header) override;

    const std::set<net::NodeId>& border_nodes() const { return border_; }
    /// Deny hits per rule id; id 0 counts default-action denials.
    const std::map<RuleId, std::uint64_t>& deny_hits() const { return deny_hits_; }
    std::uint64_t evaluations() const { return evaluations_; }
    std::uint64_t denied() const { return denied_; }

private:
    RuleSet& rules_;
    std::set<net::NodeId> border_;
    std::map<RuleId, std::uint64_t> deny_hits_;
    std::uint64_t evaluations_{0};
    std::uint64_t denied_{0};
};

}  // namespace activetrace::defense
