#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "activetrace/error.hpp"
#include "activetrace/net/address.hpp"

namespace activetrace::net {

ACTIVETRACE_DEFINE_ERROR(DuplicateAddress);
ACTIVETRACE_DEFINE_ERROR(DuplicateName);
ACTIVETRACE_DEFINE_ERROR(DisconnectedGraph);
ACTIVETRACE_DEFINE_ERROR(MissingGuardian);
ACTIVETRACE_DEFINE_ERROR(UnknownNode);
ACTIVETRACE_DEFINE_ERROR(InvalidLink);
ACTIVETRACE_DEFINE_ERROR(NoPath);

using NodeId = std::uint32_t;
using LinkId = std::uint32_t;

enum class NodeKind { Host, Router, GuardianGateway, Attacker, Victim };

std::string_view to_string(NodeKind kind);
std::optional<NodeKind> parse_node_kind(std::string_view text);

/// Routers and guardian gateways forward transit traffic; end hosts never do.
constexpr bool is_forwarding(NodeKind k) { return k == NodeKind::Router || k == NodeKind::GuardianGateway; }
constexpr bool is_end_host(NodeKind k) { return !is_forwarding(k); }

struct Node {
    NodeId id{};
    std::string name;
    NodeKind kind{NodeKind::Host};
    Address addr;
    std::optional<AddressRange> valid_prefix;
};

struct Link {
    LinkId id{};
    NodeId a{};
    NodeId b{};
    std::uint32_t capacity{1};  // packets per tick
    bool attached{true};

    NodeId other(NodeId n) const { return n == a ? b : a; }
};

/// Probability that a packet is dropped on a link carrying `load` packets this tick.
double drop_probability(std::uint32_t capacity, std::uint64_t load);

/// Declarative topology description, as written in a scenario file.
struct TopologySpec {
    struct NodeSpec {
        std::string name;
        NodeKind kind{NodeKind::Host};
        Address addr;
        std::optional<AddressRange> valid_prefix;
    };
    struct LinkSpec {
        std::string a;
        std::string b;
        std::uint32_t capacity{1000};
    };
    std::vector<NodeSpec> nodes;
    std::vector<LinkSpec> links;
};

/// Validated network graph.
///
/// Nodes and links are fixed at build time. The only mutation is
/// `detach_node`, which the response module uses to isolate a host; it bumps
/// `version()` so cached routes can be invalidated.
class Topology {
public:
    static Topology build(const TopologySpec& spec);

    std::span<const Node> nodes() const { return nodes_; }
    std::span<const Link> links() const { return links_; }
    const Node& node(NodeId id) const;
    const Link& link(LinkId id) const;

    std::optional<NodeId> find(std::string_view name) const;
    std::optional<NodeId> find(Address addr) const;
    NodeId require(std::string_view name) const;

    /// Link ids incident to `n` that are still attached.
    std::vector<LinkId> incident(NodeId n) const;
    std::vector<NodeId> neighbors(NodeId n) const;
    std::optional<LinkId> link_between(NodeId a, NodeId b) const;

    /// The unique adjacent guardian gateway of an end host.
    std::optional<NodeId> guardian_of(NodeId host) const;

    /// Shortest path by hop count. Transit nodes must be forwarding nodes.
    /// Among equal-length paths the smallest next-hop address wins at every
    /// step, so the result does not depend on node listing order.
    std::vector<NodeId> route(NodeId src, NodeId dst) const;

    void detach_node(NodeId n);
    std::uint64_t version() const { return version_; }

private:
    std::vector<Node> nodes_;
    std::vector<Link> links_;
    std::vector<std::vector<LinkId>> adjacency_;
    std::unordered_map<std::string, NodeId> by_name_;
    std::unordered_map<Address, NodeId> by_addr_;
    std::uint64_t version_{0};
};

}  // namespace activetrace::net
