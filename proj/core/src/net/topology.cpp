#include "activetrace/net/topology.hpp"

#include <algorithm>
#include <deque>
#include <limits>

#include <fmt/format.h>

namespace activetrace::net {

std::string_view to_string(NodeKind kind) {
    switch (kind) {
        case NodeKind::Host: return "host";
        case NodeKind::Router: return "router";
        case NodeKind::GuardianGateway: return "guardian";
        case NodeKind::Attacker: return "attacker";
        case NodeKind::Victim: return "victim";
    }
    return "?";
}

std::optional<NodeKind> parse_node_kind(std::string_view text) {
    for (auto k : {NodeKind::Host, NodeKind::Router, NodeKind::GuardianGateway, NodeKind::Attacker,
                   NodeKind::Victim}) {
        if (to_string(k) == text) return k;
    }
    return std::nullopt;
}

double drop_probability(std::uint32_t capacity, std::uint64_t load) {
    if (load <= capacity) return 0.0;
    return 1.0 - static_cast<double>(capacity) / static_cast<double>(load);
}

Topology Topology::build(const TopologySpec& spec) {
    Topology t;
    t.nodes_.reserve(spec.nodes.size());
    for (const auto& ns : spec.nodes) {
        const auto id = static_cast<NodeId>(t.nodes_.size());
        if (!t.by_name_.emplace(ns.name, id).second)
            throw DuplicateName(fmt::format("node name '{}' declared twice", ns.name));
        if (!t.by_addr_.emplace(ns.addr, id).second)
            throw DuplicateAddress(fmt::format("address {} used by more than one node", ns.addr.to_string()));
        if (ns.valid_prefix && !ns.valid_prefix->well_formed())
            throw InvalidLink(fmt::format("node '{}' has a malformed prefix", ns.name));
        t.nodes_.push_back(Node{id, ns.name, ns.kind, ns.addr, ns.valid_prefix});
    }
    t.adjacency_.resize(t.nodes_.size());
    for (const auto& ls : spec.links) {
        auto a = t.find(ls.a);
        auto b = t.find(ls.b);
        if (!a) throw UnknownNode(fmt::format("link endpoint '{}' is not a node", ls.a));
        if (!b) throw UnknownNode(fmt::format("link endpoint '{}' is not a node", ls.b));
        if (*a == *b) throw InvalidLink(fmt::format("self-loop on '{}'", ls.a));
        if (ls.capacity < 1) throw InvalidLink(fmt::format("link {}-{} has zero capacity", ls.a, ls.b));
        if (t.link_between(*a, *b)) throw InvalidLink(fmt::format("duplicate link {}-{}", ls.a, ls.b));
        const auto id = static_cast<LinkId>(t.links_.size());
        t.links_.push_back(Link{id, *a, *b, ls.capacity, true});
        t.adjacency_[*a].push_back(id);
        t.adjacency_[*b].push_back(id);
    }

    for (const auto& n : t.nodes_) {
        if (!is_end_host(n.kind)) continue;
        int guardians = 0;
        for (auto nb : t.neighbors(n.id))
            if (t.nodes_[nb].kind == NodeKind::GuardianGateway) ++guardians;
        if (guardians != 1)
            throw MissingGuardian(
                fmt::format("'{}' has {} adjacent guardian gateways, expected exactly 1", n.name, guardians));
    }

    if (!t.nodes_.empty()) {
        std::vector<bool> seen(t.nodes_.size(), false);
        std::deque<NodeId> q{0};
        seen[0] = true;
        std::size_t count = 1;
        while (!q.empty()) {
            auto u = q.front();
            q.pop_front();
            for (auto v : t.neighbors(u)) {
                if (!seen[v]) {
                    seen[v] = true;
                    ++count;
                    q.push_back(v);
                }
            }
        }
        if (count != t.nodes_.size())
            throw DisconnectedGraph(fmt::format("{} of {} nodes reachable", count, t.nodes_.size()));
    }
    return t;
}

const Node& Topology::node(NodeId id) const {
    if (id >= nodes_.size()) throw UnknownNode(fmt::format("node id {}", id));
    return nodes_[id];
}

const Link& Topology::link(LinkId id) const {
    if (id >= links_.size()) throw InvalidLink(fmt::format("link id {}", id));
    return links_[id];
}

std::optional<NodeId> Topology::find(std::string_view name) const {
    auto it = by_name_.find(std::string(name));
    if (it == by_name_.end()) return std::nullopt;
    return it->second;
}

std::optional<NodeId> Topology::find(Address addr) const {
    auto it = by_addr_.find(addr);
    if (it == by_addr_.end()) return std::nullopt;
    return it->second;
}

NodeId Topology::require(std::string_view name) const {
    if (auto id = find(name)) return *id;
    throw UnknownNode(fmt::format("unknown node '{}'", name));
}

std::vector<LinkId> Topology::incident(NodeId n) const {
    std::vector<LinkId> out;
    for (auto l : adjacency_.at(n))
        if (links_[l].attached) out.push_back(l);
    return out;
}

std::vector<NodeId> Topology::neighbors(NodeId n) const {
    std::vector<NodeId> out;
    for (auto l : adjacency_.at(n))
        if (links_[l].attached) out.push_back(links_[l].other(n));
    return out;
}

std::optional<LinkId> Topology::link_between(NodeId a, NodeId b) const {
    for (auto l : adjacency_.at(a))
        if (links_[l].attached && links_[l].other(a) == b) return l;
    return std::nullopt;
}

std::optional<NodeId> Topology::guardian_of(NodeId host) const {
    for (auto nb : neighbors(host))
        if (nodes_[nb].kind == NodeKind::GuardianGateway) return nb;
    return std::nullopt;
}

std::vector<NodeId> Topology::route(NodeId src, NodeId dst) const {
    node(src);
    node(dst);
    if (src == dst) return {src};
    constexpr auto kInf = std::numeric_limits<std::uint32_t>::max();
    // Distances toward dst; only forwarding nodes (and dst itself) relay.
    std::vector<std::uint32_t> dist(nodes_.size(), kInf);
    std::deque<NodeId> q{dst};
    dist[dst] = 0;
    while (!q.empty()) {
        auto u = q.front();
        q.pop_front();
        if (u != dst && !is_forwarding(nodes_[u].kind)) continue;
        for (auto v : neighbors(u)) {
            if (dist[v] == kInf) {
                dist[v] = dist[u] + 1;
                q.push_back(v);
            }
        }
    }
    if (dist[src] == kInf)
        throw NoPath(fmt::format("no path from '{}' to '{}'", nodes_[src].name, nodes_[dst].name));

    std::vector<NodeId> path{src};
    NodeId cur = src;
    while (cur != dst) {
        std::optional<NodeId> best;
        for (auto v : neighbors(cur)) {
            if (dist[v] + 1 != dist[cur]) continue;
            if (v != dst && !is_forwarding(nodes_[v].kind)) continue;
            if (!best || nodes_[v].addr < nodes_[*best].addr) best = v;
        }
        cur = *best;
        path.push_back(cur);
    }
    return path;
}

void Topology::detach_node(NodeId n) {
    node(n);
    for (auto l : adjacency_[n]) links_[l].attached = false;
    ++version_;
}

}  // namespace activetrace::net
