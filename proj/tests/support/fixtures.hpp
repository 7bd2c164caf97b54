#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "activetrace/net/topology.hpp"

namespace fixtures {

using namespace activetrace;

class TopoBuilder {
public:
    TopoBuilder& node(std::string name, net::NodeKind kind, std::string addr, std::optional<std::string> prefix = {}) {
        net::TopologySpec::NodeSpec n;
        n.name = std::move(name);
        n.kind = kind;
        n.addr = net::Address::parse(addr).value();
        if (prefix) n.valid_prefix = net::AddressRange::parse(*prefix).value();
        spec.nodes.push_back(std::move(n));
        return *this;
    }
    TopoBuilder& router(std::string name, std::string addr) { return node(std::move(name), net::NodeKind::Router, std::move(addr)); }
    TopoBuilder& link(std::string a, std::string b, std::uint32_t capacity = 1000) {
        spec.links.push_back({std::move(a), std::move(b), capacity});
        return *this;
    }
    /// End host behind its own guardian "G<name>", which hangs off `attach`.
    /// The host lives at <prefix>.1, the guardian at <prefix>.254.
    TopoBuilder& stub(std::string name, net::NodeKind kind, const std::string& net24, const std::string& attach,
                      std::uint32_t capacity = 1000) {
        const std::string prefix = net24 + ".0/24";
        const std::string g = "G" + name;
        node(g, net::NodeKind::GuardianGateway, net24 + ".254", prefix);
        node(name, kind, net24 + ".1", prefix);
        link(name, g, capacity);
        link(g, attach, capacity);
        return *this;
    }
    net::Topology build() const { return net::Topology::build(spec); }

    net::TopologySpec spec;
};

/// Victim-rooted router tree with five attacker branches:
///
///   V - GV - R1 -+- R2 -+- R4 -+- R8 - GA1 - A1
///                |      |      +- GA5 - A5
///                |      +- R5 - GA2 - A2
///                +- R3 -+- R6 - GA3 - A3
///                       +- R7 - GA4 - A4
inline TopoBuilder attack_tree_builder(std::size_t attackers = 3, std::uint32_t capacity = 1000) {
    TopoBuilder b;
    for (int i = 1; i <= 8; ++i) b.router("R" + std::to_string(i), "10.0.0." + std::to_string(i));
    b.link("R1", "R2", capacity).link("R1", "R3", capacity).link("R2", "R4", capacity).link("R2", "R5", capacity);
    b.link("R3", "R6", capacity).link("R3", "R7", capacity).link("R4", "R8", capacity);
    b.stub("V", net::NodeKind::Victim, "192.168.1", "R1", capacity);
    const char* attach[] = {"R8", "R5", "R6", "R7", "R4"};
    for (std::size_t i = 0; i < attackers && i < 5; ++i)
        b.stub("A" + std::to_string(i + 1), net::NodeKind::Attacker, "12." + std::to_string(i + 1) + ".0", attach[i],
               capacity);
    return b;
}

inline net::Topology attack_tree(std::size_t attackers = 3, std::uint32_t capacity = 1000) {
    return attack_tree_builder(attackers, capacity).build();
}

/// Hosts H1..H8 and victim V, each behind its own guardian, hanging off a
/// three-router backbone.
inline net::Topology chain_topology() {
    TopoBuilder b;
    b.router("B1", "10.9.0.1").router("B2", "10.9.0.2").router("B3", "10.9.0.3");
    b.link("B1", "B2").link("B2", "B3");
    for (int i = 1; i <= 8; ++i)
        b.stub("H" + std::to_string(i), net::NodeKind::Host, "172.16." + std::to_string(i),
               "B" + std::to_string(1 + (i % 3)));
    b.stub("V", net::NodeKind::Victim, "172.16.99", "B1");
    return b.build();
}

/// Linear path of d forwarding nodes between attacker A and victim V. The
/// guardians GA and GV are two of the d.
inline net::Topology linear_path(std::uint32_t d) {
    TopoBuilder b;
    for (std::uint32_t i = 1; i + 2 <= d; ++i) b.router("R" + std::to_string(i), "10.0.0." + std::to_string(i));
    std::string left = d > 2 ? "R1" : "GV";
    for (std::uint32_t i = 1; i + 2 < d; ++i) b.link("R" + std::to_string(i), "R" + std::to_string(i + 1));
    b.node("GV", net::NodeKind::GuardianGateway, "192.168.1.254", std::string("192.168.1.0/24"));
    b.node("V", net::NodeKind::Victim, "192.168.1.1", std::string("192.168.1.0/24"));
    b.link("V", "GV");
    if (d > 2) b.link("R" + std::to_string(d - 2), "GV");
    b.stub("A", net::NodeKind::Attacker, "12.0.0", left);
    return b.build();
}

/// Exact expected packets until every one of d edges has been seen, where
/// edge i (0 = nearest the victim) arrives with probability p(1-p)^i.
/// Inclusion-exclusion over the minimum of geometric waiting times.
inline double expected_packets_exact(std::uint32_t d, double p) {
    std::vector<double> q(d);
    for (std::uint32_t i = 0; i < d; ++i) q[i] = p * std::pow(1.0 - p, static_cast<double>(i));
    double sum = 0.0;
    for (std::uint32_t mask = 1; mask < (1u << d); ++mask) {
        double rate = 0.0;
        int bits = 0;
        for (std::uint32_t i = 0; i < d; ++i)
            if (mask & (1u << i)) {
                rate += q[i];
                ++bits;
            }
        // Waiting time for the first of a set of disjoint events with total mass `rate`.
        sum += ((bits % 2) ? 1.0 : -1.0) / rate;
    }
    return sum;
}

}  // namespace fixtures
