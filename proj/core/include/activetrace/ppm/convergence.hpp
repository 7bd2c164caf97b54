#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "activetrace/error.hpp"
#include "activetrace/net/topology.hpp"

namespace activetrace::ppm {

ACTIVETRACE_DEFINE_ERROR(NonConvergence);

/// ln(d) / (p (1-p)^(d-1)): the coupon-collector style estimate of packets
/// needed to see every edge of a d-router path. Throws DomainError unless
/// d >= 2 and 0 < p < 1.
double expected_packets_bound(std::uint32_t d, double p);

struct ConvergenceOptions {
    double p{0.04};
    std::size_t trials{200};
    std::uint64_t seed{1};
    std::uint64_t packet_cap{100000};
};

struct ConvergenceStats {
    std::uint32_t path_routers{0};
    double p{0};
    std::size_t trials{0};
    double mean{0};
    std::uint64_t p95{0};
    std::uint64_t max{0};
    std::optional<double> bound;  // unset when the bound's domain excludes (d, p)
    std::vector<std::uint64_t> packets_per_trial;
};

/// Single-attacker marking runs with every on-path forwarding node marking.
/// Each trial counts attacker packets until reconstruction yields exactly the
/// true router path. Trial i draws from streams derived from (seed, i) only.
/// Throws NonConvergence when a trial exceeds `packet_cap`.
ConvergenceStats convergence_experiment(net::Topology& topology, net::NodeId attacker, net::NodeId victim,
                                        const ConvergenceOptions& options);

/// Routers on the attacker->victim route, attacker side first.
std::vector<net::Address> true_router_path(const net::Topology& topology, net::NodeId attacker, net::NodeId victim);

}  // namespace activetrace::ppm
