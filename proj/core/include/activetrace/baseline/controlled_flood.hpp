#pragma once

#include <optional>
#include <vector>

#include "activetrace/baseline/live.hpp"

namespace activetrace::baseline {

ACTIVETRACE_DEFINE_ERROR(AmbiguousPerturbation);

struct FloodOptions {
    /// Flood packets per probe, spread evenly over `probe_ticks`.
    std::uint64_t budget{4000};
    net::Tick probe_ticks{5};
    /// Minimum relative difference between the best and runner-up dips.
    double margin{0.10};
    std::size_t max_hops{64};
};

struct FloodProbe {
    net::NodeId router{0};
    net::LinkId link{0};
    double baseline{0};
    double probed{0};
    double dip{0};
};

struct FloodResult {
    std::vector<net::NodeId> path;  // victim side outward
    std::optional<net::NodeId> origin_site;
    std::vector<FloodProbe> probes;
    std::uint64_t probe_packets{0};
    std::uint64_t attack_packets_seen{0};
    net::Tick ticks{0};
};

/// Walks upstream by overloading each candidate incoming link in turn and
/// keeping the one whose flooding cuts the victim's matching arrivals most.
/// Throws AttackInactive when no attack traffic arrives, and
/// AmbiguousPerturbation when the top two dips are within `margin`.
FloodResult controlled_flood_trace(const AttackSignatureFilter& sig, net::NodeId victim, const net::Topology& t,
                                   LiveNetwork& live, FloodOptions options = {});

}  // namespace activetrace::baseline
