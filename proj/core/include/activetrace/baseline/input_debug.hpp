#pragma once

#include <optional>
#include <vector>

#include "activetrace/baseline/live.hpp"

namespace activetrace::baseline {

struct InputDebugOptions {
    /// Ticks of live traffic observed at each hop.
    net::Tick window{1};
    /// Hops before giving up (guards against routing loops).
    std::size_t max_hops{64};
};

struct InputDebugResult {
    /// Routers from the victim side outward.
    std::vector<net::NodeId> path;
    /// End host the attack enters from.
    std::optional<net::NodeId> origin_site;
    std::uint64_t interventions{0};
    std::uint64_t work_units{0};
    net::Tick ticks{0};
};

/// Hop-by-hop upstream filtering. At each router an operator installs the
/// signature filter on the egress toward the victim, watches `window` ticks
/// of live traffic and follows the busiest ingress. Throws AttackInactive
/// when a hop sees no matching packet.
InputDebugResult input_debug_trace(const AttackSignatureFilter& sig, net::NodeId victim, const net::Topology& t,
                                   LiveNetwork& live, InputDebugOptions options = {});

}  // namespace activetrace::baseline
