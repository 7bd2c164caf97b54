#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <vector>

#include "activetrace/swt/session.hpp"

namespace activetrace::swt {

struct ChainTraceOptions {
    std::uint64_t seed{1};
    SwtOptions swt{};
    KeystrokeScript script{};
    net::Tick inject_at{10};
    net::Tick max_ticks{5000};
    /// Guardian gateway nodes flagged untrusted.
    std::set<net::NodeId> untrusted;
};

struct ChainTraceOutcome {
    SessionStatus status{SessionStatus::Active};
    std::optional<net::NodeId> origin;
    std::optional<net::NodeId> farthest_gateway;
    std::optional<net::NodeId> frontier_host;
    std::vector<Sighting> sightings;
    std::vector<Awakening> awakenings;
    Watermark watermark;
    std::uint64_t inspections{0};
    /// Hops processed at gateways that were scanning.
    std::uint64_t scanned_hops{0};
    /// Hops processed at any guardian while at least one guardian was awake.
    std::uint64_t relayed_while_awake{0};
    net::Tick ticks{0};
    std::string failure;
};

/// Runs one stepping-stone session on its own network and traces it from the
/// victim. Throws NoSightings when the watermark is never seen.
ChainTraceOutcome trace_chain(net::Topology& topology, const ConnectionChain& chain,
                              const ChainTraceOptions& options = {});

}  // namespace activetrace::swt
