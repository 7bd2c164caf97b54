#pragma once

#include <functional>
#include <string>
#include <vector>

#include "activetrace/net/network.hpp"

namespace activetrace::baseline {

ACTIVETRACE_DEFINE_ERROR(AttackInactive);

/// Handle on a running simulation for the schemes that need live traffic.
struct LiveNetwork {
    net::Network& network;
    /// Next tick to run.
    net::Tick now{0};
    /// Runs one tick of the world (traffic plus forwarding) and returns its completions.
    std::function<std::vector<net::Completion>(net::Tick)> step;

    std::vector<net::Completion> advance() { return step(now++); }
};

/// "A common feature contained in all the attack packets".
struct AttackSignatureFilter {
    std::string pattern{"*"};
    net::Address dst;

    bool matches(const net::PacketHeader& h) const;
};

}  // namespace activetrace::baseline
