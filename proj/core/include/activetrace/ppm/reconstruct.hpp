#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "activetrace/net/network.hpp"

namespace activetrace::ppm {

/// A mark as received at the victim. Always copied from a delivered
/// packet's mark field; never derived from its source address.
struct MarkedSample {
    net::Address start;
    std::optional<net::Address> end;
    std::uint8_t distance{0};
    net::Tick receipt_tick{0};
};

/// Value identity of a sample, ignoring when it arrived.
struct SampleKey {
    net::Address start;
    std::optional<net::Address> end;
    std::uint8_t distance{0};

    static SampleKey of(const MarkedSample& s) { return {s.start, s.end, s.distance}; }
    auto operator<=>(const SampleKey&) const = default;
};

using HeaderFilter = std::function<bool(const net::PacketHeader&)>;

/// One sample per delivered marked packet, in inbox order. Packets rejected by
/// `filter` (when given) and unmarked packets contribute nothing.
std::vector<MarkedSample> collect(std::span<const net::Completion> inbox, const HeaderFilter& filter = {});

/// (child, parent, distance of child from the victim). Level-0 routers have
/// the victim as parent.
struct GraphEdge {
    net::Address child;
    net::Address parent;
    std::uint8_t distance{0};
    auto operator<=>(const GraphEdge&) const = default;
};

/// Victim-rooted graph of router addresses reassembled from marks.
struct AttackGraph {
    net::Address root;
    std::vector<GraphEdge> edges;                  // sorted, unique
    std::vector<std::vector<net::Address>> paths;  // leaf first, victim excluded; longest first
    std::vector<SampleKey> orphans;                // distinct samples that chain to nothing

    /// First element of every path.
    std::vector<net::Address> leaves() const;
    bool contains_path(std::span<const net::Address> leaf_first) const;
    bool operator==(const AttackGraph&) const = default;
};

/// Distance-0 samples hang their start off the victim. A sample (S, E, d)
/// places S at distance d and is accepted only when E was accepted at
/// distance d-1. Everything else is reported as an orphan.
AttackGraph reconstruct(std::span<const MarkedSample> samples, net::Address victim);
AttackGraph reconstruct_keys(std::span<const SampleKey> distinct_sorted, net::Address victim);

}  // namespace activetrace::ppm
