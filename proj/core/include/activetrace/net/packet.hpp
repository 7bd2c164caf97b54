#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "activetrace/net/address.hpp"

namespace activetrace::net {

using Tick = std::uint64_t;

/// Edge-sampling state carried by a packet: (start, end, distance).
struct MarkField {
    static constexpr std::uint8_t kMaxDistance = 255;

    Address start;
    std::optional<Address> end;
    std::uint8_t distance{0};

    /// Saturating increment; never wraps past 255.
    void bump_distance() {
        if (distance < kMaxDistance) ++distance;
    }

    auto operator<=>(const MarkField&) const = default;
};

/// Everything a router, firewall or tracer may read or write.
struct PacketHeader {
    std::uint64_t id{0};  // sequence number, plays the role of the IP ID field
    Address src;          // attacker-controlled, may be spoofed
    Address dst;
    std::uint8_t ttl{64};
    std::uint16_t port{0};  // destination port, 0 when not applicable
    std::uint32_t conn{0};  // connection demux id used by relaying hosts, 0 for datagrams
    bool encrypted{false};  // payload unreadable in transit
    std::string payload_tag;
    std::optional<MarkField> mark;
};

/// Ground truth that only the oracle and metrics layer may read.
struct OriginTruth {
    Address true_origin;                 // node that physically emitted the packet
    std::optional<Address> chain_origin; // first host of an interactive connection chain
};

class OracleAccess;

/// A simulated IP datagram.
///
/// The tracing-facing surface is `header()`. The true origin lives in a
/// private compartment reachable only through `OracleAccess`, so code that is
/// handed a Packet cannot attribute it by anything other than its header.
class Packet {
public:
    Packet() = default;
    Packet(PacketHeader header, OriginTruth truth) : header_(std::move(header)), truth_(truth) {}

    const PacketHeader& header() const { return header_; }
    PacketHeader& header() { return header_; }

private:
    friend class OracleAccess;
    PacketHeader header_;
    OriginTruth truth_;
};

/// The one door into a packet's ground truth. Used by tests, the report
/// layer and metrics; never by tracers or responders.
class OracleAccess {
public:
    static const OriginTruth& truth(const Packet& p) { return p.truth_; }
    static Address true_origin(const Packet& p) { return p.truth_.true_origin; }
};

}  // namespace activetrace::net
