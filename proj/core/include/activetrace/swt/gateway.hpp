#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "activetrace/net/network.hpp"
#include "activetrace/swt/chain.hpp"

namespace activetrace::swt {

/// A message as relayed past a guardian gateway.
struct RelayedMessage {
    net::NodeId from{0};
    net::NodeId to{0};
    std::string payload_tag;
    bool encrypted{false};
};

/// The gateway saw an active watermark crossing the boundary of a host it
/// guards. `upstream` is the host the watermarked reply left toward (the next
/// hop toward the origin); unset when the reply was seen entering the host.
struct Sighting {
    net::NodeId gateway{0};
    net::NodeId host{0};
    std::string token;
    std::optional<net::NodeId> upstream;
    net::Tick tick{0};
};

enum class GatewayState { Asleep, Awake };

class GuardianGateway {
public:
    GuardianGateway(net::NodeId node, std::set<net::NodeId> guarded) : node_(node), guarded_(std::move(guarded)) {}

    net::NodeId node() const { return node_; }
    const std::set<net::NodeId>& guarded() const { return guarded_; }
    bool guards(net::NodeId host) const { return guarded_.contains(host); }

    GatewayState state() const { return tokens_.empty() ? GatewayState::Asleep : GatewayState::Awake; }
    const std::set<std::string>& active_tokens() const { return tokens_; }
    /// Scanning starts on the tick after the awakening.
    bool scanning(net::Tick now) const { return !tokens_.empty() && now >= scan_from_; }

    void awaken(const Watermark& w, net::Tick now);
    /// Drops one token; sleeps when none remain.
    void quiesce(const std::string& token);
    void quiesce();

    bool trusted() const { return trusted_; }
    void set_trusted(bool t) { trusted_ = t; }

    /// Header-level monitoring requested by the response module. Does not
    /// scan payloads and does not touch the inspection counter.
    void set_monitoring(bool on) { monitoring_ = on; }
    bool monitoring() const { return monitoring_; }
    std::uint64_t monitored_packets() const { return monitored_; }
    void note_monitored() { ++monitored_; }

    std::uint64_t inspection_counter() const { return inspections_; }
    /// Last tick an encrypted message left `host` while this gateway scanned.
    std::optional<net::Tick> last_opaque_departure(net::NodeId host) const;

private:
    friend std::vector<Sighting> gateway_scan(GuardianGateway& gw, const RelayedMessage& msg, net::Tick now);

    net::NodeId node_;
    std::set<net::NodeId> guarded_;
    std::set<std::string> tokens_;
    net::Tick scan_from_{0};
    bool trusted_{true};
    bool monitoring_{false};
    std::uint64_t monitored_{0};
    std::uint64_t inspections_{0};
    std::map<net::NodeId, net::Tick> opaque_departures_;
};

/// One payload inspection. Asleep gateways do nothing. Awake gateways count
/// the scan; plaintext messages entering or leaving a guarded host with an
/// active token produce a Sighting per guarded endpoint (two when the gateway
/// guards both ends).
std::vector<Sighting> gateway_scan(GuardianGateway& gw, const RelayedMessage& msg, net::Tick now);

/// Every guardian gateway in a topology, wired into the forwarding pipeline.
class GuardianFabric final : public net::HopHook {
public:
    explicit GuardianFabric(const net::Topology& topology);

    net::HookStage stage() const override { return net::HookStage::Logging; }
    std::string_view name() const override { return "swt-guardian"; }
    net::HookVerdict on_hop(const net::HopContext& ctx, net::PacketHeader& header) override;

    GuardianGateway* gateway(net::NodeId node);
    const GuardianGateway* gateway(net::NodeId node) const;
    /// The guardian of an end host.
    GuardianGateway* guardian_of(net::NodeId host);
    std::span<GuardianGateway> gateways() { return gateways_; }
    std::span<const GuardianGateway> gateways() const { return gateways_; }

    void awaken(std::span<const net::NodeId> gateway_nodes, const Watermark& w, net::Tick now);

    /// Sightings produced since the last drain.
    std::vector<Sighting> drain();
    std::uint64_t total_inspections() const;
    std::uint64_t scanned_hops() const { return scanned_hops_; }

private:
    const net::Topology& topology_;
    std::vector<GuardianGateway> gateways_;
    std::vector<std::int32_t> index_;  // node id -> gateway slot
    std::vector<Sighting> pending_;
    std::uint64_t scanned_hops_{0};
};

}  // namespace activetrace::swt
