#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "activetrace/net/packet.hpp"
#include "activetrace/net/rng.hpp"
#include "activetrace/net/topology.hpp"

namespace activetrace::net {

/// Fixed per-hop processing order. Hooks run sorted by stage, then by the
/// order they were installed.
enum class HookStage : std::uint8_t { Firewall = 0, Marking = 1, Logging = 2 };

std::string_view to_string(HookStage s);

struct HopContext {
    const Topology& topology;
    Tick tick;
    std::size_t hop;             // 1-based
    NodeId node;                 // node transmitting at this hop
    std::optional<NodeId> prev;  // unset at the emitting node
    NodeId next;
    NodeId dst_node;
};

enum class HookVerdict { Pass, Drop };

class HopHook {
public:
    virtual ~HopHook() = default;
    virtual HookStage stage() const = 0;
    virtual std::string_view name() const = 0;
    virtual HookVerdict on_hop(const HopContext& ctx, PacketHeader& header) = 0;
};

enum class OutcomeKind { Delivered, DroppedByFilter, DroppedByLoad, TtlExpired, Unroutable };

std::string_view to_string(OutcomeKind k);

struct DeliveryOutcome {
    OutcomeKind kind{OutcomeKind::Delivered};
    std::size_t hop{0};  // hop at which the packet left the pipeline (route length - 1 when delivered)
    NodeId at{0};        // node where that happened
    std::string dropped_by;  // hook name for DroppedByFilter

    bool delivered() const { return kind == OutcomeKind::Delivered; }
};

struct Completion {
    Packet packet;
    NodeId src_node{};
    NodeId dst_node{};
    Tick injected{};
    Tick tick{};
    DeliveryOutcome outcome;
};

enum class HopEventKind { Hook, TtlDecrement, Traverse, Drop, Deliver };

struct HopEvent {
    Tick tick;
    std::uint64_t packet;
    std::size_t hop;
    NodeId node;
    HopEventKind kind;
    std::string detail;

    bool operator==(const HopEvent&) const = default;
};

/// Tick-driven packet pipeline over a topology.
///
/// Each in-flight packet crosses exactly one link per tick. Within a tick all
/// packets first run their hop processing (hooks, TTL) and claim a link; the
/// drop lottery then runs with the tick's final link loads, so every packet on
/// a link sees the same drop probability.
class Network {
public:
    Network(Topology& topology, std::uint64_t seed);

    Network(const Network&) = delete;
    Network& operator=(const Network&) = delete;

    /// Non-owning. The hook must outlive the network or be removed first.
    void add_hook(HopHook& hook);
    void remove_hook(HopHook& hook);
    std::size_t hook_count() const { return hooks_.size(); }

    /// Queues a packet at node `at`; it starts moving on the next `step`.
    void inject(Packet packet, NodeId at, Tick now);

    /// Advances every in-flight packet by one hop. Returns packets that left
    /// the pipeline this tick, in injection order.
    std::vector<Completion> step(Tick tick);

    /// Runs one packet to completion on an otherwise idle network.
    Completion forward(Packet packet, NodeId at, Tick start = 0);

    /// Extra packets per tick on a link (controlled-flooding probes, test load).
    void set_background_load(LinkId link, std::uint64_t packets_per_tick);
    void clear_background_load();
    std::uint64_t background_packets() const { return background_packets_; }

    bool idle() const { return in_flight_.empty(); }
    std::size_t in_flight() const { return in_flight_.size(); }

    void record_events(bool on) { record_events_ = on; }
    const std::vector<HopEvent>& events() const { return events_; }
    void clear_events() { events_.clear(); }

    /// Hop-processing count per node (work units) and link traversals.
    const std::vector<std::uint64_t>& node_work() const { return node_work_; }
    std::uint64_t traversals() const { return traversals_; }

    Topology& topology() { return topology_; }
    const Topology& topology() const { return topology_; }

private:
    struct Flight {
        Packet packet;
        std::shared_ptr<const std::vector<NodeId>> route;
        std::size_t pos{0};
        NodeId src_node{};
        NodeId dst_node{};
        Tick injected{};
        std::optional<LinkId> claimed;
        std::optional<DeliveryOutcome> done;
    };

    std::shared_ptr<const std::vector<NodeId>> route_for(NodeId from, NodeId to);
    void reroute_if_stale();
    void log(Tick t, const Flight& f, std::size_t hop, NodeId node, HopEventKind kind, std::string detail = {});

    Topology& topology_;
    RngStream drop_rng_;
    std::vector<HopHook*> hooks_;
    std::vector<Flight> in_flight_;
    std::vector<std::uint64_t> load_;
    std::vector<std::uint64_t> background_;
    std::uint64_t background_packets_{0};
    std::vector<std::uint64_t> node_work_;
    std::uint64_t traversals_{0};
    std::vector<std::vector<std::shared_ptr<const std::vector<NodeId>>>> route_cache_;
    std::uint64_t route_version_{0};
    std::uint64_t flights_version_{0};
    bool record_events_{false};
    std::vector<HopEvent> events_;
};

}  // namespace activetrace::net
