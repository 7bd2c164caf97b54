#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "activetrace/net/network.hpp"
#include "activetrace/sim/scenario.hpp"
#include "activetrace/swt/chain.hpp"

namespace activetrace::sim {

struct Flooder {
    const DoSFlooderSpec* spec{nullptr};
    net::NodeId node{0};
    net::Address victim;
    net::RngStream rng;
    std::vector<net::Address> pool;
    std::optional<net::AddressRange> prefix;
    std::uint64_t sent{0};
};

struct BenignClient {
    const BenignSpec* spec{nullptr};
    net::NodeId node{0};
    net::Address dst;
    std::uint64_t sent{0};
};

/// Every traffic source of a scenario.
class Traffic {
public:
    Traffic(const Scenario& s, const net::Topology& t);

    /// Queues everything due at tick t.
    void emit(net::Tick t, net::Network& network);
    /// Stepping stones relay what was delivered to them.
    void on_completions(std::span<const net::Completion> done, net::Tick t);

    std::vector<Flooder>& floods() { return floods_; }
    const std::vector<Flooder>& floods() const { return floods_; }
    const std::vector<BenignClient>& benign() const { return benign_; }
    std::vector<swt::ChainDriver>& chains() { return chains_; }
    const std::vector<swt::ChainDriver>& chains() const { return chains_; }
    std::uint64_t emitted() const { return next_id_ - 1; }

private:
    std::vector<Flooder> floods_;
    std::vector<BenignClient> benign_;
    std::vector<swt::ChainDriver> chains_;
    std::uint64_t next_id_{1};
};

/// Topology, network and traffic: the part of a scenario that every run and
/// every comparison strategy replays identically for a given seed.
class World {
public:
    explicit World(const Scenario& s);

    World(const World&) = delete;
    World& operator=(const World&) = delete;

    /// Emission then forwarding. `t` must be `now()`.
    std::vector<net::Completion> step(net::Tick t);
    net::Tick now() const { return now_; }

    net::Topology& topology() { return *topology_; }
    const net::Topology& topology() const { return *topology_; }
    net::Network& network() { return *network_; }
    Traffic& traffic() { return *traffic_; }
    const Traffic& traffic() const { return *traffic_; }

private:
    std::unique_ptr<net::Topology> topology_;
    std::unique_ptr<net::Network> network_;
    std::unique_ptr<Traffic> traffic_;
    net::Tick now_{0};
};

}  // namespace activetrace::sim
