#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <unordered_map>
#include <vector>

#include "activetrace/net/network.hpp"

namespace activetrace::baseline {

ACTIVETRACE_DEFINE_ERROR(InsufficientLogs);

/// Hash of the fields a router sees unchanged along the whole path.
std::uint64_t packet_digest(const net::PacketHeader& h);

struct LogEntry {
    std::uint64_t digest{0};
    std::optional<net::NodeId> ingress;
    net::Tick tick{0};
};

/// Bounded per-router packet log; the oldest entries go first when full.
class RouterLog {
public:
    static constexpr std::size_t kEntryBytes = 16;

    explicit RouterLog(std::size_t capacity = 1u << 20) : capacity_(capacity) {}

    void add(const LogEntry& e);
    const LogEntry* find(std::uint64_t digest) const;
    std::size_t size() const { return entries_.size(); }
    std::size_t bytes() const { return entries_.size() * kEntryBytes; }
    std::uint64_t evicted() const { return evicted_; }

private:
    std::size_t capacity_;
    std::deque<LogEntry> entries_;
    std::unordered_multimap<std::uint64_t, std::size_t> index_;  // digest -> absolute position
    std::size_t base_{0};
    std::uint64_t evicted_{0};
};

using RouterLogs = std::map<net::NodeId, RouterLog>;

class LoggingHook final : public net::HopHook {
public:
    /// Logs at every forwarding node in `routers`.
    LoggingHook(RouterLogs& logs, std::set<net::NodeId> routers, std::size_t capacity = 1u << 20);
    net::HookStage stage() const override { return net::HookStage::Logging; }
    std::string_view name() const override { return "router-log"; }
    net::HookVerdict on_hop(const net::HopContext& ctx, net::PacketHeader& header) override;

    std::uint64_t work_units() const { return work_; }

private:
    RouterLogs& logs_;
    std::set<net::NodeId> routers_;
    std::uint64_t work_{0};
};

struct LoggingTraceResult {
    /// Distinct recovered paths, victim side outward, sorted.
    std::vector<std::vector<net::NodeId>> paths;
    std::vector<net::NodeId> origin_sites;
    std::uint64_t lookups{0};
    std::size_t storage_bytes{0};
};

/// Joins attack digests across router logs, walking each from the victim's
/// upstream router through recorded ingress links. Works after the attack
/// has ended. Throws InsufficientLogs when a router on a walk logged none of
/// the attack digests.
LoggingTraceResult logging_trace(const RouterLogs& logs, std::span<const std::uint64_t> attack_digests,
                                 const net::Topology& t, net::NodeId victim);

}  // namespace activetrace::baseline
