#include "activetrace/baseline/logging.hpp"

#include <algorithm>
#include <unordered_set>

#include <fmt/format.h>

#include "activetrace/net/rng.hpp"

namespace activetrace::baseline {

std::uint64_t packet_digest(const net::PacketHeader& h) {
    std::uint64_t d = 0x6a09e667f3bcc909ull;
    auto mix = [&](std::uint64_t v) { d = net::splitmix64(d ^ v); };
    mix(h.src.value);
    mix(h.dst.value);
    mix(h.id);
    mix(h.port);
    mix(net::fnv1a64(h.payload_tag));
    return d;
}

void RouterLog::add(const LogEntry& e) {
    if (capacity_ == 0) {
        ++evicted_;
        return;
    }
    if (entries_.size() == capacity_) {
        const auto& old = entries_.front();
        auto [lo, hi] = index_.equal_range(old.digest);
        for (auto it = lo; it != hi; ++it)
            if (it->second == base_) {
                index_.erase(it);
                break;
            }
        entries_.pop_front();
        ++base_;
        ++evicted_;
    }
    index_.emplace(e.digest, base_ + entries_.size());
    entries_.push_back(e);
}

const LogEntry* RouterLog::find(std::uint64_t digest) const {
    auto it = index_.find(digest);
    if (it == index_.end()) return nullptr;
    return &entries_[it->second - base_];
}

LoggingHook::LoggingHook(RouterLogs& logs, std::set<net::NodeId> routers, std::size_t capacity)
    : logs_(logs), routers_(std::move(routers)) {
    for (auto r : routers_) logs_.try_emplace(r, capacity);
}

net::HookVerdict LoggingHook::on_hop(const net::HopContext& ctx, net::PacketHeader& header) {
    if (!routers_.contains(ctx.node)) return net::HookVerdict::Pass;
    ++work_;
    logs_.at(ctx.node).add(LogEntry{packet_digest(header), ctx.prev, ctx.tick});
    return net::HookVerdict::Pass;
}

LoggingTraceResult logging_trace(const RouterLogs& logs, std::span<const std::uint64_t> attack_digests,
                                 const net::Topology& t, net::NodeId victim) {
    LoggingTraceResult out;
    for (const auto& [n, log] : logs) out.storage_bytes += log.bytes();
    auto first = t.guardian_of(victim);
    if (!first) throw net::MissingGuardian("victim has no upstream router");

    std::unordered_set<std::uint64_t> digests(attack_digests.begin(), attack_digests.end());
    std::map<net::NodeId, bool> saw_attack;  // router -> logged at least one attack digest
    auto logged_any = [&](net::NodeId r, const RouterLog& log) {
        auto [it, fresh] = saw_attack.try_emplace(r, false);
        if (fresh)
            it->second = std::any_of(digests.begin(), digests.end(), [&](auto d) { return log.find(d) != nullptr; });
        return it->second;
    };

    std::set<std::vector<net::NodeId>> paths;
    std::set<net::NodeId> sites;
    std::vector<std::uint64_t> ordered(digests.begin(), digests.end());
    std::sort(ordered.begin(), ordered.end());
    for (auto d : ordered) {
        std::vector<net::NodeId> path;
        net::NodeId cur = *first;
        bool complete = false;
        for (std::size_t guard = 0; guard < t.nodes().size(); ++guard) {
            auto it = logs.find(cur);
            if (it == logs.end() || !logged_any(cur, it->second))
                throw InsufficientLogs(fmt::format("{} logged none of the attack packets", t.node(cur).name));
            ++out.lookups;
            const auto* e = it->second.find(d);
            if (!e) break;  // evicted here; other digests may still complete the walk
            path.push_back(cur);
            if (!e->ingress) break;
            if (net::is_end_host(t.node(*e->ingress).kind)) {
                sites.insert(*e->ingress);
                complete = true;
                break;
            }
            cur = *e->ingress;
        }
        if (complete) paths.insert(std::move(path));
    }
    out.paths.assign(paths.begin(), paths.end());
    out.origin_sites.assign(sites.begin(), sites.end());
    return out;
}

}  // namespace activetrace::baseline
