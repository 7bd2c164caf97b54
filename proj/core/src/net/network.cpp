#include "activetrace/net/network.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace activetrace::net {

std::string_view to_string(HookStage s) {
    switch (s) {
        case HookStage::Firewall: return "firewall";
        case HookStage::Marking: return "marking";
        case HookStage::Logging: return "logging";
    }
    return "?";
}

std::string_view to_string(OutcomeKind k) {
    switch (k) {
        case OutcomeKind::Delivered: return "Delivered";
        case OutcomeKind::DroppedByFilter: return "DroppedByFilter";
        case OutcomeKind::DroppedByLoad: return "DroppedByLoad";
        case OutcomeKind::TtlExpired: return "TtlExpired";
        case OutcomeKind::Unroutable: return "Unroutable";
    }
    return "?";
}

Network::Network(Topology& topology, std::uint64_t seed)
    : topology_(topology),
      drop_rng_(seed, "drop"),
      load_(topology.links().size(), 0),
      background_(topology.links().size(), 0),
      node_work_(topology.nodes().size(), 0),
      route_cache_(topology.nodes().size()),
      route_version_(topology.version()),
      flights_version_(topology.version()) {}

void Network::add_hook(HopHook& hook) {
    auto pos = std::upper_bound(hooks_.begin(), hooks_.end(), hook.stage(),
                                [](HookStage s, const HopHook* h) { return s < h->stage(); });
    hooks_.insert(pos, &hook);
}

void Network::remove_hook(HopHook& hook) { std::erase(hooks_, &hook); }

std::shared_ptr<const std::vector<NodeId>> Network::route_for(NodeId from, NodeId to) {
    if (route_version_ != topology_.version()) {
        for (auto& row : route_cache_) row.clear();
        route_version_ = topology_.version();
    }
    auto& row = route_cache_[from];
    if (row.empty()) row.resize(topology_.nodes().size());
    if (!row[to]) {
        try {
            row[to] = std::make_shared<const std::vector<NodeId>>(topology_.route(from, to));
        } catch (const NoPath&) {
            return nullptr;
        }
    }
    return row[to];
}

void Network::inject(Packet packet, NodeId at, Tick now) {
    Flight f;
    f.src_node = at;
    f.injected = now;
    auto dst = topology_.find(packet.header().dst);
    f.packet = std::move(packet);
    if (!dst) {
        f.dst_node = at;
        f.done = DeliveryOutcome{OutcomeKind::Unroutable, 0, at, {}};
    } else {
        f.dst_node = *dst;
        f.route = route_for(at, *dst);
        if (!f.route) f.done = DeliveryOutcome{OutcomeKind::Unroutable, 0, at, {}};
    }
    in_flight_.push_back(std::move(f));
}

void Network::log(Tick t, const Flight& f, std::size_t hop, NodeId node, HopEventKind kind, std::string detail) {
    if (record_events_) events_.push_back(HopEvent{t, f.packet.header().id, hop, node, kind, std::move(detail)});
}

void Network::reroute_if_stale() {
    if (flights_version_ == topology_.version()) return;
    flights_version_ = topology_.version();
    for (auto& f : in_flight_) {
        if (f.done || !f.route) continue;
        const auto here = (*f.route)[f.pos];
        bool intact = true;
        for (std::size_t i = f.pos; i + 1 < f.route->size(); ++i) {
            if (!topology_.link_between((*f.route)[i], (*f.route)[i + 1])) {
                intact = false;
                break;
            }
        }
        if (intact) continue;
        auto fresh = route_for(here, f.dst_node);
        if (!fresh) {
            f.done = DeliveryOutcome{OutcomeKind::Unroutable, f.pos, here, {}};
            continue;
        }
        f.route = std::move(fresh);
        f.pos = 0;
    }
}

std::vector<Completion> Network::step(Tick tick) {
    reroute_if_stale();
    std::fill(load_.begin(), load_.end(), 0);

    // Phase 1: hop processing and link claims.
    for (auto& f : in_flight_) {
        f.claimed.reset();
        if (f.done) continue;
        const auto& route = *f.route;
        if (route.size() == 1) {
            f.done = DeliveryOutcome{OutcomeKind::Delivered, 0, route[0], {}};
            continue;
        }
        const std::size_t hop = f.pos + 1;
        const NodeId node = route[f.pos];
        const NodeId next = route[f.pos + 1];
        std::optional<NodeId> prev;
        if (f.pos > 0) prev = route[f.pos - 1];
        HopContext ctx{topology_, tick, hop, node, prev, next, f.dst_node};
        ++node_work_[node];

        bool dropped = false;
        for (auto* h : hooks_) {
            log(tick, f, hop, node, HopEventKind::Hook, std::string(h->name()));
            if (h->on_hop(ctx, f.packet.header()) == HookVerdict::Drop) {
                f.done = DeliveryOutcome{OutcomeKind::DroppedByFilter, hop, node, std::string(h->name())};
                log(tick, f, hop, node, HopEventKind::Drop, "filter");
                dropped = true;
                break;
            }
        }
        if (dropped) continue;

        auto& ttl = f.packet.header().ttl;
        if (ttl == 0) {
            f.done = DeliveryOutcome{OutcomeKind::TtlExpired, hop, node, {}};
            log(tick, f, hop, node, HopEventKind::Drop, "ttl");
            continue;
        }
        --ttl;
        log(tick, f, hop, node, HopEventKind::TtlDecrement, std::to_string(ttl));

        auto link = topology_.link_between(node, next);
        if (!link) {
            f.done = DeliveryOutcome{OutcomeKind::Unroutable, hop, node, {}};
            continue;
        }
        f.claimed = *link;
        ++load_[*link];
    }

    // Phase 2: drop lottery with this tick's loads, then advance.
    for (auto& f : in_flight_) {
        if (f.done || !f.claimed) continue;
        const auto& l = topology_.link(*f.claimed);
        const auto total = load_[l.id] + background_[l.id];
        const std::size_t hop = f.pos + 1;
        const NodeId node = (*f.route)[f.pos];
        const double p = drop_probability(l.capacity, total);
        if (p > 0.0 && drop_rng_.uniform01() < p) {
            f.done = DeliveryOutcome{OutcomeKind::DroppedByLoad, hop, node, {}};
            log(tick, f, hop, node, HopEventKind::Drop, "load");
            continue;
        }
        ++traversals_;
        ++f.pos;
        log(tick, f, hop, node, HopEventKind::Traverse, std::to_string((*f.route)[f.pos]));
        if (f.pos + 1 == f.route->size()) {
            f.done = DeliveryOutcome{OutcomeKind::Delivered, hop, (*f.route)[f.pos], {}};
            log(tick, f, hop, (*f.route)[f.pos], HopEventKind::Deliver);
        }
    }
    for (std::uint64_t b : background_) background_packets_ += b;

    std::vector<Completion> out;
    std::vector<Flight> keep;
    keep.reserve(in_flight_.size());
    for (auto& f : in_flight_) {
        if (f.done) {
            out.push_back(Completion{std::move(f.packet), f.src_node, f.dst_node, f.injected, tick, *f.done});
        } else {
            keep.push_back(std::move(f));
        }
    }
    in_flight_ = std::move(keep);
    return out;
}

Completion Network::forward(Packet packet, NodeId at, Tick start) {
    if (!idle()) throw Error("Network::forward requires an idle network");
    inject(std::move(packet), at, start);
    for (Tick t = start;; ++t) {
        auto done = step(t);
        if (!done.empty()) return std::move(done.front());
    }
}

void Network::set_background_load(LinkId link, std::uint64_t packets_per_tick) {
    background_.at(link) = packets_per_tick;
}

void Network::clear_background_load() { std::fill(background_.begin(), background_.end(), 0); }

}  // namespace activetrace::net
