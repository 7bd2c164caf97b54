#include "activetrace/swt/gateway.hpp"

namespace activetrace::swt {

void GuardianGateway::awaken(const Watermark& w, net::Tick now) {
    if (tokens_.empty()) scan_from_ = now + 1;
    tokens_.insert(w.token);
}

void GuardianGateway::quiesce(const std::string& token) { tokens_.erase(token); }

void GuardianGateway::quiesce() { tokens_.clear(); }

std::optional<net::Tick> GuardianGateway::last_opaque_departure(net::NodeId host) const {
    auto it = opaque_departures_.find(host);
    if (it == opaque_departures_.end()) return std::nullopt;
    return it->second;
}

std::vector<Sighting> gateway_scan(GuardianGateway& gw, const RelayedMessage& msg, net::Tick now) {
    std::vector<Sighting> out;
    if (!gw.scanning(now)) return out;
    ++gw.inspections_;
    const bool leaving = gw.guards(msg.from);
    const bool entering = gw.guards(msg.to);
    if (!leaving && !entering) return out;
    if (msg.encrypted) {
        if (leaving) gw.opaque_departures_[msg.from] = now;
        return out;
    }
    for (const auto& token : gw.tokens_) {
        if (!carries_token(msg.payload_tag, token)) continue;
        if (leaving) out.push_back(Sighting{gw.node_, msg.from, token, msg.to, now});
        if (entering) out.push_back(Sighting{gw.node_, msg.to, token, std::nullopt, now});
    }
    return out;
}

GuardianFabric::GuardianFabric(const net::Topology& topology)
    : topology_(topology), index_(topology.nodes().size(), -1) {
    for (const auto& n : topology.nodes()) {
        if (n.kind != net::NodeKind::GuardianGateway) continue;
        std::set<net::NodeId> guarded;
        for (auto nb : topology.neighbors(n.id))
            if (net::is_end_host(topology.node(nb).kind)) guarded.insert(nb);
        index_[n.id] = static_cast<std::int32_t>(gateways_.size());
        gateways_.emplace_back(n.id, std::move(guarded));
    }
}

GuardianGateway* GuardianFabric::gateway(net::NodeId node) {
    if (node >= index_.size() || index_[node] < 0) return nullptr;
    return &gateways_[static_cast<std::size_t>(index_[node])];
}

const GuardianGateway* GuardianFabric::gateway(net::NodeId node) const {
    if (node >= index_.size() || index_[node] < 0) return nullptr;
    return &gateways_[static_cast<std::size_t>(index_[node])];
}

GuardianGateway* GuardianFabric::guardian_of(net::NodeId host) {
    for (auto& g : gateways_)
        if (g.guards(host)) return &g;
    return nullptr;
}

void GuardianFabric::awaken(std::span<const net::NodeId> gateway_nodes, const Watermark& w, net::Tick now) {
    for (auto n : gateway_nodes)
        if (auto* g = gateway(n)) g->awaken(w, now);
}

net::HookVerdict GuardianFabric::on_hop(const net::HopContext& ctx, net::PacketHeader& header) {
    auto* gw = gateway(ctx.node);
    if (!gw) return net::HookVerdict::Pass;
    if (gw->monitoring()) gw->note_monitored();
    if (!gw->scanning(ctx.tick)) return net::HookVerdict::Pass;
    ++scanned_hops_;
    auto from = topology_.find(header.src);
    auto to = topology_.find(header.dst);
    RelayedMessage msg{from.value_or(ctx.node), to.value_or(ctx.dst_node), header.payload_tag, header.encrypted};
    // A spoofed source that names no node cannot be a guarded host.
    if (!from) msg.from = ctx.node;
    for (auto& s : gateway_scan(*gw, msg, ctx.tick)) pending_.push_back(std::move(s));
    return net::HookVerdict::Pass;
}

std::vector<Sighting> GuardianFabric::drain() {
    std::vector<Sighting> out;
    out.swap(pending_);
    return out;
}

std::uint64_t GuardianFabric::total_inspections() const {
    std::uint64_t sum = 0;
    for (const auto& g : gateways_) sum += g.inspection_counter();
    return sum;
}

}  // namespace activetrace::swt
