#include "activetrace/baseline/ingress.hpp"

#include <fmt/format.h>

namespace activetrace::baseline {

void PrefixMap::add(net::NodeId border, net::AddressRange range) {
    if (!range.well_formed()) throw Error("malformed prefix range " + range.to_string());
    for (const auto& [node, ranges] : map_)
        for (const auto& r : ranges)
            if (r.overlaps(range))
                throw Error(fmt::format("prefix {} overlaps {} of another entry", range.to_string(), r.to_string()));
    map_[border].push_back(range);
}

PrefixMap PrefixMap::from_topology(const net::Topology& t) {
    PrefixMap pm;
    for (const auto& n : t.nodes())
        if (n.valid_prefix && net::is_forwarding(n.kind)) pm.add(n.id, *n.valid_prefix);
    return pm;
}

const std::vector<net::AddressRange>* PrefixMap::ranges(net::NodeId border) const {
    auto it = map_.find(border);
    return it == map_.end() ? nullptr : &it->second;
}

bool PrefixMap::legitimate(net::NodeId border, net::Address src) const {
    const auto* rs = ranges(border);
    if (!rs) return false;
    for (const auto& r : *rs)
        if (r.contains(src)) return true;
    return false;
}

std::optional<defense::Verdict> ingress_filter(const PrefixMap& pm, const net::Topology& t, net::NodeId node,
                                               std::optional<net::NodeId> prev, const net::PacketHeader& h) {
    if (!pm.is_border(node) || !prev) return std::nullopt;
    // Only traffic entering from the border's own stub is checked.
    if (!pm.legitimate(node, t.node(*prev).addr)) return std::nullopt;
    return pm.legitimate(node, h.src) ? defense::Verdict::Allow : defense::Verdict::Deny;
}

net::HookVerdict IngressHook::on_hop(const net::HopContext& ctx, net::PacketHeader& header) {
    auto v = ingress_filter(map_, ctx.topology, ctx.node, ctx.prev, header);
    if (!v) return net::HookVerdict::Pass;
    ++checked_;
    if (*v == defense::Verdict::Allow) return net::HookVerdict::Pass;
    ++denied_;
    return net::HookVerdict::Drop;
}

}  // namespace activetrace::baseline
