#include "activetrace/ppm/marking.hpp"

#include <fmt/format.h>

namespace activetrace::ppm {

std::optional<net::MarkField> edge_sample_mark(net::Address router, std::optional<net::MarkField> mark, double p,
                                               net::RngStream& rng) {
    if (rng.uniform01() < p) return net::MarkField{router, std::nullopt, 0};
    if (!mark) return std::nullopt;
    if (mark->distance == 0) mark->end = router;
    mark->bump_distance();
    return mark;
}

void MarkingConfig::validate() const {
    if (!(p > 0.0 && p <= 1.0)) throw DomainError(fmt::format("marking probability {} outside (0, 1]", p));
}

MarkingHook::MarkingHook(const net::Topology& topology, MarkingConfig config, std::uint64_t seed,
                         std::string_view stream_prefix)
    : config_(std::move(config)),
      enabled_(topology.nodes().size(), false),
      stream_index_(topology.nodes().size(), -1) {
    config_.validate();
    if (config_.routers) {
        for (auto id : *config_.routers) enabled_.at(id) = true;
    } else {
        for (const auto& n : topology.nodes()) enabled_[n.id] = net::is_forwarding(n.kind);
    }
    for (const auto& n : topology.nodes()) {
        if (!enabled_[n.id]) continue;
        stream_index_[n.id] = static_cast<std::int32_t>(streams_.size());
        streams_.emplace_back(seed, fmt::format("{}/{}", stream_prefix, n.addr.to_string()));
    }
}

net::HookVerdict MarkingHook::on_hop(const net::HopContext& ctx, net::PacketHeader& header) {
    if (!enabled_at(ctx.node)) return net::HookVerdict::Pass;
    ++work_;
    auto& rng = streams_[static_cast<std::size_t>(stream_index_[ctx.node])];
    header.mark = edge_sample_mark(ctx.topology.node(ctx.node).addr, header.mark, config_.p, rng);
    return net::HookVerdict::Pass;
}

}  // namespace activetrace::ppm
