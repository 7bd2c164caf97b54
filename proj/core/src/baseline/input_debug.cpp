#include "activetrace/baseline/input_debug.hpp"

#include <map>

#include <fmt/format.h>

#include "activetrace/defense/ids.hpp"

namespace activetrace::baseline {

bool AttackSignatureFilter::matches(const net::PacketHeader& h) const {
    return h.dst == dst && defense::glob_match(pattern, h.payload_tag);
}

namespace {

// Counts signature matches at one router, per ingress, on the egress toward `downstream`.
class EgressObserver final : public net::HopHook {
public:
    EgressObserver(const AttackSignatureFilter& sig, net::NodeId router, net::NodeId downstream)
        : sig_(sig), router_(router), downstream_(downstream) {}
    net::HookStage stage() const override { return net::HookStage::Logging; }
    std::string_view name() const override { return "input-debug"; }
    net::HookVerdict on_hop(const net::HopContext& ctx, net::PacketHeader& h) override {
        if (ctx.node != router_ || ctx.next != downstream_) return net::HookVerdict::Pass;
        ++work;
        if (sig_.matches(h) && ctx.prev) ++by_ingress[*ctx.prev];
        return net::HookVerdict::Pass;
    }

    std::map<net::NodeId, std::uint64_t> by_ingress;
    std::uint64_t work{0};

private:
    const AttackSignatureFilter& sig_;
    net::NodeId router_;
    net::NodeId downstream_;
};

}  // namespace

InputDebugResult input_debug_trace(const AttackSignatureFilter& sig, net::NodeId victim, const net::Topology& t,
                                   LiveNetwork& live, InputDebugOptions options) {
    InputDebugResult out;
    auto first = t.guardian_of(victim);
    if (!first) throw net::MissingGuardian("victim has no upstream router");
    net::NodeId cur = *first, downstream = victim;
    const auto start = live.now;
    for (std::size_t hop = 0; hop < options.max_hops; ++hop) {
        EgressObserver obs(sig, cur, downstream);
        live.network.add_hook(obs);
        ++out.interventions;
        for (net::Tick i = 0; i < options.window; ++i) live.advance();
        live.network.remove_hook(obs);
        out.work_units += obs.work;
        if (obs.by_ingress.empty())
            throw AttackInactive(fmt::format("no matching traffic at {} during the observation window",
                                             t.node(cur).name));
        // Busiest ingress; ties go to the smaller address.
        net::NodeId best = obs.by_ingress.begin()->first;
        for (const auto& [n, c] : obs.by_ingress)
            if (c > obs.by_ingress[best] || (c == obs.by_ingress[best] && t.node(n).addr < t.node(best).addr))
                best = n;
        out.path.push_back(cur);
        if (net::is_end_host(t.node(best).kind)) {
            out.origin_site = best;
            break;
        }
        downstream = cur;
        cur = best;
    }
    out.ticks = live.now - start;
    return out;
}

}  // namespace activetrace::baseline
