#include "activetrace/baseline/controlled_flood.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace activetrace::baseline {

namespace {

struct Prober {
    const AttackSignatureFilter& sig;
    net::NodeId victim;
    LiveNetwork& live;
    const FloodOptions& opt;
    std::uint64_t seen{0};

    // Matching arrivals in the probe window, shifted by the lag from the
    // flooded link to the victim.
    double measure(std::optional<net::LinkId> link, net::Tick lag) {
        const auto per_tick = (opt.budget + opt.probe_ticks - 1) / opt.probe_ticks;
        std::uint64_t arrivals = 0;
        for (net::Tick i = 0; i < opt.probe_ticks + lag; ++i) {
            if (link) {
                if (i == 0) live.network.set_background_load(*link, per_tick);
                if (i == opt.probe_ticks) live.network.clear_background_load();
            }
            for (const auto& c : live.advance()) {
                if (!c.outcome.delivered() || c.dst_node != victim || !sig.matches(c.packet.header())) continue;
                ++seen;
                if (i >= lag) ++arrivals;
            }
        }
        live.network.clear_background_load();
        return static_cast<double>(arrivals) / static_cast<double>(opt.probe_ticks);
    }
};

}  // namespace

FloodResult controlled_flood_trace(const AttackSignatureFilter& sig, net::NodeId victim, const net::Topology& t,
                                   LiveNetwork& live, FloodOptions options) {
    if (options.probe_ticks == 0 || options.budget == 0) throw Error("flood probes need a budget and a duration");
    FloodResult out;
    auto first = t.guardian_of(victim);
    if (!first) throw net::MissingGuardian("victim has no upstream router");
    const auto start = live.now;
    const auto bg_before = live.network.background_packets();
    Prober prober{sig, victim, live, options};
    net::NodeId cur = *first, downstream = victim;
    net::Tick lag = 1;  // links between `cur` and the victim
    for (std::size_t hop = 0; hop < options.max_hops; ++hop) {
        const double baseline = prober.measure(std::nullopt, lag);
        if (baseline <= 0.0)
            throw AttackInactive(fmt::format("no attack traffic reaches the victim while probing {}", t.node(cur).name));

        std::vector<FloodProbe> round;
        std::vector<net::NodeId> upstream;
        for (auto n : t.neighbors(cur)) {
            if (n == downstream) continue;
            upstream.push_back(n);
        }
        std::sort(upstream.begin(), upstream.end(), [&](auto a, auto b) { return t.node(a).addr < t.node(b).addr; });
        for (auto n : upstream) {
            const auto link = *t.link_between(cur, n);
            const double probed = prober.measure(link, lag);
            round.push_back({cur, link, baseline, probed, (baseline - probed) / baseline});
        }
        out.probes.insert(out.probes.end(), round.begin(), round.end());
        if (round.empty()) throw AmbiguousPerturbation(fmt::format("{} has no upstream links", t.node(cur).name));
        std::stable_sort(round.begin(), round.end(), [](const auto& a, const auto& b) { return a.dip > b.dip; });
        if (round.front().dip < options.margin)
            throw AmbiguousPerturbation(fmt::format("no link into {} perturbs the attack", t.node(cur).name));
        if (round.size() > 1 && round[0].dip - round[1].dip < options.margin)
            throw AmbiguousPerturbation(fmt::format("links into {} perturb the attack alike ({:.3f} vs {:.3f})",
                                                    t.node(cur).name, round[0].dip, round[1].dip));
        out.path.push_back(cur);
        const auto next = t.link(round.front().link).other(cur);
        if (net::is_end_host(t.node(next).kind)) {
            out.origin_site = next;
            break;
        }
        downstream = cur;
        cur = next;
        ++lag;
    }
    out.probe_packets = live.network.background_packets() - bg_before;
    out.attack_packets_seen = prober.seen;
    out.ticks = live.now - start;
    return out;
}

}  // namespace activetrace::baseline
