#include "activetrace/swt/trace.hpp"

namespace activetrace::swt {

namespace {

// Counts guardian hops while any guardian is awake; runs ahead of the fabric.
class AwakeRelayCounter final : public net::HopHook {
public:
    explicit AwakeRelayCounter(GuardianFabric& fabric) : fabric_(fabric) {}
    net::HookStage stage() const override { return net::HookStage::Logging; }
    std::string_view name() const override { return "swt-relay-count"; }
    net::HookVerdict on_hop(const net::HopContext& ctx, net::PacketHeader&) override {
        if (!fabric_.gateway(ctx.node)) return net::HookVerdict::Pass;
        for (const auto& g : fabric_.gateways())
            if (g.state() == GatewayState::Awake) {
                ++count;
                break;
            }
        return net::HookVerdict::Pass;
    }
    std::uint64_t count{0};

private:
    GuardianFabric& fabric_;
};

}  // namespace

ChainTraceOutcome trace_chain(net::Topology& topology, const ConnectionChain& chain,
                              const ChainTraceOptions& options) {
    net::Network network(topology, net::RngStream(options.seed, "swt/network").next());
    GuardianFabric fabric(topology);
    AwakeRelayCounter relays(fabric);
    network.add_hook(relays);
    network.add_hook(fabric);
    for (auto n : options.untrusted)
        if (auto* g = fabric.gateway(n)) g->set_trusted(false);

    WatermarkGenerator generator(options.seed);
    ChainDriver driver(chain, options.script, topology);
    const auto peer = chain.hosts[chain.hosts.size() - 2];
    std::optional<SwtSession> session;
    std::uint64_t next_id = 1;
    net::Tick tick = 0;
    auto emit = [&](net::Packet p, net::NodeId at) { network.inject(std::move(p), at, tick); };

    for (; tick <= options.max_ticks; ++tick) {
        if (tick == options.inject_at) {
            auto w = generator.generate(chain.id);
            driver.inject(w);
            session.emplace(chain.id, w, chain.victim(), peer, options.swt);
            session->start(fabric, tick);
        }
        driver.emit(tick, emit, next_id);
        for (const auto& c : network.step(tick)) driver.on_completion(c, tick);
        if (!session) continue;
        for (const auto& s : fabric.drain()) session->on_sighting(s, fabric, tick);
        session->on_tick(fabric, tick);
        if (session->done()) break;
    }
    network.remove_hook(fabric);
    network.remove_hook(relays);

    ChainTraceOutcome out;
    if (!session) return out;
    if (session->status() == SessionStatus::Failed && session->sightings().empty())
        throw NoSightings("watermark " + session->watermark().token + " was never sighted");
    out.status = session->status();
    out.origin = session->origin();
    out.farthest_gateway = session->farthest_gateway();
    out.frontier_host = session->frontier_host();
    out.sightings = session->sightings();
    out.awakenings = session->awakenings();
    out.watermark = session->watermark();
    out.inspections = fabric.total_inspections();
    out.scanned_hops = fabric.scanned_hops();
    out.relayed_while_awake = relays.count;
    out.ticks = tick;
    out.failure = session->failure();
    return out;
}

}  // namespace activetrace::swt
