#include "activetrace/sim/world.hpp"

#include <set>

namespace activetrace::sim {

namespace {

std::vector<net::NodeId> ids_of(const net::Topology& t, const std::vector<std::string>& names) {
    std::vector<net::NodeId> out;
    for (const auto& n : names) out.push_back(t.require(n));
    return out;
}

net::Address random_address(net::RngStream& rng) {
    // Skip 0.0.0.0, which no rule or range treats as a real host.
    std::uint32_t v = 0;
    while (v == 0) v = static_cast<std::uint32_t>(rng.next());
    return net::Address{v};
}

}  // namespace

Traffic::Traffic(const Scenario& s, const net::Topology& t) {
    for (const auto& f : s.floods) {
        Flooder fl{&f, t.require(f.node), t.node(t.require(f.victim)).addr,
                   net::RngStream(s.seed, "spoof/" + f.name), {}, {}, 0};
        if (f.spoof == SpoofMode::Pool) {
            net::RngStream pool_rng(s.seed, "spoof-pool/" + f.name);
            for (std::size_t i = 0; i < f.pool_size; ++i) fl.pool.push_back(random_address(pool_rng));
        }
        if (f.spoof == SpoofMode::InPrefix) {
            fl.prefix = t.node(fl.node).valid_prefix;
            if (!fl.prefix) fl.prefix = t.node(*t.guardian_of(fl.node)).valid_prefix;
        }
        floods_.push_back(std::move(fl));
    }
    for (const auto& b : s.benign)
        benign_.push_back(BenignClient{&b, t.require(b.node), t.node(t.require(b.dst)).addr, 0});
    std::uint32_t id = 1;
    for (const auto& c : s.chains) {
        std::set<std::pair<net::NodeId, net::NodeId>> enc;
        for (const auto& [a, b] : c.encrypted) enc.emplace(t.require(a), t.require(b));
        chains_.emplace_back(swt::open_chain(t, ids_of(t, c.chain), enc, id++), c.script, t);
    }
}

void Traffic::emit(net::Tick t, net::Network& network) {
    const auto& topo = network.topology();
    for (auto& f : floods_) {
        if (!f.spec->active(t)) continue;
        const auto real = topo.node(f.node).addr;
        for (std::uint64_t k = 0; k < f.spec->rate; ++k) {
            net::PacketHeader h;
            h.id = next_id_++;
            h.dst = f.victim;
            h.port = f.spec->port;
            h.payload_tag = f.spec->tag;
            switch (f.spec->spoof) {
                case SpoofMode::None: h.src = real; break;
                case SpoofMode::Random: h.src = random_address(f.rng); break;
                case SpoofMode::Pool: h.src = f.pool[f.rng.below(f.pool.size())]; break;
                case SpoofMode::InPrefix:
                    h.src = net::Address{static_cast<std::uint32_t>(
                        f.prefix->low.value + f.rng.below(std::uint64_t{f.prefix->high.value} - f.prefix->low.value + 1))};
                    break;
            }
            network.inject(net::Packet(std::move(h), {real, std::nullopt}), f.node, t);
            ++f.sent;
        }
    }
    for (auto& b : benign_) {
        if (!b.spec->wave.contains(t) || (t - b.spec->wave.start) % b.spec->every != 0) continue;
        const auto real = topo.node(b.node).addr;
        for (std::uint64_t k = 0; k < b.spec->rate; ++k) {
            net::PacketHeader h;
            h.id = next_id_++;
            h.src = real;
            h.dst = b.dst;
            h.port = b.spec->port;
            h.payload_tag = b.spec->tag;
            network.inject(net::Packet(std::move(h), {real, std::nullopt}), b.node, t);
            ++b.sent;
        }
    }
    const swt::Emit out = [&](net::Packet p, net::NodeId at) { network.inject(std::move(p), at, t); };
    for (auto& c : chains_) c.emit(t, out, next_id_);
}

void Traffic::on_completions(std::span<const net::Completion> done, net::Tick t) {
    for (const auto& c : done)
        for (auto& ch : chains_)
            if (ch.on_completion(c, t)) break;
}

World::World(const Scenario& s)
    : topology_(std::make_unique<net::Topology>(net::Topology::build(s.topology))),
      network_(std::make_unique<net::Network>(*topology_, s.seed)),
      traffic_(std::make_unique<Traffic>(s, *topology_)) {}

std::vector<net::Completion> World::step(net::Tick t) {
    if (t != now_) throw Error("world stepped out of order");
    ++now_;
    traffic_->emit(t, *network_);
    auto done = network_->step(t);
    traffic_->on_completions(done, t);
    return done;
}

}  // namespace activetrace::sim
