#include "activetrace/swt/chain.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace activetrace::swt {

namespace {

constexpr std::string_view kTokenAlphabet = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789";
constexpr std::string_view kMarker = "|wm=";

}  // namespace

WatermarkGenerator::WatermarkGenerator(std::uint64_t seed, std::size_t length)
    : rng_(seed, "watermark"), length_(length) {
    if (length_ == 0) throw Error("watermark length must be positive");
}

Watermark WatermarkGenerator::generate(std::uint32_t session) {
    std::string token;
    do {
        token.clear();
        for (std::size_t i = 0; i < length_; ++i) token += kTokenAlphabet[rng_.below(kTokenAlphabet.size())];
    } while (!issued_.insert(token).second);
    return Watermark{token, session};
}

std::string with_watermark(const std::string& tag, const Watermark& w) {
    return tag + std::string(kMarker) + w.token;
}

bool carries_token(const std::string& payload, const std::string& token) {
    auto pos = payload.find(kMarker);
    while (pos != std::string::npos) {
        if (payload.compare(pos + kMarker.size(), token.size(), token) == 0) return true;
        pos = payload.find(kMarker, pos + 1);
    }
    return false;
}

std::optional<std::size_t> ConnectionChain::index_of(net::NodeId host) const {
    auto it = std::find(hosts.begin(), hosts.end(), host);
    if (it == hosts.end()) return std::nullopt;
    return static_cast<std::size_t>(it - hosts.begin());
}

ConnectionChain open_chain(const net::Topology& topology, std::vector<net::NodeId> hosts,
                           const std::set<std::pair<net::NodeId, net::NodeId>>& encrypted_hops, std::uint32_t id) {
    if (hosts.size() < 2) throw Error("a connection chain needs at least two hosts");
    if (id == 0 || id > 0xffffff) throw Error("chain id must fit in 24 bits and be non-zero");
    ConnectionChain c;
    c.id = id;
    for (std::size_t i = 0; i + 1 < hosts.size(); ++i) {
        try {
            topology.route(hosts[i], hosts[i + 1]);
        } catch (const net::NoPath&) {
            throw UnreachableHop(fmt::format("hop {} -> {} is unreachable", topology.node(hosts[i]).name,
                                             topology.node(hosts[i + 1]).name));
        }
    }
    for (const auto& [a, b] : encrypted_hops) {
        bool found = false;
        for (std::size_t i = 0; i + 1 < hosts.size(); ++i) {
            if ((hosts[i] == a && hosts[i + 1] == b) || (hosts[i] == b && hosts[i + 1] == a)) {
                c.encrypted_hops.insert(i);
                found = true;
            }
        }
        if (!found) throw Error("encrypted hop is not a hop of the chain");
    }
    c.hosts = std::move(hosts);
    return c;
}

void inject_watermark(ConnectionChain& chain, Watermark w) {
    if (!chain.open) throw ChainClosed(fmt::format("chain {} is closed", chain.id));
    chain.watermark = std::move(w);
}

ChainDriver::ChainDriver(ConnectionChain chain, KeystrokeScript script, const net::Topology& topology)
    : chain_(std::move(chain)), script_(std::move(script)), topology_(topology) {
    if (script_.interval == 0) throw Error("keystroke interval must be positive");
}

net::Packet ChainDriver::make(std::size_t hop, bool forward, std::string tag, std::uint64_t id) const {
    const auto from = forward ? chain_.hosts[hop] : chain_.hosts[hop + 1];
    const auto to = forward ? chain_.hosts[hop + 1] : chain_.hosts[hop];
    net::PacketHeader h;
    h.id = id;
    h.src = topology_.node(from).addr;
    h.dst = topology_.node(to).addr;
    h.port = kPort;
    h.conn = conn_of(hop);
    h.encrypted = chain_.hop_encrypted(hop);
    h.payload_tag = std::move(tag);
    return net::Packet(std::move(h), net::OriginTruth{topology_.node(from).addr, topology_.node(chain_.origin()).addr});
}

void ChainDriver::emit(net::Tick tick, const Emit& out, std::uint64_t& next_packet_id) {
    if (!chain_.open) {
        pending_.clear();
        return;
    }
    // Relays queued by last tick's deliveries go first, then a new keystroke.
    std::deque<Pending> now;
    now.swap(pending_);
    for (auto& p : now) {
        const auto at = p.forward ? chain_.hosts[p.hop] : chain_.hosts[p.hop + 1];
        out(make(p.hop, p.forward, std::move(p.tag), next_packet_id++), at);
        ++messages_sent_;
    }
    const bool active = tick >= script_.start && (!script_.stop || tick < *script_.stop);
    if (active && (tick - script_.start) % script_.interval == 0) {
        std::string tag;
        if (script_pos_ < script_.tags.size()) {
            tag = script_.tags[script_pos_++];
        } else if (script_.repeat_last && !script_.tags.empty()) {
            tag = script_.tags.back();
        }
        if (!tag.empty()) {
            out(make(0, true, std::move(tag), next_packet_id++), chain_.origin());
            ++messages_sent_;
        }
    }
}

bool ChainDriver::on_completion(const net::Completion& c, net::Tick) {
    const auto& h = c.packet.header();
    if ((h.conn >> 8) != chain_.id) return false;
    if (!c.outcome.delivered() || !chain_.open) return true;
    const std::size_t hop = h.conn & 0xff;
    if (hop >= chain_.hops()) return true;
    const bool forward = c.dst_node == chain_.hosts[hop + 1];
    if (forward) {
        if (hop + 1 < chain_.hops()) {
            pending_.push_back({hop + 1, true, h.payload_tag});
        } else {
            std::string reply = "reply";
            if (chain_.watermark) {
                reply = with_watermark(reply, *chain_.watermark);
                ++watermarked_replies_;
            }
            pending_.push_back({hop, false, std::move(reply)});
        }
    } else if (hop > 0) {
        pending_.push_back({hop - 1, false, h.payload_tag});
    }
    return true;
}

}  // namespace activetrace::swt
