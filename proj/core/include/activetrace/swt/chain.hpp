#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "activetrace/error.hpp"
#include "activetrace/net/network.hpp"

namespace activetrace::swt {

ACTIVETRACE_DEFINE_ERROR(UnreachableHop);
ACTIVETRACE_DEFINE_ERROR(ChainClosed);

struct Watermark {
    std::string token;
    std::uint32_t session{0};
};

/// Issues printable tokens; every token within one generator is distinct.
class WatermarkGenerator {
public:
    static constexpr std::size_t kDefaultLength = 16;

    WatermarkGenerator(std::uint64_t seed, std::size_t length = kDefaultLength);
    Watermark generate(std::uint32_t session);
    std::size_t length() const { return length_; }

private:
    net::RngStream rng_;
    std::size_t length_;
    std::unordered_set<std::string> issued_;
};

/// Payload of a watermarked reply.
std::string with_watermark(const std::string& tag, const Watermark& w);
bool carries_token(const std::string& payload, const std::string& token);

/// Interactive stepping-stone session H1 -> ... -> Hn (Hn = victim).
struct ConnectionChain {
    std::uint32_t id{0};
    std::vector<net::NodeId> hosts;
    std::set<std::size_t> encrypted_hops;  // hop i joins hosts[i] and hosts[i+1]
    bool open{true};
    std::optional<Watermark> watermark;

    net::NodeId origin() const { return hosts.front(); }
    net::NodeId victim() const { return hosts.back(); }
    std::size_t hops() const { return hosts.size() - 1; }
    bool hop_encrypted(std::size_t hop) const { return encrypted_hops.contains(hop); }
    std::optional<std::size_t> index_of(net::NodeId host) const;
};

/// Throws UnreachableHop when consecutive hosts cannot reach each other, and
/// Error for chains shorter than 2 or encrypted pairs that are not hops.
ConnectionChain open_chain(const net::Topology& topology, std::vector<net::NodeId> hosts,
                           const std::set<std::pair<net::NodeId, net::NodeId>>& encrypted_hops, std::uint32_t id = 1);

/// From now on the victim's replies carry the token. Throws ChainClosed.
void inject_watermark(ConnectionChain& chain, Watermark w);

struct KeystrokeScript {
    net::Tick start{0};
    net::Tick interval{2};
    std::vector<std::string> tags{"keystroke"};
    /// Keep sending the last tag after the script runs out.
    bool repeat_last{true};
    std::optional<net::Tick> stop;
};

using Emit = std::function<void(net::Packet, net::NodeId at)>;

/// Generates the chain's traffic: the origin types keystrokes, every
/// stepping stone relays them one tick after receipt, the victim answers
/// each keystroke with a reply that is relayed back to the origin.
class ChainDriver {
public:
    static constexpr std::uint16_t kPort = 22;

    ChainDriver(ConnectionChain chain, KeystrokeScript script, const net::Topology& topology);

    void emit(net::Tick tick, const Emit& out, std::uint64_t& next_packet_id);
    /// Returns true when the completion belongs to this chain.
    bool on_completion(const net::Completion& c, net::Tick tick);

    ConnectionChain& chain() { return chain_; }
    const ConnectionChain& chain() const { return chain_; }
    void inject(Watermark w) { inject_watermark(chain_, std::move(w)); }
    void close() { chain_.open = false; }

    std::uint64_t watermarked_replies() const { return watermarked_replies_; }
    std::uint64_t messages_sent() const { return messages_sent_; }

private:
    struct Pending {
        std::size_t hop;
        bool forward;
        std::string tag;
    };

    std::uint32_t conn_of(std::size_t hop) const { return (chain_.id << 8) | static_cast<std::uint32_t>(hop); }
    net::Packet make(std::size_t hop, bool forward, std::string tag, std::uint64_t id) const;

    ConnectionChain chain_;
    KeystrokeScript script_;
    const net::Topology& topology_;
    std::size_t script_pos_{0};
    std::deque<Pending> pending_;
    std::uint64_t watermarked_replies_{0};
    std::uint64_t messages_sent_{0};
};

}  // namespace activetrace::swt
