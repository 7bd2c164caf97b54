#include "activetrace/defense/correlate.hpp"

#include "activetrace/net/rng.hpp"

namespace activetrace::defense {

std::uint64_t content_digest(std::span<const std::string> payload_tags) {
    std::uint64_t acc = 0;
    for (const auto& t : payload_tags) acc += net::splitmix64(net::fnv1a64(t));
    return net::splitmix64(acc ^ payload_tags.size());
}

CorrelationResult correlate(std::span<const ConnectionRecord> incoming, std::span<const ConnectionRecord> outgoing) {
    CorrelationResult r;
    std::vector<ConnectionRecord> recorded;
    recorded.reserve(incoming.size() + outgoing.size());
    for (const auto& c : incoming) {
        recorded.push_back(c);
        ++r.recordings;
    }
    for (const auto& c : outgoing) {
        recorded.push_back(c);
        ++r.recordings;
    }
    const auto in = std::span(recorded).first(incoming.size());
    const auto out = std::span(recorded).subspan(incoming.size());
    for (const auto& i : in) {
        for (const auto& o : out) {
            ++r.comparisons;
            if (i.digest == o.digest) r.pairs.emplace_back(i.id, o.id);
        }
    }
    return r;
}

}  // namespace activetrace::defense
