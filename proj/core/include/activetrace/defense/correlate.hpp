#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace activetrace::defense {

struct ConnectionRecord {
    std::uint64_t id{0};
    std::uint64_t digest{0};
};

struct CorrelationResult {
    std::vector<std::pair<std::uint64_t, std::uint64_t>> pairs;  // (incoming id, outgoing id)
    std::uint64_t comparisons{0};
    std::uint64_t recordings{0};
};

/// Order-independent hash of a connection's payload-tag multiset.
std::uint64_t content_digest(std::span<const std::string> payload_tags);

/// What a passive correlator has to do at one host: record every concurrent
/// connection, then compare every incoming against every outgoing one.
CorrelationResult correlate(std::span<const ConnectionRecord> incoming, std::span<const ConnectionRecord> outgoing);

}  // namespace activetrace::defense
