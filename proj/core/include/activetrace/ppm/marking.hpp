#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "activetrace/error.hpp"
#include "activetrace/net/network.hpp"

namespace activetrace::ppm {

ACTIVETRACE_DEFINE_ERROR(DomainError);

/// Edge-sampling step run once per packet at a marking-enabled router.
///
/// With probability p the router starts a fresh edge (start=router,
/// distance=0). Otherwise an existing mark is extended: a distance-0 mark
/// gets the router as its end, and the distance is bumped (saturating). An
/// unmarked packet stays unmarked until some router starts an edge.
/// One uniform draw is consumed per call regardless of the outcome.
std::optional<net::MarkField> edge_sample_mark(net::Address router, std::optional<net::MarkField> mark, double p,
                                               net::RngStream& rng);

struct MarkingConfig {
    double p{0.04};
    /// Marking-enabled routers; unset means every forwarding node.
    std::optional<std::vector<net::NodeId>> routers;

    /// Throws DomainError unless 0 < p <= 1.
    void validate() const;
};

/// Forwarding hook that applies edge sampling at enabled routers. Each router
/// draws from its own stream "<prefix>/<router address>".
class MarkingHook final : public net::HopHook {
public:
    MarkingHook(const net::Topology& topology, MarkingConfig config, std::uint64_t seed,
                std::string_view stream_prefix = "mark");

    net::HookStage stage() const override { return net::HookStage::Marking; }
    std::string_view name() const override { return "ppm-mark"; }
    net::HookVerdict on_hop(const net::HopContext& ctx, net::PacketHeader& header) override;

    bool enabled_at(net::NodeId node) const { return node < enabled_.size() && enabled_[node]; }
    std::uint64_t work_units() const { return work_; }
    double probability() const { return config_.p; }

private:
    MarkingConfig config_;
    std::vector<bool> enabled_;
    std::vector<net::RngStream> streams_;
    std::vector<std::int32_t> stream_index_;
    std::uint64_t work_{0};
};

}  // namespace activetrace::ppm
