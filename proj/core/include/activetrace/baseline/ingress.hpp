#pragma once

#include <map>
#include <optional>
#include <vector>

#include "activetrace/defense/firewall.hpp"
#include "activetrace/net/network.hpp"

namespace activetrace::baseline {

/// Border node -> source ranges its stub network legitimately owns.
class PrefixMap {
public:
    /// Throws Error when two ranges overlap.
    void add(net::NodeId border, net::AddressRange range);
    /// One entry per node with a declared valid prefix.
    static PrefixMap from_topology(const net::Topology& t);

    bool is_border(net::NodeId n) const { return map_.contains(n); }
    const std::vector<net::AddressRange>* ranges(net::NodeId border) const;
    bool legitimate(net::NodeId border, net::Address src) const;
    const std::map<net::NodeId, std::vector<net::AddressRange>>& entries() const { return map_; }

private:
    std::map<net::NodeId, std::vector<net::AddressRange>> map_;
};

/// The ingress check for one packet at `node`, arriving from `prev`.
/// Returns nullopt where the check does not apply: `node` is not a border,
/// or the packet did not come from the border's own stub. Otherwise Deny iff
/// the source lies outside the stub's ranges.
std::optional<defense::Verdict> ingress_filter(const PrefixMap& pm, const net::Topology& t, net::NodeId node,
                                               std::optional<net::NodeId> prev, const net::PacketHeader& h);

class IngressHook final : public net::HopHook {
public:
    explicit IngressHook(PrefixMap map) : map_(std::move(map)) {}
    net::HookStage stage() const override { return net::HookStage::Firewall; }
    std::string_view name() const override { return "ingress"; }
    net::HookVerdict on_hop(const net::HopContext& ctx, net::PacketHeader& header) override;

    std::uint64_t checked() const { return checked_; }
    std::uint64_t denied() const { return denied_; }
    /// Work units: one per applied check.
    std::uint64_t work_units() const { return checked_; }

private:
    PrefixMap map_;
    std::uint64_t checked_{0};
    std::uint64_t denied_{0};
};

}  // namespace activetrace::baseline
