#pragma once

#include <cstdint>
#include <set>
#include <vector>

#include "activetrace/ppm/reconstruct.hpp"

namespace activetrace::ppm {

struct PpmTracerOptions {
    /// Consecutive samples that add no new edge before the graph counts as stable.
    std::size_t stability_window{250};
};

/// Incremental victim-side tracer over a stream of marked samples.
///
/// Resolution happens at the first sample where either
///  - every prior-known candidate origin is a leaf of a complete path and no
///    sample is orphaned, or
///  - at least one path exists and the last `stability_window` samples
///    brought no new edge.
/// Candidates only let the tracer stop early; they never enter the graph.
class PpmTracer {
public:
    PpmTracer(net::Address victim, PpmTracerOptions options, std::vector<net::Address> candidates = {});

    /// Returns true once resolved. Samples fed after resolution are ignored.
    bool feed(const MarkedSample& sample);

    bool resolved() const { return resolved_; }
    bool resolved_by_candidate() const { return by_candidate_; }
    std::size_t consumed() const { return consumed_; }
    const AttackGraph& graph() const { return graph_; }
    std::vector<net::Address> origins() const { return graph_.leaves(); }
    const std::vector<net::Address>& candidates() const { return candidates_; }

private:
    bool candidates_complete() const;

    net::Address victim_;
    PpmTracerOptions options_;
    std::vector<net::Address> candidates_;
    std::set<SampleKey> distinct_;
    AttackGraph graph_;
    std::size_t consumed_{0};
    std::size_t quiet_{0};
    bool resolved_{false};
    bool by_candidate_{false};
};

}  // namespace activetrace::ppm
