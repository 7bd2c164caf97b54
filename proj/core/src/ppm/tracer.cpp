#include "activetrace/ppm/tracer.hpp"

#include <algorithm>

namespace activetrace::ppm {

PpmTracer::PpmTracer(net::Address victim, PpmTracerOptions options, std::vector<net::Address> candidates)
    : victim_(victim), options_(options), candidates_(std::move(candidates)) {
    std::sort(candidates_.begin(), candidates_.end());
    candidates_.erase(std::unique(candidates_.begin(), candidates_.end()), candidates_.end());
    graph_.root = victim;
}

bool PpmTracer::candidates_complete() const {
    if (candidates_.empty() || !graph_.orphans.empty()) return false;
    const auto leaves = graph_.leaves();
    return std::all_of(candidates_.begin(), candidates_.end(),
                       [&](net::Address c) { return std::binary_search(leaves.begin(), leaves.end(), c); });
}

bool PpmTracer::feed(const MarkedSample& sample) {
    if (resolved_) return true;
    ++consumed_;
    if (distinct_.insert(SampleKey::of(sample)).second) {
        std::vector<SampleKey> keys(distinct_.begin(), distinct_.end());
        graph_ = reconstruct_keys(keys, victim_);
        quiet_ = 0;
        if (candidates_complete()) {
            resolved_ = true;
            by_candidate_ = true;
        }
        return resolved_;
    }
    ++quiet_;
    if (!graph_.paths.empty() && quiet_ >= options_.stability_window) resolved_ = true;
    return resolved_;
}

}  // namespace activetrace::ppm
