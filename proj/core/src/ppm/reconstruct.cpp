#include "activetrace/ppm/reconstruct.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace activetrace::ppm {

namespace {

constexpr std::size_t kMaxPaths = 100000;

}  // namespace

std::vector<MarkedSample> collect(std::span<const net::Completion> inbox, const HeaderFilter& filter) {
    std::vector<MarkedSample> out;
    for (const auto& c : inbox) {
        if (!c.outcome.delivered()) continue;
        const auto& h = c.packet.header();
        if (!h.mark) continue;
        if (filter && !filter(h)) continue;
        out.push_back(MarkedSample{h.mark->start, h.mark->end, h.mark->distance, c.tick});
    }
    return out;
}

std::vector<net::Address> AttackGraph::leaves() const {
    std::vector<net::Address> out;
    for (const auto& p : paths) out.push_back(p.front());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

bool AttackGraph::contains_path(std::span<const net::Address> leaf_first) const {
    return std::any_of(paths.begin(), paths.end(), [&](const auto& p) {
        return std::equal(p.begin(), p.end(), leaf_first.begin(), leaf_first.end());
    });
}

AttackGraph reconstruct(std::span<const MarkedSample> samples, net::Address victim) {
    std::vector<SampleKey> keys;
    keys.reserve(samples.size());
    for (const auto& s : samples) keys.push_back(SampleKey::of(s));
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
    return reconstruct_keys(keys, victim);
}

AttackGraph reconstruct_keys(std::span<const SampleKey> keys, net::Address victim) {
    AttackGraph g;
    g.root = victim;

    std::map<std::uint8_t, std::vector<const SampleKey*>> by_distance;
    for (const auto& k : keys) by_distance[k.distance].push_back(&k);

    // accepted[d] = routers placed at distance d.
    std::map<std::uint8_t, std::set<net::Address>> accepted;
    std::set<GraphEdge> edges;
    for (auto& [d, group] : by_distance) {
        for (const auto* k : group) {
            if (d == 0) {
                if (k->end) {
                    g.orphans.push_back(*k);
                    continue;
                }
                accepted[0].insert(k->start);
                edges.insert(GraphEdge{k->start, victim, 0});
                continue;
            }
            auto prev = accepted.find(static_cast<std::uint8_t>(d - 1));
            if (!k->end || prev == accepted.end() || !prev->second.contains(*k->end)) {
                g.orphans.push_back(*k);
                continue;
            }
            accepted[d].insert(k->start);
            edges.insert(GraphEdge{k->start, *k->end, d});
        }
    }
    g.edges.assign(edges.begin(), edges.end());
    std::sort(g.orphans.begin(), g.orphans.end());

    // parents[(node, d)] -> parent addresses at d-1 (victim for d == 0).
    std::map<std::pair<net::Address, std::uint8_t>, std::vector<net::Address>> parents;
    std::set<std::pair<net::Address, std::uint8_t>> has_child;
    for (const auto& e : g.edges) {
        parents[{e.child, e.distance}].push_back(e.parent);
        if (e.distance > 0) has_child.insert({e.parent, static_cast<std::uint8_t>(e.distance - 1)});
    }

    std::vector<std::vector<net::Address>> paths;
    for (const auto& [key, _] : parents) {
        if (has_child.contains(key)) continue;
        // Depth-first walk toward the victim, enumerating every parent choice.
        std::vector<std::pair<std::vector<net::Address>, std::uint8_t>> stack{{{key.first}, key.second}};
        while (!stack.empty() && paths.size() < kMaxPaths) {
            auto [path, d] = std::move(stack.back());
            stack.pop_back();
            if (d == 0) {
                paths.push_back(std::move(path));
                continue;
            }
            const auto& ps = parents.at({path.back(), d});
            for (auto it = ps.rbegin(); it != ps.rend(); ++it) {
                auto next = path;
                next.push_back(*it);
                stack.emplace_back(std::move(next), static_cast<std::uint8_t>(d - 1));
            }
        }
    }
    std::sort(paths.begin(), paths.end(), [](const auto& a, const auto& b) {
        if (a.size() != b.size()) return a.size() > b.size();
        return a < b;
    });
    g.paths = std::move(paths);
    return g;
}

}  // namespace activetrace::ppm
