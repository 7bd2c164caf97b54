#include "activetrace/ppm/convergence.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <fmt/format.h>

#include "activetrace/net/network.hpp"
#include "activetrace/ppm/marking.hpp"
#include "activetrace/ppm/reconstruct.hpp"

namespace activetrace::ppm {

double expected_packets_bound(std::uint32_t d, double p) {
    if (d < 2) throw DomainError(fmt::format("path length {} < 2", d));
    if (!(p > 0.0 && p < 1.0)) throw DomainError(fmt::format("probability {} outside (0, 1)", p));
    return std::log(static_cast<double>(d)) / (p * std::pow(1.0 - p, static_cast<double>(d - 1)));
}

std::vector<net::Address> true_router_path(const net::Topology& topology, net::NodeId attacker,
                                           net::NodeId victim) {
    std::vector<net::Address> out;
    for (auto id : topology.route(attacker, victim)) {
        const auto& n = topology.node(id);
        if (net::is_forwarding(n.kind)) out.push_back(n.addr);
    }
    return out;
}

ConvergenceStats convergence_experiment(net::Topology& topology, net::NodeId attacker, net::NodeId victim,
                                        const ConvergenceOptions& options) {
    MarkingConfig config{options.p, std::nullopt};
    config.validate();
    const auto truth = true_router_path(topology, attacker, victim);
    const auto victim_addr = topology.node(victim).addr;

    ConvergenceStats stats;
    stats.path_routers = static_cast<std::uint32_t>(truth.size());
    stats.p = options.p;
    stats.trials = options.trials;
    if (stats.path_routers >= 2 && options.p < 1.0) stats.bound = expected_packets_bound(stats.path_routers, options.p);

    for (std::size_t trial = 0; trial < options.trials; ++trial) {
        net::RngStream trial_stream(options.seed, net::RngStream::indexed("trial", trial));
        const auto trial_seed = trial_stream.next();
        net::Network network(topology, trial_seed);
        MarkingHook marking(topology, config, trial_seed);
        network.add_hook(marking);

        std::set<SampleKey> distinct;
        std::uint64_t sent = 0;
        bool converged = false;
        while (!converged) {
            if (sent >= options.packet_cap)
                throw NonConvergence(fmt::format("trial {} did not converge within {} packets", trial,
                                                 options.packet_cap));
            net::PacketHeader h;
            h.id = sent;
            h.src = topology.node(attacker).addr;
            h.dst = victim_addr;
            h.ttl = 255;
            h.payload_tag = "flood";
            auto done = network.forward(net::Packet(std::move(h), {topology.node(attacker).addr, {}}), attacker,
                                        sent);
            ++sent;
            if (!done.outcome.delivered() || !done.packet.header().mark) continue;
            const auto& m = *done.packet.header().mark;
            if (!distinct.insert(SampleKey{m.start, m.end, m.distance}).second) continue;
            std::vector<SampleKey> keys(distinct.begin(), distinct.end());
            auto graph = reconstruct_keys(keys, victim_addr);
            converged = graph.paths.size() == 1 && graph.paths.front() == truth && graph.orphans.empty();
        }
        stats.packets_per_trial.push_back(sent);
    }

    if (!stats.packets_per_trial.empty()) {
        auto sorted = stats.packets_per_trial;
        std::sort(sorted.begin(), sorted.end());
        const double sum = std::accumulate(sorted.begin(), sorted.end(), 0.0);
        stats.mean = sum / static_cast<double>(sorted.size());
        const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(sorted.size())));
        stats.p95 = sorted[std::max<std::size_t>(rank, 1) - 1];
        stats.max = sorted.back();
    }
    return stats;
}

}  // namespace activetrace::ppm
