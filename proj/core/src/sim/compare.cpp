#include "activetrace/sim/compare.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>

#include "activetrace/baseline/controlled_flood.hpp"
#include "activetrace/baseline/ingress.hpp"
#include "activetrace/baseline/input_debug.hpp"
#include "activetrace/baseline/logging.hpp"
#include "activetrace/ppm/marking.hpp"
#include "activetrace/ppm/reconstruct.hpp"
#include "activetrace/sim/world.hpp"

namespace activetrace::sim {

using baseline::Scheme;

net::Tick comparison_tick(const Scenario& s) {
    if (s.floods.empty()) throw ValidationError("comparison needs at least one dos attacker");
    if (s.compare.trace_at) return *s.compare.trace_at;
    net::Tick first = s.floods.front().waves.front().start;
    for (const auto& f : s.floods)
        for (const auto& w : f.waves) first = std::min(first, w.start);
    return first + 10;
}

namespace {

struct Setup {
    net::NodeId victim;
    baseline::AttackSignatureFilter sig;
    std::set<net::NodeId> sites;     // flood attacker nodes
    std::set<net::Address> leaves;   // their guardians
};

Setup setup_for(const Scenario& s, const net::Topology& t) {
    const auto& f = s.floods.front();
    Setup out{t.require(f.victim), {f.tag, t.node(t.require(f.victim)).addr}, {}, {}};
    for (const auto& fl : s.floods) {
        if (fl.victim != f.victim) continue;
        const auto n = t.require(fl.node);
        out.sites.insert(n);
        out.leaves.insert(t.node(*t.guardian_of(n)).addr);
    }
    return out;
}

std::vector<net::Completion> run_until(World& w, net::Tick until) {
    std::vector<net::Completion> kept;
    while (w.now() < until)
        for (auto& c : w.step(w.now()))
            if (c.outcome.delivered()) kept.push_back(std::move(c));
    return kept;
}

std::set<net::NodeId> forwarding(const net::Topology& t) {
    std::set<net::NodeId> out;
    for (const auto& n : t.nodes())
        if (net::is_forwarding(n.kind)) out.insert(n.id);
    return out;
}

std::string path_names(const net::Topology& t, const std::vector<net::NodeId>& p) {
    std::string out;
    for (auto n : p) out += (out.empty() ? "" : ">") + t.node(n).name;
    return out;
}

baseline::LiveNetwork live(World& w) {
    return baseline::LiveNetwork{w.network(), w.now(), [&w](net::Tick t) { return w.step(t); }};
}

void row_marking(const Scenario& s, baseline::ComparisonRow& row) {
    World w(s);
    auto& t = w.topology();
    const auto su = setup_for(s, t);
    ppm::MarkingConfig cfg{s.marking ? s.marking->p : 0.04, std::nullopt};
    if (s.marking && !s.marking->routers.empty()) {
        cfg.routers.emplace();
        for (const auto& r : s.marking->routers) cfg.routers->push_back(t.require(r));
    }
    ppm::MarkingHook hook(t, cfg, s.seed);
    w.network().add_hook(hook);
    const auto inbox = run_until(w, comparison_tick(s));
    w.network().remove_hook(hook);
    const auto samples =
        ppm::collect(inbox, [&](const net::PacketHeader& h) { return h.dst == su.sig.dst && h.payload_tag == su.sig.pattern; });
    const auto g = ppm::reconstruct(samples, su.sig.dst);
    const auto leaves = g.leaves();
    row.ok = !g.paths.empty();
    row.outcome = row.ok ? fmt::format("{} path(s) from {} samples", g.paths.size(), samples.size())
                         : fmt::format("no complete path from {} samples", samples.size());
    if (row.ok) row.correct = std::set<net::Address>(leaves.begin(), leaves.end()) == su.leaves;
    row.measured.extra_packets = w.network().background_packets();
    row.measured.router_work_units = hook.work_units();
}

void row_logging(const Scenario& s, baseline::ComparisonRow& row) {
    World w(s);
    auto& t = w.topology();
    const auto su = setup_for(s, t);
    std::set<net::NodeId> routers;
    if (s.logging_routers)
        for (const auto& r : *s.logging_routers) routers.insert(t.require(r));
    else
        routers = forwarding(t);
    baseline::RouterLogs logs;
    baseline::LoggingHook hook(logs, routers);
    w.network().add_hook(hook);
    const auto inbox = run_until(w, comparison_tick(s));
    w.network().remove_hook(hook);
    row.measured.router_work_units = hook.work_units();
    for (const auto& [n, log] : logs) row.measured.storage_bytes += log.bytes();

    std::vector<std::uint64_t> digests;
    for (const auto& c : inbox)
        if (su.sig.matches(c.packet.header())) digests.push_back(baseline::packet_digest(c.packet.header()));
    try {
        const auto r = baseline::logging_trace(logs, digests, t, su.victim);
        row.ok = true;
        row.outcome = fmt::format("{} path(s), {} lookups", r.paths.size(), r.lookups);
        row.correct = std::set<net::NodeId>(r.origin_sites.begin(), r.origin_sites.end()) == su.sites;
    } catch (const baseline::InsufficientLogs& e) {
        row.outcome = fmt::format("InsufficientLogs: {}", e.what());
    }
}

void row_input_debug(const Scenario& s, baseline::ComparisonRow& row) {
    World w(s);
    auto& t = w.topology();
    const auto su = setup_for(s, t);
    run_until(w, comparison_tick(s));
    auto l = live(w);
    try {
        const auto r = baseline::input_debug_trace(su.sig, su.victim, t, l, s.compare.input);
        row.ok = r.origin_site.has_value();
        row.outcome = path_names(t, r.path);
        row.correct = r.origin_site && su.sites.contains(*r.origin_site);
        row.measured.operator_interventions = r.interventions;
        row.measured.router_work_units = r.work_units;
        row.measured.ticks = r.ticks;
    } catch (const baseline::AttackInactive& e) {
        row.outcome = fmt::format("AttackInactive: {}", e.what());
    }
}

void row_flood(const Scenario& s, baseline::ComparisonRow& row) {
    World w(s);
    auto& t = w.topology();
    const auto su = setup_for(s, t);
    run_until(w, comparison_tick(s));
    auto l = live(w);
    try {
        const auto r = baseline::controlled_flood_trace(su.sig, su.victim, t, l, s.compare.flood);
        row.ok = r.origin_site.has_value();
        row.outcome = path_names(t, r.path);
        row.correct = r.origin_site && su.sites.contains(*r.origin_site);
        row.measured.ticks = r.ticks;
        row.measured.probes = r.probes.size();
    } catch (const baseline::AttackInactive& e) {
        row.outcome = fmt::format("AttackInactive: {}", e.what());
    } catch (const baseline::AmbiguousPerturbation& e) {
        row.outcome = fmt::format("AmbiguousPerturbation: {}", e.what());
    }
    // Probes already sent count even when the walk gave up.
    row.measured.extra_packets = w.network().background_packets();
}

void row_ingress(const Scenario& s, baseline::ComparisonRow& row) {
    World w(s);
    auto& t = w.topology();
    auto pm = baseline::PrefixMap::from_topology(t);
    for (const auto& [r, range] : s.ingress.prefixes) pm.add(t.require(r), range);
    baseline::IngressHook hook(std::move(pm));
    w.network().add_hook(hook);
    run_until(w, comparison_tick(s));
    w.network().remove_hook(hook);
    row.ok = true;
    row.outcome = fmt::format("denied {} of {} packets checked at borders", hook.denied(), hook.checked());
    row.measured.router_work_units = hook.work_units();
}

}  // namespace

baseline::ComparisonReport compare_strategies(const Scenario& s, std::span<const Scheme> schemes) {
    (void)comparison_tick(s);
    baseline::ComparisonReport report{s.name, s.seed, {}};
    for (auto scheme : schemes) {
        baseline::ComparisonRow row;
        row.scheme = scheme;
        row.labels = baseline::qualitative_labels(scheme);
        try {
            switch (scheme) {
                case Scheme::Marking: row_marking(s, row); break;
                case Scheme::Logging: row_logging(s, row); break;
                case Scheme::InputDebugging: row_input_debug(s, row); break;
                case Scheme::ControlledFlooding: row_flood(s, row); break;
                case Scheme::IngressFiltering: row_ingress(s, row); break;
            }
        } catch (const Error& e) {
            row.ok = false;
            row.outcome = fmt::format("error: {}", e.what());
        }
        report.rows.push_back(std::move(row));
    }
    return report;
}

}  // namespace activetrace::sim
