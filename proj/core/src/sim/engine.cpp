#include "activetrace/sim/engine.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace activetrace::sim {

namespace {

/// Most frequent payload tag in the evidence; ties go to the smaller tag.
std::string dominant_tag(const defense::Alert& a) {
    std::map<std::string, std::size_t> counts;
    for (const auto& e : a.evidence) ++counts[e.header.payload_tag];
    std::string best;
    std::size_t n = 0;
    for (const auto& [tag, c] : counts) {
        if (c <= n) continue;
        best = tag;
        n = c;
    }
    return best;
}

}  // namespace

Engine::Engine(Scenario scenario, arm::SpoofDb& db)
    : scenario_(std::move(scenario)),
      db_(db),
      world_(std::make_unique<World>(scenario_)),
      rules_(scenario_.firewall.default_action) {
    auto& t = world_->topology();
    auto& net = world_->network();

    if (scenario_.ingress.enforce) {
        auto pm = baseline::PrefixMap::from_topology(t);
        for (const auto& [r, range] : scenario_.ingress.prefixes) {
            try {
                pm.add(t.require(r), range);
            } catch (const Error& e) {
                throw ValidationError(fmt::format("defense.ingress.prefixes: {}", e.what()));
            }
        }
        ingress_ = std::make_unique<baseline::IngressHook>(std::move(pm));
        net.add_hook(*ingress_);
    }

    for (const auto& r : scenario_.firewall.rules) rules_.add_rule(r);
    for (const auto& b : scenario_.firewall.borders) borders_.insert(t.require(b));
    firewall_ = std::make_unique<defense::FirewallHook>(rules_, borders_);
    net.add_hook(*firewall_);

    if (scenario_.marking) {
        ppm::MarkingConfig cfg{scenario_.marking->p, std::nullopt};
        if (!scenario_.marking->routers.empty()) {
            cfg.routers.emplace();
            for (const auto& r : scenario_.marking->routers) cfg.routers->push_back(t.require(r));
        }
        marking_ = std::make_unique<ppm::MarkingHook>(t, cfg, scenario_.seed);
        net.add_hook(*marking_);
    }

    fabric_ = std::make_unique<swt::GuardianFabric>(t);
    for (const auto& g : scenario_.untrusted_guardians) fabric_->gateway(t.require(g))->set_trusted(false);
    net.add_hook(*fabric_);
    watermarks_ = std::make_unique<swt::WatermarkGenerator>(scenario_.seed);

    std::vector<net::NodeId> hosts;
    for (const auto& h : scenario_.ids.hosts) hosts.push_back(t.require(h));
    if (hosts.empty())
        for (const auto& n : t.nodes())
            if (n.kind == net::NodeKind::Victim) hosts.push_back(n.id);
    std::sort(hosts.begin(), hosts.end());
    hosts.erase(std::unique(hosts.begin(), hosts.end()), hosts.end());
    monitored_.assign(t.nodes().size(), false);
    for (auto h : hosts) {
        Monitor m{h, {}, {}};
        for (const auto& sig : scenario_.ids.signatures) m.signatures.emplace_back(sig, h);
        if (scenario_.ids.anomaly) m.anomaly.emplace(*scenario_.ids.anomaly, h);
        monitors_.push_back(std::move(m));
        monitored_[h] = true;
    }
}

Engine::~Engine() {
    auto& net = world_->network();
    if (ingress_) net.remove_hook(*ingress_);
    net.remove_hook(*firewall_);
    if (marking_) net.remove_hook(*marking_);
    net.remove_hook(*fabric_);
}

std::vector<defense::Alert> Engine::tick(bool tracing) {
    const auto t = world_->now();
    last_ = world_->step(t);
    auto& c = report_.counters;
    c.ticks = t + 1;

    std::map<net::NodeId, std::vector<defense::IdsEvent>> seen;
    for (const auto& done : last_) {
        const bool monitored = done.outcome.delivered() && monitored_[done.dst_node];
        ledger_.observe(done, monitored);
        switch (done.outcome.kind) {
            case net::OutcomeKind::Delivered: ++c.delivered; break;
            case net::OutcomeKind::DroppedByFilter: ++c.dropped_by_filter; break;
            case net::OutcomeKind::DroppedByLoad: ++c.dropped_by_load; break;
            case net::OutcomeKind::TtlExpired: ++c.ttl_expired; break;
            case net::OutcomeKind::Unroutable: ++c.unroutable; break;
        }
        if (monitored) seen[done.dst_node].push_back({t, done.packet.header()});
    }

    std::vector<defense::Alert> alerts;
    for (auto& m : monitors_) {
        const auto& events = seen[m.host];
        c.ids_events += events.size();
        for (const auto& e : events)
            for (auto& d : m.signatures)
                if (auto a = d.observe(e)) alerts.push_back(std::move(*a));
        if (m.anomaly)
            if (auto a = m.anomaly->observe(t, events)) alerts.push_back(std::move(*a));
    }
    if (tracing) {
        c.alerts_suppressed += alerts.size();
        return {};
    }
    for (auto& a : alerts) a.id = next_alert_++;
    c.alerts_raised += alerts.size();
    return alerts;
}

std::optional<swt::Watermark> Engine::inject_watermark(const defense::Alert& a, net::Tick) {
    const auto& t = world_->topology();
    const auto peer = a.evidence.back().header.src;
    for (auto& d : world_->traffic().chains()) {
        const auto& ch = d.chain();
        if (!ch.open || ch.victim() != a.victim) continue;
        if (t.node(ch.hosts[ch.hosts.size() - 2]).addr != peer) continue;
        auto w = watermarks_->generate(ch.id);
        d.inject(w);
        return w;
    }
    return std::nullopt;
}

void Engine::handle(defense::Alert alert) {
    auto& t = world_->topology();
    auto& c = report_.counters;
    if (!traced_) {
        c.inspections_before_first_trace = fabric_->total_inspections();
        traced_ = true;
    }
    const net::Tick now = world_->now() - 1;
    const net::Tick left = scenario_.duration - world_->now();

    arm::DispatchContext ctx{t, &db_, now, std::min(scenario_.trace.budget, left), scenario_.trace.ppm,
                             scenario_.trace.swt, {}, nullptr, {}, {}};
    if (marking_) {
        const auto victim = t.node(alert.victim).addr;
        const auto tag = dominant_tag(alert);
        ctx.ppm_feed = [this, victim, tag](net::Tick at) {
            if (at != world_->now() - 1) tick(true);
            return ppm::collect(last_, [&](const net::PacketHeader& h) { return h.dst == victim && h.payload_tag == tag; });
        };
    }
    ctx.fabric = fabric_.get();
    ctx.swt_inject = [this](const defense::Alert& a, net::Tick at) { return inject_watermark(a, at); };
    ctx.swt_step = [this](net::Tick) { tick(true); };

    TraceRecord rec;
    try {
        rec.result = arm::dispatch(alert, ctx);
    } catch (const arm::TracerUnavailable& e) {
        rec.result.alert_id = alert.id;
        rec.result.cls = alert.cls;
        rec.result.strategy = arm::classify(alert);
        rec.result.status = arm::TraceStatus::Failed;
        rec.result.reason = e.what();
        rec.result.started = rec.result.finished = now;
    }
    ++c.traces_run;
    if (rec.result.strategy == arm::TraceStrategyKind::PPM) c.ppm_samples_consumed += rec.result.consumed;
    if (rec.result.strategy == arm::TraceStrategyKind::SWT) c.swt_inspections += rec.result.consumed;

    if (rec.result.status != arm::TraceStatus::Failed) {
        for (auto o : rec.result.origins) rec.offense = std::max(rec.offense, db_.offenses(o) + 1);
        arm::ResponseContext rctx{t, t.node(alert.victim).addr, 1};
        rec.actions = arm::select_response(rec.result, db_, scenario_.policy, rctx);
        rec.effects = arm::apply_response(rec.actions, {t, rules_, fabric_.get()});
        for (const auto& e : rec.effects.entries) {
            if (e.rule_id) ++c.rules_added;
            if (e.isolated) ++c.hosts_isolated;
        }
    }
    if (rec.result.status == arm::TraceStatus::Resolved) {
        // Only the traffic the tracer followed; bystanders in the same tick stay out.
        defense::Alert traced = alert;
        const auto tag = dominant_tag(alert);
        std::erase_if(traced.evidence, [&](const defense::IdsEvent& e) { return e.header.payload_tag != tag; });
        const auto spoofed = arm::evidence_sources(traced);
        db_.record(spoofed, rec.result.origins, alert.cls, rec.result.finished);
    }
    report_.alerts.push_back(std::move(alert));
    report_.traces.push_back(std::move(rec));
}

RunReport Engine::run() {
    if (ran_) throw Error("engine already ran");
    ran_ = true;
    const auto& t = world_->topology();
    report_.scenario = scenario_.name;
    report_.seed = scenario_.seed;
    report_.duration = scenario_.duration;
    report_.source = scenario_.source;
    report_.db_before = db_.serialize();
    for (const auto& n : t.nodes()) {
        report_.names.emplace(n.addr, n.name);
        report_.node_names.push_back(n.name);
    }

    while (world_->now() < scenario_.duration)
        for (auto& a : tick(false)) handle(std::move(a));

    auto& c = report_.counters;
    c.packets_emitted = world_->traffic().emitted();
    c.firewall_evaluations = firewall_->evaluations();
    c.firewall_denied = firewall_->denied();
    if (ingress_) c.ingress_denied = ingress_->denied();
    if (marking_) c.marking_work = marking_->work_units();
    c.gateway_inspections = fabric_->total_inspections();
    for (const auto& g : fabric_->gateways())
        if (g.inspection_counter() > 0)
            report_.gateway_inspections.emplace_back(t.node(g.node()).name, g.inspection_counter());
    for (const auto& r : rules_.rules()) report_.firewall_rules.push_back(r.describe());
    report_.db_after = db_.serialize();
    judge(report_, scenario_, t, ledger_);
    return report_;
}

RunReport run_scenario(const Scenario& s, arm::SpoofDb& db) {
    Engine e(s, db);
    return e.run();
}

}  // namespace activetrace::sim
