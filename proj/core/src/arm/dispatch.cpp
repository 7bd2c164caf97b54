#include "activetrace/arm/dispatch.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>

namespace activetrace::arm {

std::vector<net::Address> evidence_sources(const defense::Alert& a) {
    std::set<net::Address> seen;
    std::vector<net::Address> out;
    for (const auto& e : a.evidence)
        if (seen.insert(e.header.src).second) out.push_back(e.header.src);
    return out;
}

std::vector<net::Address> prior_origins(const defense::Alert& a, const SpoofDb& db) {
    std::vector<SpoofRecord> hits;
    for (auto src : evidence_sources(a))
        for (auto& r : db.lookup(src)) hits.push_back(r);
    std::stable_sort(hits.begin(), hits.end(),
                     [](const SpoofRecord& x, const SpoofRecord& y) { return x.last_seen > y.last_seen; });
    std::vector<net::Address> out;
    for (const auto& r : hits)
        if (std::find(out.begin(), out.end(), r.origin) == out.end()) out.push_back(r.origin);
    return out;
}

TraceResult ppm_result(const defense::Alert& a, const ppm::PpmTracer& tracer, net::Tick started, net::Tick finished) {
    TraceResult r;
    r.alert_id = a.id;
    r.cls = a.cls;
    r.strategy = TraceStrategyKind::PPM;
    r.graph = tracer.graph();
    r.consumed = tracer.consumed();
    r.started = started;
    r.finished = finished;
    r.candidates = tracer.candidates();
    r.resolved_by_candidate = tracer.resolved_by_candidate();
    if (tracer.resolved()) {
        r.status = TraceStatus::Resolved;
        r.origins = tracer.origins();
    } else {
        r.status = TraceStatus::Failed;
        r.reason = tracer.consumed() == 0 ? "no marked packets reached the victim"
                                          : "attack graph did not stabilise within the trace budget";
    }
    return r;
}

TraceResult swt_result(const defense::Alert& a, const swt::SwtSession& session, const net::Topology& t,
                       std::uint64_t inspections) {
    TraceResult r;
    r.alert_id = a.id;
    r.cls = a.cls;
    r.strategy = TraceStrategyKind::SWT;
    r.consumed = inspections;
    r.started = session.started();
    r.finished = session.finished();
    r.resolved_by_candidate = session.resolved_by_candidate();
    for (auto c : session.candidates()) r.candidates.push_back(t.node(c).addr);
    r.transcript = SwtTranscript{session.watermark().token, session.awakenings(), session.sightings(),
                                 std::string(swt::to_string(session.status()))};
    switch (session.status()) {
        case swt::SessionStatus::Resolved:
            r.status = TraceStatus::Resolved;
            r.origins = {t.node(*session.origin()).addr};
            break;
        case swt::SessionStatus::Stalled:
            r.status = TraceStatus::Partial;
            if (session.farthest_gateway()) r.farthest = t.node(*session.farthest_gateway()).addr;
            r.reason = session.failure();
            break;
        case swt::SessionStatus::Failed:
        case swt::SessionStatus::Active:
            r.status = TraceStatus::Failed;
            r.reason = session.sightings().empty() ? "no sightings: watermark never observed"
                                                   : (session.failure().empty() ? "trace budget exhausted"
                                                                                : session.failure());
            break;
    }
    return r;
}

namespace {

TraceResult run_ppm(const defense::Alert& a, DispatchContext& ctx, std::vector<net::Address> candidates) {
    if (!ctx.ppm_feed) throw TracerUnavailable("packet marking is not enabled");
    ppm::PpmTracer tracer(ctx.topology.node(a.victim).addr, ctx.ppm, std::move(candidates));
    net::Tick t = ctx.now;
    for (; t <= ctx.now + ctx.budget; ++t) {
        for (const auto& s : ctx.ppm_feed(t))
            if (tracer.feed(s)) break;
        if (tracer.resolved()) break;
    }
    return ppm_result(a, tracer, ctx.now, std::min(t, ctx.now + ctx.budget));
}

TraceResult run_swt(const defense::Alert& a, DispatchContext& ctx, const std::vector<net::Address>& candidates) {
    if (!ctx.fabric || !ctx.swt_inject || !ctx.swt_step) throw TracerUnavailable("no guardian gateways to wake");
    if (a.evidence.empty()) throw TracerUnavailable("alert carries no evidence");
    // The victim's session partner is whoever the last evidence packet came from.
    const auto peer = ctx.topology.find(a.evidence.back().header.src);
    if (!peer || !net::is_end_host(ctx.topology.node(*peer).kind))
        throw TracerUnavailable("evidence does not name the victim's session partner");
    auto w = ctx.swt_inject(a, ctx.now);
    if (!w) throw TracerUnavailable("no open session matches the alert");

    std::vector<net::NodeId> candidate_nodes;
    for (auto c : candidates)
        if (auto n = ctx.topology.find(c); n && net::is_end_host(ctx.topology.node(*n).kind)) candidate_nodes.push_back(*n);

    const auto before = ctx.fabric->total_inspections();
    swt::SwtSession session(static_cast<std::uint32_t>(a.id), *w, a.victim, *peer, ctx.swt, candidate_nodes);
    session.start(*ctx.fabric, ctx.now);
    ctx.fabric->drain();
    for (net::Tick t = ctx.now + 1; !session.done() && t <= ctx.now + ctx.budget; ++t) {
        ctx.swt_step(t);
        for (const auto& s : ctx.fabric->drain()) session.on_sighting(s, *ctx.fabric, t);
        session.on_tick(*ctx.fabric, t);
    }
    if (!session.done()) {
        // Out of budget: put the gateways back to sleep.
        for (auto& aw : session.awakenings())
            if (auto* g = ctx.fabric->gateway(aw.gateway)) g->quiesce(w->token);
    }
    auto r = swt_result(a, session, ctx.topology, ctx.fabric->total_inspections() - before);
    if (!session.done()) r.finished = ctx.now + ctx.budget;
    return r;
}

}  // namespace

TraceResult dispatch(const defense::Alert& a, DispatchContext& ctx) {
    std::vector<net::Address> candidates;
    if (ctx.db) candidates = prior_origins(a, *ctx.db);
    switch (classify(a)) {
        case TraceStrategyKind::PPM: return run_ppm(a, ctx, std::move(candidates));
        case TraceStrategyKind::SWT: return run_swt(a, ctx, candidates);
        default: break;
    }
    throw TracerUnavailable("no automatic tracer for this alert class");
}

}  // namespace activetrace::arm
