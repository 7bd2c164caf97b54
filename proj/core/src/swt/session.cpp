#include "activetrace/swt/session.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace activetrace::swt {

std::string_view to_string(SessionStatus s) {
    switch (s) {
        case SessionStatus::Active: return "Active";
        case SessionStatus::Resolved: return "Resolved";
        case SessionStatus::Stalled: return "Stalled";
        case SessionStatus::Failed: return "Failed";
    }
    return "?";
}

SwtSession::SwtSession(std::uint32_t id, Watermark w, net::NodeId victim, net::NodeId victim_peer,
                       SwtOptions options, std::vector<net::NodeId> candidate_origins)
    : id_(id),
      watermark_(std::move(w)),
      victim_(victim),
      peer_(victim_peer),
      options_(options),
      candidates_(std::move(candidate_origins)) {}

void SwtSession::wake(GuardianFabric& fabric, net::NodeId host, net::Tick now, std::string reason) {
    auto* g = fabric.guardian_of(host);
    if (!g) return;
    g->awaken(watermark_, now);
    awake_.insert(g->node());
    awakenings_.push_back(Awakening{now, g->node(), host, std::move(reason)});
}

void SwtSession::start(GuardianFabric& fabric, net::Tick now) {
    started_ = now;
    last_progress_ = now;
    auto* first = fabric.guardian_of(peer_);
    if (!first || !first->trusted()) {
        // Nothing trustworthy past the victim; the victim's own guardian is the limit.
        if (auto* vg = fabric.guardian_of(victim_)) farthest_gateway_ = vg->node();
        failure_ = "guardian of the victim's peer is untrusted";
        finish(fabric, SessionStatus::Stalled, now);
        return;
    }
    frontier_ = peer_;
    depth_ = 1;
    wake(fabric, peer_, now, "victim peer");
    for (auto c : candidates_) {
        auto* g = fabric.guardian_of(c);
        if (c == peer_ || !g || !g->trusted()) continue;
        wake(fabric, c, now, "prior origin");
    }
}

Sighting* SwtSession::record_for(net::NodeId host) {
    auto it = std::find_if(sightings_.begin(), sightings_.end(), [&](const Sighting& s) { return s.host == host; });
    return it == sightings_.end() ? nullptr : &*it;
}

void SwtSession::on_sighting(const Sighting& s, GuardianFabric& fabric, net::Tick now) {
    if (done() || s.token != watermark_.token) return;
    if (!awake_.contains(s.gateway) || s.host == victim_) return;
    auto* rec = record_for(s.host);
    if (!rec) {
        sightings_.push_back(s);
        rec = &sightings_.back();
        last_progress_ = now;
    } else if (s.upstream && !rec->upstream) {
        rec->upstream = s.upstream;
        last_progress_ = now;
    }
    if (!s.upstream) arrival_.emplace(s.host, s.tick);

    if (s.host != frontier_ || !rec->upstream) return;
    farthest_gateway_ = s.gateway;
    const auto next = *rec->upstream;
    auto* g = fabric.guardian_of(next);
    if (!g || !g->trusted()) {
        failure_ = fmt::format("guardian of next upstream host is {}", g ? "untrusted" : "missing");
        finish(fabric, SessionStatus::Stalled, now);
        return;
    }
    frontier_ = next;
    ++depth_;
    if (!awake_.contains(g->node())) wake(fabric, next, now, "upstream of sighting");
}

void SwtSession::on_tick(GuardianFabric& fabric, net::Tick now) {
    if (done()) return;
    // A host that received the watermark and relayed nothing further is the origin.
    for (const auto& [host, arrived] : arrival_) {
        if (now < arrived + options_.relay_window) continue;
        const auto* rec = record_for(host);
        if (!rec || rec->upstream) continue;
        const bool is_frontier = host == frontier_;
        const bool is_candidate = std::find(candidates_.begin(), candidates_.end(), host) != candidates_.end();
        if (!is_frontier && !is_candidate) continue;
        auto* g = fabric.gateway(rec->gateway);
        const auto opaque = g ? g->last_opaque_departure(host) : std::nullopt;
        if (opaque && *opaque >= arrived) {
            if (!is_frontier) continue;
            farthest_gateway_ = rec->gateway;
            failure_ = "watermark left the frontier host on an encrypted hop";
            finish(fabric, SessionStatus::Stalled, now);
            return;
        }
        origin_ = host;
        farthest_gateway_ = rec->gateway;
        by_candidate_ = !is_frontier;
        finish(fabric, SessionStatus::Resolved, now);
        return;
    }
    if (now >= last_progress_ + options_.patience) {
        if (sightings_.empty()) {
            failure_ = "watermark never sighted";
            finish(fabric, SessionStatus::Failed, now);
        } else {
            failure_ = "no progress within patience window";
            finish(fabric, SessionStatus::Stalled, now);
        }
    }
}

void SwtSession::finish(GuardianFabric& fabric, SessionStatus s, net::Tick now) {
    status_ = s;
    finished_ = now;
    for (auto n : awake_)
        if (auto* g = fabric.gateway(n)) g->quiesce(watermark_.token);
}

}  // namespace activetrace::swt
