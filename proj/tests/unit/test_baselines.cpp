#include <doctest.h>

#include "activetrace/baseline/compare.hpp"
#include "activetrace/baseline/controlled_flood.hpp"
#include "activetrace/baseline/ingress.hpp"
#include "activetrace/baseline/input_debug.hpp"
#include "activetrace/baseline/logging.hpp"
#include "activetrace/ppm/marking.hpp"
#include "activetrace/ppm/reconstruct.hpp"
#include "fixtures.hpp"

using namespace activetrace;
using baseline::Scheme;
using net::NodeId;

namespace {

// Attackers that flood the victim at a fixed rate while `active(tick)` holds.
struct Flood {
    net::Topology& t;
    net::Network network;
    std::vector<NodeId> attackers;
    std::uint64_t rate;
    std::function<bool(net::Tick)> active = [](net::Tick) { return true; };
    std::uint64_t next_id = 1;
    net::RngStream spoof{3, "spoof"};
    std::vector<net::Completion> delivered;

    Flood(net::Topology& topo, std::vector<std::string> names, std::uint64_t r) : t(topo), network(topo, 2), rate(r) {
        for (auto& n : names) attackers.push_back(t.require(n));
    }

    std::vector<net::Completion> step(net::Tick tick) {
        if (active(tick))
            for (auto a : attackers)
                for (std::uint64_t k = 0; k < rate; ++k) {
                    net::PacketHeader h;
                    h.id = next_id++;
                    h.src = net::Address{static_cast<std::uint32_t>(spoof.next())};
                    h.dst = t.node(t.require("V")).addr;
                    h.payload_tag = "flood";
                    network.inject(net::Packet(h, {t.node(a).addr, std::nullopt}), a, tick);
                }
        auto out = network.step(tick);
        for (const auto& c : out)
            if (c.outcome.delivered()) delivered.push_back(c);
        return out;
    }

    baseline::LiveNetwork live(net::Tick now) {
        return baseline::LiveNetwork{network, now, [this](net::Tick tick) { return step(tick); }};
    }
    void run(net::Tick from, net::Tick to) {
        for (auto tick = from; tick < to; ++tick) step(tick);
    }
    baseline::AttackSignatureFilter sig() const { return {"flood", t.node(t.require("V")).addr}; }
};

std::vector<NodeId> names(const net::Topology& t, std::initializer_list<const char*> ns) {
    std::vector<NodeId> out;
    for (auto n : ns) out.push_back(t.require(n));
    return out;
}

}  // namespace

TEST_CASE("ingress filter") {
    fixtures::TopoBuilder b;
    b.router("R1", "10.0.0.1").router("R2", "10.0.0.2").link("R1", "R2");
    b.node("GS", net::NodeKind::GuardianGateway, "12.0.0.254", std::string("12.0.0.0/8"));
    b.node("S", net::NodeKind::Attacker, "12.0.0.1", std::string("12.0.0.0/8"));
    b.link("S", "GS").link("GS", "R1");
    b.stub("V", net::NodeKind::Victim, "192.168.1", "R2");
    auto t = b.build();
    auto pm = baseline::PrefixMap::from_topology(t);
    const auto GS = t.require("GS"), S = t.require("S"), R1 = t.require("R1"), R2 = t.require("R2");
    net::PacketHeader h;
    h.dst = t.node(t.require("V")).addr;

    h.src = *net::Address::parse("11.0.0.1");
    CHECK(baseline::ingress_filter(pm, t, GS, S, h) == defense::Verdict::Deny);
    h.src = *net::Address::parse("12.0.0.99");
    CHECK(baseline::ingress_filter(pm, t, GS, S, h) == defense::Verdict::Allow);
    h.src = *net::Address::parse("11.0.0.1");
    CHECK_FALSE(baseline::ingress_filter(pm, t, R1, GS, h));
    CHECK_FALSE(baseline::ingress_filter(pm, t, R2, R1, h));
    // Arriving at the border from the outside is not its stub's traffic.
    CHECK_FALSE(baseline::ingress_filter(pm, t, GS, R1, h));

    baseline::PrefixMap overlapping;
    overlapping.add(GS, *net::AddressRange::parse("12.0.0.0/8"));
    CHECK_THROWS_AS(overlapping.add(R1, *net::AddressRange::parse("12.5.0.0/16")), Error);
}

TEST_CASE("ingress hook drops every out-of-prefix source at its own border") {
    auto t = fixtures::attack_tree(5);
    baseline::IngressHook hook(baseline::PrefixMap::from_topology(t));
    net::Network network(t, 1);
    network.add_hook(hook);
    net::RngStream rng(5, "src");
    std::uint64_t out_of_prefix = 0, denied_at_own_border = 0, in_prefix_delivered = 0, in_prefix = 0;
    for (int i = 1; i <= 5; ++i) {
        const auto a = t.require("A" + std::to_string(i));
        const auto prefix = *t.node(a).valid_prefix;
        for (int k = 0; k < 400; ++k) {
            net::PacketHeader h;
            h.dst = t.node(t.require("V")).addr;
            const bool inside = k % 4 == 0;
            h.src = inside ? net::Address{static_cast<std::uint32_t>(prefix.low.value + 1 + rng.below(200))}
                           : net::Address{static_cast<std::uint32_t>(rng.next())};
            const bool legit = prefix.contains(h.src);
            auto c = network.forward(net::Packet(h, {t.node(a).addr, std::nullopt}), a);
            if (legit) {
                ++in_prefix;
                if (c.outcome.delivered()) ++in_prefix_delivered;
            } else {
                ++out_of_prefix;
                if (c.outcome.kind == net::OutcomeKind::DroppedByFilter && c.outcome.at == *t.guardian_of(a))
                    ++denied_at_own_border;
            }
        }
    }
    CHECK(out_of_prefix > 0);
    CHECK(denied_at_own_border == out_of_prefix);
    CHECK(in_prefix_delivered == in_prefix);
    CHECK(hook.checked() == 2000);
    network.remove_hook(hook);
}

TEST_CASE("input debugging") {
    auto t = fixtures::attack_tree(5);
    SUBCASE("ongoing flood along a 5-router path") {
        Flood f(t, {"A3"}, 5);
        f.run(0, 10);
        auto live = f.live(10);
        auto r = baseline::input_debug_trace(f.sig(), t.require("V"), t, live);
        CHECK(r.path == names(t, {"GV", "R1", "R3", "R6", "GA3"}));
        CHECK(r.origin_site == t.require("A3"));
        CHECK(r.interventions == 5);
    }
    SUBCASE("attack stopped") {
        Flood f(t, {"A3"}, 5);
        f.active = [](net::Tick tick) { return tick < 10; };
        f.run(0, 30);
        auto live = f.live(30);
        CHECK_THROWS_AS(baseline::input_debug_trace(f.sig(), t.require("V"), t, live), baseline::AttackInactive);
    }
    SUBCASE("intermittent attack") {
        Flood f(t, {"A3"}, 5);
        // On for 2 ticks, off for 6: shorter than the hop-by-hop walk.
        f.active = [](net::Tick tick) { return tick % 8 < 2; };
        f.run(0, 10);
        auto live = f.live(10);
        CHECK_THROWS_AS(baseline::input_debug_trace(f.sig(), t.require("V"), t, live), baseline::AttackInactive);
    }
}

TEST_CASE("controlled flooding") {
    auto t = fixtures::attack_tree(5, 50);
    SUBCASE("single attacker on the tree") {
        Flood f(t, {"A2"}, 20);
        f.run(0, 10);
        auto live = f.live(10);
        baseline::FloodOptions o;
        auto r = baseline::controlled_flood_trace(f.sig(), t.require("V"), t, live, o);
        CHECK(r.path == names(t, {"GV", "R1", "R2", "R5", "GA2"}));
        CHECK(r.origin_site == t.require("A2"));
        std::size_t probes = r.probes.size();
        CHECK(r.probe_packets >= o.budget * probes);
        CHECK(r.probe_packets > 10 * r.attack_packets_seen);
    }
    SUBCASE("attack stopped") {
        Flood f(t, {"A2"}, 20);
        f.active = [](net::Tick tick) { return tick < 5; };
        f.run(0, 30);
        auto live = f.live(30);
        CHECK_THROWS_AS(baseline::controlled_flood_trace(f.sig(), t.require("V"), t, live), baseline::AttackInactive);
    }
    SUBCASE("two attackers on different branches") {
        Flood f(t, {"A2", "A3"}, 20);
        f.run(0, 10);
        auto live = f.live(10);
        baseline::FloodOptions o;
        o.budget = 2000;
        CHECK_THROWS_AS(baseline::controlled_flood_trace(f.sig(), t.require("V"), t, live, o),
                        baseline::AmbiguousPerturbation);
    }
}

TEST_CASE("router logs") {
    baseline::RouterLog log(3);
    for (std::uint64_t d = 1; d <= 5; ++d) log.add({d, std::nullopt, d});
    CHECK(log.size() == 3);
    CHECK(log.evicted() == 2);
    CHECK_FALSE(log.find(1));
    REQUIRE(log.find(4));
    CHECK(log.find(4)->tick == 4);
    CHECK(log.bytes() == 48);

    net::PacketHeader h;
    h.src = net::Address{1};
    h.payload_tag = "flood";
    auto d = baseline::packet_digest(h);
    h.ttl = 3;
    h.mark = net::MarkField{};
    CHECK(baseline::packet_digest(h) == d);
    h.payload_tag = "x";
    CHECK(baseline::packet_digest(h) != d);
}

TEST_CASE("logging traceback") {
    auto t = fixtures::attack_tree(5);
    std::set<NodeId> routers;
    for (const auto& n : t.nodes())
        if (net::is_forwarding(n.kind)) routers.insert(n.id);

    auto digests_of = [](const std::vector<net::Completion>& inbox) {
        std::vector<std::uint64_t> out;
        for (const auto& c : inbox) out.push_back(baseline::packet_digest(c.packet.header()));
        return out;
    };

    SUBCASE("long after the attack") {
        Flood f(t, {"A1"}, 5);
        baseline::RouterLogs logs;
        baseline::LoggingHook hook(logs, routers);
        f.network.add_hook(hook);
        f.active = [](net::Tick tick) { return tick < 20; };
        f.run(0, 1020);
        f.network.remove_hook(hook);
        auto r = baseline::logging_trace(logs, digests_of(f.delivered), t, t.require("V"));
        REQUIRE(r.paths.size() == 1);
        CHECK(r.paths[0] == names(t, {"GV", "R1", "R2", "R4", "R8", "GA1"}));
        CHECK(r.origin_sites == names(t, {"A1"}));
        CHECK(r.storage_bytes > 0);
    }
    SUBCASE("two simultaneous attackers") {
        Flood f(t, {"A2", "A4"}, 5);
        baseline::RouterLogs logs;
        baseline::LoggingHook hook(logs, routers);
        f.network.add_hook(hook);
        f.run(0, 30);
        f.network.remove_hook(hook);
        auto r = baseline::logging_trace(logs, digests_of(f.delivered), t, t.require("V"));
        REQUIRE(r.paths.size() == 2);
        CHECK(r.paths[0] == names(t, {"GV", "R1", "R2", "R5", "GA2"}));
        CHECK(r.paths[1] == names(t, {"GV", "R1", "R3", "R7", "GA4"}));
    }
    SUBCASE("a mid-path router without logging") {
        Flood f(t, {"A1"}, 5);
        baseline::RouterLogs logs;
        auto partial = routers;
        partial.erase(t.require("R4"));
        baseline::LoggingHook hook(logs, partial);
        f.network.add_hook(hook);
        f.run(0, 30);
        f.network.remove_hook(hook);
        CHECK_THROWS_AS(baseline::logging_trace(logs, digests_of(f.delivered), t, t.require("V")),
                        baseline::InsufficientLogs);
    }
}

TEST_CASE("post-mortem partition") {
    auto t = fixtures::attack_tree(5, 50);
    Flood f(t, {"A2"}, 20);
    std::set<NodeId> routers;
    for (const auto& n : t.nodes())
        if (net::is_forwarding(n.kind)) routers.insert(n.id);
    baseline::RouterLogs logs;
    baseline::LoggingHook log_hook(logs, routers);
    ppm::MarkingHook mark_hook(t, {0.04, std::nullopt}, 2);
    f.network.add_hook(log_hook);
    f.network.add_hook(mark_hook);
    f.active = [](net::Tick tick) { return tick < 200; };
    f.run(0, 260);
    f.network.remove_hook(log_hook);
    f.network.remove_hook(mark_hook);

    std::vector<std::uint64_t> digests;
    for (const auto& c : f.delivered) digests.push_back(baseline::packet_digest(c.packet.header()));
    auto lg = baseline::logging_trace(logs, digests, t, t.require("V"));
    CHECK(lg.paths.size() == 1);
    auto g = ppm::reconstruct(ppm::collect(f.delivered), t.node(t.require("V")).addr);
    std::vector<net::Address> truth;
    for (auto n : {"GA2", "R5", "R2", "R1", "GV"}) truth.push_back(t.node(t.require(n)).addr);
    CHECK(g.contains_path(truth));

    auto live = f.live(260);
    CHECK_THROWS_AS(baseline::input_debug_trace(f.sig(), t.require("V"), t, live), baseline::AttackInactive);
    CHECK_THROWS_AS(baseline::controlled_flood_trace(f.sig(), t.require("V"), t, live), baseline::AttackInactive);
}

TEST_CASE("qualitative labels") {
    using L = baseline::QualitativeLabels;
    CHECK(baseline::qualitative_labels(Scheme::IngressFiltering) == L{"Moderate", "Low", "Moderate", "N/A", "N/A"});
    CHECK(baseline::qualitative_labels(Scheme::InputDebugging) == L{"High", "Low", "High", "Good", "Poor"});
    CHECK(baseline::qualitative_labels(Scheme::ControlledFlooding) == L{"Low", "High", "Low", "Poor", "Poor"});
    CHECK(baseline::qualitative_labels(Scheme::Logging) == L{"High", "Low", "High", "Excellent", "Excellent"});
    CHECK(baseline::qualitative_labels(Scheme::Marking) == L{"Low", "Low", "Low", "Excellent", "Excellent"});
    for (auto s : baseline::all_schemes()) CHECK(baseline::parse_scheme(baseline::cli_name(s)) == s);
    CHECK_FALSE(baseline::parse_scheme("carrier-pigeon"));
}
