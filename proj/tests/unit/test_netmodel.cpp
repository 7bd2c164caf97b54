#include <doctest.h>

#include <algorithm>
#include <random>

#include "activetrace/net/network.hpp"
#include "fixtures.hpp"

using namespace activetrace;
using fixtures::TopoBuilder;
using net::NodeKind;

namespace {

net::Packet datagram(const net::Topology& t, const std::string& from, const std::string& to, std::uint8_t ttl = 64) {
    net::PacketHeader h;
    h.src = t.node(t.require(from)).addr;
    h.dst = t.node(t.require(to)).addr;
    h.ttl = ttl;
    h.payload_tag = "app-data";
    return net::Packet(h, {h.src, std::nullopt});
}

// Records hook invocations in stage order.
struct Probe final : net::HopHook {
    Probe(net::HookStage s, std::string n, std::vector<std::string>& log) : s_(s), n_(std::move(n)), log_(log) {}
    net::HookStage stage() const override { return s_; }
    std::string_view name() const override { return n_; }
    net::HookVerdict on_hop(const net::HopContext&, net::PacketHeader&) override {
        log_.push_back(n_);
        return net::HookVerdict::Pass;
    }
    net::HookStage s_;
    std::string n_;
    std::vector<std::string>& log_;
};

TopoBuilder linear() {
    TopoBuilder b;
    b.router("R1", "10.0.0.1");
    b.stub("A", NodeKind::Attacker, "12.0.0", "R1");
    b.stub("V", NodeKind::Victim, "192.168.0", "R1");
    return b;
}

}  // namespace

TEST_CASE("address parsing and ranges") {
    auto a = net::Address::parse("10.0.0.5");
    REQUIRE(a);
    CHECK(a->to_string() == "10.0.0.5");
    CHECK_FALSE(net::Address::parse("10.0.0"));
    CHECK_FALSE(net::Address::parse("10.0.0.256"));
    auto r = net::AddressRange::parse("12.0.0.0/8");
    REQUIRE(r);
    CHECK(r->contains(*net::Address::parse("12.200.1.1")));
    CHECK_FALSE(r->contains(*net::Address::parse("11.0.0.1")));
    CHECK(net::AddressRange::parse("10.0.0.1-10.0.0.9")->contains(*net::Address::parse("10.0.0.9")));
    CHECK_FALSE(net::AddressRange::parse("10.0.0.9-10.0.0.1"));
    CHECK(net::Address{1} < net::Address{2});
}

TEST_CASE("build_topology") {
    SUBCASE("linear") {
        auto t = linear().build();
        CHECK(t.nodes().size() == 5);
        CHECK(t.guardian_of(t.require("A")) == t.require("GA"));
    }
    SUBCASE("duplicate address") {
        auto b = linear();
        b.router("R9", "10.0.0.1");
        b.link("R9", "R1");
        CHECK_THROWS_AS(b.build(), net::DuplicateAddress);
    }
    SUBCASE("disconnected") {
        auto b = linear();
        b.router("R9", "10.0.0.9");
        CHECK_THROWS_AS(b.build(), net::DisconnectedGraph);
    }
    SUBCASE("host without guardian") {
        auto b = linear();
        b.node("H", NodeKind::Host, "10.5.0.1").link("H", "R1");
        CHECK_THROWS_AS(b.build(), net::MissingGuardian);
    }
    SUBCASE("host with two guardians") {
        auto b = linear();
        b.node("G2", NodeKind::GuardianGateway, "10.5.0.2").link("G2", "R1").link("G2", "A");
        CHECK_THROWS_AS(b.build(), net::MissingGuardian);
    }
    SUBCASE("attack tree") {
        auto t = fixtures::attack_tree(5);
        CHECK(t.route(t.require("A1"), t.require("V")).size() == 8);
        auto path = t.route(t.require("A3"), t.require("V"));
        std::vector<std::string> names;
        for (auto n : path) names.push_back(t.node(n).name);
        CHECK(names == std::vector<std::string>{"A3", "GA3", "R6", "R3", "R1", "GV", "V"});
    }
}

TEST_CASE("route") {
    SUBCASE("line") {
        auto t = linear().build();
        auto p = t.route(t.require("A"), t.require("V"));
        CHECK(p == std::vector<net::NodeId>{t.require("A"), t.require("GA"), t.require("R1"), t.require("GV"),
                                            t.require("V")});
    }
    SUBCASE("diamond ties break on the smaller address") {
        TopoBuilder b;
        b.router("R1", "10.0.0.1").router("R2", "0.0.0.2").router("R3", "0.0.0.3").router("R4", "10.0.0.4");
        b.link("R1", "R3").link("R1", "R2").link("R2", "R4").link("R3", "R4");
        auto t = b.build();
        auto p = t.route(t.require("R1"), t.require("R4"));
        CHECK(p[1] == t.require("R2"));
    }
    SUBCASE("listing order does not matter") {
        auto b = fixtures::attack_tree_builder(5);
        auto t1 = b.build();
        std::reverse(b.spec.nodes.begin(), b.spec.nodes.end());
        std::reverse(b.spec.links.begin(), b.spec.links.end());
        auto t2 = b.build();
        for (int i = 1; i <= 5; ++i) {
            auto a = "A" + std::to_string(i);
            std::vector<net::Address> p1, p2;
            for (auto n : t1.route(t1.require(a), t1.require("V"))) p1.push_back(t1.node(n).addr);
            for (auto n : t2.route(t2.require(a), t2.require("V"))) p2.push_back(t2.node(n).addr);
            CHECK(p1 == p2);
        }
    }
    SUBCASE("no path after detach") {
        auto t = linear().build();
        t.detach_node(t.require("V"));
        CHECK_THROWS_AS(t.route(t.require("A"), t.require("V")), net::NoPath);
    }
}

TEST_CASE("forward") {
    auto t = linear().build();
    net::Network network(t, 1);
    SUBCASE("delivered") {
        auto c = network.forward(datagram(t, "A", "V"), t.require("A"));
        CHECK(c.outcome.kind == net::OutcomeKind::Delivered);
    }
    SUBCASE("ttl 1 expires at the second hop") {
        auto c = network.forward(datagram(t, "A", "V", 1), t.require("A"));
        CHECK(c.outcome.kind == net::OutcomeKind::TtlExpired);
        CHECK(c.outcome.hop == 2);
    }
    SUBCASE("hook order and count") {
        std::vector<std::string> log;
        Probe logging(net::HookStage::Logging, "log", log), marking(net::HookStage::Marking, "mark", log),
            fw(net::HookStage::Firewall, "fw", log);
        network.add_hook(logging);
        network.add_hook(marking);
        network.add_hook(fw);
        network.record_events(true);
        auto c = network.forward(datagram(t, "A", "V"), t.require("A"));
        REQUIRE(c.outcome.delivered());
        // four transmitting hops, three hooks each
        REQUIRE(log.size() == 12);
        for (std::size_t i = 0; i < log.size(); i += 3) {
            CHECK(log[i] == "fw");
            CHECK(log[i + 1] == "mark");
            CHECK(log[i + 2] == "log");
        }
        std::size_t hook_events = 0;
        for (const auto& e : network.events())
            if (e.kind == net::HopEventKind::Hook) ++hook_events;
        CHECK(hook_events == 12);
        network.remove_hook(logging);
        network.remove_hook(marking);
        network.remove_hook(fw);
    }
}

TEST_CASE("drop fraction at twice capacity") {
    TopoBuilder b;
    b.router("R1", "10.0.0.1").router("R2", "10.0.0.2");
    b.link("R1", "R2", 10);
    b.stub("A", NodeKind::Attacker, "12.0.0", "R1");
    b.stub("V", NodeKind::Victim, "192.168.0", "R2");
    auto t = b.build();
    net::Network network(t, 42);
    const auto bottleneck = *t.link_between(t.require("R1"), t.require("R2"));
    network.set_background_load(bottleneck, 10);

    const auto A = t.require("A");
    std::uint64_t sent = 0, dropped = 0;
    for (net::Tick tick = 0; sent < 10000 || !network.idle(); ++tick) {
        for (int i = 0; i < 10 && sent < 10000; ++i, ++sent) network.inject(datagram(t, "A", "V"), A, tick);
        for (const auto& c : network.step(tick))
            if (c.outcome.kind == net::OutcomeKind::DroppedByLoad) ++dropped;
    }
    // load 20 on capacity 10 -> p = 0.5
    CHECK(static_cast<double>(dropped) / 10000.0 == doctest::Approx(0.5).epsilon(0.04));
}

TEST_CASE("determinism") {
    auto run = [] {
        auto t = fixtures::attack_tree(3, 5);
        net::Network network(t, 9);
        network.record_events(true);
        for (net::Tick tick = 0; tick < 40; ++tick) {
            for (int i = 1; i <= 3; ++i)
                for (int k = 0; k < 4; ++k)
                    network.inject(datagram(t, "A" + std::to_string(i), "V"), t.require("A" + std::to_string(i)), tick);
            network.step(tick);
        }
        return network.events();
    };
    CHECK(run() == run());
}

TEST_CASE("rng streams") {
    net::RngStream a(1, "x"), b(1, "x"), c(1, "y");
    CHECK(a.next() == b.next());
    CHECK(a.next() != c.next());
    for (int i = 0; i < 1000; ++i) {
        auto u = a.uniform01();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        CHECK(a.below(7) < 7);
    }
}
