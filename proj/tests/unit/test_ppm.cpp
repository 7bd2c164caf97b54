#include <doctest.h>

#include <cmath>

#include "activetrace/net/network.hpp"
#include "activetrace/ppm/convergence.hpp"
#include "activetrace/ppm/marking.hpp"
#include "activetrace/ppm/reconstruct.hpp"
#include "activetrace/ppm/tracer.hpp"
#include "fixtures.hpp"

using namespace activetrace;
using net::Address;

namespace {

Address A(const char* s) { return *Address::parse(s); }

ppm::MarkedSample S(const char* start, std::optional<const char*> end, std::uint8_t d) {
    ppm::MarkedSample s;
    s.start = A(start);
    if (end) s.end = A(*end);
    s.distance = d;
    return s;
}

std::vector<Address> names_to_addrs(const net::Topology& t, std::initializer_list<const char*> names) {
    std::vector<Address> out;
    for (auto n : names) out.push_back(t.node(t.require(n)).addr);
    return out;
}

}  // namespace

TEST_CASE("edge_sample_mark") {
    net::RngStream rng(1, "t");
    const auto R1 = A("10.0.0.1"), R2 = A("10.0.0.2");
    SUBCASE("p=1 always starts an edge") {
        net::MarkField in{R1, R2, 7};
        auto m = ppm::edge_sample_mark(R2, in, 1.0, rng);
        REQUIRE(m);
        CHECK(m->start == R2);
        CHECK_FALSE(m->end);
        CHECK(m->distance == 0);
    }
    SUBCASE("p=0 closes a fresh edge") {
        auto m = ppm::edge_sample_mark(R2, net::MarkField{R1, std::nullopt, 0}, 0.0, rng);
        REQUIRE(m);
        CHECK(m->start == R1);
        CHECK(m->end == R2);
        CHECK(m->distance == 1);
    }
    SUBCASE("p=0 extends a closed edge") {
        auto m = ppm::edge_sample_mark(R2, net::MarkField{R1, R2, 3}, 0.0, rng);
        CHECK(m->end == R2);
        CHECK(m->distance == 4);
    }
    SUBCASE("saturates") {
        auto m = ppm::edge_sample_mark(R2, net::MarkField{R1, R2, 255}, 0.0, rng);
        CHECK(m->distance == 255);
    }
    SUBCASE("unmarked stays unmarked") {
        CHECK_FALSE(ppm::edge_sample_mark(R2, std::nullopt, 0.0, rng));
    }
    SUBCASE("config validation") {
        CHECK_THROWS_AS((ppm::MarkingConfig{0.0, {}}.validate()), ppm::DomainError);
        CHECK_THROWS_AS((ppm::MarkingConfig{1.5, {}}.validate()), ppm::DomainError);
        CHECK_NOTHROW((ppm::MarkingConfig{1.0, {}}.validate()));
    }
}

TEST_CASE("collect") {
    std::vector<net::Completion> inbox;
    CHECK(ppm::collect(inbox).empty());
    for (int i = 0; i < 3; ++i) {
        net::Completion c;
        if (i == 1) c.packet.header().mark = net::MarkField{A("10.0.0.1"), std::nullopt, 0};
        inbox.push_back(c);
    }
    CHECK(ppm::collect(inbox).size() == 1);
    net::Completion dropped = inbox[1];
    dropped.outcome.kind = net::OutcomeKind::DroppedByLoad;
    inbox.push_back(dropped);
    CHECK(ppm::collect(inbox).size() == 1);
    for (int i = 0; i < 5; ++i) inbox.push_back(inbox[1]);
    CHECK(ppm::collect(inbox).size() == 6);
}

TEST_CASE("reconstruct") {
    const auto V = A("192.168.1.1");
    SUBCASE("empty") {
        auto g = ppm::reconstruct({}, V);
        CHECK(g.root == V);
        CHECK(g.paths.empty());
        CHECK(g.edges.empty());
    }
    SUBCASE("single path") {
        std::vector<ppm::MarkedSample> s{S("10.0.0.3", {}, 0), S("10.0.0.2", "10.0.0.3", 1),
                                         S("10.0.0.1", "10.0.0.2", 2)};
        auto g = ppm::reconstruct(s, V);
        REQUIRE(g.paths.size() == 1);
        CHECK(g.paths[0] == std::vector<Address>{A("10.0.0.1"), A("10.0.0.2"), A("10.0.0.3")});
        CHECK(g.orphans.empty());
    }
    SUBCASE("two attackers sharing a suffix") {
        // R3 next to the victim; R1-R2 and R4-R5 branch off it.
        std::vector<ppm::MarkedSample> s{S("10.0.0.3", {}, 0), S("10.0.0.2", "10.0.0.3", 1),
                                         S("10.0.0.1", "10.0.0.2", 2), S("10.0.0.5", "10.0.0.3", 1),
                                         S("10.0.0.4", "10.0.0.5", 2)};
        auto g = ppm::reconstruct(s, V);
        REQUIRE(g.paths.size() == 2);
        CHECK(g.contains_path(std::vector<Address>{A("10.0.0.1"), A("10.0.0.2"), A("10.0.0.3")}));
        CHECK(g.contains_path(std::vector<Address>{A("10.0.0.4"), A("10.0.0.5"), A("10.0.0.3")}));
        CHECK(g.edges.size() == 5);
    }
    SUBCASE("orphans are reported") {
        std::vector<ppm::MarkedSample> s{S("10.0.0.3", {}, 0), S("10.0.0.1", "10.0.0.2", 2)};
        auto g = ppm::reconstruct(s, V);
        CHECK(g.paths.size() == 1);
        REQUIRE(g.orphans.size() == 1);
        CHECK(g.orphans[0].start == A("10.0.0.1"));
    }
    SUBCASE("distances increase along every path") {
        std::vector<ppm::MarkedSample> s{S("10.0.0.3", {}, 0), S("10.0.0.2", "10.0.0.3", 1),
                                         S("10.0.0.1", "10.0.0.2", 2), S("10.0.0.5", "10.0.0.3", 1)};
        auto g = ppm::reconstruct(s, V);
        for (const auto& path : g.paths)
            for (std::size_t i = 0; i + 1 < path.size(); ++i) {
                std::optional<int> dc, dp;
                for (const auto& e : g.edges) {
                    if (e.child == path[i]) dc = e.distance;
                    if (e.child == path[i + 1]) dp = e.distance;
                }
                REQUIRE(dc);
                REQUIRE(dp);
                CHECK(*dc == *dp + 1);
            }
    }
}

TEST_CASE("expected_packets_bound") {
    CHECK(ppm::expected_packets_bound(2, 0.5) == doctest::Approx(std::log(2.0) / 0.25));
    CHECK(ppm::expected_packets_bound(2, 0.5) == doctest::Approx(2.7726).epsilon(1e-4));
    CHECK(ppm::expected_packets_bound(10, 0.04) == doctest::Approx(83.1).epsilon(1e-3));
    CHECK_THROWS_AS(ppm::expected_packets_bound(1, 0.5), ppm::DomainError);
    CHECK_THROWS_AS(ppm::expected_packets_bound(3, 1.0), ppm::DomainError);
    CHECK_THROWS_AS(ppm::expected_packets_bound(3, 0.0), ppm::DomainError);
}

TEST_CASE("inclusion-exclusion oracle") {
    // d=1: geometric with success p.
    CHECK(fixtures::expected_packets_exact(1, 0.25) == doctest::Approx(4.0));
    // d=2, p=0.5: q = {1/2, 1/4}; 2 + 4 - 1/(3/4) = 14/3.
    CHECK(fixtures::expected_packets_exact(2, 0.5) == doctest::Approx(14.0 / 3.0));
}

TEST_CASE("convergence experiment matches the exact expectation") {
    struct Case {
        std::uint32_t d;
        double p;
    };
    for (auto [d, p] : {Case{2, 0.5}, Case{5, 0.1}, Case{10, 0.04}}) {
        CAPTURE(d);
        auto t = fixtures::linear_path(d);
        REQUIRE(ppm::true_router_path(t, t.require("A"), t.require("V")).size() == d);
        ppm::ConvergenceOptions o;
        o.p = p;
        o.trials = 400;
        o.seed = 11;
        auto stats = ppm::convergence_experiment(t, t.require("A"), t.require("V"), o);
        const double exact = fixtures::expected_packets_exact(d, p);
        // Standard error of the mean is below exact/sqrt(trials); allow four of them.
        CHECK(std::abs(stats.mean - exact) < 4.0 * exact / std::sqrt(400.0));
        CHECK(stats.p95 >= stats.mean);
        CHECK(stats.max >= stats.p95);
        REQUIRE(stats.bound);
        CHECK(*stats.bound == doctest::Approx(ppm::expected_packets_bound(d, p)));
    }
}

TEST_CASE("convergence is reproducible and p=1 never converges") {
    auto t = fixtures::linear_path(4);
    ppm::ConvergenceOptions o;
    o.p = 0.2;
    o.trials = 20;
    auto a = ppm::convergence_experiment(t, t.require("A"), t.require("V"), o);
    auto b = ppm::convergence_experiment(t, t.require("A"), t.require("V"), o);
    CHECK(a.packets_per_trial == b.packets_per_trial);
    o.p = 1.0;
    o.packet_cap = 500;
    CHECK_THROWS_AS(ppm::convergence_experiment(t, t.require("A"), t.require("V"), o), ppm::NonConvergence);
}

TEST_CASE("marking on the attack tree") {
    auto t = fixtures::attack_tree(5);
    net::Network network(t, 5);
    ppm::MarkingHook hook(t, {0.04, std::nullopt}, 5);
    network.add_hook(hook);
    std::vector<net::Completion> inbox;
    for (int i = 1; i <= 5; ++i) {
        const auto a = t.require("A" + std::to_string(i));
        for (int k = 0; k < 4000; ++k) {
            net::PacketHeader h;
            h.src = net::Address{static_cast<std::uint32_t>(k * 7919 + i)};
            h.dst = t.node(t.require("V")).addr;
            h.payload_tag = "flood";
            inbox.push_back(network.forward(net::Packet(h, {t.node(a).addr, std::nullopt}), a));
        }
    }
    network.remove_hook(hook);
    auto g = ppm::reconstruct(ppm::collect(inbox), t.node(t.require("V")).addr);
    CHECK(g.contains_path(names_to_addrs(t, {"GA1", "R8", "R4", "R2", "R1", "GV"})));
    CHECK(g.contains_path(names_to_addrs(t, {"GA3", "R6", "R3", "R1", "GV"})));
    CHECK(g.orphans.empty());
}

TEST_CASE("tracer stops early with the right candidates") {
    auto t = fixtures::attack_tree(1);
    const auto V = t.node(t.require("V")).addr;
    const auto leaf = t.node(t.require("GA1")).addr;
    auto samples_for = [&](std::uint64_t seed) {
        net::Network network(t, seed);
        ppm::MarkingHook hook(t, {0.04, std::nullopt}, seed);
        network.add_hook(hook);
        std::vector<net::Completion> inbox;
        const auto a = t.require("A1");
        for (int k = 0; k < 3000; ++k) {
            net::PacketHeader h;
            h.src = net::Address{static_cast<std::uint32_t>(k)};
            h.dst = V;
            inbox.push_back(network.forward(net::Packet(h, {t.node(a).addr, std::nullopt}), a));
        }
        network.remove_hook(hook);
        return ppm::collect(inbox);
    };
    auto samples = samples_for(3);
    ppm::PpmTracer plain(V, {});
    ppm::PpmTracer primed(V, {}, {leaf});
    for (const auto& s : samples) plain.feed(s);
    for (const auto& s : samples) primed.feed(s);
    REQUIRE(plain.resolved());
    REQUIRE(primed.resolved());
    CHECK(primed.resolved_by_candidate());
    CHECK(primed.consumed() < plain.consumed());
    CHECK(plain.origins() == std::vector<Address>{leaf});
    CHECK(primed.origins() == std::vector<Address>{leaf});
}
