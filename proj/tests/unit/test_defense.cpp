#include <doctest.h>

#include "activetrace/defense/correlate.hpp"
#include "activetrace/defense/firewall.hpp"
#include "activetrace/defense/ids.hpp"
#include "activetrace/net/network.hpp"
#include "fixtures.hpp"

using namespace activetrace;
using defense::Flow;
using defense::Verdict;

namespace {

net::PacketHeader header(const char* src, const char* dst, std::uint16_t port = 0, std::string tag = "app-data") {
    net::PacketHeader h;
    h.src = *net::Address::parse(src);
    h.dst = *net::Address::parse(dst);
    h.port = port;
    h.payload_tag = std::move(tag);
    return h;
}

defense::FirewallRule deny_ftp_from_10() {
    defense::FirewallRule r;
    r.action = Verdict::Deny;
    r.src = *net::AddressRange::parse("10.0.0.0-10.0.0.255");
    r.port = 21;
    r.priority = 10;
    return r;
}

defense::IdsEvent ev(net::Tick t, std::string tag) { return {t, header("1.1.1.1", "2.2.2.2", 0, std::move(tag))}; }

}  // namespace

TEST_CASE("filter") {
    defense::RuleSet rs;
    CHECK(defense::filter(rs, header("10.0.0.5", "20.0.0.1", 21), Flow::Inbound).verdict == Verdict::Allow);
    auto id = rs.add_rule(deny_ftp_from_10());
    auto d = defense::filter(rs, header("10.0.0.5", "20.0.0.1", 21), Flow::Inbound);
    CHECK(d.verdict == Verdict::Deny);
    CHECK(d.rule == id);
    CHECK(defense::filter(rs, header("10.0.0.5", "20.0.0.1", 80), Flow::Inbound).verdict == Verdict::Allow);
    CHECK(defense::filter(rs, header("10.0.1.5", "20.0.0.1", 21), Flow::Inbound).verdict == Verdict::Allow);

    SUBCASE("first match wins by priority") {
        auto allow = deny_ftp_from_10();
        allow.action = Verdict::Allow;
        allow.priority = 5;
        rs.add_rule(allow);
        CHECK(defense::filter(rs, header("10.0.0.5", "20.0.0.1", 21), Flow::Inbound).verdict == Verdict::Allow);
    }
    SUBCASE("direction") {
        auto r = deny_ftp_from_10();
        r.priority = 11;
        r.port = 80;
        r.direction = defense::Direction::Outbound;
        rs.add_rule(r);
        CHECK(defense::filter(rs, header("10.0.0.5", "20.0.0.1", 80), Flow::Inbound).verdict == Verdict::Allow);
        CHECK(defense::filter(rs, header("10.0.0.5", "20.0.0.1", 80), Flow::Outbound).verdict == Verdict::Deny);
    }
}

TEST_CASE("add_rule and remove_rule") {
    defense::RuleSet rs;
    auto before = rs;
    auto ftp = header("10.0.0.5", "20.0.0.1", 21);
    auto id = rs.add_rule(deny_ftp_from_10());
    CHECK(defense::filter(rs, ftp, Flow::Inbound).verdict == Verdict::Deny);
    CHECK_THROWS_AS(rs.add_rule(deny_ftp_from_10()), defense::PriorityConflict);
    rs.remove_rule(id);
    CHECK(defense::filter(rs, ftp, Flow::Inbound).verdict == Verdict::Allow);
    CHECK_THROWS_AS(rs.remove_rule(id), defense::UnknownRule);
    CHECK(rs.rules() == before.rules());
    CHECK(rs.free_priority(1) == 1);
}

TEST_CASE("malformed rule ranges are rejected") {
    defense::RuleSet rs;
    auto r = deny_ftp_from_10();
    r.src = net::AddressRange{net::Address{9}, net::Address{3}};
    CHECK_THROWS_AS(rs.add_rule(r), defense::InvalidRule);
}

TEST_CASE("signature detection") {
    defense::Signature sig{"brute", "login-fail", 5, 50, defense::AlertClass::UnauthorizedAccess, "login-success"};
    SUBCASE("five failures then a success") {
        std::vector<defense::IdsEvent> s;
        for (int i = 0; i < 5; ++i) s.push_back(ev(10 + i * 3, "login-fail"));
        s.push_back(ev(40, "login-success"));
        auto a = defense::detect_signature(sig, s, 7);
        REQUIRE(a);
        CHECK(a->cls == defense::AlertClass::UnauthorizedAccess);
        CHECK(a->tick == 40);
        CHECK(a->evidence.size() == 6);
        CHECK(a->victim == 7);
    }
    SUBCASE("four failures") {
        std::vector<defense::IdsEvent> s;
        for (int i = 0; i < 4; ++i) s.push_back(ev(10 + i, "login-fail"));
        s.push_back(ev(20, "login-success"));
        CHECK_FALSE(defense::detect_signature(sig, s, 7));
    }
    SUBCASE("spread beyond the window") {
        std::vector<defense::IdsEvent> s;
        for (int i = 0; i < 5; ++i) s.push_back(ev(i * 20, "login-fail"));
        s.push_back(ev(100, "login-success"));
        CHECK_FALSE(defense::detect_signature(sig, s, 7));
    }
    SUBCASE("plain threshold signature") {
        defense::Signature flood{"flood", "flood*", 3, 2, defense::AlertClass::DoSFlood, std::nullopt};
        std::vector<defense::IdsEvent> s{ev(0, "flood"), ev(1, "flood-x"), ev(1, "flood")};
        auto a = defense::detect_signature(flood, s, 1);
        REQUIRE(a);
        CHECK(a->cls == defense::AlertClass::DoSFlood);
    }
    SUBCASE("validation") {
        defense::Signature bad = sig;
        bad.threshold = 0;
        CHECK_THROWS_AS(bad.validate(), defense::InvalidSignature);
        bad = sig;
        bad.window = 0;
        CHECK_THROWS_AS(bad.validate(), defense::InvalidSignature);
    }
}

TEST_CASE("anomaly detection") {
    defense::AnomalyModel m;
    std::vector<defense::IdsEvent> tick_packets;
    SUBCASE("cold start") {
        for (int t = 0; t < 5; ++t) m.update(5);
        CHECK_THROWS_AS(m.is_anomalous(5), defense::ColdStart);
        CHECK_THROWS_AS(defense::detect_anomaly(m, 5, tick_packets, 1), defense::ColdStart);
    }
    SUBCASE("constant baseline, then a jump") {
        for (int t = 0; t < 20; ++t) m.update(5);
        // Constant prefix: mean 5, deviation 0.
        CHECK(m.mean() == doctest::Approx(5.0));
        CHECK(m.deviation() == doctest::Approx(0.0));
        for (int i = 0; i < 5; ++i) tick_packets.push_back(ev(20, "app-data"));
        CHECK_FALSE(defense::detect_anomaly(m, 20, tick_packets, 1));
        tick_packets.clear();
        for (int i = 0; i < 50; ++i) tick_packets.push_back(ev(21, "flood"));
        auto a = defense::detect_anomaly(m, 21, tick_packets, 1);
        REQUIRE(a);
        CHECK(a->cls == defense::AlertClass::DoSFlood);
        CHECK(a->tick == 21);
        CHECK(a->evidence.size() == 50);
    }
    SUBCASE("ewma by hand") {
        defense::AnomalyModel h({0.5, 3.0, 1, 0.0});
        h.update(4);  // mean 4, var 0
        h.update(8);  // diff 4 -> mean 6, var 0.5 * (0 + 4*0.5*4) = 4
        CHECK(h.mean() == doctest::Approx(6.0));
        CHECK(h.deviation() == doctest::Approx(2.0));
        CHECK(h.is_anomalous(12.5));
        CHECK_FALSE(h.is_anomalous(12.0));
    }
    SUBCASE("floor") {
        defense::AnomalyModel low;
        for (int t = 0; t < 20; ++t) low.update(1);
        CHECK_FALSE(low.is_anomalous(9));
        CHECK(low.is_anomalous(11));
    }
}

TEST_CASE("correlate") {
    auto records = [](std::size_t n, std::uint64_t base) {
        std::vector<defense::ConnectionRecord> r;
        for (std::size_t i = 0; i < n; ++i) r.push_back({i, base + i});
        return r;
    };
    auto in = records(7, 100), out = records(5, 200);
    auto r = defense::correlate(in, out);
    CHECK(r.comparisons == 35);
    CHECK(r.recordings == 12);
    CHECK(r.pairs.empty());

    CHECK(defense::correlate({}, out).comparisons == 0);
    out[3].digest = in[2].digest;
    r = defense::correlate(in, out);
    REQUIRE(r.pairs.size() == 1);
    CHECK(r.pairs[0] == std::pair<std::uint64_t, std::uint64_t>{2, 3});

    for (std::size_t m = 0; m <= 50; ++m)
        for (std::size_t n = 0; n <= 50; ++n) {
            auto c = defense::correlate(records(m, 0), records(n, 1000));
            CHECK(c.comparisons == m * n);
            CHECK(c.recordings == m + n);
        }

    std::vector<std::string> a{"x", "y", "y"}, b{"y", "x", "y"}, c{"x", "y"};
    CHECK(defense::content_digest(a) == defense::content_digest(b));
    CHECK(defense::content_digest(a) != defense::content_digest(c));
}

namespace {

// Private network 192.168.0.0/16 behind border router FW. The insider I and
// victim V sit behind the internal router RI. A backdoor link joins the
// outside router RX to RI2, which reaches only the lab host L.
net::Topology enterprise() {
    fixtures::TopoBuilder b;
    b.router("RX", "20.0.0.1");
    b.node("FW", net::NodeKind::Router, "192.168.0.1", std::string("192.168.0.0/16"));
    b.router("RI", "192.168.0.2").router("RI2", "192.168.0.3");
    b.link("RX", "FW").link("FW", "RI").link("RI", "RI2").link("RX", "RI2");
    b.stub("E", net::NodeKind::Attacker, "30.0.0", "RX");
    b.stub("V", net::NodeKind::Victim, "192.168.1", "RI");
    b.stub("I", net::NodeKind::Host, "192.168.2", "RI");
    b.stub("L", net::NodeKind::Host, "192.168.3", "RI2");
    return b.build();
}

net::Packet packet(const net::Topology& t, const char* from, const char* to, std::uint16_t port, std::string tag) {
    net::PacketHeader h;
    h.src = t.node(t.require(from)).addr;
    h.dst = t.node(t.require(to)).addr;
    h.port = port;
    h.payload_tag = std::move(tag);
    return net::Packet(h, {h.src, std::nullopt});
}

defense::FirewallRule deny_inbound_all() {
    defense::FirewallRule r;
    r.action = Verdict::Deny;
    r.dst = *net::AddressRange::parse("192.168.0.0/16");
    r.direction = defense::Direction::Inbound;
    r.priority = 100;
    return r;
}

}  // namespace

TEST_CASE("firewall limitations") {
    auto t = enterprise();
    defense::RuleSet rs;
    defense::FirewallHook fw(rs, {t.require("FW")});
    net::Network network(t, 1);
    network.add_hook(fw);

    SUBCASE("outside traffic to the victim is filtered at the border") {
        rs.add_rule(deny_inbound_all());
        auto c = network.forward(packet(t, "E", "V", 80, "app-data"), t.require("E"));
        CHECK(c.outcome.kind == net::OutcomeKind::DroppedByFilter);
        CHECK(c.outcome.at == t.require("FW"));
    }
    SUBCASE("an insider never crosses the border yet trips the IDS") {
        rs.add_rule(deny_inbound_all());
        defense::AnomalyDetector ids({}, t.require("V"));
        std::optional<defense::Alert> alert;
        for (net::Tick tick = 0; tick < 60 && !alert; ++tick) {
            const int rate = tick < 30 ? 3 : 40;
            std::vector<defense::IdsEvent> seen;
            for (int k = 0; k < rate; ++k) {
                auto c = network.forward(packet(t, "I", "V", 80, tick < 30 ? "app-data" : "flood"), t.require("I"),
                                         tick);
                REQUIRE(c.outcome.delivered());
                seen.push_back({tick, c.packet.header()});
            }
            alert = ids.observe(tick, seen);
        }
        REQUIRE(alert);
        CHECK(alert->cls == defense::AlertClass::DoSFlood);
        CHECK(fw.evaluations() == 0);
    }
    SUBCASE("a path around the firewall is never filtered") {
        rs.add_rule(deny_inbound_all());
        auto route = t.route(t.require("E"), t.require("L"));
        CHECK(std::find(route.begin(), route.end(), t.require("FW")) == route.end());
        auto c = network.forward(packet(t, "E", "L", 80, "app-data"), t.require("E"));
        CHECK(c.outcome.delivered());
        CHECK(fw.evaluations() == 0);
    }
    SUBCASE("a virus over allowed FTP passes") {
        defense::FirewallRule telnet = deny_inbound_all();
        telnet.port = 23;
        rs.add_rule(telnet);
        auto c = network.forward(packet(t, "E", "V", 21, "virus"), t.require("E"));
        CHECK(c.outcome.delivered());
        CHECK(c.packet.header().payload_tag == "virus");
        CHECK(fw.evaluations() == 1);
        CHECK(network.forward(packet(t, "E", "V", 23, "app-data"), t.require("E")).outcome.kind ==
              net::OutcomeKind::DroppedByFilter);
    }
    network.remove_hook(fw);
}
