#include "activetrace/sim/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include <json.hpp>

namespace activetrace::sim {

using json = nlohmann::ordered_json;

ParseError::ParseError(std::size_t line, const std::string& what)
    : Error(fmt::format("line {}: {}", line, what)), line_(line) {}

std::string_view to_string(SpoofMode m) {
    switch (m) {
        case SpoofMode::None: return "none";
        case SpoofMode::Random: return "random";
        case SpoofMode::Pool: return "pool";
        case SpoofMode::InPrefix: return "in-prefix";
    }
    return "?";
}

bool DoSFlooderSpec::active(net::Tick t) const {
    for (const auto& w : waves) {
        if (!w.contains(t)) continue;
        if (!duty) return true;
        const auto period = duty->on + duty->off;
        return (t - w.start) % period < duty->on;
    }
    return false;
}

arm::ActionKind parse_action(std::string_view text) {
    using arm::ActionKind;
    for (auto k : {ActionKind::Warn, ActionKind::BlockTraffic, ActionKind::ReconfigureFirewall, ActionKind::ClosePort,
                   ActionKind::IsolateHost, ActionKind::RemoteMonitor, ActionKind::ChangePermissions,
                   ActionKind::CounterStrike})
        if (arm::to_string(k) == text) return k;
    throw ValidationError(fmt::format("unknown response action '{}'", text));
}

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ValidationError(path.empty() ? what : fmt::format("{}: {}", path, what));
}

std::uint64_t as_uint(const json& j, const std::string& path) {
    if (!j.is_number_unsigned()) fail(path, "expected a non-negative integer");
    return j.get<std::uint64_t>();
}

double as_double(const json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    return j.get<double>();
}

std::string as_string(const json& j, const std::string& path) {
    if (!j.is_string()) fail(path, "expected a string");
    return j.get<std::string>();
}

bool as_bool(const json& j, const std::string& path) {
    if (!j.is_boolean()) fail(path, "expected true or false");
    return j.get<bool>();
}

const json& as_array(const json& j, const std::string& path) {
    if (!j.is_array()) fail(path, "expected an array");
    return j;
}

std::vector<std::string> as_strings(const json& j, const std::string& path) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < as_array(j, path).size(); ++i)
        out.push_back(as_string(j[i], fmt::format("{}[{}]", path, i)));
    return out;
}

net::Address as_address(const json& j, const std::string& path) {
    auto a = net::Address::parse(as_string(j, path));
    if (!a) fail(path, "not a dotted-quad address");
    return *a;
}

net::AddressRange as_range(const json& j, const std::string& path) {
    auto r = net::AddressRange::parse(as_string(j, path));
    if (!r) fail(path, "not an address range");
    return *r;
}

/// Object reader that rejects keys nobody asked for.
class Obj {
public:
    Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail(path_, "expected an object");
    }

    const json* get(const std::string& key) {
        seen_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() || it->is_null() ? nullptr : &*it;
    }
    const json& req(const std::string& key) {
        auto* v = get(key);
        if (!v) fail(path_, fmt::format("missing '{}'", key));
        return *v;
    }
    std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    std::uint64_t uint(const std::string& key) { return as_uint(req(key), at(key)); }
    std::uint64_t uint(const std::string& key, std::uint64_t dflt) {
        auto* v = get(key);
        return v ? as_uint(*v, at(key)) : dflt;
    }
    std::optional<std::uint64_t> maybe_uint(const std::string& key) {
        auto* v = get(key);
        return v ? std::optional(as_uint(*v, at(key))) : std::nullopt;
    }
    double number(const std::string& key, double dflt) {
        auto* v = get(key);
        return v ? as_double(*v, at(key)) : dflt;
    }
    std::string str(const std::string& key) { return as_string(req(key), at(key)); }
    std::string str(const std::string& key, std::string dflt) {
        auto* v = get(key);
        return v ? as_string(*v, at(key)) : dflt;
    }
    bool flag(const std::string& key, bool dflt) {
        auto* v = get(key);
        return v ? as_bool(*v, at(key)) : dflt;
    }
    std::vector<std::string> strings(const std::string& key) {
        auto* v = get(key);
        return v ? as_strings(*v, at(key)) : std::vector<std::string>{};
    }

    void done() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.contains(it.key())) fail(path_, fmt::format("unknown key '{}'", it.key()));
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

template <class F>
void each(Obj& parent, const std::string& key, F&& f) {
    auto* v = parent.get(key);
    if (!v) return;
    const auto path = parent.at(key);
    as_array(*v, path);
    for (std::size_t i = 0; i < v->size(); ++i) {
        Obj o((*v)[i], fmt::format("{}[{}]", path, i));
        f(o);
        o.done();
    }
}

std::uint16_t as_port(std::uint64_t v, const std::string& path) {
    if (v > 65535) fail(path, "port out of range");
    return static_cast<std::uint16_t>(v);
}

Wave read_wave(Obj& o) {
    Wave w;
    w.start = o.uint("start", 0);
    w.stop = o.maybe_uint("stop");
    if (w.stop && *w.stop <= w.start) fail(o.at("stop"), "must be after start");
    return w;
}

SpoofMode parse_spoof(const std::string& s, const std::string& path) {
    for (auto m : {SpoofMode::None, SpoofMode::Random, SpoofMode::Pool, SpoofMode::InPrefix})
        if (to_string(m) == s) return m;
    fail(path, fmt::format("unknown spoof mode '{}'", s));
}

void read_topology(Obj& o, net::TopologySpec& spec) {
    each(o, "nodes", [&](Obj& n) {
        net::TopologySpec::NodeSpec ns;
        ns.name = n.str("name");
        auto kind = net::parse_node_kind(n.str("kind"));
        if (!kind) fail(n.at("kind"), "expected host, router, guardian, attacker or victim");
        ns.kind = *kind;
        ns.addr = as_address(n.req("addr"), n.at("addr"));
        if (auto* p = n.get("prefix")) ns.valid_prefix = as_range(*p, n.at("prefix"));
        spec.nodes.push_back(std::move(ns));
    });
    each(o, "links", [&](Obj& l) {
        net::TopologySpec::LinkSpec ls;
        ls.a = l.str("a");
        ls.b = l.str("b");
        const auto cap = l.uint("capacity", 1000);
        if (cap == 0 || cap > 0xffffffffu) fail(l.at("capacity"), "must be between 1 and 2^32-1");
        ls.capacity = static_cast<std::uint32_t>(cap);
        spec.links.push_back(std::move(ls));
    });
    if (spec.nodes.empty()) fail(o.at("nodes"), "topology has no nodes");
}

swt::KeystrokeScript read_script(Obj& o) {
    swt::KeystrokeScript s;
    s.start = o.uint("start", 0);
    s.interval = o.uint("interval", s.interval);
    if (s.interval == 0) fail(o.at("interval"), "must be positive");
    if (o.get("tags")) s.tags = o.strings("tags");
    if (s.tags.empty()) fail(o.at("tags"), "script needs at least one tag");
    s.repeat_last = o.flag("repeat_last", true);
    s.stop = o.maybe_uint("stop");
    return s;
}

void read_attackers(Obj& root, Scenario& s) {
    each(root, "attackers", [&](Obj& a) {
        const auto type = a.str("type");
        const auto name = a.str("name");
        if (type == "dos") {
            DoSFlooderSpec f;
            f.name = name;
            f.node = a.str("node");
            f.victim = a.str("victim");
            f.rate = a.uint("rate", f.rate);
            f.spoof = parse_spoof(a.str("spoof", "random"), a.at("spoof"));
            f.pool_size = a.uint("pool_size", f.pool_size);
            if (f.pool_size == 0) fail(a.at("pool_size"), "must be positive");
            if (a.get("waves")) {
                f.waves.clear();
                each(a, "waves", [&](Obj& w) { f.waves.push_back(read_wave(w)); });
            }
            if (auto* d = a.get("duty")) {
                Obj dc(*d, a.at("duty"));
                f.duty = DutyCycle{dc.uint("on"), dc.uint("off")};
                dc.done();
                if (f.duty->on == 0) fail(a.at("duty.on"), "must be positive");
            }
            f.tag = a.str("tag", f.tag);
            f.port = as_port(a.uint("port", f.port), a.at("port"));
            s.floods.push_back(std::move(f));
        } else if (type == "stepping-stone") {
            SteppingStoneSpec c;
            c.name = name;
            c.chain = a.strings("chain");
            if (auto* e = a.get("encrypted")) {
                as_array(*e, a.at("encrypted"));
                for (std::size_t i = 0; i < e->size(); ++i) {
                    auto pair = as_strings((*e)[i], fmt::format("{}[{}]", a.at("encrypted"), i));
                    if (pair.size() != 2) fail(a.at("encrypted"), "each entry is a [from, to] pair");
                    c.encrypted.emplace_back(pair[0], pair[1]);
                }
            }
            if (auto* sc = a.get("script")) {
                Obj so(*sc, a.at("script"));
                c.script = read_script(so);
                so.done();
            }
            s.chains.push_back(std::move(c));
        } else {
            fail(a.at("type"), fmt::format("unknown attacker type '{}' (dos or stepping-stone)", type));
        }
    });
}

void read_benign(Obj& root, Scenario& s) {
    each(root, "benign", [&](Obj& b) {
        BenignSpec c;
        c.name = b.str("name");
        c.node = b.str("node");
        c.dst = b.str("dst");
        c.rate = b.uint("rate", c.rate);
        c.every = b.uint("every", c.every);
        if (c.every == 0) fail(b.at("every"), "must be positive");
        c.wave = read_wave(b);
        c.tag = b.str("tag", c.tag);
        c.port = as_port(b.uint("port", c.port), b.at("port"));
        s.benign.push_back(std::move(c));
    });
}

void read_defense(Obj& root, Scenario& s) {
    auto* d = root.get("defense");
    if (!d) return;
    Obj o(*d, "defense");

    if (auto* f = o.get("firewall")) {
        Obj fo(*f, "defense.firewall");
        auto dflt = defense::parse_verdict(fo.str("default", "allow"));
        if (!dflt) fail(fo.at("default"), "expected allow or deny");
        s.firewall.default_action = *dflt;
        s.firewall.borders = fo.strings("borders");
        each(fo, "rules", [&](Obj& r) {
            defense::FirewallRule rule;
            auto v = defense::parse_verdict(r.str("action"));
            if (!v) fail(r.at("action"), "expected allow or deny");
            rule.action = *v;
            if (auto* src = r.get("src")) rule.src = as_range(*src, r.at("src"));
            if (auto* dst = r.get("dst")) rule.dst = as_range(*dst, r.at("dst"));
            if (auto port = r.maybe_uint("port")) rule.port = as_port(*port, r.at("port"));
            auto dir = defense::parse_direction(r.str("direction", "both"));
            if (!dir) fail(r.at("direction"), "expected inbound, outbound or both");
            rule.direction = *dir;
            auto* prio = r.get("priority");
            if (!prio || !prio->is_number_integer()) fail(r.at("priority"), "expected an integer");
            rule.priority = prio->get<std::int32_t>();
            s.firewall.rules.push_back(rule);
        });
        fo.done();
    }

    if (auto* ids = o.get("ids")) {
        Obj io(*ids, "defense.ids");
        s.ids.hosts = io.strings("hosts");
        each(io, "signatures", [&](Obj& g) {
            defense::Signature sig;
            sig.id = g.str("id");
            sig.pattern = g.str("pattern");
            const auto threshold = g.uint("threshold", 1);
            if (threshold > 0xffffffffu) fail(g.at("threshold"), "too large");
            sig.threshold = static_cast<std::uint32_t>(threshold);
            sig.window = g.uint("window", 1);
            auto cls = defense::parse_alert_class(g.str("class", "UnauthorizedAccess"));
            if (!cls) fail(g.at("class"), "expected DoSFlood or UnauthorizedAccess");
            sig.cls = *cls;
            if (auto* then = g.get("then")) sig.then = as_string(*then, g.at("then"));
            try {
                sig.validate();
            } catch (const Error& e) {
                fail(g.at("id"), e.what());
            }
            s.ids.signatures.push_back(std::move(sig));
        });
        if (auto* an = io.get("anomaly")) {
            Obj ao(*an, "defense.ids.anomaly");
            defense::AnomalyParams p;
            p.alpha = ao.number("alpha", p.alpha);
            p.k = ao.number("k", p.k);
            const auto warmup = ao.uint("warmup", p.warmup);
            if (warmup > 0xffffffffu) fail(ao.at("warmup"), "too large");
            p.warmup = static_cast<std::uint32_t>(warmup);
            p.floor = ao.number("floor", p.floor);
            if (!(p.alpha > 0 && p.alpha <= 1)) fail(ao.at("alpha"), "must be in (0, 1]");
            ao.done();
            s.ids.anomaly = p;
        }
        io.done();
    }

    if (auto* m = o.get("marking")) {
        Obj mo(*m, "defense.marking");
        MarkingSpec ms;
        ms.p = mo.number("p", ms.p);
        if (!(ms.p > 0 && ms.p <= 1)) fail(mo.at("p"), "must be in (0, 1]");
        ms.routers = mo.strings("routers");
        mo.done();
        s.marking = ms;
    }

    s.untrusted_guardians = o.strings("untrusted_guardians");
    if (o.get("logging_routers")) s.logging_routers = o.strings("logging_routers");

    if (auto* in = o.get("ingress")) {
        Obj io(*in, "defense.ingress");
        s.ingress.enforce = io.flag("enforce", false);
        each(io, "prefixes", [&](Obj& p) {
            s.ingress.prefixes.emplace_back(p.str("router"), as_range(p.req("prefix"), p.at("prefix")));
        });
        io.done();
    }
    o.done();
}

void read_policy(Obj& root, Scenario& s) {
    if (!root.get("policy")) return;
    s.policy.tiers.clear();
    each(root, "policy", [&](Obj& t) {
        arm::PolicyTier tier;
        tier.min_offense = t.uint("min_offense");
        for (const auto& a : t.strings("actions")) tier.actions.push_back(parse_action(a));
        s.policy.tiers.push_back(std::move(tier));
    });
    try {
        s.policy.validate();
    } catch (const Error& e) {
        fail("policy", e.what());
    }
}

void read_trace(Obj& root, Scenario& s) {
    auto* t = root.get("trace");
    if (!t) return;
    Obj o(*t, "trace");
    s.trace.budget = o.uint("budget", s.trace.budget);
    s.trace.ppm.stability_window = o.uint("stability_window", s.trace.ppm.stability_window);
    s.trace.swt.relay_window = o.uint("relay_window", s.trace.swt.relay_window);
    s.trace.swt.patience = o.uint("patience", s.trace.swt.patience);
    o.done();
}

void read_compare(Obj& root, Scenario& s) {
    auto* c = root.get("compare");
    if (!c) return;
    Obj o(*c, "compare");
    s.compare.trace_at = o.maybe_uint("trace_at");
    s.compare.flood.budget = o.uint("flood_budget", s.compare.flood.budget);
    s.compare.flood.probe_ticks = o.uint("probe_ticks", s.compare.flood.probe_ticks);
    if (s.compare.flood.probe_ticks == 0) fail(o.at("probe_ticks"), "must be positive");
    s.compare.flood.margin = o.number("margin", s.compare.flood.margin);
    s.compare.input.window = o.uint("window", s.compare.input.window);
    if (s.compare.input.window == 0) fail(o.at("window"), "must be positive");
    o.done();
}

std::size_t line_of(std::string_view text, std::size_t byte) {
    byte = std::min(byte, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

}  // namespace

Scenario parse_scenario(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        // Byte offsets point one past the offending character.
        throw ParseError(line_of(text, e.byte == 0 ? 0 : e.byte - 1), e.what());
    }

    Scenario s;
    Obj root(doc, "");
    s.name = root.str("name", "scenario");
    if (!root.get("seed")) throw ValidationError("missing 'seed': every scenario must pin its random seed");
    s.seed = root.uint("seed");
    s.duration = root.uint("duration");
    if (s.duration == 0) fail("duration", "must be positive");
    {
        Obj topo(root.req("topology"), "topology");
        read_topology(topo, s.topology);
        topo.done();
    }
    read_attackers(root, s);
    read_benign(root, s);
    read_defense(root, s);
    read_policy(root, s);
    read_trace(root, s);
    read_compare(root, s);
    root.done();
    s.source = doc.dump();
    validate(s);
    return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(fmt::format("cannot read scenario '{}'", path.string()));
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

void validate(const Scenario& s) {
    net::Topology t;
    try {
        t = net::Topology::build(s.topology);
    } catch (const Error& e) {
        throw ValidationError(fmt::format("topology: {}", e.what()));
    }
    auto node = [&](const std::string& name, const std::string& where) -> const net::Node& {
        auto id = t.find(name);
        if (!id) throw ValidationError(fmt::format("{}: unknown node '{}'", where, name));
        return t.node(*id);
    };
    auto end_host = [&](const std::string& name, const std::string& where) -> const net::Node& {
        const auto& n = node(name, where);
        if (!net::is_end_host(n.kind)) throw ValidationError(fmt::format("{}: '{}' is not an end host", where, name));
        return n;
    };

    std::set<std::string> names;
    auto unique = [&](const std::string& name, const std::string& where) {
        if (!names.insert(name).second) throw ValidationError(fmt::format("{}: duplicate name '{}'", where, name));
    };

    for (std::size_t i = 0; i < s.floods.size(); ++i) {
        const auto& f = s.floods[i];
        const auto where = fmt::format("attackers '{}'", f.name);
        unique(f.name, where);
        end_host(f.node, where);
        end_host(f.victim, where);
        if (f.node == f.victim) throw ValidationError(where + ": attacker and victim are the same node");
        if (f.spoof == SpoofMode::InPrefix) {
            const auto& n = node(f.node, where);
            auto g = t.guardian_of(n.id);
            if (!n.valid_prefix && !(g && t.node(*g).valid_prefix))
                throw ValidationError(where + ": in-prefix spoofing needs a valid prefix on the host or its guardian");
        }
        if (f.waves.empty()) throw ValidationError(where + ": no waves");
    }
    for (const auto& c : s.chains) {
        const auto where = fmt::format("attackers '{}'", c.name);
        unique(c.name, where);
        if (c.chain.size() < 2) throw ValidationError(where + ": a chain needs at least two hosts");
        std::vector<net::NodeId> hosts;
        for (const auto& h : c.chain) hosts.push_back(end_host(h, where).id);
        std::set<std::pair<net::NodeId, net::NodeId>> enc;
        for (const auto& [a, b] : c.encrypted) enc.emplace(node(a, where).id, node(b, where).id);
        try {
            (void)swt::open_chain(t, hosts, enc);
        } catch (const Error& e) {
            throw ValidationError(fmt::format("{}: {}", where, e.what()));
        }
    }
    for (const auto& b : s.benign) {
        const auto where = fmt::format("benign '{}'", b.name);
        unique(b.name, where);
        end_host(b.node, where);
        end_host(b.dst, where);
    }
    for (const auto& b : s.firewall.borders) node(b, "defense.firewall.borders");
    {
        defense::RuleSet rs(s.firewall.default_action);
        for (const auto& r : s.firewall.rules) {
            try {
                rs.add_rule(r);
            } catch (const Error& e) {
                throw ValidationError(fmt::format("defense.firewall.rules: {}", e.what()));
            }
        }
    }
    for (const auto& h : s.ids.hosts) end_host(h, "defense.ids.hosts");
    if (s.marking)
        for (const auto& r : s.marking->routers)
            if (!net::is_forwarding(node(r, "defense.marking.routers").kind))
                throw ValidationError(fmt::format("defense.marking.routers: '{}' does not forward", r));
    for (const auto& g : s.untrusted_guardians)
        if (node(g, "defense.untrusted_guardians").kind != net::NodeKind::GuardianGateway)
            throw ValidationError(fmt::format("defense.untrusted_guardians: '{}' is not a guardian gateway", g));
    if (s.logging_routers)
        for (const auto& r : *s.logging_routers)
            if (!net::is_forwarding(node(r, "defense.logging_routers").kind))
                throw ValidationError(fmt::format("defense.logging_routers: '{}' does not forward", r));
    for (const auto& [r, range] : s.ingress.prefixes) {
        if (!net::is_forwarding(node(r, "defense.ingress.prefixes").kind))
            throw ValidationError(fmt::format("defense.ingress.prefixes: '{}' does not forward", r));
        if (!range.well_formed()) throw ValidationError("defense.ingress.prefixes: malformed range");
    }
}

}  // namespace activetrace::sim
