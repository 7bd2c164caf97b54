#include "activetrace/sim/report.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>

#include <json.hpp>

namespace activetrace::sim {

using json = nlohmann::ordered_json;

void OracleLedger::observe(const net::Completion& c, bool monitored_delivery) {
    const auto& truth = net::OracleAccess::truth(c.packet);
    outcomes_[truth.chain_origin.value_or(truth.true_origin)].push_back({c.injected, c.outcome.kind});
    if (monitored_delivery) delivered_.emplace(c.packet.header().id, truth);
}

const net::OriginTruth* OracleLedger::truth(std::uint64_t packet_id) const {
    auto it = delivered_.find(packet_id);
    return it == delivered_.end() ? nullptr : &it->second;
}

void judge(RunReport& report, const Scenario& s, const net::Topology&, const OracleLedger& ledger) {
    // The run may have detached hosts; judge against the topology as declared.
    const auto t = net::Topology::build(s.topology);

    std::vector<AttackVerdict> verdicts;
    std::map<net::Address, net::Address> expected_for;  // ledger key -> correct answer
    for (const auto& f : s.floods) {
        const auto n = t.require(f.node);
        AttackVerdict v;
        v.name = f.name;
        v.kind = "dos";
        v.true_origin = t.node(n).addr;
        v.expected = t.node(*t.guardian_of(n)).addr;
        expected_for[v.true_origin] = v.expected;
        verdicts.push_back(std::move(v));
    }
    for (const auto& c : s.chains) {
        AttackVerdict v;
        v.name = c.name;
        v.kind = "stepping-stone";
        v.true_origin = t.node(t.require(c.chain.front())).addr;
        v.expected = v.true_origin;
        expected_for[v.true_origin] = v.expected;
        verdicts.push_back(std::move(v));
    }

    // Attacks present in each trace's evidence, by ledger key.
    std::vector<std::set<net::Address>> present(report.traces.size());
    for (std::size_t i = 0; i < report.traces.size() && i < report.alerts.size(); ++i)
        for (const auto& e : report.alerts[i].evidence) {
            const auto* truth = ledger.truth(e.header.id);
            if (!truth) continue;
            const auto key = truth->chain_origin.value_or(truth->true_origin);
            if (expected_for.contains(key)) present[i].insert(key);
        }

    for (auto& v : verdicts) {
        bool all_correct = true;
        for (std::size_t i = 0; i < report.traces.size(); ++i) {
            if (!present[i].contains(v.true_origin)) continue;
            const auto& rec = report.traces[i];
            ++v.traces;
            for (const auto& e : rec.effects.entries)
                if (e.rule_id && (!v.blocked_at || rec.result.finished < *v.blocked_at)) v.blocked_at = rec.result.finished;
            if (rec.result.status != arm::TraceStatus::Resolved) continue;
            v.found = true;
            std::set<net::Address> want;
            for (auto k : present[i]) want.insert(expected_for.at(k));
            const std::set<net::Address> got(rec.result.origins.begin(), rec.result.origins.end());
            if (!got.contains(v.expected) || !std::includes(want.begin(), want.end(), got.begin(), got.end()))
                all_correct = false;
        }
        if (v.found) v.correct = all_correct;

        auto it = ledger.outcomes().find(v.true_origin);
        if (it == ledger.outcomes().end()) continue;
        for (const auto& o : it->second) {
            ++v.packets;
            const bool after = v.blocked_at && o.injected > *v.blocked_at;
            if (o.kind == net::OutcomeKind::Delivered) {
                ++v.delivered;
                if (after) ++v.delivered_after_block;
            } else if (o.kind == net::OutcomeKind::DroppedByFilter) {
                ++v.denied;
                if (after) ++v.denied_after_block;
            }
        }
    }
    report.verdicts = std::move(verdicts);
}

std::optional<ReportFormat> parse_format(std::string_view text) {
    if (text == "text") return ReportFormat::Text;
    if (text == "machine") return ReportFormat::Machine;
    return std::nullopt;
}

namespace {

std::string name_of(const RunReport& r, net::Address a) {
    auto it = r.names.find(a);
    return it == r.names.end() ? a.to_string() : it->second;
}

std::string names_of(const RunReport& r, const std::vector<net::Address>& as, std::size_t limit = 6) {
    std::string out;
    for (std::size_t i = 0; i < as.size() && i < limit; ++i) out += (i ? "," : "") + name_of(r, as[i]);
    if (as.size() > limit) out += fmt::format(",+{}", as.size() - limit);
    return out.empty() ? "-" : out;
}

std::string node_name(const RunReport& r, net::NodeId n) {
    return n < r.node_names.size() ? r.node_names[n] : fmt::format("#{}", n);
}

std::vector<net::Address> sources(const defense::Alert& a) {
    std::vector<net::Address> out;
    for (const auto& e : a.evidence)
        if (std::find(out.begin(), out.end(), e.header.src) == out.end()) out.push_back(e.header.src);
    return out;
}

/// Left-aligned columns, two spaces apart, indented two.
class Table {
public:
    explicit Table(std::vector<std::string> header) { rows_.push_back(std::move(header)); }
    void add(std::vector<std::string> row) { rows_.push_back(std::move(row)); }

    std::string render() const {
        std::vector<std::size_t> width(rows_.front().size(), 0);
        for (const auto& r : rows_)
            for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
        std::string out;
        for (const auto& r : rows_) {
            std::string line = " ";
            for (std::size_t i = 0; i < r.size(); ++i)
                line += " " + (i + 1 == r.size() ? r[i] : fmt::format("{:<{}}", r[i], width[i]) + " ");
            while (!line.empty() && line.back() == ' ') line.pop_back();
            out += line + "\n";
        }
        return out;
    }

private:
    std::vector<std::vector<std::string>> rows_;
};

std::string yes_no(bool b) { return b ? "yes" : "no"; }

std::vector<std::pair<std::string, std::uint64_t>> counter_list(const Counters& c) {
    return {{"ticks", c.ticks},
            {"packets_emitted", c.packets_emitted},
            {"delivered", c.delivered},
            {"dropped_by_filter", c.dropped_by_filter},
            {"dropped_by_load", c.dropped_by_load},
            {"ttl_expired", c.ttl_expired},
            {"unroutable", c.unroutable},
            {"firewall_evaluations", c.firewall_evaluations},
            {"firewall_denied", c.firewall_denied},
            {"ingress_denied", c.ingress_denied},
            {"ids_events", c.ids_events},
            {"alerts_raised", c.alerts_raised},
            {"alerts_suppressed", c.alerts_suppressed},
            {"marking_work", c.marking_work},
            {"traces_run", c.traces_run},
            {"ppm_samples_consumed", c.ppm_samples_consumed},
            {"swt_inspections", c.swt_inspections},
            {"gateway_inspections", c.gateway_inspections},
            {"inspections_before_first_trace", c.inspections_before_first_trace},
            {"rules_added", c.rules_added},
            {"hosts_isolated", c.hosts_isolated}};
}

json replay_record(const RunReport& r) {
    json j;
    j["scenario"] = json::parse(r.source);
    j["seed"] = r.seed;
    j["db"] = r.db_before;
    return j;
}

std::vector<std::string> db_lines(const std::string& image) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos < image.size()) {
        auto nl = image.find('\n', pos);
        if (nl == std::string::npos) nl = image.size();
        if (nl > pos) out.push_back(image.substr(pos, nl - pos));
        pos = nl + 1;
    }
    return out;
}

}  // namespace

std::string render_text(const RunReport& r) {
    std::string out = fmt::format("run report: {} (seed {}, {} ticks)\n", r.scenario, r.seed, r.duration);

    out += fmt::format("\nalerts ({})\n", r.alerts.size());
    if (!r.alerts.empty()) {
        Table t({"id", "tick", "class", "victim", "detector", "evidence", "sources"});
        for (const auto& a : r.alerts) {
            const auto src = sources(a);
            t.add({std::to_string(a.id), std::to_string(a.tick), std::string(defense::to_string(a.cls)),
                   node_name(r, a.victim), a.detector,
                   std::to_string(a.evidence.size()),
                   fmt::format("{} distinct: {}", src.size(), names_of(r, src, 3))});
        }
        out += t.render();
    }

    out += fmt::format("\ntraces ({})\n", r.traces.size());
    if (!r.traces.empty()) {
        Table t({"alert", "tracer", "status", "origins", "consumed", "ticks", "candidates", "note"});
        for (const auto& rec : r.traces) {
            const auto& x = rec.result;
            std::string note = x.reason;
            if (x.resolved_by_candidate) note = "confirmed a prior origin";
            if (x.farthest) note = fmt::format("reached {}; {}", name_of(r, *x.farthest), x.reason);
            t.add({std::to_string(x.alert_id), std::string(arm::to_string(x.strategy)),
                   std::string(arm::to_string(x.status)), names_of(r, x.origins), std::to_string(x.consumed),
                   fmt::format("{}-{}", x.started, x.finished), names_of(r, x.candidates), note.empty() ? "-" : note});
        }
        out += t.render();
        for (const auto& rec : r.traces) {
            const auto& x = rec.result;
            if (x.graph)
                for (const auto& p : x.graph->paths) {
                    std::string line;
                    for (auto a : p) line += name_of(r, a) + " > ";
                    out += fmt::format("  alert {} path: {}{}\n", x.alert_id, line, name_of(r, x.graph->root));
                }
            if (x.transcript) {
                out += fmt::format("  alert {} watermark {} ({})\n", x.alert_id, x.transcript->token,
                                   x.transcript->session_status);
                for (const auto& w : x.transcript->awakenings)
                    out += fmt::format("    t={} woke {} (guardian of {}): {}\n", w.tick, node_name(r, w.gateway),
                                       node_name(r, w.host), w.reason);
                for (const auto& s : x.transcript->sightings)
                    out += fmt::format("    t={} {} saw the watermark {} {}{}\n", s.tick, node_name(r, s.gateway),
                                       s.upstream ? "leave" : "enter", node_name(r, s.host),
                                       s.upstream ? " toward " + node_name(r, *s.upstream) : std::string());
            }
        }
    }

    std::size_t effects = 0;
    for (const auto& rec : r.traces) effects += rec.effects.entries.size();
    out += fmt::format("\nresponses ({})\n", effects);
    if (effects) {
        Table t({"alert", "offense", "action", "mutation", "detail"});
        for (const auto& rec : r.traces)
            for (const auto& e : rec.effects.entries)
                t.add({std::to_string(rec.result.alert_id), std::to_string(rec.offense),
                       std::string(arm::to_string(e.action.kind)), yes_no(e.mutation), e.detail});
        out += t.render();
    }

    out += fmt::format("\nattacks ({})\n", r.verdicts.size());
    if (!r.verdicts.empty()) {
        Table t({"name", "kind", "true-origin", "expected", "traces", "found", "correct", "packets", "delivered",
                 "denied", "blocked-at", "after-block"});
        for (const auto& v : r.verdicts)
            t.add({v.name, v.kind, name_of(r, v.true_origin), name_of(r, v.expected), std::to_string(v.traces),
                   yes_no(v.found), v.correct ? yes_no(*v.correct) : "-", std::to_string(v.packets),
                   std::to_string(v.delivered), std::to_string(v.denied),
                   v.blocked_at ? std::to_string(*v.blocked_at) : "-",
                   v.blocked_at ? fmt::format("{} delivered / {} denied", v.delivered_after_block, v.denied_after_block)
                                : "-"});
        out += t.render();
    }

    if (!r.gateway_inspections.empty()) {
        out += "\ngateway inspections\n";
        Table t({"gateway", "inspections"});
        for (const auto& [g, n] : r.gateway_inspections) t.add({g, std::to_string(n)});
        out += t.render();
    }

    out += fmt::format("\nfirewall rules ({})\n", r.firewall_rules.size());
    for (const auto& rule : r.firewall_rules) out += "  " + rule + "\n";

    out += "\ncounters\n";
    {
        Table t({"counter", "value"});
        for (const auto& [k, v] : counter_list(r.counters)) t.add({k, std::to_string(v)});
        out += t.render();
    }

    const auto before = db_lines(r.db_before), after = db_lines(r.db_after);
    out += fmt::format("\nspoof database: {} records before, {} after\n", before.size(), after.size());
    for (const auto& l : after) out += "  " + l + "\n";

    if (r.comparison) out += "\n" + r.comparison->render_text();

    out += "\n-- replay --\n" + replay_record(r).dump() + "\n";
    return out;
}

std::string render_machine(const RunReport& r) {
    json j;
    j["scenario"] = r.scenario;
    j["seed"] = r.seed;
    j["duration"] = r.duration;

    auto& alerts = j["alerts"] = json::array();
    for (const auto& a : r.alerts) {
        json sj = json::array();
        for (auto s : sources(a)) sj.push_back(s.to_string());
        alerts.push_back({{"id", a.id},
                          {"class", defense::to_string(a.cls)},
                          {"victim", node_name(r, a.victim)},
                          {"tick", a.tick},
                          {"detector", a.detector},
                          {"evidence", a.evidence.size()},
                          {"sources", sj}});
    }

    auto addrs = [](const std::vector<net::Address>& as) {
        json out = json::array();
        for (auto a : as) out.push_back(a.to_string());
        return out;
    };
    auto& traces = j["traces"] = json::array();
    for (const auto& rec : r.traces) {
        const auto& x = rec.result;
        json tj = {{"alert", x.alert_id},
                   {"tracer", arm::to_string(x.strategy)},
                   {"status", arm::to_string(x.status)},
                   {"origins", addrs(x.origins)},
                   {"farthest", x.farthest ? json(x.farthest->to_string()) : json(nullptr)},
                   {"reason", x.reason},
                   {"consumed", x.consumed},
                   {"started", x.started},
                   {"finished", x.finished},
                   {"candidates", addrs(x.candidates)},
                   {"resolved_by_candidate", x.resolved_by_candidate}};
        if (x.graph) {
            json paths = json::array();
            for (const auto& p : x.graph->paths) paths.push_back(addrs(p));
            tj["graph"] = {{"root", x.graph->root.to_string()},
                           {"edges", x.graph->edges.size()},
                           {"paths", paths},
                           {"orphans", x.graph->orphans.size()}};
        }
        if (x.transcript) {
            json aw = json::array(), si = json::array();
            for (const auto& w : x.transcript->awakenings)
                aw.push_back({{"tick", w.tick},
                              {"gateway", node_name(r, w.gateway)},
                              {"host", node_name(r, w.host)},
                              {"reason", w.reason}});
            for (const auto& s : x.transcript->sightings)
                si.push_back({{"tick", s.tick},
                              {"gateway", node_name(r, s.gateway)},
                              {"host", node_name(r, s.host)},
                              {"upstream", s.upstream ? json(node_name(r, *s.upstream)) : json(nullptr)}});
            tj["watermark"] = {{"token", x.transcript->token},
                               {"session", x.transcript->session_status},
                               {"awakenings", aw},
                               {"sightings", si}};
        }
        tj["offense"] = rec.offense;
        json eff = json::array();
        for (const auto& e : rec.effects.entries)
            eff.push_back({{"action", arm::to_string(e.action.kind)},
                           {"describe", e.action.describe()},
                           {"mutation", e.mutation},
                           {"detail", e.detail}});
        tj["responses"] = eff;
        traces.push_back(std::move(tj));
    }

    auto& verdicts = j["attacks"] = json::array();
    for (const auto& v : r.verdicts)
        verdicts.push_back({{"name", v.name},
                            {"kind", v.kind},
                            {"true_origin", v.true_origin.to_string()},
                            {"expected", v.expected.to_string()},
                            {"traces", v.traces},
                            {"found", v.found},
                            {"correct", v.correct ? json(*v.correct) : json(nullptr)},
                            {"packets", v.packets},
                            {"delivered", v.delivered},
                            {"denied", v.denied},
                            {"blocked_at", v.blocked_at ? json(*v.blocked_at) : json(nullptr)},
                            {"delivered_after_block", v.delivered_after_block},
                            {"denied_after_block", v.denied_after_block}});

    json gw = json::object();
    for (const auto& [g, n] : r.gateway_inspections) gw[g] = n;
    j["gateway_inspections"] = gw;
    j["firewall_rules"] = r.firewall_rules;
    json cj = json::object();
    for (const auto& [k, v] : counter_list(r.counters)) cj[k] = v;
    j["counters"] = cj;
    j["spoof_db"] = db_lines(r.db_after);
    if (r.comparison) j["comparison"] = json::parse(r.comparison->to_json());
    j["replay"] = replay_record(r);
    return j.dump(2) + "\n";
}

std::string render(const RunReport& r, ReportFormat f) {
    return f == ReportFormat::Text ? render_text(r) : render_machine(r);
}

ReplayRecord parse_replay(const std::string& report) {
    ReplayRecord out;
    json record;
    const auto first = report.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && report[first] == '{') {
        out.format = ReportFormat::Machine;
        json doc;
        try {
            doc = json::parse(report);
        } catch (const json::parse_error& e) {
            throw ParseError(1 + static_cast<std::size_t>(std::count(report.begin(),
                                                                     report.begin() + static_cast<std::ptrdiff_t>(
                                                                                          std::min(e.byte, report.size())),
                                                                     '\n')),
                             e.what());
        }
        if (!doc.contains("replay")) throw ValidationError("report has no replay record");
        record = doc["replay"];
    } else {
        out.format = ReportFormat::Text;
        const std::string marker = "\n-- replay --\n";
        const auto at = report.rfind(marker);
        if (at == std::string::npos) throw ValidationError("report has no '-- replay --' section");
        const auto begin = at + marker.size();
        const auto line = static_cast<std::size_t>(std::count(report.begin(), report.begin() + static_cast<std::ptrdiff_t>(begin), '\n')) + 1;
        try {
            record = json::parse(report.substr(begin, report.find('\n', begin) - begin));
        } catch (const json::parse_error& e) {
            throw ParseError(line, e.what());
        }
    }
    if (!record.is_object() || !record.contains("scenario") || !record.contains("seed") || !record.contains("db") ||
        !record["seed"].is_number_unsigned() || !record["db"].is_string())
        throw ValidationError("replay record needs scenario, seed and db");
    out.scenario = parse_scenario(record["scenario"].dump());
    out.scenario.seed = record["seed"].get<std::uint64_t>();
    out.db = record["db"].get<std::string>();
    return out;
}

}  // namespace activetrace::sim
