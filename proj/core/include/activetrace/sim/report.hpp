#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "activetrace/arm/response.hpp"
#include "activetrace/arm/types.hpp"
#include "activetrace/baseline/compare.hpp"
#include "activetrace/defense/ids.hpp"
#include "activetrace/sim/scenario.hpp"

namespace activetrace::sim {

/// Ground truth gathered while a run executes. Only the report layer reads it.
class OracleLedger {
public:
    struct Outcome {
        net::Tick injected;
        net::OutcomeKind kind;
    };

    void observe(const net::Completion& c, bool monitored_delivery);

    const net::OriginTruth* truth(std::uint64_t packet_id) const;
    /// Fate of every packet, keyed by the chain origin for stepping-stone
    /// traffic and by the node that physically sent it otherwise.
    const std::map<net::Address, std::vector<Outcome>>& outcomes() const { return outcomes_; }

private:
    std::unordered_map<std::uint64_t, net::OriginTruth> delivered_;
    std::map<net::Address, std::vector<Outcome>> outcomes_;
};

struct TraceRecord {
    arm::TraceResult result;
    std::vector<arm::ResponseAction> actions;
    arm::EffectsLog effects;
    /// Offense number the response was chosen for; 0 when nothing was selected.
    std::uint64_t offense{0};
};

/// Did the pipeline attribute this attack, and to the right place?
struct AttackVerdict {
    std::string name;
    std::string kind;  // "dos" or "stepping-stone"
    net::Address true_origin;
    /// What a correct trace names: the attacker's guardian for router-level
    /// marking, the first host of the chain for watermark tracing.
    net::Address expected;
    std::size_t traces{0};
    bool found{false};
    std::optional<bool> correct;
    /// Packets attributable to the attack that left the network, by fate.
    std::uint64_t packets{0};
    std::uint64_t delivered{0};
    std::uint64_t denied{0};
    /// First tick a response installed a firewall rule against this attack.
    std::optional<net::Tick> blocked_at;
    std::uint64_t delivered_after_block{0};
    std::uint64_t denied_after_block{0};
};

struct Counters {
    net::Tick ticks{0};
    std::uint64_t packets_emitted{0};
    std::uint64_t delivered{0};
    std::uint64_t dropped_by_filter{0};
    std::uint64_t dropped_by_load{0};
    std::uint64_t ttl_expired{0};
    std::uint64_t unroutable{0};
    std::uint64_t firewall_evaluations{0};
    std::uint64_t firewall_denied{0};
    std::uint64_t ingress_denied{0};
    std::uint64_t ids_events{0};
    std::uint64_t alerts_raised{0};
    std::uint64_t alerts_suppressed{0};
    std::uint64_t marking_work{0};
    std::uint64_t traces_run{0};
    std::uint64_t ppm_samples_consumed{0};
    std::uint64_t swt_inspections{0};
    std::uint64_t gateway_inspections{0};
    /// Total gateway inspections at the moment the first trace started.
    std::uint64_t inspections_before_first_trace{0};
    std::uint64_t rules_added{0};
    std::uint64_t hosts_isolated{0};
};

struct RunReport {
    std::string scenario;
    std::uint64_t seed{0};
    net::Tick duration{0};
    std::vector<defense::Alert> alerts;
    std::vector<TraceRecord> traces;
    std::vector<AttackVerdict> verdicts;
    Counters counters;
    std::vector<std::pair<std::string, std::uint64_t>> gateway_inspections;  // awakened gateways only
    std::vector<std::string> firewall_rules;  // final rule set
    std::string db_before;
    std::string db_after;
    std::optional<baseline::ComparisonReport> comparison;
    /// Address to node name, for rendering.
    std::map<net::Address, std::string> names;
    std::vector<std::string> node_names;  // by node id
    /// Scenario document the run came from, compact JSON.
    std::string source;
};

/// Fills `verdicts` from the ledger. Must run after every trace is recorded.
void judge(RunReport& report, const Scenario& s, const net::Topology& t, const OracleLedger& ledger);

enum class ReportFormat { Text, Machine };

std::optional<ReportFormat> parse_format(std::string_view text);

/// Aligned tables, then a "-- replay --" line and a one-line replay record.
std::string render_text(const RunReport& r);
/// Pretty JSON with the same replay record under "replay".
std::string render_machine(const RunReport& r);
std::string render(const RunReport& r, ReportFormat f);

/// What a report carries to be run again.
struct ReplayRecord {
    ReportFormat format{ReportFormat::Text};
    Scenario scenario;
    std::string db;
};

/// Throws ParseError / ValidationError when the report has no usable record.
ReplayRecord parse_replay(const std::string& report);

}  // namespace activetrace::sim
