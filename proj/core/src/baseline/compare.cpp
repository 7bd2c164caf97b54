#include "activetrace/baseline/compare.hpp"

#include <fmt/format.h>
#include <json.hpp>

namespace activetrace::baseline {

std::string_view to_string(Scheme s) {
    switch (s) {
        case Scheme::IngressFiltering: return "Ingress filtering";
        case Scheme::InputDebugging: return "Input debugging";
        case Scheme::ControlledFlooding: return "Controlled flooding";
        case Scheme::Logging: return "Logging";
        case Scheme::Marking: return "Marking";
    }
    return "?";
}

std::string_view cli_name(Scheme s) {
    switch (s) {
        case Scheme::IngressFiltering: return "ingress";
        case Scheme::InputDebugging: return "input-debugging";
        case Scheme::ControlledFlooding: return "controlled-flooding";
        case Scheme::Logging: return "logging";
        case Scheme::Marking: return "marking";
    }
    return "?";
}

const std::vector<Scheme>& all_schemes() {
    static const std::vector<Scheme> all{Scheme::IngressFiltering, Scheme::InputDebugging, Scheme::ControlledFlooding,
                                         Scheme::Logging, Scheme::Marking};
    return all;
}

std::optional<Scheme> parse_scheme(std::string_view cli) {
    for (auto s : all_schemes())
        if (cli_name(s) == cli) return s;
    return std::nullopt;
}

const QualitativeLabels& qualitative_labels(Scheme s) {
    static const QualitativeLabels ingress{"Moderate", "Low", "Moderate", "N/A", "N/A"};
    static const QualitativeLabels input{"High", "Low", "High", "Good", "Poor"};
    static const QualitativeLabels flood{"Low", "High", "Low", "Poor", "Poor"};
    static const QualitativeLabels logging{"High", "Low", "High", "Excellent", "Excellent"};
    static const QualitativeLabels marking{"Low", "Low", "Low", "Excellent", "Excellent"};
    switch (s) {
        case Scheme::IngressFiltering: return ingress;
        case Scheme::InputDebugging: return input;
        case Scheme::ControlledFlooding: return flood;
        case Scheme::Logging: return logging;
        case Scheme::Marking: return marking;
    }
    return marking;
}

std::string ComparisonReport::render_text() const {
    std::string out = fmt::format("comparison: {} (seed {})\n", scenario, seed);
    out += fmt::format("{:<20} {:<10} {:<8} {:<9} {:<12} {:<12} | {:>10} {:>10} {:>10} {:>6} {:>7}  {}\n", "scheme",
                       "mgmt", "network", "router", "distributed", "post-mortem", "extra-pkts", "work", "bytes",
                       "ops", "ticks", "outcome");
    for (const auto& r : rows) {
        std::string outcome = r.outcome;
        if (r.correct) outcome += *r.correct ? " [correct]" : " [WRONG]";
        out += fmt::format("{:<20} {:<10} {:<8} {:<9} {:<12} {:<12} | {:>10} {:>10} {:>10} {:>6} {:>7}  {}\n",
                           to_string(r.scheme), r.labels.management, r.labels.network, r.labels.router,
                           r.labels.distributed, r.labels.post_mortem, r.measured.extra_packets,
                           r.measured.router_work_units, r.measured.storage_bytes, r.measured.operator_interventions,
                           r.measured.ticks, outcome);
    }
    return out;
}

std::string ComparisonReport::to_json() const {
    using json = nlohmann::ordered_json;
    json j;
    j["scenario"] = scenario;
    j["seed"] = seed;
    json arr = json::array();
    for (const auto& r : rows) {
        json row;
        row["scheme"] = std::string(to_string(r.scheme));
        row["labels"] = {{"management", r.labels.management},
                         {"network", r.labels.network},
                         {"router", r.labels.router},
                         {"distributed", r.labels.distributed},
                         {"post_mortem", r.labels.post_mortem}};
        row["ok"] = r.ok;
        row["outcome"] = r.outcome;
        row["correct"] = r.correct ? json(*r.correct) : json(nullptr);
        row["measured"] = {{"extra_packets", r.measured.extra_packets},
                           {"router_work_units", r.measured.router_work_units},
                           {"storage_bytes", r.measured.storage_bytes},
                           {"operator_interventions", r.measured.operator_interventions},
                           {"probes", r.measured.probes},
                           {"ticks", r.measured.ticks}};
        arr.push_back(std::move(row));
    }
    j["rows"] = std::move(arr);
    return j.dump();
}

}  // namespace activetrace::baseline
