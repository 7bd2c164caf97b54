#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace activetrace::baseline {

enum class Scheme { IngressFiltering, InputDebugging, ControlledFlooding, Logging, Marking };

std::string_view to_string(Scheme s);
/// CLI spelling: ingress, input-debugging, controlled-flooding, logging, marking.
std::string_view cli_name(Scheme s);
std::optional<Scheme> parse_scheme(std::string_view cli);
const std::vector<Scheme>& all_schemes();

struct QualitativeLabels {
    std::string management;
    std::string network;
    std::string router;
    std::string distributed;
    std::string post_mortem;

    bool operator==(const QualitativeLabels&) const = default;
};

/// The published qualitative ratings for each scheme.
const QualitativeLabels& qualitative_labels(Scheme s);

struct Measured {
    std::uint64_t extra_packets{0};
    std::uint64_t router_work_units{0};
    std::uint64_t storage_bytes{0};
    std::uint64_t operator_interventions{0};
    /// Link floods issued by controlled flooding.
    std::uint64_t probes{0};
    std::uint64_t ticks{0};
};

struct ComparisonRow {
    Scheme scheme{Scheme::Marking};
    QualitativeLabels labels;
    bool ok{false};
    std::string outcome;  // error name when !ok, short result otherwise
    /// Traced path against the oracle; unset when the scheme does not trace.
    std::optional<bool> correct;
    Measured measured;
};

struct ComparisonReport {
    std::string scenario;
    std::uint64_t seed{0};
    std::vector<ComparisonRow> rows;

    std::string render_text() const;
    /// Compact JSON object.
    std::string to_json() const;
};

}  // namespace activetrace::baseline
