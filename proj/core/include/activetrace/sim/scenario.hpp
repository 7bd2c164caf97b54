#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "activetrace/arm/response.hpp"
#include "activetrace/baseline/controlled_flood.hpp"
#include "activetrace/baseline/input_debug.hpp"
#include "activetrace/defense/firewall.hpp"
#include "activetrace/defense/ids.hpp"
#include "activetrace/ppm/tracer.hpp"
#include "activetrace/swt/chain.hpp"
#include "activetrace/swt/session.hpp"

namespace activetrace::sim {

/// Malformed JSON. `line()` is 1-based.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what);
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

ACTIVETRACE_DEFINE_ERROR(ValidationError);

enum class SpoofMode { None, Random, Pool, InPrefix };

std::string_view to_string(SpoofMode m);

/// Half-open activity interval [start, stop).
struct Wave {
    net::Tick start{0};
    std::optional<net::Tick> stop;

    bool contains(net::Tick t) const { return t >= start && (!stop || t < *stop); }
};

struct DutyCycle {
    net::Tick on{1};
    net::Tick off{0};
};

struct DoSFlooderSpec {
    std::string name;
    std::string node;
    std::string victim;
    std::uint64_t rate{10};  // packets per tick while active
    SpoofMode spoof{SpoofMode::Random};
    std::size_t pool_size{16};
    std::vector<Wave> waves{Wave{}};
    /// Measured from each wave's start.
    std::optional<DutyCycle> duty;
    std::string tag{"flood"};
    std::uint16_t port{80};

    bool active(net::Tick t) const;
};

struct SteppingStoneSpec {
    std::string name;
    std::vector<std::string> chain;  // origin first, victim last
    std::vector<std::pair<std::string, std::string>> encrypted;
    swt::KeystrokeScript script;
};

struct BenignSpec {
    std::string name;
    std::string node;
    std::string dst;
    std::uint64_t rate{1};
    net::Tick every{1};
    Wave wave;
    std::string tag{"app-data"};
    std::uint16_t port{80};
};

struct FirewallSpec {
    defense::Verdict default_action{defense::Verdict::Allow};
    std::vector<std::string> borders;
    std::vector<defense::FirewallRule> rules;
};

struct IdsSpec {
    /// Monitored hosts; empty means every victim node.
    std::vector<std::string> hosts;
    std::vector<defense::Signature> signatures;
    std::optional<defense::AnomalyParams> anomaly;
};

struct MarkingSpec {
    double p{0.04};
    /// Empty means every forwarding node.
    std::vector<std::string> routers;
};

struct IngressSpec {
    /// Install ingress filtering in the run itself, not only in comparisons.
    bool enforce{false};
    /// Extra (border, range) pairs on top of the topology's valid prefixes.
    std::vector<std::pair<std::string, net::AddressRange>> prefixes;
};

struct TraceSpec {
    net::Tick budget{2000};
    ppm::PpmTracerOptions ppm{};
    swt::SwtOptions swt{};
};

struct CompareSpec {
    /// Tick at which live schemes start probing and stored data is read.
    /// Defaults to ten ticks into the first flood.
    std::optional<net::Tick> trace_at;
    baseline::FloodOptions flood{};
    baseline::InputDebugOptions input{};
};

struct Scenario {
    std::string name;
    std::uint64_t seed{0};
    net::Tick duration{0};
    net::TopologySpec topology;
    std::vector<DoSFlooderSpec> floods;
    std::vector<SteppingStoneSpec> chains;
    std::vector<BenignSpec> benign;
    FirewallSpec firewall;
    IdsSpec ids;
    std::optional<MarkingSpec> marking;
    std::vector<std::string> untrusted_guardians;
    /// Routers that keep packet logs for the logging baseline; unset means all.
    std::optional<std::vector<std::string>> logging_routers;
    IngressSpec ingress;
    arm::ResponsePolicy policy{arm::ResponsePolicy::standard()};
    TraceSpec trace;
    CompareSpec compare;

    /// The document this scenario was read from, as compact JSON.
    std::string source;
};

/// Throws ParseError, ValidationError, or Error when the file cannot be read.
Scenario load_scenario(const std::filesystem::path& path);
Scenario parse_scenario(std::string_view text);

/// Checks every cross reference against the built topology. Called by the loaders.
void validate(const Scenario& s);

arm::ActionKind parse_action(std::string_view text);

}  // namespace activetrace::sim
