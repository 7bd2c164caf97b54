#pragma once

#include <map>
#include <memory>
#include <set>
#include <vector>

#include "activetrace/arm/dispatch.hpp"
#include "activetrace/arm/spoof_db.hpp"
#include "activetrace/baseline/ingress.hpp"
#include "activetrace/defense/firewall.hpp"
#include "activetrace/ppm/marking.hpp"
#include "activetrace/sim/report.hpp"
#include "activetrace/sim/world.hpp"
#include "activetrace/swt/gateway.hpp"

namespace activetrace::sim {

/// One end-to-end run: traffic, passive defenses, tracing and response.
///
/// Order within a tick:
///   1. attackers, stepping stones and benign clients emit
///   2. every in-flight packet takes one hop (firewall, marking, guardian hooks)
///   3. IDS detectors at monitored hosts see that tick's deliveries
///   4. each new alert is dispatched to its tracer, which keeps the world
///      running tick by tick until it resolves; alerts raised meanwhile are
///      suppressed
///   5. the chosen response is applied and the spoof database updated
class Engine {
public:
    /// `db` must outlive the engine. It is read for prior offenders and
    /// written after each resolved trace.
    Engine(Scenario scenario, arm::SpoofDb& db);
    ~Engine();

    Engine(const Engine&) = delete;
    Engine& operator=(const Engine&) = delete;

    /// Runs the whole duration. Call once.
    RunReport run();

    const Scenario& scenario() const { return scenario_; }
    World& world() { return *world_; }
    defense::RuleSet& rules() { return rules_; }
    const std::set<net::NodeId>& firewall_borders() const { return borders_; }
    swt::GuardianFabric& fabric() { return *fabric_; }

private:
    struct Monitor {
        net::NodeId host;
        std::vector<defense::SignatureDetector> signatures;
        std::optional<defense::AnomalyDetector> anomaly;
    };

    std::vector<defense::Alert> tick(bool tracing);
    void handle(defense::Alert alert);
    std::optional<swt::Watermark> inject_watermark(const defense::Alert& a, net::Tick now);

    Scenario scenario_;
    arm::SpoofDb& db_;
    std::unique_ptr<World> world_;
    defense::RuleSet rules_;
    std::set<net::NodeId> borders_;
    std::unique_ptr<defense::FirewallHook> firewall_;
    std::unique_ptr<baseline::IngressHook> ingress_;
    std::unique_ptr<ppm::MarkingHook> marking_;
    std::unique_ptr<swt::GuardianFabric> fabric_;
    std::unique_ptr<swt::WatermarkGenerator> watermarks_;
    std::vector<Monitor> monitors_;
    std::vector<bool> monitored_;

    std::vector<net::Completion> last_;
    OracleLedger ledger_;
    RunReport report_;
    std::uint64_t next_alert_{1};
    bool traced_{false};
    bool ran_{false};
};

/// Convenience: runs a scenario against `db`.
RunReport run_scenario(const Scenario& s, arm::SpoofDb& db);

}  // namespace activetrace::sim
