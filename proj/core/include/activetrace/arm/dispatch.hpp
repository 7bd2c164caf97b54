#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "activetrace/arm/response.hpp"
#include "activetrace/arm/spoof_db.hpp"
#include "activetrace/arm/types.hpp"
#include "activetrace/ppm/tracer.hpp"
#include "activetrace/swt/session.hpp"

namespace activetrace::arm {

/// Real origins the database links to any source address in the evidence,
/// most recently seen first, without repeats.
std::vector<net::Address> prior_origins(const defense::Alert& a, const SpoofDb& db);

/// Distinct source addresses in the evidence, as the packets claimed them.
std::vector<net::Address> evidence_sources(const defense::Alert& a);

/// Hooks into the running simulation.
struct DispatchContext {
    const net::Topology& topology;
    const SpoofDb* db{nullptr};
    net::Tick now{0};
    /// Ticks a trace may run before it is abandoned.
    net::Tick budget{2000};
    ppm::PpmTracerOptions ppm{};
    swt::SwtOptions swt{};

    /// Marked samples the victim received at tick t. Called with t = now
    /// first (no advance), then once per later tick, each call advancing the
    /// world by one tick.
    std::function<std::vector<ppm::MarkedSample>(net::Tick)> ppm_feed;

    swt::GuardianFabric* fabric{nullptr};
    /// Injects a fresh watermark into the session the alert points at.
    std::function<std::optional<swt::Watermark>(const defense::Alert&, net::Tick)> swt_inject;
    /// Advances the world by one tick.
    std::function<void(net::Tick)> swt_step;
};

/// Runs the tracer `classify` picks. Prior origins from the database become
/// tracer candidates. Throws TracerUnavailable when the context lacks what
/// the tracer needs; tracer failures come back as status Failed.
TraceResult dispatch(const defense::Alert& a, DispatchContext& ctx);

TraceResult ppm_result(const defense::Alert& a, const ppm::PpmTracer& tracer, net::Tick started, net::Tick finished);
TraceResult swt_result(const defense::Alert& a, const swt::SwtSession& session, const net::Topology& t,
                       std::uint64_t inspections);

}  // namespace activetrace::arm
