#pragma once

#include <span>

#include "activetrace/baseline/compare.hpp"
#include "activetrace/sim/scenario.hpp"

namespace activetrace::sim {

/// Runs each scheme against its own fresh replay of the scenario's traffic
/// (same seed, nothing shared), then reads its counters and checks the
/// answer against the flood attackers' true locations. Stored-data schemes
/// analyse what they kept up to `compare.trace_at`; live schemes start
/// probing at that tick. Scheme failures become rows, not exceptions.
/// Throws ValidationError when the scenario has no flood attacker.
baseline::ComparisonReport compare_strategies(const Scenario& s, std::span<const baseline::Scheme> schemes);

/// The tick comparisons read stored data and start probing.
net::Tick comparison_tick(const Scenario& s);

}  // namespace activetrace::sim
