#include <benchmark/benchmark.h>

#include "activetrace/defense/correlate.hpp"
#include "activetrace/net/network.hpp"
#include "activetrace/ppm/marking.hpp"
#include "activetrace/ppm/reconstruct.hpp"
#include "activetrace/sim/engine.hpp"

using namespace activetrace;

namespace {

std::string scenario(const char* name) { return std::string(ACTIVETRACE_SCENARIO_DIR) + "/" + name + ".json"; }

// Marked flood through a six-hop path, then reconstruction at the victim.
void BM_MarkAndReconstruct(benchmark::State& state) {
    const auto s = sim::load_scenario(scenario("demo"));
    const auto packets = static_cast<int>(state.range(0));
    for (auto _ : state) {
        sim::World w(s);
        auto& t = w.topology();
        ppm::MarkingHook hook(t, {0.04, std::nullopt}, 1);
        w.network().add_hook(hook);
        const auto a = t.require("A1");
        const auto v = t.node(t.require("V")).addr;
        std::vector<net::Completion> inbox;
        inbox.reserve(static_cast<std::size_t>(packets));
        for (int k = 0; k < packets; ++k) {
            net::PacketHeader h;
            h.src = net::Address{static_cast<std::uint32_t>(k * 2654435761u)};
            h.dst = v;
            h.payload_tag = "flood";
            inbox.push_back(w.network().forward(net::Packet(h, {t.node(a).addr, std::nullopt}), a));
        }
        w.network().remove_hook(hook);
        benchmark::DoNotOptimize(ppm::reconstruct(ppm::collect(inbox), v));
    }
    state.SetItemsProcessed(state.iterations() * packets);
}
BENCHMARK(BM_MarkAndReconstruct)->Arg(1000)->Arg(10000);

void BM_Correlate(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    std::vector<defense::ConnectionRecord> in(n), out(n);
    for (std::size_t i = 0; i < n; ++i) {
        in[i] = {i, i * 31};
        out[i] = {i, i * 37 + 1};
    }
    for (auto _ : state) benchmark::DoNotOptimize(defense::correlate(in, out));
    state.SetComplexityN(static_cast<std::int64_t>(n));
}
BENCHMARK(BM_Correlate)->RangeMultiplier(4)->Range(16, 1024)->Complexity(benchmark::oNSquared);

void BM_RunScenario(benchmark::State& state) {
    const auto s = sim::load_scenario(scenario("demo"));
    for (auto _ : state) {
        arm::SpoofDb db;
        benchmark::DoNotOptimize(sim::run_scenario(s, db));
    }
}
BENCHMARK(BM_RunScenario)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
