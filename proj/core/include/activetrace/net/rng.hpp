#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace activetrace::net {

/// Independent random stream derived from (master seed, consumer label).
///
/// Every stochastic consumer (per-router marking, drop lottery, watermark
/// generation, spoofing, trials) owns its own stream, so adding a consumer
/// never shifts the draws of another one. Output is bit-exact across
/// platforms: the engine is mt19937_64 and `uniform01` uses the top 53 bits
/// directly instead of std::uniform_real_distribution.
class RngStream {
public:
    RngStream(std::uint64_t master_seed, std::string_view label);

    std::uint64_t next() { return engine_(); }

    /// Uniform double in [0, 1).
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, bound). bound must be > 0.
    std::uint64_t below(std::uint64_t bound);

    bool bernoulli(double p) { return uniform01() < p; }

    /// Label helper for indexed consumers ("trial", 3) -> "trial/3".
    static std::string indexed(std::string_view label, std::uint64_t index);

private:
    std::mt19937_64 engine_;
};

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ull);
std::uint64_t splitmix64(std::uint64_t x);

}  // namespace activetrace::net
