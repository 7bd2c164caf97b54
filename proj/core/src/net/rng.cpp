#include "activetrace/net/rng.hpp"

#include <string>

namespace activetrace::net {

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed) {
    std::uint64_t h = seed;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

RngStream::RngStream(std::uint64_t master_seed, std::string_view label)
    : engine_(splitmix64(splitmix64(master_seed) ^ fnv1a64(label))) {}

std::uint64_t RngStream::below(std::uint64_t bound) {
    // Rejection sampling keeps the result unbiased and platform independent.
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t x;
    do {
        x = engine_();
    } while (x >= limit);
    return x % bound;
}

std::string RngStream::indexed(std::string_view label, std::uint64_t index) {
    std::string out(label);
    out += '/';
    out += std::to_string(index);
    return out;
}

}  // namespace activetrace::net
