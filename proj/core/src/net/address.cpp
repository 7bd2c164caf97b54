#include "activetrace/net/address.hpp"

#include <charconv>

#include <fmt/format.h>

namespace activetrace::net {

std::string Address::to_string() const {
    return fmt::format("{}.{}.{}.{}", (value >> 24) & 0xff, (value >> 16) & 0xff, (value >> 8) & 0xff,
                       value & 0xff);
}

std::optional<Address> Address::parse(std::string_view text) {
    std::uint32_t out = 0;
    const char* p = text.data();
    const char* end = text.data() + text.size();
    for (int octet = 0; octet < 4; ++octet) {
        if (octet > 0) {
            if (p == end || *p != '.') return std::nullopt;
            ++p;
        }
        unsigned v = 0;
        auto [next, ec] = std::from_chars(p, end, v);
        if (ec != std::errc{} || next == p || v > 255 || next - p > 3) return std::nullopt;
        out = (out << 8) | v;
        p = next;
    }
    if (p != end) return std::nullopt;
    return Address{out};
}

std::optional<AddressRange> AddressRange::parse(std::string_view text) {
    if (text == "*") return any();
    if (auto slash = text.find('/'); slash != std::string_view::npos) {
        auto base = Address::parse(text.substr(0, slash));
        unsigned bits = 0;
        auto tail = text.substr(slash + 1);
        auto [next, ec] = std::from_chars(tail.data(), tail.data() + tail.size(), bits);
        if (!base || ec != std::errc{} || next != tail.data() + tail.size() || bits > 32) return std::nullopt;
        const std::uint32_t mask = bits == 0 ? 0u : ~std::uint32_t{0} << (32 - bits);
        return AddressRange{Address{base->value & mask}, Address{(base->value & mask) | ~mask}};
    }
    if (auto dash = text.find('-'); dash != std::string_view::npos) {
        auto lo = Address::parse(text.substr(0, dash));
        auto hi = Address::parse(text.substr(dash + 1));
        if (!lo || !hi || *hi < *lo) return std::nullopt;
        return AddressRange{*lo, *hi};
    }
    if (auto a = Address::parse(text)) return single(*a);
    return std::nullopt;
}

std::string AddressRange::to_string() const {
    if (*this == any()) return "*";
    if (low == high) return low.to_string();
    return low.to_string() + "-" + high.to_string();
}

}  // namespace activetrace::net
