#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace activetrace::net {

/// 32-bit node address. Ordering is numeric; dotted-quad is display only.
struct Address {
    std::uint32_t value{0};

    constexpr Address() = default;
    constexpr explicit Address(std::uint32_t v) : value(v) {}

    constexpr auto operator<=>(const Address&) const = default;

    std::string to_string() const;

    /// Parses "a.b.c.d"; returns nullopt on anything else.
    static std::optional<Address> parse(std::string_view text);
};

/// Inclusive address range [low, high].
struct AddressRange {
    Address low;
    Address high;

    constexpr bool contains(Address a) const { return low <= a && a <= high; }
    constexpr bool overlaps(const AddressRange& o) const { return low <= o.high && o.low <= high; }
    constexpr bool well_formed() const { return low <= high; }
    constexpr auto operator<=>(const AddressRange&) const = default;

    static constexpr AddressRange single(Address a) { return {a, a}; }
    static constexpr AddressRange any() { return {Address{0}, Address{0xffffffffu}}; }

    /// "a.b.c.d/n", "a.b.c.d-e.f.g.h", "a.b.c.d" or "*".
    static std::optional<AddressRange> parse(std::string_view text);
    std::string to_string() const;
};

}  // namespace activetrace::net

template <>
struct std::hash<activetrace::net::Address> {
    std::size_t operator()(const activetrace::net::Address& a) const noexcept {
        return std::hash<std::uint32_t>{}(a.value);
    }
};
