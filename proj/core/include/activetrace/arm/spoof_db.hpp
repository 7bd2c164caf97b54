#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "activetrace/defense/ids.hpp"
#include "activetrace/error.hpp"
#include "activetrace/net/address.hpp"
#include "activetrace/net/packet.hpp"

namespace activetrace::arm {

ACTIVETRACE_DEFINE_ERROR(PersistenceError);

/// A spoofed (masked) source address tied to the real origin a trace found.
struct SpoofRecord {
    net::Address spoofed;
    net::Address origin;
    defense::AlertClass cls{defense::AlertClass::DoSFlood};
    net::Tick first_seen{0};
    std::uint64_t count{1};
    net::Tick last_seen{0};
    /// The origin's offense number when this record was last touched.
    std::uint64_t offense{1};

    bool operator==(const SpoofRecord&) const = default;
};

/// Archive of spoofed addresses and the origins behind them.
///
/// File format: JSON lines, one record per line, keys in this order:
///   spoofed, origin, class, first_seen, count, last_seen, offense
/// Addresses are dotted quads. Every update appends the record's new state;
/// on load the last line for a (spoofed, origin, class) triple wins. A
/// truncated final line is dropped with a warning; any other malformed line
/// is a PersistenceError. `save` writes the compacted form, sorted by triple.
class SpoofDb {
public:
    SpoofDb() = default;

    /// Opens (or creates on first write) a file-backed database.
    static SpoofDb open(const std::filesystem::path& path);
    /// Parses a database image without attaching a file.
    static SpoofDb parse(const std::string& text, std::vector<std::string>* warnings = nullptr);

    /// Folds one resolved trace in. Each (spoofed, origin) pair is one record;
    /// an origin's offense number goes up by one per call that names it.
    void record(std::span<const net::Address> spoofed, std::span<const net::Address> origins, defense::AlertClass cls,
                net::Tick tick);

    /// Records for `spoofed`, most recently seen first.
    std::vector<SpoofRecord> lookup(net::Address spoofed) const;
    /// Offenses already on file for a real origin (0 if unknown).
    std::uint64_t offenses(net::Address origin) const;

    std::vector<SpoofRecord> records() const;
    std::size_t size() const { return records_.size(); }
    bool empty() const { return records_.empty(); }

    /// Compacted image, as written by `save`.
    std::string serialize() const;
    void save(const std::filesystem::path& path) const;
    /// Rewrites the attached file compacted.
    void compact();
    void clear();

    const std::optional<std::filesystem::path>& path() const { return path_; }
    const std::vector<std::string>& warnings() const { return warnings_; }

    static std::string to_line(const SpoofRecord& r);

private:
    using Key = std::tuple<net::Address, net::Address, defense::AlertClass>;
    void append(const SpoofRecord& r);

    std::map<Key, SpoofRecord> records_;
    std::optional<std::filesystem::path> path_;
    std::vector<std::string> warnings_;
};

}  // namespace activetrace::arm
