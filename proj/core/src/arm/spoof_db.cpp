#include "activetrace/arm/spoof_db.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

namespace activetrace::arm {

namespace {

using json = nlohmann::ordered_json;

SpoofRecord from_json(const json& j) {
    auto addr = [&](const char* key) {
        auto a = net::Address::parse(j.at(key).get<std::string>());
        if (!a) throw PersistenceError(fmt::format("bad address in field '{}'", key));
        return *a;
    };
    SpoofRecord r;
    r.spoofed = addr("spoofed");
    r.origin = addr("origin");
    auto cls = defense::parse_alert_class(j.at("class").get<std::string>());
    if (!cls) throw PersistenceError("unknown attack class");
    r.cls = *cls;
    r.first_seen = j.at("first_seen").get<net::Tick>();
    r.count = j.at("count").get<std::uint64_t>();
    r.last_seen = j.value("last_seen", r.first_seen);
    r.offense = j.value("offense", std::uint64_t{1});
    if (r.count < 1) throw PersistenceError("record count must be >= 1");
    return r;
}

}  // namespace

std::string SpoofDb::to_line(const SpoofRecord& r) {
    json j;
    j["spoofed"] = r.spoofed.to_string();
    j["origin"] = r.origin.to_string();
    j["class"] = std::string(defense::to_string(r.cls));
    j["first_seen"] = r.first_seen;
    j["count"] = r.count;
    j["last_seen"] = r.last_seen;
    j["offense"] = r.offense;
    return j.dump();
}

SpoofDb SpoofDb::parse(const std::string& text, std::vector<std::string>* warnings) {
    SpoofDb db;
    std::size_t pos = 0, lineno = 0;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        const bool last = nl == std::string::npos;
        std::string line = text.substr(pos, last ? std::string::npos : nl - pos);
        pos = last ? text.size() : nl + 1;
        ++lineno;
        if (line.empty()) continue;
        SpoofRecord r;
        try {
            r = from_json(json::parse(line));
        } catch (const std::exception& e) {
            if (last) {
                // An interrupted append leaves an unterminated last line.
                db.warnings_.push_back(fmt::format("line {}: discarding partial record", lineno));
                continue;
            }
            throw PersistenceError(fmt::format("line {}: {}", lineno, e.what()));
        }
        db.records_[{r.spoofed, r.origin, r.cls}] = r;
    }
    if (warnings) *warnings = db.warnings_;
    return db;
}

SpoofDb SpoofDb::open(const std::filesystem::path& path) {
    SpoofDb db;
    if (std::filesystem::exists(path)) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw PersistenceError("cannot read " + path.string());
        std::stringstream ss;
        ss << in.rdbuf();
        db = parse(ss.str());
        // Drop the torn tail so later appends start on a clean line.
        if (!db.warnings_.empty()) {
            db.path_ = path;
            db.compact();
        }
    }
    db.path_ = path;
    return db;
}

void SpoofDb::append(const SpoofRecord& r) {
    if (!path_) return;
    std::ofstream out(*path_, std::ios::binary | std::ios::app);
    if (!out) throw PersistenceError("cannot append to " + path_->string());
    out << to_line(r) << '\n';
    if (!out) throw PersistenceError("write failed on " + path_->string());
}

void SpoofDb::record(std::span<const net::Address> spoofed, std::span<const net::Address> origins,
                     defense::AlertClass cls, net::Tick tick) {
    std::set<net::Address> unique_spoofed(spoofed.begin(), spoofed.end());
    std::set<net::Address> unique_origins(origins.begin(), origins.end());
    for (auto origin : unique_origins) {
        const auto offense = offenses(origin) + 1;
        for (auto s : unique_spoofed) {
            auto [it, fresh] = records_.try_emplace({s, origin, cls});
            auto& r = it->second;
            if (fresh) {
                r = SpoofRecord{s, origin, cls, tick, 1, tick, offense};
            } else {
                ++r.count;
                r.last_seen = tick;
                r.offense = offense;
            }
            append(r);
        }
    }
}

std::vector<SpoofRecord> SpoofDb::lookup(net::Address spoofed) const {
    std::vector<SpoofRecord> out;
    for (auto it = records_.lower_bound({spoofed, net::Address{0}, defense::AlertClass::DoSFlood});
         it != records_.end() && std::get<0>(it->first) == spoofed; ++it)
        out.push_back(it->second);
    std::stable_sort(out.begin(), out.end(),
                     [](const SpoofRecord& a, const SpoofRecord& b) { return a.last_seen > b.last_seen; });
    return out;
}

std::uint64_t SpoofDb::offenses(net::Address origin) const {
    std::uint64_t n = 0;
    for (const auto& [k, r] : records_)
        if (r.origin == origin) n = std::max(n, r.offense);
    return n;
}

std::vector<SpoofRecord> SpoofDb::records() const {
    std::vector<SpoofRecord> out;
    out.reserve(records_.size());
    for (const auto& [k, r] : records_) out.push_back(r);
    return out;
}

std::string SpoofDb::serialize() const {
    std::string out;
    for (const auto& [k, r] : records_) out += to_line(r) + '\n';
    return out;
}

void SpoofDb::save(const std::filesystem::path& path) const {
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw PersistenceError("cannot write " + tmp);
        out << serialize();
        if (!out) throw PersistenceError("write failed on " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw PersistenceError("cannot replace " + path.string() + ": " + ec.message());
}

void SpoofDb::compact() {
    if (path_) save(*path_);
}

void SpoofDb::clear() {
    records_.clear();
    compact();
}

}  // namespace activetrace::arm
