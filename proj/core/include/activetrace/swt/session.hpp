#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "activetrace/error.hpp"
#include "activetrace/swt/gateway.hpp"

namespace activetrace::swt {

ACTIVETRACE_DEFINE_ERROR(NoSightings);

enum class SessionStatus { Active, Resolved, Stalled, Failed };

std::string_view to_string(SessionStatus s);

struct SwtOptions {
    /// Ticks a frontier gateway waits, after seeing the watermark enter its
    /// host, for the host to relay it further upstream.
    net::Tick relay_window{8};
    /// Ticks without progress before the session gives up.
    net::Tick patience{200};
};

struct Awakening {
    net::Tick tick{0};
    net::NodeId gateway{0};
    net::NodeId host{0};
    std::string reason;
};

/// One watermark trace, advanced by sightings and ticks.
///
/// The first gateway awakened is the guardian of the victim's chain peer
/// (the host the victim's session comes from). Each sighting that names an
/// upstream host moves the frontier there and wakes that host's guardian.
/// When the frontier host receives the watermark and relays nothing within
/// the relay window, it is the origin. An opaque (encrypted) departure or an
/// untrusted next gateway stalls the trace at the farthest sighting gateway.
class SwtSession {
public:
    SwtSession(std::uint32_t id, Watermark w, net::NodeId victim, net::NodeId victim_peer, SwtOptions options = {},
               std::vector<net::NodeId> candidate_origins = {});

    void start(GuardianFabric& fabric, net::Tick now);
    void on_sighting(const Sighting& s, GuardianFabric& fabric, net::Tick now);
    void on_tick(GuardianFabric& fabric, net::Tick now);

    SessionStatus status() const { return status_; }
    bool done() const { return status_ != SessionStatus::Active; }
    std::optional<net::NodeId> origin() const { return origin_; }
    /// Farthest gateway with a sighting, toward the origin.
    std::optional<net::NodeId> farthest_gateway() const { return farthest_gateway_; }
    std::optional<net::NodeId> frontier_host() const { return frontier_; }
    std::size_t frontier_depth() const { return depth_; }
    const std::string& failure() const { return failure_; }

    const Watermark& watermark() const { return watermark_; }
    std::uint32_t id() const { return id_; }
    net::NodeId victim() const { return victim_; }
    /// One entry per host whose guardian saw the watermark, in order of first sighting.
    const std::vector<Sighting>& sightings() const { return sightings_; }
    const std::vector<Awakening>& awakenings() const { return awakenings_; }
    const std::vector<net::NodeId>& candidates() const { return candidates_; }
    net::Tick started() const { return started_; }
    net::Tick finished() const { return finished_; }
    bool resolved_by_candidate() const { return by_candidate_; }

private:
    void wake(GuardianFabric& fabric, net::NodeId host, net::Tick now, std::string reason);
    void finish(GuardianFabric& fabric, SessionStatus s, net::Tick now);
    Sighting* record_for(net::NodeId host);

    std::uint32_t id_;
    Watermark watermark_;
    net::NodeId victim_;
    net::NodeId peer_;
    SwtOptions options_;
    std::vector<net::NodeId> candidates_;

    SessionStatus status_{SessionStatus::Active};
    std::optional<net::NodeId> frontier_;
    std::size_t depth_{0};
    std::optional<net::NodeId> origin_;
    std::optional<net::NodeId> farthest_gateway_;
    std::string failure_;
    std::vector<Sighting> sightings_;
    std::vector<Awakening> awakenings_;
    std::set<net::NodeId> awake_;
    std::map<net::NodeId, net::Tick> arrival_;  // host -> first watermark arrival
    net::Tick started_{0};
    net::Tick finished_{0};
    net::Tick last_progress_{0};
    bool by_candidate_{false};
};

}  // namespace activetrace::swt
