#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "activetrace/error.hpp"
#include "activetrace/net/network.hpp"

namespace activetrace::defense {

ACTIVETRACE_DEFINE_ERROR(ColdStart);
ACTIVETRACE_DEFINE_ERROR(InvalidSignature);

enum class AlertClass { DoSFlood, UnauthorizedAccess };

std::string_view to_string(AlertClass c);
std::optional<AlertClass> parse_alert_class(std::string_view text);

/// A packet observed by the IDS at a monitored host. Carries the header only.
struct IdsEvent {
    net::Tick tick{0};
    net::PacketHeader header;
};

struct Alert {
    std::uint64_t id{0};
    AlertClass cls{AlertClass::DoSFlood};
    net::NodeId victim{0};
    net::Tick tick{0};
    std::string detector;
    std::vector<IdsEvent> evidence;  // never empty
};

/// `*` matches any run of characters; everything else is literal.
bool glob_match(std::string_view pattern, std::string_view text);

/// Rule-based detector: `threshold` tag matches inside a window of `window`
/// ticks (an event at t is inside the window ending at now iff now - t <
/// window). With `then` set, the alert fires on a `then` event preceded by
/// enough matches inside the window.
struct Signature {
    std::string id;
    std::string pattern;
    std::uint32_t threshold{1};
    net::Tick window{1};
    AlertClass cls{AlertClass::UnauthorizedAccess};
    std::optional<std::string> then;

    void validate() const;
};

/// Batch form over a tick-ordered stream; returns the first alert.
std::optional<Alert> detect_signature(const Signature& sig, std::span<const IdsEvent> stream, net::NodeId victim);

/// Streaming form. After firing, the window is cleared so the same burst
/// cannot alert twice.
class SignatureDetector {
public:
    SignatureDetector(Signature sig, net::NodeId victim);
    std::optional<Alert> observe(const IdsEvent& e);
    const Signature& signature() const { return sig_; }

private:
    Signature sig_;
    net::NodeId victim_;
    std::deque<IdsEvent> matches_;
};

struct AnomalyParams {
    double alpha{0.1};
    double k{3.0};
    std::uint32_t warmup{20};
    double floor{10.0};
};

/// Exponentially weighted mean and deviation of a per-tick packet rate.
class AnomalyModel {
public:
    explicit AnomalyModel(AnomalyParams params = {});

    void update(double rate);
    bool warm() const { return observations_ >= params_.warmup; }
    /// rate > mean + k*sigma and rate > floor. Throws ColdStart before warmup.
    bool is_anomalous(double rate) const;

    double mean() const { return mean_; }
    double deviation() const;
    std::uint64_t observations() const { return observations_; }
    const AnomalyParams& params() const { return params_; }

private:
    AnomalyParams params_;
    double mean_{0};
    double variance_{0};
    std::uint64_t observations_{0};
};

/// One tick of the statistical detector: tests the tick's inbound rate
/// against the baseline, then folds it in. Throws ColdStart before warmup.
std::optional<Alert> detect_anomaly(AnomalyModel& model, net::Tick tick, std::span<const IdsEvent> tick_packets,
                                    net::NodeId victim);

/// Streaming wrapper: warms up silently, alerts once per excursion and
/// re-arms when the rate returns to normal.
class AnomalyDetector {
public:
    AnomalyDetector(AnomalyParams params, net::NodeId victim) : model_(params), victim_(victim) {}
    std::optional<Alert> observe(net::Tick tick, std::span<const IdsEvent> tick_packets);
    const AnomalyModel& model() const { return model_; }

private:
    AnomalyModel model_;
    net::NodeId victim_;
    bool armed_{true};
};

}  // namespace activetrace::defense
