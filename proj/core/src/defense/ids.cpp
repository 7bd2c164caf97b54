#include "activetrace/defense/ids.hpp"

#include <cmath>

#include <fmt/format.h>

namespace activetrace::defense {

std::string_view to_string(AlertClass c) {
    return c == AlertClass::DoSFlood ? "DoSFlood" : "UnauthorizedAccess";
}

std::optional<AlertClass> parse_alert_class(std::string_view text) {
    if (text == "DoSFlood") return AlertClass::DoSFlood;
    if (text == "UnauthorizedAccess") return AlertClass::UnauthorizedAccess;
    return std::nullopt;
}

bool glob_match(std::string_view pattern, std::string_view text) {
    std::size_t p = 0, t = 0, star = std::string_view::npos, mark = 0;
    while (t < text.size()) {
        if (p < pattern.size() && pattern[p] == '*') {
            star = p++;
            mark = t;
        } else if (p < pattern.size() && pattern[p] == text[t]) {
            ++p;
            ++t;
        } else if (star != std::string_view::npos) {
            p = star + 1;
            t = ++mark;
        } else {
            return false;
        }
    }
    while (p < pattern.size() && pattern[p] == '*') ++p;
    return p == pattern.size();
}

void Signature::validate() const {
    if (threshold < 1) throw InvalidSignature(fmt::format("signature '{}': threshold must be >= 1", id));
    if (window < 1) throw InvalidSignature(fmt::format("signature '{}': window must be >= 1", id));
    if (pattern.empty()) throw InvalidSignature(fmt::format("signature '{}': empty pattern", id));
}

SignatureDetector::SignatureDetector(Signature sig, net::NodeId victim) : sig_(std::move(sig)), victim_(victim) {
    sig_.validate();
}

std::optional<Alert> SignatureDetector::observe(const IdsEvent& e) {
    while (!matches_.empty() && e.tick - matches_.front().tick >= sig_.window) matches_.pop_front();
    const bool is_match = glob_match(sig_.pattern, e.header.payload_tag);
    const bool is_then = sig_.then && glob_match(*sig_.then, e.header.payload_tag);
    if (is_then) {
        if (matches_.size() < sig_.threshold) return std::nullopt;
        Alert a{0, sig_.cls, victim_, e.tick, "signature:" + sig_.id, {matches_.begin(), matches_.end()}};
        a.evidence.push_back(e);
        matches_.clear();
        return a;
    }
    if (!is_match) return std::nullopt;
    matches_.push_back(e);
    if (sig_.then || matches_.size() < sig_.threshold) return std::nullopt;
    Alert a{0, sig_.cls, victim_, e.tick, "signature:" + sig_.id, {matches_.begin(), matches_.end()}};
    matches_.clear();
    return a;
}

std::optional<Alert> detect_signature(const Signature& sig, std::span<const IdsEvent> stream, net::NodeId victim) {
    SignatureDetector d(sig, victim);
    for (const auto& e : stream)
        if (auto a = d.observe(e)) return a;
    return std::nullopt;
}

AnomalyModel::AnomalyModel(AnomalyParams params) : params_(params) {
    if (!(params_.alpha > 0.0 && params_.alpha <= 1.0)) throw Error("anomaly alpha must be in (0, 1]");
    if (params_.k < 0.0 || params_.floor < 0.0) throw Error("anomaly k and floor must be non-negative");
}

void AnomalyModel::update(double rate) {
    if (observations_ == 0) {
        mean_ = rate;
        variance_ = 0.0;
    } else {
        const double diff = rate - mean_;
        const double incr = params_.alpha * diff;
        mean_ += incr;
        variance_ = (1.0 - params_.alpha) * (variance_ + diff * incr);
    }
    ++observations_;
}

double AnomalyModel::deviation() const { return std::sqrt(variance_); }

bool AnomalyModel::is_anomalous(double rate) const {
    if (!warm())
        throw ColdStart(fmt::format("anomaly model has {} of {} warmup observations", observations_, params_.warmup));
    return rate > mean_ + params_.k * deviation() && rate > params_.floor;
}

std::optional<Alert> detect_anomaly(AnomalyModel& model, net::Tick tick, std::span<const IdsEvent> tick_packets,
                                    net::NodeId victim) {
    const auto rate = static_cast<double>(tick_packets.size());
    const bool anomalous = model.is_anomalous(rate);
    model.update(rate);
    if (!anomalous) return std::nullopt;
    return Alert{0, AlertClass::DoSFlood, victim, tick, "anomaly", {tick_packets.begin(), tick_packets.end()}};
}

std::optional<Alert> AnomalyDetector::observe(net::Tick tick, std::span<const IdsEvent> tick_packets) {
    if (!model_.warm()) {
        model_.update(static_cast<double>(tick_packets.size()));
        return std::nullopt;
    }
    auto alert = detect_anomaly(model_, tick, tick_packets, victim_);
    if (!alert) {
        armed_ = true;
        return std::nullopt;
    }
    if (!armed_) return std::nullopt;
    armed_ = false;
    return alert;
}

}  // namespace activetrace::defense
