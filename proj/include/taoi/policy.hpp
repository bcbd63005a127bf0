#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>

#include "taoi/model.hpp"

namespace taoi {

/// Stationary deterministic decision rule in one of four closed forms or as
/// an explicit per-state table. Threshold forms transmit iff delta >= omega
/// for the matching pre-identification value; an absent omega means "never".
class Policy {
public:
    enum class Kind { AlwaysTransmit, PreIdentification, SingleThreshold, ThresholdPair, Table };

    static Policy always_transmit();
    static Policy pre_identification();
    static Policy single_threshold(int omega);
    static Policy threshold_pair(std::optional<int> omega0, std::optional<int> omega1);
    /// actions: delta_cap x 2 array of {0,1}, column index = F.
    static Policy table(Eigen::ArrayXXi actions);

    Kind kind() const { return kind_; }
    Action action(const State& s) const;

    /// Thresholds of the closed forms (nullopt for Table or "never transmit").
    std::optional<int> omega0() const { return omega0_; }
    std::optional<int> omega1() const { return omega1_; }

    /// Explicit action table; only present for Kind::Table.
    const Eigen::ArrayXXi& actions() const { return actions_; }

    /// Materializes any representation as a delta_cap x 2 action table.
    Eigen::ArrayXXi to_table(int delta_cap) const;

    std::string kind_name() const;

private:
    Policy() = default;
    Kind kind_ = Kind::AlwaysTransmit;
    std::optional<int> omega0_;
    std::optional<int> omega1_;
    Eigen::ArrayXXi actions_;
};

/// JSON shape: {"type": ..., "omega0": n|null, "omega1": n|null,
/// "table": [[delta,f,a], ...]|null}.
std::string policy_to_json(const Policy& p);
Policy policy_from_json(const std::string& text);

}  // namespace taoi
