#include "taoi/policy.hpp"

#include <json.hpp>
#include <stdexcept>

namespace taoi {

Policy Policy::always_transmit() {
    Policy p;
    p.kind_ = Kind::AlwaysTransmit;
    p.omega0_ = 1;
    p.omega1_ = 1;
    return p;
}

Policy Policy::pre_identification() {
    Policy p;
    p.kind_ = Kind::PreIdentification;
    p.omega0_ = std::nullopt;
    p.omega1_ = 1;
    return p;
}

Policy Policy::single_threshold(int omega) {
    if (omega < 1) throw std::invalid_argument("Policy: threshold must be >= 1");
    Policy p;
    p.kind_ = Kind::SingleThreshold;
    p.omega0_ = omega;
    p.omega1_ = omega;
    return p;
}

Policy Policy::threshold_pair(std::optional<int> omega0, std::optional<int> omega1) {
    if ((omega0 && *omega0 < 1) || (omega1 && *omega1 < 1))
        throw std::invalid_argument("Policy: thresholds must be >= 1");
    Policy p;
    p.kind_ = Kind::ThresholdPair;
    p.omega0_ = omega0;
    p.omega1_ = omega1;
    return p;
}

Policy Policy::table(Eigen::ArrayXXi actions) {
    if (actions.cols() != 2 || actions.rows() < 1)
        throw std::invalid_argument("Policy: table must be delta_cap x 2");
    if ((actions < 0).any() || (actions > 1).any())
        throw std::invalid_argument("Policy: table entries must be 0 or 1");
    Policy p;
    p.kind_ = Kind::Table;
    p.actions_ = std::move(actions);
    return p;
}

Action Policy::action(const State& s) const {
    if (kind_ == Kind::Table) {
        if (s.delta < 1 || s.delta > actions_.rows())
            throw std::out_of_range("Policy: delta outside table");
        return static_cast<Action>(actions_(s.delta - 1, s.f));
    }
    const auto& omega = s.f ? omega1_ : omega0_;
    return (omega && s.delta >= *omega) ? Action::Transmit : Action::Idle;
}

Eigen::ArrayXXi Policy::to_table(int delta_cap) const {
    if (kind_ == Kind::Table) {
        if (actions_.rows() != delta_cap)
            throw std::invalid_argument("Policy: table size does not match delta_cap");
        return actions_;
    }
    Eigen::ArrayXXi t(delta_cap, 2);
    for (int d = 1; d <= delta_cap; ++d)
        for (int f = 0; f < 2; ++f) t(d - 1, f) = static_cast<int>(action(State{d, f}));
    return t;
}

std::string Policy::kind_name() const {
    switch (kind_) {
        case Kind::AlwaysTransmit: return "always_transmit";
        case Kind::PreIdentification: return "pre_identification";
        case Kind::SingleThreshold: return "single_threshold";
        case Kind::ThresholdPair: return "threshold_pair";
        case Kind::Table: return "table";
    }
    return "?";
}

namespace {

nlohmann::json omega_json(std::optional<int> omega) {
    if (omega) return *omega;
    return nullptr;
}

}  // namespace

std::string policy_to_json(const Policy& p) {
    nlohmann::json j;
    j["type"] = p.kind_name();
    j["omega0"] = omega_json(p.omega0());
    j["omega1"] = omega_json(p.omega1());
    if (p.kind() == Policy::Kind::Table) {
        auto rows = nlohmann::json::array();
        const auto& a = p.actions();
        for (int d = 1; d <= a.rows(); ++d)
            for (int f = 0; f < 2; ++f) rows.push_back({d, f, a(d - 1, f)});
        j["table"] = rows;
    } else {
        j["table"] = nullptr;
    }
    return j.dump();
}

Policy policy_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    const std::string type = j.at("type").get<std::string>();
    auto omega = [&](const char* key) -> std::optional<int> {
        if (j.at(key).is_null()) return std::nullopt;
        return j.at(key).get<int>();
    };
    if (type == "always_transmit") return Policy::always_transmit();
    if (type == "pre_identification") return Policy::pre_identification();
    if (type == "single_threshold") {
        auto o = omega("omega0");
        if (!o) throw std::invalid_argument("policy json: single_threshold needs omega0");
        return Policy::single_threshold(*o);
    }
    if (type == "threshold_pair") return Policy::threshold_pair(omega("omega0"), omega("omega1"));
    if (type == "table") {
        const auto& rows = j.at("table");
        int max_delta = 0;
        for (const auto& r : rows) max_delta = std::max(max_delta, r.at(0).get<int>());
        if (max_delta < 1) throw std::invalid_argument("policy json: empty table");
        Eigen::ArrayXXi a = Eigen::ArrayXXi::Constant(max_delta, 2, -1);
        for (const auto& r : rows) a(r.at(0).get<int>() - 1, r.at(1).get<int>()) = r.at(2).get<int>();
        if ((a < 0).any()) throw std::invalid_argument("policy json: table has gaps");
        return Policy::table(std::move(a));
    }
    throw std::invalid_argument("policy json: unknown type '" + type + "'");
}

}  // namespace taoi
