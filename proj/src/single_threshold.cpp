#include "taoi/single_threshold.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "taoi/brent.hpp"

namespace taoi {

DtmcBlocks build_blocks(const SystemParams& params, const DerivedParams& derived) {
    params.validate();
    const double g = derived.g;
    const RowVector2 marginal{1.0 - g, g};

    DtmcBlocks b;
    b.a_blk << marginal, marginal;
    // reset/fail weights per current F; next F is drawn from the marginal
    b.b_blk.row(0) = derived.reset_prob(0) * marginal;
    b.b_blk.row(1) = derived.reset_prob(1) * marginal;
    b.c_blk.row(0) = derived.fail_prob(0) * marginal;
    b.c_blk.row(1) = derived.fail_prob(1) * marginal;
    return b;
}

namespace {

RowVector2 head_at(double omega, const DtmcBlocks& blocks, const DerivedParams& derived,
                   const SystemParams& params) {
    if (omega < params.t_u)
        throw std::invalid_argument("phi_head: omega must be >= t_u");
    const Matrix2 i_minus_c = Matrix2::Identity() - blocks.c_blk;
    if (std::abs(i_minus_c.determinant()) < 1e-15)
        throw std::runtime_error("phi_head: I - C is singular (q = 0 chain never resets)");
    const RowVector2 marginal{1.0 - derived.g, derived.g};
    const Eigen::Vector2d ones = Eigen::Vector2d::Ones();
    const double tail = (marginal * i_minus_c.inverse() * ones).value();
    return marginal / ((omega - params.t_u) + tail);
}

}  // namespace

StationaryHead phi_head(int omega, const DtmcBlocks& blocks, const DerivedParams& derived,
                        const SystemParams& params) {
    return StationaryHead{head_at(omega, blocks, derived, params)};
}

double average_cost_j(double omega, const SystemParams& params) {
    const DerivedParams derived = derive(params);
    const DtmcBlocks blocks = build_blocks(params, derived);
    const RowVector2 phi = head_at(omega, blocks, derived, params);

    const double t_u = params.t_u;
    const Matrix2 inv = (Matrix2::Identity() - blocks.c_blk).inverse();
    const Eigen::Vector2d ones = Eigen::Vector2d::Ones();

    const double climb = 0.5 * (omega * omega - omega - t_u * t_u + t_u) * phi.sum();
    const double base = omega * (phi * inv * ones).value();
    const double tail = t_u * (phi * blocks.c_blk * inv * inv * ones).value();
    return climb + base + tail;
}

ThresholdSearch optimize_threshold(const SystemParams& params, int omega_max) {
    params.validate();
    if (omega_max < params.t_u)
        throw std::invalid_argument("optimize_threshold: omega_max must be >= t_u");

    // Everything except omega is loop-invariant: with s1 = m (I-C)^{-1} 1 and
    // s2 = m C (I-C)^{-2} 1 for the marginal row m, the cost reduces to a
    // rational function of omega.
    const DerivedParams derived = derive(params);
    const DtmcBlocks blocks = build_blocks(params, derived);
    const Matrix2 inv = (Matrix2::Identity() - blocks.c_blk).inverse();
    const Eigen::Vector2d ones = Eigen::Vector2d::Ones();
    const RowVector2 marginal{1.0 - derived.g, derived.g};
    const double s1 = (marginal * inv * ones).value();
    const double s2 = (marginal * blocks.c_blk * inv * inv * ones).value();
    const double t_u = params.t_u;

    ThresholdSearch out;
    const auto j = [&](double omega) {
        return (0.5 * (omega * omega - omega - t_u * t_u + t_u) + omega * s1 + t_u * s2) /
               ((omega - t_u) + s1);
    };

    const BrentResult br = brent_minimize(j, params.t_u, omega_max, 1e-10);
    out.brent_x = br.x;
    const int lo = std::max(params.t_u, static_cast<int>(std::floor(br.x)));
    const int hi = std::min(omega_max, lo + 1);
    out.brent_omega = j(lo) <= j(hi) ? lo : hi;

    // exhaustive scan guards against a non-global Brent bracket
    double best = std::numeric_limits<double>::infinity();
    int best_omega = params.t_u;
    for (int omega = params.t_u; omega <= omega_max; ++omega) {
        const double value = j(omega);
        if (value < best) {
            best = value;
            best_omega = omega;
        }
    }
    out.scan_omega = best_omega;

    out.omega_star = j(out.brent_omega) < best ? out.brent_omega : best_omega;
    if (j(out.brent_omega) == best) out.omega_star = std::min(out.brent_omega, best_omega);
    out.j_star = average_cost_j(out.omega_star, params);
    return out;
}

}  // namespace taoi
