#pragma once

#include <Eigen/Core>

#include "taoi/model.hpp"

namespace taoi {

using Matrix2 = Eigen::Matrix2d;
using RowVector2 = Eigen::RowVector2d;

/// 2x2 blocks of the age-aggregated chain induced by a single-threshold
/// policy (cap taken to infinity). Row/column order is F = 0 then F = 1.
/// a_blk: climb step below the threshold; b_blk: reset on a successful
/// monitoring epoch; c_blk: failed transmission step.
struct DtmcBlocks {
    Matrix2 a_blk;
    Matrix2 b_blk;
    Matrix2 c_blk;
};

/// Stationary weight of the aggregated reset level (age = t_u).
struct StationaryHead {
    RowVector2 phi_tu;
};

DtmcBlocks build_blocks(const SystemParams& params, const DerivedParams& derived);

/// phi_tu = [1-g, g] / ((omega - t_u) + [1-g, g] (I-C)^{-1} 1).
/// Requires omega >= t_u and sp(C) < 1 (holds whenever q > 0).
StationaryHead phi_head(int omega, const DtmcBlocks& blocks, const DerivedParams& derived,
                        const SystemParams& params);

/// Average age at decision epochs of the single-threshold policy, evaluated
/// in closed form from the aggregated chain. Defined for real omega >= t_u
/// so a continuous relaxation can be searched; integer omega is the model.
double average_cost_j(double omega, const SystemParams& params);

struct ThresholdSearch {
    int omega_star = 0;   // integer minimizer, smallest on ties
    double j_star = 0.0;
    double brent_x = 0.0; // continuous Brent minimizer
    int brent_omega = 0;  // best of its floor/ceil neighbors
    int scan_omega = 0;   // exhaustive integer scan result
};

/// Brent search on the continuous relaxation over [t_u, omega_max], refined
/// to the neighboring integers and cross-checked by a full integer scan.
ThresholdSearch optimize_threshold(const SystemParams& params, int omega_max);

/// Default search ceiling: generous multiple of the transmission length.
inline int default_omega_max(const SystemParams& params) { return 11 * params.t_u + 100; }

}  // namespace taoi
