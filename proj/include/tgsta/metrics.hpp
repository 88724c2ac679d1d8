#pragma once

// Figures of merit: densities, the Thomas-Fermi reference profile, the
// density overlap and the many-body fidelity of Slater-determinant states.

#include <Eigen/Dense>
#include <vector>

#include "tgsta/dynamics.hpp"
#include "tgsta/grid.hpp"

namespace tgsta {

struct DensityProfile {
  SpatialGrid grid;
  std::vector<double> values;
  /// dx * sum values.
  double total = 0.0;
};

/// Builds a profile, clipping round-off negatives down to -1e-14. Throws
/// std::invalid_argument for larger negative values or a non-positive total.
DensityProfile make_density(const SpatialGrid& grid, std::vector<double> values);

/// |psi|^2.
DensityProfile density_mf(const MeanFieldState& state);

/// sum_j |phi_j|^2.
DensityProfile density_tg(const OrbitalSet& set);

/// (1/pi) sqrt(max(0, 2 mu - omega^2 (x^2 + gamma x^4))), then rescaled so the
/// discrete total is exactly N.
DensityProfile tf_density(const SpatialGrid& grid, double N, double omega_sq, double gamma);

/// (dx sum sqrt(a_i b_i))^2 with both densities first normalized to unit
/// total. Result lies in [0, 1].
double density_overlap(const DensityProfile& a, const DensityProfile& b);

/// A_lm = <phi_l(t_f), phi^T_m>.
using OverlapMatrix = Eigen::MatrixXcd;

OverlapMatrix overlap_matrix(const OrbitalSet& final_set, const OrbitalSet& target);

/// log |det A|, via partial-pivot LU with log-magnitude accumulation.
double log_abs_determinant(const OverlapMatrix& a);

/// |det A|^2, computed as exp(2 log|det A|) so that deep orthogonality does
/// not underflow prematurely. Throws std::invalid_argument on size mismatch.
double many_body_fidelity(const OrbitalSet& final_set, const OrbitalSet& target);

/// log of the fidelity (finite even when the fidelity underflows to 0).
double log_many_body_fidelity(const OrbitalSet& final_set, const OrbitalSet& target);

/// Number of strict interior local maxima of a profile whose height exceeds
/// `relative_floor` times the global maximum.
std::size_t count_local_maxima(const DensityProfile& rho, double relative_floor = 1e-3);

}  // namespace tgsta
