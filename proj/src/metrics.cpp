#include "tgsta/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "tgsta/ramp.hpp"

namespace tgsta {

DensityProfile make_density(const SpatialGrid& grid, std::vector<double> values) {
  if (values.size() != grid.size()) {
    throw std::invalid_argument("make_density: value count does not match grid");
  }
  double sum = 0.0;
  for (auto& v : values) {
    if (!std::isfinite(v)) throw std::invalid_argument("make_density: non-finite value");
    if (v < 0.0) {
      if (v < -1e-14) throw std::invalid_argument("make_density: negative density");
      v = 0.0;
    }
    sum += v;
  }
  const double total = sum * grid.dx();
  if (!(total > 0.0)) throw std::invalid_argument("make_density: total must be positive");
  return DensityProfile{grid, std::move(values), total};
}

DensityProfile density_mf(const MeanFieldState& state) {
  std::vector<double> rho(state.field.size());
  for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = std::norm(state.field[i]);
  return make_density(state.field.grid(), std::move(rho));
}

DensityProfile density_tg(const OrbitalSet& set) {
  if (set.orbitals.empty()) throw std::invalid_argument("density_tg: empty orbital set");
  const SpatialGrid& grid = set.orbitals.front().grid();
  std::vector<double> rho(grid.size(), 0.0);
  for (const auto& phi : set.orbitals) {
    if (!(phi.grid() == grid)) throw std::invalid_argument("density_tg: grid mismatch");
    for (std::size_t i = 0; i < rho.size(); ++i) rho[i] += std::norm(phi[i]);
  }
  return make_density(grid, std::move(rho));
}

DensityProfile tf_density(const SpatialGrid& grid, double N, double omega_sq, double gamma) {
  const double mu = tf_chemical_potential(N, gamma, omega_sq);
  std::vector<double> rho(grid.size());
  for (std::size_t i = 0; i < rho.size(); ++i) {
    const double x2 = grid.x(i) * grid.x(i);
    const double r = 2.0 * mu - omega_sq * (x2 + gamma * x2 * x2);
    rho[i] = r > 0.0 ? std::sqrt(r) / std::numbers::pi : 0.0;
  }
  auto profile = make_density(grid, std::move(rho));
  const double scale = N / profile.total;
  for (auto& v : profile.values) v *= scale;
  profile.total = N;
  return profile;
}

double density_overlap(const DensityProfile& a, const DensityProfile& b) {
  if (!(a.grid == b.grid)) throw std::invalid_argument("density_overlap: grid mismatch");
  if (!(a.total > 0.0) || !(b.total > 0.0)) {
    throw std::invalid_argument("density_overlap: densities must have positive total");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) sum += std::sqrt(a.values[i] * b.values[i]);
  const double overlap = sum * a.grid.dx() / std::sqrt(a.total * b.total);
  return std::clamp(overlap * overlap, 0.0, 1.0);
}

OverlapMatrix overlap_matrix(const OrbitalSet& final_set, const OrbitalSet& target) {
  if (final_set.size() != target.size()) {
    throw std::invalid_argument("overlap_matrix: orbital sets differ in size");
  }
  const auto n = static_cast<Eigen::Index>(final_set.size());
  OverlapMatrix a(n, n);
  for (Eigen::Index l = 0; l < n; ++l) {
    for (Eigen::Index m = 0; m < n; ++m) {
      a(l, m) = inner_product(final_set.orbitals[l], target.orbitals[m]);
    }
  }
  return a;
}

double log_abs_determinant(const OverlapMatrix& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("log_abs_determinant: not square");
  if (a.rows() == 0) return 0.0;
  Eigen::PartialPivLU<OverlapMatrix> lu(a);
  const auto& u = lu.matrixLU();
  double log_det = 0.0;
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    const double m = std::abs(u(i, i));
    if (m == 0.0) return -std::numeric_limits<double>::infinity();
    log_det += std::log(m);
  }
  return log_det;
}

double log_many_body_fidelity(const OrbitalSet& final_set, const OrbitalSet& target) {
  return 2.0 * log_abs_determinant(overlap_matrix(final_set, target));
}

double many_body_fidelity(const OrbitalSet& final_set, const OrbitalSet& target) {
  const double f = std::exp(log_many_body_fidelity(final_set, target));
  return std::max(0.0, f);
}

std::size_t count_local_maxima(const DensityProfile& rho, double relative_floor) {
  const auto& v = rho.values;
  const double peak = *std::max_element(v.begin(), v.end());
  std::size_t count = 0;
  for (std::size_t i = 1; i + 1 < v.size(); ++i) {
    if (v[i] > v[i - 1] && v[i] > v[i + 1] && v[i] > relative_floor * peak) ++count;
  }
  return count;
}

}  // namespace tgsta
