#pragma once

// Ground states and real-time propagation for the quintic mean-field
// equation and for the N-orbital representation of the Tonks-Girardeau gas.

#include <cstddef>
#include <functional>
#include <vector>

#include "tgsta/grid.hpp"
#include "tgsta/ramp.hpp"

namespace tgsta {

/// V_i = 1/2 omega_sq (x_i^2 + gamma x_i^4). omega_sq may be negative.
std::vector<double> trap_potential(const SpatialGrid& grid, double omega_sq, double gamma);

struct MeanFieldState {
  ComplexField field;
  double particle_number = 0.0;
  double time = 0.0;
};

struct OrbitalSet {
  std::vector<ComplexField> orbitals;
  double time = 0.0;
  /// Eigenvalues when the set came from ground_orbitals; empty otherwise.
  std::vector<double> energies;

  std::size_t size() const { return orbitals.size(); }
};

/// E[psi] = int 1/2 |psi'|^2 + V |psi|^2 + pi^2/6 |psi|^6 dx.
double mean_field_energy(const ComplexField& psi, double omega_sq, double gamma);

/// <phi| -1/2 d^2/dx^2 + V |phi>.
double single_particle_energy(const ComplexField& phi, double omega_sq, double gamma);

/// Sum of single-particle energies.
double total_energy(const OrbitalSet& set, double omega_sq, double gamma);

/// max |<phi_l, phi_m> - delta_lm|.
double gram_deviation(const OrbitalSet& set);

struct ImaginaryTimeOptions {
  /// Successive imaginary time steps; the last one sets the splitting bias.
  std::vector<double> steps{1e-2, 1e-3, 1e-4};
  /// Each stage runs at least this much imaginary time.
  double min_time_per_stage = 3.0;
  /// Converged when |E_{k+1} - E_k| / |E_k| falls below this (per step).
  double energy_tolerance = 1e-12;
  std::size_t max_steps_per_stage = 2'000'000;
  /// Called after every step with (stage, step, energy).
  std::function<void(std::size_t, std::size_t, double)> observer;
};

/// Mean-field ground state by normalized imaginary-time split-step
/// evolution from a Thomas-Fermi initial guess. The result is real and
/// non-negative. Throws ConvergenceError if a stage hits max steps.
MeanFieldState ground_state_mf(const SpatialGrid& grid, double N, double omega_sq, double gamma,
                               const ImaginaryTimeOptions& options = {});

/// The N lowest eigenstates of -1/2 d^2/dx^2 + V on the grid, by dense
/// diagonalization of the Fourier-spectral Hamiltonian. Orbitals are real,
/// orthonormal, and sign-fixed so that their leftmost significant lobe is
/// positive. Throws ConvergenceError on eigensolver failure and MonitorTrip
/// if the highest orbital is not resolved or touches the box edges.
OrbitalSet ground_orbitals(const SpatialGrid& grid, int N, double omega_sq, double gamma);

struct TimeStepPolicy {
  /// dt <= 0.1 dx^2 / pi * safety.
  double safety = 5.0;
  double dt_cap = 1e-3;
  /// dt <= t_f / min_steps.
  double min_steps = 2000.0;
  /// dt <= max_potential_phase / (max_t |omega^2| x_edge^2).
  double max_potential_phase = 0.5;
};

/// Largest admissible step for propagating `schedule` on `grid`.
double max_time_step(const SpatialGrid& grid, const RampSchedule& schedule,
                     const TimeStepPolicy& policy = {});

struct EvolveOptions {
  /// Check edge-mass and spectral-tail monitors every this many steps (and
  /// at the end). 0 checks only at the end.
  std::size_t monitor_interval = 2000;
  /// Reject steps above max_time_step(). Disable only for convergence
  /// studies that deliberately use coarse steps.
  bool enforce_policy = true;
  TimeStepPolicy policy{};
  /// Worker threads for orbital propagation; 0 picks hardware concurrency.
  std::size_t threads = 1;
  /// If set, called every `snapshot_interval` steps (and at t = 0, t_f)
  /// with the current time and density.
  std::size_t snapshot_interval = 0;
  std::function<void(double, const std::vector<double>&)> snapshot;
};

/// Strang split-step propagation of the quintic mean-field equation over the
/// schedule's [0, t_f]. The requested dt is rounded down to t_f / steps.
/// Throws std::invalid_argument if dt violates the policy and MonitorTrip
/// if a validity monitor trips.
MeanFieldState evolve_mf(MeanFieldState state, const RampSchedule& schedule, double dt,
                         const EvolveOptions& options = {});

/// Linear split-step propagation of every orbital under the same schedule.
/// No re-orthogonalization is performed.
OrbitalSet evolve_orbitals(OrbitalSet set, const RampSchedule& schedule, double dt,
                           const EvolveOptions& options = {});

/// Number of steps and the actual step used for a requested dt.
struct StepPlan {
  std::size_t steps;
  double dt;
};
StepPlan plan_steps(double t_f, double requested_dt);

}  // namespace tgsta
