#include "tgsta/dynamics.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <exception>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "tgsta/errors.hpp"
#include "tgsta/fft.hpp"

namespace tgsta {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kQuinticCoupling = 0.5 * kPi * kPi;  // pi^2/2 |psi|^4

// x^2 + gamma x^4 on the grid; the time-dependent potential is 1/2 omega^2 times this.
std::vector<double> trap_shape(const SpatialGrid& grid, double gamma) {
  std::vector<double> u(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double x2 = grid.x(i) * grid.x(i);
    u[i] = x2 + gamma * x2 * x2;
  }
  return u;
}

// 1/2 sum_k k^2 |f_k|^2 * dx / n, i.e. 1/2 int |f'|^2.
double kinetic_energy(const ComplexField& f) {
  std::vector<complex_t> spec(f.values().begin(), f.values().end());
  thread_local_plan(spec.size()).forward(spec);
  const auto k = f.grid().wavenumbers();
  double sum = 0.0;
  for (std::size_t i = 0; i < spec.size(); ++i) sum += k[i] * k[i] * std::norm(spec[i]);
  return 0.5 * sum * f.grid().dx() / static_cast<double>(spec.size());
}

// Energy functional and chemical potential
// mu = (int 1/2 |psi'|^2 + V |psi|^2 + pi^2/2 |psi|^6) / N.
std::pair<double, double> energy_and_mu(const ComplexField& psi, const std::vector<double>& v,
                                        double N) {
  double lin = 0.0;
  double six = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double rho = std::norm(psi[i]);
    lin += v[i] * rho;
    six += rho * rho * rho;
  }
  const double kin = kinetic_energy(psi);
  const double dx = psi.grid().dx();
  const double inter = kPi * kPi / 6.0 * six * dx;
  return {kin + lin * dx + inter, (kin + lin * dx + 3.0 * inter) / N};
}

// exp(-i k^2 dt / 2) / n, folding the inverse-FFT normalization.
std::vector<complex_t> kinetic_propagator(const SpatialGrid& grid, double dt) {
  const auto k = grid.wavenumbers();
  const double inv_n = 1.0 / static_cast<double>(grid.size());
  std::vector<complex_t> out(grid.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::polar(inv_n, -0.5 * k[i] * k[i] * dt);
  return out;
}

void apply_kinetic(std::span<complex_t> v, std::span<const complex_t> kin, const FftPlan& plan) {
  plan.forward(v);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] *= kin[i];
  plan.backward(v);
}

void check_all(const std::vector<ComplexField>& fields, double t, const char* model) {
  for (std::size_t j = 0; j < fields.size(); ++j) {
    std::ostringstream ctx;
    ctx << model << " field " << j << " at t=" << t;
    check_field_validity(fields[j], ctx.str());
  }
}

std::size_t resolve_threads(std::size_t requested, std::size_t work) {
  std::size_t t = requested == 0 ? std::max(1u, std::thread::hardware_concurrency()) : requested;
  return std::max<std::size_t>(1, std::min(t, work));
}

void validate_step(const SpatialGrid& grid, const RampSchedule& schedule, double dt,
                   const EvolveOptions& options) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("evolve: dt must be positive");
  if (!options.enforce_policy) return;
  const double limit = max_time_step(grid, schedule, options.policy);
  if (plan_steps(schedule.t_f(), dt).dt > limit * (1.0 + 1e-9)) {
    std::ostringstream msg;
    msg << "evolve: dt=" << dt << " exceeds the time-step policy limit " << limit;
    throw std::invalid_argument(msg.str());
  }
}

}  // namespace

std::vector<double> trap_potential(const SpatialGrid& grid, double omega_sq, double gamma) {
  auto v = trap_shape(grid, gamma);
  for (auto& e : v) e *= 0.5 * omega_sq;
  return v;
}

double mean_field_energy(const ComplexField& psi, double omega_sq, double gamma) {
  const auto v = trap_potential(psi.grid(), omega_sq, gamma);
  double pot = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double rho = std::norm(psi[i]);
    pot += v[i] * rho + (kPi * kPi / 6.0) * rho * rho * rho;
  }
  return kinetic_energy(psi) + pot * psi.grid().dx();
}

double single_particle_energy(const ComplexField& phi, double omega_sq, double gamma) {
  const auto v = trap_potential(phi.grid(), omega_sq, gamma);
  double pot = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) pot += v[i] * std::norm(phi[i]);
  return kinetic_energy(phi) + pot * phi.grid().dx();
}

double total_energy(const OrbitalSet& set, double omega_sq, double gamma) {
  double e = 0.0;
  for (const auto& phi : set.orbitals) e += single_particle_energy(phi, omega_sq, gamma);
  return e;
}

double gram_deviation(const OrbitalSet& set) {
  double worst = 0.0;
  for (std::size_t l = 0; l < set.size(); ++l) {
    for (std::size_t m = l; m < set.size(); ++m) {
      const complex_t g = inner_product(set.orbitals[l], set.orbitals[m]);
      worst = std::max(worst, std::abs(g - (l == m ? 1.0 : 0.0)));
    }
  }
  return worst;
}

MeanFieldState ground_state_mf(const SpatialGrid& grid, double N, double omega_sq, double gamma,
                               const ImaginaryTimeOptions& options) {
  if (!(N > 0.0)) throw std::invalid_argument("ground_state_mf: N must be positive");
  if (!(omega_sq > 0.0)) throw std::invalid_argument("ground_state_mf: need omega_sq > 0");
  if (options.steps.empty()) throw std::invalid_argument("ground_state_mf: no imaginary time steps");

  const std::size_t n = grid.size();
  const auto v = trap_potential(grid, omega_sq, gamma);
  // Thomas-Fermi initial guess: pi^2 |psi|^4 / 2 = mu - V.
  const double mu = tf_chemical_potential(N, gamma, omega_sq);
  ComplexField psi(grid);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = std::max(0.0, 2.0 * (mu - v[i]));
    psi[i] = std::pow(r / (kPi * kPi), 0.25);
  }
  auto renormalize = [&] {
    const double s = std::sqrt(N / norm(psi));
    for (auto& e : psi.values()) e = complex_t(e.real() * s, 0.0);
  };
  renormalize();

  const auto& plan = thread_local_plan(n);
  auto [energy, mu_now] = energy_and_mu(psi, v, N);

  for (std::size_t stage = 0; stage < options.steps.size(); ++stage) {
    const double dtau = options.steps[stage];
    if (!(dtau > 0.0)) throw std::invalid_argument("ground_state_mf: imaginary steps must be > 0");
    const auto k = grid.wavenumbers();
    std::vector<double> kin(n);
    for (std::size_t i = 0; i < n; ++i) kin[i] = std::exp(-0.5 * k[i] * k[i] * dtau) / n;
    const auto min_steps = static_cast<std::size_t>(std::ceil(options.min_time_per_stage / dtau));

    // Exact flow of d psi / d tau = -(V - mu + g |psi|^4) psi over dtau / 2.
    // With w = |psi|^-4 it is linear: dw/dtau = 4 (V - mu) w + 4 g. The mu
    // shift keeps the norm fixed within the step; without it, or with
    // |psi|^4 frozen, the second half-step would see a different amplitude
    // and the fixed point would be biased at O(dtau).
    const double h = 0.5 * dtau;
    std::vector<double> growth(n), source(n);
    auto prepare = [&](double mu_now) {
      const double shift = std::exp(-4.0 * mu_now * h);
      for (std::size_t i = 0; i < n; ++i) {
        const double a = 4.0 * (v[i] - mu_now) * h;
        growth[i] = std::exp(4.0 * v[i] * h) * shift;
        source[i] = std::abs(a) > 1e-6 ? kQuinticCoupling * (growth[i] - 1.0) / (v[i] - mu_now)
                                        : 4.0 * kQuinticCoupling * h * (1.0 + 0.5 * a);
      }
    };
    auto half_potential = [&] {
      for (std::size_t i = 0; i < n; ++i) {
        const double rho = std::norm(psi[i]);
        psi[i] *= std::pow(growth[i] + source[i] * rho * rho, -0.25);
      }
    };

    bool converged = false;
    for (std::size_t step = 1; step <= options.max_steps_per_stage; ++step) {
      prepare(mu_now);
      half_potential();
      auto vals = psi.values();
      plan.forward(vals);
      for (std::size_t i = 0; i < n; ++i) vals[i] *= kin[i];
      plan.backward(vals);
      half_potential();
      renormalize();

      const auto [next, mu_next] = energy_and_mu(psi, v, N);
      mu_now = mu_next;
      if (options.observer) options.observer(stage, step, next);
      const double change = std::abs(next - energy) / std::abs(next);
      energy = next;
      if (step >= min_steps && change < options.energy_tolerance) {
        converged = true;
        break;
      }
    }
    if (!converged) {
      std::ostringstream msg;
      msg << "ground_state_mf: imaginary-time stage " << stage << " (dtau=" << dtau
          << ") did not converge in " << options.max_steps_per_stage << " steps";
      throw ConvergenceError(msg.str());
    }
  }

  for (auto& e : psi.values()) e = std::abs(e);
  check_field_validity(psi, "ground_state_mf");
  return MeanFieldState{std::move(psi), N, 0.0};
}

namespace {

// Columns of an orthonormal basis adapted to the reflection x -> -x, which
// maps grid index i to (n - i) mod n on a box symmetric about 0. Each basis
// vector touches at most two grid points.
struct ParityBasis {
  std::vector<std::array<std::size_t, 2>> index;
  std::vector<std::array<double, 2>> coeff;
};

ParityBasis parity_basis(std::size_t n, bool even) {
  ParityBasis b;
  const double r = std::sqrt(0.5);
  if (even) {
    b.index.push_back({0, 0});
    b.coeff.push_back({1.0, 0.0});
  }
  for (std::size_t i = 1; i < n / 2; ++i) {
    b.index.push_back({i, n - i});
    b.coeff.push_back({r, even ? r : -r});
  }
  if (even) {
    b.index.push_back({n / 2, n / 2});
    b.coeff.push_back({1.0, 0.0});
  }
  return b;
}

struct Eigenpair {
  double value;
  std::vector<double> vector;
};

std::vector<Eigenpair> lowest_eigenpairs(const Eigen::MatrixXd& h, const ParityBasis* basis,
                                         std::size_t n, std::size_t count) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h);
  if (solver.info() != Eigen::Success) {
    throw ConvergenceError("ground_orbitals: eigensolver did not converge");
  }
  std::vector<Eigenpair> out;
  const auto m = std::min<std::size_t>(count, static_cast<std::size_t>(h.rows()));
  for (std::size_t j = 0; j < m; ++j) {
    const auto col = solver.eigenvectors().col(static_cast<Eigen::Index>(j));
    std::vector<double> v(n, 0.0);
    if (basis == nullptr) {
      for (std::size_t i = 0; i < n; ++i) v[i] = col(static_cast<Eigen::Index>(i));
    } else {
      for (std::size_t p = 0; p < basis->index.size(); ++p) {
        for (int a = 0; a < 2; ++a) v[basis->index[p][a]] += basis->coeff[p][a] * col(p);
      }
    }
    out.push_back({solver.eigenvalues()(static_cast<Eigen::Index>(j)), std::move(v)});
  }
  return out;
}

}  // namespace

OrbitalSet ground_orbitals(const SpatialGrid& grid, int N, double omega_sq, double gamma) {
  const std::size_t n = grid.size();
  if (N < 1 || static_cast<std::size_t>(N) > n) {
    throw std::invalid_argument("ground_orbitals: need 1 <= N <= n_points");
  }
  const auto count = static_cast<std::size_t>(N);

  // Circulant Fourier kinetic matrix: T_ij = t((i - j) mod n) with
  // t(d) = (1/n) sum_m (k_m^2 / 2) exp(i k_m d dx). Real because k^2 is even.
  std::vector<complex_t> col(n);
  const auto k = grid.wavenumbers();
  for (std::size_t i = 0; i < n; ++i) col[i] = 0.5 * k[i] * k[i];
  thread_local_plan(n).backward(col);
  const auto v = trap_potential(grid, omega_sq, gamma);
  auto h = [&](std::size_t i, std::size_t j) {
    return col[(i + n - j) % n].real() / static_cast<double>(n) + (i == j ? v[i] : 0.0);
  };

  std::vector<Eigenpair> pairs;
  const bool symmetric = std::abs(grid.x_min() + grid.x_max()) <= 1e-12 * grid.length();
  if (symmetric) {
    // The potential is even, so H splits into even and odd blocks.
    for (bool even : {true, false}) {
      const auto basis = parity_basis(n, even);
      const auto m = static_cast<Eigen::Index>(basis.index.size());
      Eigen::MatrixXd block(m, m);
      for (Eigen::Index q = 0; q < m; ++q) {
        for (Eigen::Index p = 0; p <= q; ++p) {
          double s = 0.0;
          for (int a = 0; a < 2; ++a) {
            for (int c = 0; c < 2; ++c) {
              s += basis.coeff[p][a] * basis.coeff[q][c] * h(basis.index[p][a], basis.index[q][c]);
            }
          }
          block(p, q) = s;
          block(q, p) = s;
        }
      }
      auto part = lowest_eigenpairs(block, &basis, n, count);
      for (auto& e : part) pairs.push_back(std::move(e));
    }
    std::sort(pairs.begin(), pairs.end(),
              [](const Eigenpair& a, const Eigenpair& b) { return a.value < b.value; });
    pairs.resize(count);
  } else {
    Eigen::MatrixXd full(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t i = 0; i < n; ++i) {
        full(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = h(i, j);
      }
    }
    pairs = lowest_eigenpairs(full, nullptr, n, count);
  }

  OrbitalSet set;
  set.orbitals.reserve(count);
  const double scale = 1.0 / std::sqrt(grid.dx());
  for (const auto& pair : pairs) {
    const auto& z = pair.vector;
    double peak = 0.0;
    for (double e : z) peak = std::max(peak, std::abs(e));
    double sign = 1.0;
    for (double e : z) {
      if (std::abs(e) > 0.05 * peak) {
        sign = e > 0.0 ? 1.0 : -1.0;
        break;
      }
    }
    ComplexField phi(grid);
    for (std::size_t i = 0; i < n; ++i) phi[i] = sign * scale * z[i];
    set.orbitals.push_back(std::move(phi));
    set.energies.push_back(pair.value);
  }
  check_field_validity(set.orbitals.back(), "ground_orbitals (highest orbital)");
  return set;
}

StepPlan plan_steps(double t_f, double requested_dt) {
  if (!(t_f > 0.0) || !(requested_dt > 0.0)) {
    throw std::invalid_argument("plan_steps: t_f and dt must be positive");
  }
  const auto steps =
      static_cast<std::size_t>(std::max(1.0, std::ceil(t_f / requested_dt * (1.0 - 1e-12))));
  return {steps, t_f / static_cast<double>(steps)};
}

double max_time_step(const SpatialGrid& grid, const RampSchedule& schedule,
                     const TimeStepPolicy& policy) {
  const double dx = grid.dx();
  double dt = 0.1 * dx * dx / kPi * policy.safety;
  dt = std::min(dt, policy.dt_cap);
  dt = std::min(dt, schedule.t_f() / policy.min_steps);
  const double x_edge = std::max(std::abs(grid.x_min()), std::abs(grid.x_max()));
  const double w = schedule.max_abs_omega_sq();
  if (w > 0.0) dt = std::min(dt, policy.max_potential_phase / (w * x_edge * x_edge));
  return dt;
}

MeanFieldState evolve_mf(MeanFieldState state, const RampSchedule& schedule, double dt,
                         const EvolveOptions& options) {
  const SpatialGrid& grid = state.field.grid();
  validate_step(grid, schedule, dt, options);
  const StepPlan sp = plan_steps(schedule.t_f(), dt);
  const std::size_t n = grid.size();
  const double gamma = schedule.trap().gamma;
  const auto shape = trap_shape(grid, gamma);
  const auto kin = kinetic_propagator(grid, sp.dt);
  const auto& plan = thread_local_plan(n);
  auto psi = state.field.values();

  auto density = [&] {
    std::vector<double> rho(n);
    for (std::size_t i = 0; i < n; ++i) rho[i] = std::norm(psi[i]);
    return rho;
  };
  auto half_phase = [&](double omega_sq) {
    const double a = -0.5 * sp.dt;
    for (std::size_t i = 0; i < n; ++i) {
      const double rho = std::norm(psi[i]);
      psi[i] *= std::polar(1.0, a * (0.5 * omega_sq * shape[i] + kQuinticCoupling * rho * rho));
    }
  };

  if (options.snapshot) options.snapshot(0.0, density());
  for (std::size_t s = 0; s < sp.steps; ++s) {
    const double w2 = schedule.omega_sq((static_cast<double>(s) + 0.5) * sp.dt);
    half_phase(w2);
    apply_kinetic(psi, kin, plan);
    half_phase(w2);
    const std::size_t done = s + 1;
    const double t = static_cast<double>(done) * sp.dt;
    if (options.monitor_interval && done % options.monitor_interval == 0 && done != sp.steps) {
      check_all({state.field}, t, "mean-field");
    }
    if (options.snapshot && options.snapshot_interval && done % options.snapshot_interval == 0 &&
        done != sp.steps) {
      options.snapshot(t, density());
    }
  }
  state.time = schedule.t_f();
  check_all({state.field}, state.time, "mean-field");
  if (options.snapshot) options.snapshot(state.time, density());
  return state;
}

OrbitalSet evolve_orbitals(OrbitalSet set, const RampSchedule& schedule, double dt,
                           const EvolveOptions& options) {
  if (set.orbitals.empty()) throw std::invalid_argument("evolve_orbitals: empty orbital set");
  const SpatialGrid& grid = set.orbitals.front().grid();
  for (const auto& phi : set.orbitals) {
    if (!(phi.grid() == grid)) throw std::invalid_argument("evolve_orbitals: grid mismatch");
  }
  validate_step(grid, schedule, dt, options);
  const StepPlan sp = plan_steps(schedule.t_f(), dt);
  const std::size_t n = grid.size();
  const auto shape = trap_shape(grid, schedule.trap().gamma);
  const auto kin = kinetic_propagator(grid, sp.dt);
  const std::size_t count = set.size();

  auto density = [&] {
    std::vector<double> rho(n, 0.0);
    for (const auto& phi : set.orbitals) {
      for (std::size_t i = 0; i < n; ++i) rho[i] += std::norm(phi[i]);
    }
    return rho;
  };

  // Orbitals evolve independently; each worker owns a contiguous block and
  // runs the whole time loop for it. The operation sequence per orbital does
  // not depend on the partition, so results are identical for any thread count.
  auto run_block = [&](std::size_t begin, std::size_t end, bool with_snapshots) {
    const auto& plan = thread_local_plan(n);
    std::vector<complex_t> phase(n);
    for (std::size_t s = 0; s < sp.steps; ++s) {
      const double w2 = schedule.omega_sq((static_cast<double>(s) + 0.5) * sp.dt);
      const double a = -0.25 * sp.dt * w2;
      for (std::size_t i = 0; i < n; ++i) phase[i] = std::polar(1.0, a * shape[i]);
      for (std::size_t j = begin; j < end; ++j) {
        auto v = set.orbitals[j].values();
        for (std::size_t i = 0; i < n; ++i) v[i] *= phase[i];
        apply_kinetic(v, kin, plan);
        for (std::size_t i = 0; i < n; ++i) v[i] *= phase[i];
      }
      const std::size_t done = s + 1;
      const double t = static_cast<double>(done) * sp.dt;
      if (options.monitor_interval && done % options.monitor_interval == 0 && done != sp.steps) {
        for (std::size_t j = begin; j < end; ++j) {
          std::ostringstream ctx;
          ctx << "orbital " << j << " at t=" << t;
          check_field_validity(set.orbitals[j], ctx.str());
        }
      }
      if (with_snapshots && options.snapshot_interval && done % options.snapshot_interval == 0 &&
          done != sp.steps) {
        options.snapshot(t, density());
      }
    }
  };

  if (options.snapshot) options.snapshot(0.0, density());
  const bool snapshots = static_cast<bool>(options.snapshot);
  const std::size_t workers = snapshots ? 1 : resolve_threads(options.threads, count);
  if (workers == 1) {
    run_block(0, count, snapshots);
  } else {
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = w * count / workers;
      const std::size_t end = (w + 1) * count / workers;
      pool.emplace_back([&, w, begin, end] {
        try {
          run_block(begin, end, false);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  set.time = schedule.t_f();
  set.energies.clear();
  check_all(set.orbitals, set.time, "orbital set");
  if (options.snapshot) options.snapshot(set.time, density());
  return set;
}

}  // namespace tgsta
