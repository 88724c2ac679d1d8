#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "tgsta/dynamics.hpp"
#include "tgsta/errors.hpp"
#include "tgsta/metrics.hpp"

using namespace tgsta;
using std::numbers::pi;

namespace {

const SpatialGrid& test_grid() {
  static const SpatialGrid g = make_grid(-16, 16, 512);
  return g;
}

RampSchedule static_trap(double omega_sq, double t_f) {
  return reference_ramp(TrapSpec{omega_sq, omega_sq, 0.0, t_f});
}

RampSchedule harmonic_sta(double t_f) { return ermakov_ramp(TrapSpec{1.0, 10.0, 0.0, t_f}); }

double l2_diff(const ComplexField& a, const ComplexField& b) { return std::sqrt(norm(a - b)); }

double max_density_diff(const ComplexField& a, const ComplexField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::abs(std::norm(a[i]) - std::norm(b[i])));
  }
  return m;
}

}  // namespace

TEST_CASE("trap_potential") {
  const auto g = make_grid(-4, 4, 8);
  const auto v = trap_potential(g, 1.0, 0.0);
  CHECK(g.x(6) == 2.0);
  CHECK(v[6] == doctest::Approx(2.0));
  CHECK(trap_potential(g, -4.0, 0.0)[5] == doctest::Approx(-2.0));
  CHECK(trap_potential(g, 10.0, 0.25)[5] == doctest::Approx(6.25));
}

TEST_CASE("ground_orbitals harmonic spectrum and ground state") {
  const auto& g = test_grid();
  const auto set = ground_orbitals(g, 10, 1.0, 0.0);
  REQUIRE(set.size() == 10);
  for (std::size_t n = 0; n < 10; ++n) CHECK(std::abs(set.energies[n] - (n + 0.5)) < 1e-8);
  CHECK(gram_deviation(set) < 1e-10);
  for (std::size_t n = 0; n < 10; ++n) {
    CHECK(std::abs(single_particle_energy(set.orbitals[n], 1.0, 0.0) - (n + 0.5)) < 1e-8);
  }

  const auto one = ground_orbitals(g, 1, 1.0, 0.0);
  const auto exact = ComplexField::from_function(
      g, [](double x) { return std::pow(pi, -0.25) * std::exp(-0.5 * x * x); });
  double worst = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) worst = std::max(worst, std::abs(one.orbitals[0][i] - exact[i]));
  CHECK(worst < 1e-8);

  // Orbital 1 is odd: its leftmost lobe must be positive after sign fixing.
  CHECK(set.orbitals[1][g.size() / 2 - 32].real() > 0.0);

  const auto anh = ground_orbitals(g, 6, 10.0, 0.25);
  CHECK(gram_deviation(anh) < 1e-10);
  for (std::size_t n = 1; n < anh.size(); ++n) CHECK(anh.energies[n] > anh.energies[n - 1]);

  CHECK_THROWS_AS(ground_orbitals(g, 0, 1.0, 0.0), std::invalid_argument);
  // A coarse box cannot hold many orbitals.
  CHECK_THROWS_AS(ground_orbitals(make_grid(-4, 4, 64), 30, 1.0, 0.0), MonitorTrip);
}

TEST_CASE("ground_state_mf") {
  const auto& g = test_grid();
  std::vector<double> energies;
  ImaginaryTimeOptions opts;
  opts.observer = [&](std::size_t, std::size_t, double e) { energies.push_back(e); };
  const auto gs = ground_state_mf(g, 10.0, 1.0, 0.0, opts);
  CHECK(std::abs(norm(gs.field) - 10.0) < 1e-10);
  for (const auto& v : gs.field.values()) {
    CHECK(v.imag() == 0.0);
    CHECK(v.real() >= 0.0);
  }

  // Energy decreases along imaginary time (up to round-off per step).
  REQUIRE(energies.size() > 100);
  std::size_t rises = 0;
  for (std::size_t i = 1; i < energies.size(); ++i) {
    if (energies[i] > energies[i - 1] + 1e-12 * std::abs(energies[i - 1])) ++rises;
  }
  CHECK(rises == 0);

  // Thomas-Fermi profile away from the edges (|x| < 0.9 R): L2 relative error < 2%.
  const auto rho = density_mf(gs);
  const auto tf = tf_density(g, 10.0, 1.0, 0.0);
  const double radius = std::sqrt(20.0);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (std::abs(g.x(i)) >= 0.9 * radius) continue;
    num += std::pow(rho.values[i] - tf.values[i], 2);
    den += tf.values[i] * tf.values[i];
  }
  MESSAGE("TF bulk L2 error " << std::sqrt(num / den));
  CHECK(std::sqrt(num / den) < 0.02);
  const double peak = *std::max_element(rho.values.begin(), rho.values.end());
  CHECK(peak == doctest::Approx(std::sqrt(20.0) / pi).epsilon(0.02));

  CHECK_THROWS_AS(ground_state_mf(g, 0.0, 1.0, 0.0), std::invalid_argument);
  ImaginaryTimeOptions starved;
  starved.max_steps_per_stage = 5;
  CHECK_THROWS_AS(ground_state_mf(g, 10.0, 1.0, 0.0, starved), ConvergenceError);
}

TEST_CASE("time-step policy and planning") {
  const auto& g = test_grid();
  const auto sched = harmonic_sta(1.0);
  const double dt = max_time_step(g, sched);
  CHECK(dt > 0.0);
  CHECK(dt <= 1e-3);
  CHECK(dt <= 0.1 * g.dx() * g.dx() / pi * 5.0 + 1e-18);
  CHECK(dt <= 1.0 / 2000.0);
  CHECK(dt * sched.max_abs_omega_sq() * 16.0 * 16.0 <= 0.5 + 1e-12);

  const auto plan = plan_steps(1.0, 3e-4);
  CHECK(plan.steps == 3334);
  CHECK(plan.dt * plan.steps == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(plan.dt <= 3e-4);

  const auto gs = ground_state_mf(g, 2.0, 1.0, 0.0);
  CHECK_THROWS_AS(evolve_mf(gs, sched, 10 * dt), std::invalid_argument);
  CHECK_THROWS_AS(evolve_mf(gs, sched, 0.0), std::invalid_argument);
}

TEST_CASE("static trap: stationarity, norm and energy conservation") {
  const auto& g = test_grid();
  const auto sched = static_trap(1.0, 10.0);
  const double dt = max_time_step(g, sched);

  // Ground states are stationary.
  const auto gs = ground_state_mf(g, 10.0, 1.0, 0.0);
  const auto out = evolve_mf(gs, static_trap(1.0, 1.0), max_time_step(g, static_trap(1.0, 1.0)));
  CHECK(max_density_diff(out.field, gs.field) < 1e-6);

  // A breathing state (ground state of a stiffer trap) conserves norm and energy.
  const auto start = ground_state_mf(g, 10.0, 1.3, 0.0);
  const double e0 = mean_field_energy(start.field, 1.0, 0.0);
  const auto end = evolve_mf(start, sched, dt);
  CHECK(end.time == doctest::Approx(10.0));
  CHECK(std::abs(norm(end.field) - 10.0) / 10.0 < 1e-10);
  CHECK(std::abs(mean_field_energy(end.field, 1.0, 0.0) - e0) / std::abs(e0) < 1e-8);

  const auto orbs0 = ground_orbitals(g, 5, 1.3, 0.0);
  const double eo = total_energy(orbs0, 1.0, 0.0);
  const auto orbs1 = evolve_orbitals(orbs0, sched, dt);
  CHECK(std::abs(total_energy(orbs1, 1.0, 0.0) - eo) / eo < 1e-8);
  for (std::size_t j = 0; j < orbs1.size(); ++j) {
    CHECK(std::abs(norm(orbs1.orbitals[j]) - 1.0) < 1e-9);
  }

  // Eigenstates only acquire a phase.
  const auto eig = ground_orbitals(g, 5, 1.0, 0.0);
  const auto eig_t = evolve_orbitals(eig, static_trap(1.0, 2.0), max_time_step(g, static_trap(1.0, 2.0)));
  for (std::size_t j = 0; j < eig.size(); ++j) {
    CHECK(std::abs(std::abs(inner_product(eig.orbitals[j], eig_t.orbitals[j])) - 1.0) < 1e-8);
  }
}

TEST_CASE("Ermakov STA is exact for both models") {
  const auto& g = test_grid();
  const auto gs = ground_state_mf(g, 10.0, 1.0, 0.0);
  const auto target = ground_state_mf(g, 10.0, 10.0, 0.0);
  const auto sched = harmonic_sta(1.0);
  const auto out = evolve_mf(gs, sched, max_time_step(g, sched));
  CHECK(density_overlap(density_mf(out), density_mf(target)) > 1.0 - 1e-4);

  for (int N : {1, 5, 10}) {
    const auto init = ground_orbitals(g, N, 1.0, 0.0);
    const auto tgt = ground_orbitals(g, N, 10.0, 0.0);
    for (double t_f : {0.5, 1.0, 2.0}) {
      const auto s = harmonic_sta(t_f);
      const auto fin = evolve_orbitals(init, s, max_time_step(g, s));
      CHECK(std::abs(many_body_fidelity(fin, tgt) - 1.0) < 1e-4);
      CHECK(gram_deviation(fin) < 1e-6);
    }
  }
}

TEST_CASE("oracle: scale invariance of the harmonic quintic equation") {
  // rho(x, t_f) = rho(x / b_f, 0) / b_f, evaluated by spectral interpolation.
  const auto& g = test_grid();
  const auto gs = ground_state_mf(g, 10.0, 1.0, 0.0);
  const auto sched = harmonic_sta(1.0);
  const auto out = evolve_mf(gs, sched, max_time_step(g, sched));
  const double bf = sched.poly().bf();
  const auto rho0 = density_mf(gs);
  const auto rho1 = density_mf(out);
  std::vector<double> pts(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) pts[i] = g.x(i) / bf;
  const auto scaled = fourier_interpolate(g, rho0.values, pts);
  double l1 = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double expected = std::abs(pts[i]) < 16.0 ? scaled[i] / bf : 0.0;
    l1 += std::abs(rho1.values[i] - expected);
  }
  l1 *= g.dx();
  CHECK(l1 < 1e-3);
}

TEST_CASE("property: second-order convergence in dt") {
  const auto& g = test_grid();
  const auto sched = harmonic_sta(1.0);
  const double dt = max_time_step(g, sched);
  const auto gs = ground_state_mf(g, 10.0, 1.0, 0.0);
  const auto ref = evolve_mf(gs, sched, dt / 8);
  const double e1 = l2_diff(evolve_mf(gs, sched, dt).field, ref.field);
  const double e2 = l2_diff(evolve_mf(gs, sched, dt / 2).field, ref.field);
  const double ratio = e1 / e2;
  MESSAGE("mean-field Richardson ratio " << ratio);
  CHECK(ratio > 3.5);
  CHECK(ratio < 4.5);

  const auto orbs = ground_orbitals(g, 5, 1.0, 0.0);
  const auto oref = evolve_orbitals(orbs, sched, dt / 8);
  const auto o1 = evolve_orbitals(orbs, sched, dt);
  const auto o2 = evolve_orbitals(orbs, sched, dt / 2);
  double d1 = 0.0, d2 = 0.0;
  for (std::size_t j = 0; j < orbs.size(); ++j) {
    d1 += norm(o1.orbitals[j] - oref.orbitals[j]);
    d2 += norm(o2.orbitals[j] - oref.orbitals[j]);
  }
  const double oratio = std::sqrt(d1 / d2);
  MESSAGE("orbital Richardson ratio " << oratio);
  CHECK(oratio > 3.5);
  CHECK(oratio < 4.5);
}

TEST_CASE("property: unitarity over 1e5 steps") {
  // Coarser grid so that dt = 1e-3 satisfies the dispersion limit.
  const auto g = make_grid(-16, 16, 256);
  // Slow compression so that dt = 1e-3 is within policy for all 1e5 steps.
  const auto sched = ermakov_ramp(TrapSpec{1.0, 1.5, 0.0, 100.0});
  const auto orbs = ground_orbitals(g, 5, 1.0, 0.0);
  const auto out = evolve_orbitals(orbs, sched, 1e-3);
  CHECK(gram_deviation(out) < 1e-7);
  for (std::size_t j = 0; j < out.size(); ++j) {
    // 10 blocks of 1e4 steps: drift budget 1e-9 each.
    CHECK(std::abs(norm(out.orbitals[j]) - 1.0) < 1e-8);
  }

  const auto gs = ground_state_mf(g, 10.0, 1.0, 0.0);
  const auto mf = evolve_mf(gs, ermakov_ramp(TrapSpec{1.0, 1.5, 0.0, 10.0}), 1e-3);
  CHECK(std::abs(norm(mf.field) - 10.0) / 10.0 < 1e-9);
}

TEST_CASE("evolve_orbitals is deterministic across thread counts") {
  const auto& g = test_grid();
  const auto sched = harmonic_sta(0.5);
  const double dt = max_time_step(g, sched);
  const auto orbs = ground_orbitals(g, 6, 1.0, 0.0);
  EvolveOptions one;
  EvolveOptions many;
  many.threads = 3;
  const auto a = evolve_orbitals(orbs, sched, dt, one);
  const auto b = evolve_orbitals(orbs, sched, dt, many);
  for (std::size_t j = 0; j < a.size(); ++j) {
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(a.orbitals[j][i] == b.orbitals[j][i]);
  }
}

TEST_CASE("monitors abort escaping trajectories") {
  // A fast wave packet in a nearly flat trap runs into the box edge.
  const auto g = make_grid(-8, 8, 256);
  auto moved = ComplexField::from_function(g, [](double x) {
    return std::pow(pi, -0.25) * std::exp(-0.5 * (x - 2) * (x - 2) + complex_t{0, 3.0 * x});
  });
  MeanFieldState runaway{moved, 1.0, 0.0};
  const auto flat = reference_ramp(TrapSpec{1e-6, 1e-6, 0.0, 5.0});
  EvolveOptions opts;
  opts.monitor_interval = 100;
  CHECK_THROWS_AS(evolve_mf(runaway, flat, max_time_step(g, flat), opts), MonitorTrip);
}
