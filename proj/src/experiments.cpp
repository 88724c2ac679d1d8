#include "tgsta/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <ostream>
#include <set>
#include <stdexcept>
#include <thread>

#include "tgsta/errors.hpp"
#include "tgsta/metrics.hpp"

namespace tgsta {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

OrbitalSet slice(const OrbitalSet& full, int N) {
  OrbitalSet out;
  out.orbitals.assign(full.orbitals.begin(), full.orbitals.begin() + N);
  out.energies.assign(full.energies.begin(), full.energies.begin() + N);
  out.time = full.time;
  return out;
}

std::string sanitize(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

std::size_t resolve_workers(std::size_t requested, std::size_t tasks) {
  std::size_t n = requested == 0 ? std::max(1u, std::thread::hardware_concurrency()) : requested;
  return std::max<std::size_t>(1, std::min(n, tasks));
}

std::ostream& precise(std::ostream& out) {
  out.precision(17);
  return out;
}

}  // namespace

std::string_view version() { return "0.1.0"; }

RampSchedule build_ramp(RampChoice choice, const TrapSpec& trap, double N) {
  switch (choice) {
    case RampChoice::Ermakov:
      return ermakov_ramp(trap);
    case RampChoice::Reference:
      return trap.gamma == 0.0 ? reference_ramp(trap) : reference_ramp(trap, tf_integrals(N, trap.gamma));
    case RampChoice::VariationalTF:
      return variational_ramp(trap, AnsatzKind::ThomasFermi, N);
    case RampChoice::VariationalGaussian:
      return variational_ramp(trap, AnsatzKind::Gaussian, N);
  }
  throw std::invalid_argument("build_ramp: unknown ramp");
}

OrbitalSet GroundStateCache::orbitals(double omega_sq, double gamma, int N) {
  std::lock_guard lock(mutex_);
  auto& entry = orbitals_[{omega_sq, gamma}];
  if (entry.size() < static_cast<std::size_t>(N)) entry = ground_orbitals(grid_, N, omega_sq, gamma);
  return slice(entry, N);
}

MeanFieldState GroundStateCache::mean_field(double omega_sq, double gamma, int N) {
  std::lock_guard lock(mutex_);
  const auto key = std::make_tuple(omega_sq, gamma, N);
  auto it = mean_field_.find(key);
  if (it == mean_field_.end()) {
    it = mean_field_.emplace(key, ground_state_mf(grid_, N, omega_sq, gamma)).first;
  }
  return it->second;
}

SweepRow run_trajectory(const RunConfig& config, const TrajectorySpec& spec,
                        GroundStateCache& cache, std::size_t orbital_threads) {
  SweepRow row;
  row.t_f = spec.t_f;
  row.N = spec.N;
  row.gamma = config.gamma;
  row.omegaf_sq = config.omegaf_sq;
  row.mf_density_overlap = kNaN;
  try {
    const TrapSpec trap = config.trap(spec.t_f);
    const auto ramp = build_ramp(spec.ramp, trap, spec.N);
    row.ramp_kind = std::string(to_string(ramp.kind()));
    row.ansatz = ramp.integrals() ? std::string(to_string(ramp.integrals()->kind)) : "none";

    EvolveOptions opts;
    opts.threads = orbital_threads;
    opts.enforce_policy = config.enforce_dt_policy;
    const double dt = config.dt ? *config.dt : max_time_step(cache.grid(), ramp, opts.policy);
    const auto plan = plan_steps(spec.t_f, dt);
    row.dt = plan.dt;
    row.steps = plan.steps;

    const auto initial = cache.orbitals(config.omega0_sq, config.gamma, spec.N);
    const auto target = cache.orbitals(config.omegaf_sq, config.gamma, spec.N);
    const auto final_set = evolve_orbitals(initial, ramp, dt, opts);
    row.log_fidelity = log_many_body_fidelity(final_set, target);
    row.fidelity = many_body_fidelity(final_set, target);
    row.density_overlap = density_overlap(density_tg(final_set), density_tg(target));
    row.gram_deviation = gram_deviation(final_set);

    if (spec.mean_field) {
      const auto psi0 = cache.mean_field(config.omega0_sq, config.gamma, spec.N);
      const auto psi_t = cache.mean_field(config.omegaf_sq, config.gamma, spec.N);
      const auto psi = evolve_mf(psi0, ramp, dt, opts);
      row.mf_density_overlap = density_overlap(density_mf(psi), density_mf(psi_t));
    }
  } catch (const MonitorTrip& e) {
    row.status = sanitize(std::string("monitor: ") + e.what());
  } catch (const ConvergenceError& e) {
    row.status = sanitize(std::string("convergence: ") + e.what());
  } catch (const std::exception& e) {
    row.status = sanitize(std::string("error: ") + e.what());
  }
  if (!row.ok()) {
    row.fidelity = row.density_overlap = row.log_fidelity = row.gram_deviation = kNaN;
    row.mf_density_overlap = kNaN;
  }
  return row;
}

std::vector<SweepRow> run_sweep(const RunConfig& config, const std::vector<TrajectorySpec>& specs,
                                const SweepProgress& progress) {
  config.validate();
  GroundStateCache cache(config.grid.make());

  // Warm the orbital cache with the largest N so that workers only slice.
  int max_n = 0;
  for (const auto& s : specs) max_n = std::max(max_n, s.N);
  if (max_n > 0) {
    try {
      (void)cache.orbitals(config.omega0_sq, config.gamma, max_n);
      (void)cache.orbitals(config.omegaf_sq, config.gamma, max_n);
    } catch (const std::exception&) {
      // Reported per row below.
    }
  }

  const std::size_t workers = resolve_workers(config.threads, specs.size());
  const std::size_t total_threads = config.threads == 0
                                        ? std::max(1u, std::thread::hardware_concurrency())
                                        : config.threads;
  const std::size_t inner = std::max<std::size_t>(1, total_threads / workers);

  std::vector<SweepRow> rows(specs.size());
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::mutex report;
  auto work = [&] {
    for (std::size_t i = next++; i < specs.size(); i = next++) {
      rows[i] = run_trajectory(config, specs[i], cache, inner);
      const std::size_t d = ++done;
      if (progress) {
        std::lock_guard lock(report);
        progress(d, specs.size(), rows[i]);
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  return rows;
}

std::vector<SweepRow> run_fig2(const RunConfig& config, const SweepProgress& progress) {
  if (config.gamma != 0.0) throw std::invalid_argument("fig2: requires gamma = 0");
  std::vector<TrajectorySpec> specs;
  for (double t_f : config.durations()) {
    for (auto r : config.ramp_choices()) specs.push_back({r, t_f, config.N, config.mean_field});
  }
  return run_sweep(config, specs, progress);
}

std::vector<SweepRow> run_fig4(const RunConfig& config, const SweepProgress& progress) {
  std::vector<TrajectorySpec> specs;
  for (double t_f : config.durations()) {
    for (auto r : config.ramp_choices()) specs.push_back({r, t_f, config.N, config.mean_field});
  }
  return run_sweep(config, specs, progress);
}

std::vector<SweepRow> run_fig5(const RunConfig& config, const SweepProgress& progress) {
  std::vector<TrajectorySpec> specs;
  for (double t_f : config.durations()) {
    for (int n : config.particle_numbers()) {
      for (auto r : config.ramp_choices()) specs.push_back({r, t_f, n, config.mean_field});
    }
  }
  return run_sweep(config, specs, progress);
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("loglog_slope: need at least two matching points");
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(std::abs(y[i]));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

Fig3Result run_fig3(const RunConfig& config) {
  config.validate();
  Fig3Result out;
  auto row_of = [](const AnsatzIntegrals& a) {
    return IntegralRow{std::string(to_string(a.kind)), a.particle_number, a.gamma, a.mu,
                       a.W, a.F, a.J, a.K};
  };
  auto block = [&](AnsatzKind kind, double gamma) {
    std::vector<double> n, w, f, j, k;
    for (int N : config.particle_numbers()) {
      const auto a = ansatz_integrals(kind, N, gamma);
      out.vs_n.push_back(row_of(a));
      n.push_back(N);
      w.push_back(a.W);
      f.push_back(a.F);
      j.push_back(a.J);
      k.push_back(a.K);
    }
    if (n.size() < 2) return;
    const std::string name(to_string(kind));
    // J vanishes identically only for an empty profile, so all four fit.
    out.slopes.push_back({name, gamma, "W", loglog_slope(n, w)});
    out.slopes.push_back({name, gamma, "K", loglog_slope(n, k)});
    out.slopes.push_back({name, gamma, "F", loglog_slope(n, f)});
    out.slopes.push_back({name, gamma, "J", loglog_slope(n, j)});
  };
  block(AnsatzKind::Gaussian, config.gamma);
  block(AnsatzKind::ThomasFermi, config.gamma);
  if (config.gamma != 0.0) block(AnsatzKind::ThomasFermi, 0.0);
  for (double g : config.gamma_grid) {
    out.vs_gamma.push_back(row_of(tf_integrals(config.N, g)));
  }
  return out;
}

std::vector<ConvergenceCheck> run_convergence(const RunConfig& config) {
  config.validate();
  std::vector<ConvergenceCheck> checks;

  auto point = [&](const std::string& name, RampChoice ramp, int N, double gamma, double t_f,
                   bool mean_field, double tolerance) {
    RunConfig base = config;
    base.N = N;
    base.gamma = gamma;
    base.t_f = t_f;
    base.t_f_grid.clear();
    base.ramps = {ramp};
    base.omega0_sq = 1.0;
    base.omegaf_sq = 10.0;

    GroundStateCache coarse(base.grid.make());
    const TrajectorySpec spec{ramp, t_f, N, mean_field};
    const auto r0 = run_trajectory(base, spec, coarse, config.threads == 0 ? 0 : config.threads);

    RunConfig fine_grid = base;
    fine_grid.grid.n_points *= 2;
    fine_grid.dt = r0.dt;
    fine_grid.enforce_dt_policy = false;
    GroundStateCache fine(fine_grid.grid.make());
    const auto r1 = run_trajectory(fine_grid, spec, fine, config.threads);

    RunConfig fine_dt = base;
    fine_dt.dt = 0.5 * r0.dt;
    const auto r2 = run_trajectory(fine_dt, spec, coarse, config.threads);

    ConvergenceCheck c;
    c.name = name;
    c.base = r0.fidelity;
    c.grid_refined = r1.fidelity;
    c.dt_refined = r2.fidelity;
    c.tolerance = tolerance;
    if (!r0.ok() || !r1.ok() || !r2.ok()) {
      c.delta = kNaN;
      c.passed = false;
    } else {
      c.delta = std::max({std::abs(r1.fidelity - r0.fidelity), std::abs(r2.fidelity - r0.fidelity),
                          std::abs(r1.density_overlap - r0.density_overlap),
                          std::abs(r2.density_overlap - r0.density_overlap)});
      if (mean_field) {
        c.delta = std::max({c.delta, std::abs(r1.mf_density_overlap - r0.mf_density_overlap),
                            std::abs(r2.mf_density_overlap - r0.mf_density_overlap)});
      }
      c.passed = c.delta < tolerance;
    }
    checks.push_back(c);
  };

  point("fig2 sta N=10 gamma=0 t_f=1", RampChoice::Ermakov, 10, 0.0, 1.0, true, 1e-4);
  point("fig4 tf N=30 gamma=0.25 t_f=1", RampChoice::VariationalTF, 30, 0.25, 1.0, false, 1e-3);

  // The ramp is analytic in t and never sees the grid.
  {
    const TrapSpec trap{1.0, 10.0, 0.25, 1.0};
    const auto a = build_ramp(RampChoice::VariationalTF, trap, 30);
    const auto b = build_ramp(RampChoice::VariationalTF, trap, 30);
    double diff = 0.0;
    for (int i = 0; i <= 1000; ++i) diff = std::max(diff, std::abs(a.omega_sq(i / 1000.0) - b.omega_sq(i / 1000.0)));
    ConvergenceCheck c;
    c.name = "ramp grid independence";
    c.base = c.grid_refined = c.dt_refined = a.max_abs_omega_sq();
    c.delta = diff;
    c.tolerance = 0.0;
    c.passed = diff == 0.0;
    checks.push_back(c);
  }
  return checks;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  precise(out) << "t_f,N,gamma,omegaf_sq,ramp_kind,ansatz,density_overlap,fidelity,log_fidelity,"
                  "mf_density_overlap,gram_deviation,dt,steps,status\n";
  for (const auto& r : rows) {
    out << r.t_f << ',' << r.N << ',' << r.gamma << ',' << r.omegaf_sq << ',' << r.ramp_kind << ','
        << r.ansatz << ',' << r.density_overlap << ',' << r.fidelity << ',' << r.log_fidelity << ','
        << r.mf_density_overlap << ',' << r.gram_deviation << ',' << r.dt << ',' << r.steps << ','
        << r.status << '\n';
  }
}

void write_integral_csv(std::ostream& out, const std::vector<IntegralRow>& rows) {
  precise(out) << "ansatz,N,gamma,mu,W,F,J,K\n";
  for (const auto& r : rows) {
    out << r.ansatz << ',' << r.N << ',' << r.gamma << ',' << r.mu << ',' << r.W << ',' << r.F << ','
        << r.J << ',' << r.K << '\n';
  }
}

void write_slope_csv(std::ostream& out, const std::vector<SlopeRow>& rows) {
  precise(out) << "ansatz,gamma,integral,slope\n";
  for (const auto& r : rows) {
    out << r.ansatz << ',' << r.gamma << ',' << r.integral << ',' << r.slope << '\n';
  }
}

void write_convergence_csv(std::ostream& out, const std::vector<ConvergenceCheck>& checks) {
  precise(out) << "check,base,grid_refined,dt_refined,delta,tolerance,passed\n";
  for (const auto& c : checks) {
    out << c.name << ',' << c.base << ',' << c.grid_refined << ',' << c.dt_refined << ','
        << c.delta << ',' << c.tolerance << ',' << (c.passed ? "true" : "false") << '\n';
  }
}

void write_metadata_json(const std::filesystem::path& path, const RunConfig& config,
                         std::string_view command,
                         const std::vector<std::pair<std::string, std::string>>& extra) {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["scenario"] = to_string(config.scenario);
  j["version"] = version();
  auto& params = j["config"];
  for (const auto& [k, v] : describe(config)) params[k] = v;
  const TimeStepPolicy policy;
  const ImaginaryTimeOptions imag;
  j["tolerances"] = {
      {"edge_mass_threshold", kEdgeMassThreshold},
      {"spectral_tail_threshold", kSpectralTailThreshold},
      {"imaginary_time_energy_tolerance", imag.energy_tolerance},
      {"imaginary_time_steps", imag.steps},
      {"dt_policy_safety", policy.safety},
      {"dt_policy_cap", policy.dt_cap},
      {"dt_policy_min_steps", policy.min_steps},
      {"dt_policy_max_potential_phase", policy.max_potential_phase},
  };
  for (const auto& [k, v] : extra) j[k] = v;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace tgsta
