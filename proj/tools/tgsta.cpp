// tgsta: command-line driver for ramp design and the figure sweeps.
//
// Configuration is layered: scenario preset, then --config file, then --set
// overrides, then the dedicated flags. Every command writes CSV output plus a
// metadata JSON into the output directory.

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "tgsta/errors.hpp"
#include "tgsta/experiments.hpp"
#include "tgsta/metrics.hpp"

namespace fs = std::filesystem;
using namespace tgsta;

namespace {

struct CommonOptions {
  std::string config_path;
  std::string out_dir;
  std::size_t threads = 0;
  std::string dt;
  std::string grid;
  std::vector<std::string> settings;
  bool quiet = false;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config_path, "key = value settings file")->check(CLI::ExistingFile);
  cmd->add_option("--out", o.out_dir, "output directory");
  cmd->add_option("--threads", o.threads, "worker threads");
  cmd->add_option("--dt", o.dt, "time step, or 'auto'");
  cmd->add_option("--grid", o.grid, "XMIN,XMAX,N");
  cmd->add_option("--set", o.settings, "extra key=value setting (repeatable)");
  cmd->add_flag("-q,--quiet", o.quiet, "no progress output");
}

RunConfig resolve(Scenario scenario, const CommonOptions& o) {
  RunConfig c = preset(scenario);
  if (!o.config_path.empty()) {
    for (const auto& [k, v] : read_settings(fs::path(o.config_path))) {
      if (k == "scenario") {
        // A file may select its scenario; presets then apply before the rest.
        const auto s = parse_scenario(v);
        if (s != c.scenario) c = preset(s);
        continue;
      }
      apply_setting(c, k, v);
    }
  }
  for (const auto& s : o.settings) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("--set expects key=value, got '" + s + "'");
    apply_setting(c, s.substr(0, eq), s.substr(eq + 1));
  }
  if (!o.out_dir.empty()) c.out_dir = o.out_dir;
  if (o.threads) c.threads = o.threads;
  if (!o.dt.empty()) apply_setting(c, "dt", o.dt);
  if (!o.grid.empty()) c.grid = parse_grid_spec(o.grid);
  c.validate();
  fs::create_directories(c.out_dir);
  return c;
}

std::ofstream open_csv(const RunConfig& c, const std::string& name) {
  const fs::path p = fs::path(c.out_dir) / name;
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out.precision(17);
  return out;
}

std::string command_line(int argc, char** argv) {
  std::string s;
  for (int i = 0; i < argc; ++i) s += (i ? " " : "") + std::string(argv[i]);
  return s;
}

std::string num(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

SweepProgress progress_printer(bool quiet) {
  if (quiet) return {};
  return [](std::size_t done, std::size_t total, const SweepRow& r) {
    std::cerr << "[" << done << "/" << total << "] " << r.ramp_kind << " " << r.ansatz << " N=" << r.N
              << " t_f=" << r.t_f << " F=" << r.fidelity << " O=" << r.density_overlap;
    if (!std::isnan(r.mf_density_overlap)) std::cerr << " O_mf=" << r.mf_density_overlap;
    if (!r.ok()) std::cerr << " (" << r.status << ")";
    std::cerr << '\n';
  };
}

// Rows that failed are reported but do not abort the sweep; the exit code
// reflects the most severe failure class.
int sweep_status(const std::vector<SweepRow>& rows) {
  int code = 0;
  for (const auto& r : rows) {
    if (r.ok()) continue;
    if (r.status.rfind("monitor", 0) == 0) code = std::max(code, 4);
    else if (r.status.rfind("convergence", 0) == 0) code = std::max(code, 3);
    else code = std::max(code, 2);
  }
  return code;
}

int cmd_ground(const RunConfig& c, const std::string& cmdline) {
  const auto grid = c.grid.make();
  const auto orbitals = ground_orbitals(grid, c.N, c.omega0_sq, c.gamma);
  auto out = open_csv(c, "ground_orbitals.csv");
  out << "j,energy\n";
  for (std::size_t j = 0; j < orbitals.size(); ++j) out << j << ',' << orbitals.energies[j] << '\n';

  std::vector<std::pair<std::string, std::string>> extra{
      {"tg_total_energy", num(total_energy(orbitals, c.omega0_sq, c.gamma))},
      {"tg_gram_deviation", num(gram_deviation(orbitals))}};
  if (c.mean_field) {
    const auto psi = ground_state_mf(grid, c.N, c.omega0_sq, c.gamma);
    extra.emplace_back("mf_energy", num(mean_field_energy(psi.field, c.omega0_sq, c.gamma)));
  }
  write_metadata_json(fs::path(c.out_dir) / "ground.json", c, cmdline, extra);
  for (const auto& [k, v] : extra) std::cout << k << " = " << v << '\n';
  return 0;
}

int cmd_densities(const RunConfig& c, const std::string& cmdline) {
  const auto grid = c.grid.make();
  const auto tg = density_tg(ground_orbitals(grid, c.N, c.omega0_sq, c.gamma));
  const auto tf = tf_density(grid, c.N, c.omega0_sq, c.gamma);
  std::vector<double> mf(grid.size(), std::nan(""));
  double overlap_mf = std::nan("");
  if (c.mean_field) {
    const auto rho = density_mf(ground_state_mf(grid, c.N, c.omega0_sq, c.gamma));
    mf = rho.values;
    overlap_mf = density_overlap(rho, tg);
  }
  auto out = open_csv(c, "densities.csv");
  out << "x,rho_tg,rho_mf,rho_tf\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    out << grid.x(i) << ',' << tg.values[i] << ',' << mf[i] << ',' << tf.values[i] << '\n';
  }
  const std::vector<std::pair<std::string, std::string>> extra{
      {"overlap_mf_tg", num(overlap_mf)},
      {"overlap_tf_tg", num(density_overlap(tf, tg))},
      {"tg_friedel_maxima", std::to_string(count_local_maxima(tg))}};
  write_metadata_json(fs::path(c.out_dir) / "densities.json", c, cmdline, extra);
  for (const auto& [k, v] : extra) std::cout << k << " = " << v << '\n';
  return 0;
}

int cmd_ramps(const RunConfig& c, const std::string& cmdline) {
  for (double t_f : c.durations()) {
    for (auto r : c.ramp_choices()) {
      const auto ramp = build_ramp(r, c.trap(t_f), c.N);
      std::ostringstream name;
      name << "ramp_" << to_string(r) << "_tf" << t_f << ".csv";
      auto out = open_csv(c, name.str());
      write_ramp_csv(out, ramp);
      std::cout << name.str() << ": min omega^2 = " << ramp.min_omega_sq()
                << ", max |omega^2| = " << ramp.max_abs_omega_sq() << '\n';
    }
  }
  write_metadata_json(fs::path(c.out_dir) / "ramps.json", c, cmdline);
  return 0;
}

int cmd_evolve(const RunConfig& c, const std::string& cmdline, bool quiet) {
  std::vector<TrajectorySpec> specs;
  for (double t_f : c.durations()) {
    for (auto r : c.ramp_choices()) specs.push_back({r, t_f, c.N, c.mean_field});
  }
  const auto rows = run_sweep(c, specs, progress_printer(quiet));
  auto out = open_csv(c, "evolve.csv");
  write_sweep_csv(out, rows);

  if (c.snapshot_interval > 0) {
    GroundStateCache cache(c.grid.make());
    auto snaps = open_csv(c, "evolve_snapshots.csv");
    snaps << "ramp,t_f,t,x,rho_tg\n";
    for (const auto& s : specs) {
      const auto ramp = build_ramp(s.ramp, c.trap(s.t_f), s.N);
      EvolveOptions opts;
      opts.threads = c.threads;
      opts.snapshot_interval = c.snapshot_interval;
      opts.snapshot = [&](double t, const std::vector<double>& rho) {
        for (std::size_t i = 0; i < rho.size(); ++i) {
          snaps << to_string(s.ramp) << ',' << s.t_f << ',' << t << ',' << cache.grid().x(i) << ','
                << rho[i] << '\n';
        }
      };
      const double dt = c.dt ? *c.dt : max_time_step(cache.grid(), ramp, opts.policy);
      (void)evolve_orbitals(cache.orbitals(c.omega0_sq, c.gamma, s.N), ramp, dt, opts);
    }
  }
  write_metadata_json(fs::path(c.out_dir) / "evolve.json", c, cmdline);
  return sweep_status(rows);
}

int cmd_sweep(const std::string& name, const RunConfig& c, const std::string& cmdline, bool quiet) {
  std::vector<SweepRow> rows;
  if (name == "fig2") rows = run_fig2(c, progress_printer(quiet));
  else if (name == "fig4") rows = run_fig4(c, progress_printer(quiet));
  else rows = run_fig5(c, progress_printer(quiet));
  auto out = open_csv(c, name + ".csv");
  write_sweep_csv(out, rows);
  write_metadata_json(fs::path(c.out_dir) / (name + ".json"), c, cmdline);
  return sweep_status(rows);
}

int cmd_fig3(const RunConfig& c, const std::string& cmdline) {
  const auto r = run_fig3(c);
  {
    auto out = open_csv(c, "fig3_vs_n.csv");
    write_integral_csv(out, r.vs_n);
  }
  {
    auto out = open_csv(c, "fig3_vs_gamma.csv");
    write_integral_csv(out, r.vs_gamma);
  }
  auto out = open_csv(c, "fig3_slopes.csv");
  write_slope_csv(out, r.slopes);
  for (const auto& s : r.slopes) {
    std::cout << s.ansatz << " gamma=" << s.gamma << " slope(" << s.integral << ") = " << s.slope << '\n';
  }
  write_metadata_json(fs::path(c.out_dir) / "fig3.json", c, cmdline);
  return 0;
}

int cmd_converge(const RunConfig& c, const std::string& cmdline) {
  const auto checks = run_convergence(c);
  auto out = open_csv(c, "convergence.csv");
  write_convergence_csv(out, checks);
  bool ok = true;
  for (const auto& k : checks) {
    std::cout << (k.passed ? "PASS " : "FAIL ") << k.name << ": delta = " << k.delta
              << " (tolerance " << k.tolerance << ")\n";
    ok = ok && k.passed;
  }
  write_metadata_json(fs::path(c.out_dir) / "convergence.json", c, cmdline,
                      {{"all_passed", ok ? "true" : "false"}});
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shortcut-to-adiabaticity ramps for a Tonks-Girardeau gas"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(version()));

  const std::map<std::string, std::pair<Scenario, std::string>> commands{
      {"ground", {Scenario::Fig1, "ground-state orbital energies and mean-field energy"}},
      {"densities", {Scenario::Fig1, "TG, mean-field and Thomas-Fermi ground densities"}},
      {"ramps", {Scenario::Fig1, "export omega^2(t) for each ramp"}},
      {"evolve", {Scenario::Custom, "propagate selected ramps and report F and O"}},
      {"fig2", {Scenario::Fig2, "harmonic trap: STA vs reference over t_f"}},
      {"fig3", {Scenario::Fig3, "ansatz integrals vs N and gamma, log-log slopes"}},
      {"fig4", {Scenario::Fig4, "anharmonic trap: TF, Gaussian and reference over t_f"}},
      {"fig5", {Scenario::Fig5, "fidelity vs N at fixed t_f"}},
      {"converge", {Scenario::Custom, "grid and time-step refinement study"}},
  };
  std::map<std::string, CommonOptions> options;
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, info] : commands) {
    subs[name] = app.add_subcommand(name, info.second);
    add_common(subs[name], options[name]);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const std::string cmdline = command_line(argc, argv);
  try {
    for (const auto& [name, sub] : subs) {
      if (!sub->parsed()) continue;
      const auto& o = options[name];
      const RunConfig c = resolve(commands.at(name).first, o);
      if (name == "ground") return cmd_ground(c, cmdline);
      if (name == "densities") return cmd_densities(c, cmdline);
      if (name == "ramps") return cmd_ramps(c, cmdline);
      if (name == "evolve") return cmd_evolve(c, cmdline, o.quiet);
      if (name == "fig3") return cmd_fig3(c, cmdline);
      if (name == "converge") return cmd_converge(c, cmdline);
      return cmd_sweep(name, c, cmdline, o.quiet);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const ConvergenceError& e) {
    std::cerr << "solver did not converge: " << e.what() << '\n';
    return 3;
  } catch (const MonitorTrip& e) {
    std::cerr << "validity monitor tripped: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
