#pragma once

// Experiment drivers: run configuration, ground-state caching, parallel
// trajectory sweeps and the figure scenarios, with CSV/JSON output.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "tgsta/dynamics.hpp"
#include "tgsta/grid.hpp"
#include "tgsta/ramp.hpp"

namespace tgsta {

enum class Scenario { Fig1, Fig2, Fig3, Fig4, Fig5, Custom };

std::string_view to_string(Scenario s);
Scenario parse_scenario(std::string_view text);

/// Ramp families selectable by name: "sta" (Ermakov, gamma = 0 only),
/// "ref", "tf" (variational, Thomas-Fermi) and "gauss" (variational, Gaussian).
enum class RampChoice { Ermakov, Reference, VariationalTF, VariationalGaussian };

std::string_view to_string(RampChoice r);
RampChoice parse_ramp_choice(std::string_view text);

struct GridSpec {
  double x_min = -24.0;
  double x_max = 24.0;
  std::size_t n_points = 2048;

  SpatialGrid make() const { return make_grid(x_min, x_max, n_points); }
};

/// Parses "XMIN,XMAX,N".
GridSpec parse_grid_spec(std::string_view text);

struct RunConfig {
  Scenario scenario = Scenario::Custom;
  int N = 10;
  double gamma = 0.0;
  double omega0_sq = 1.0;
  double omegaf_sq = 10.0;
  double t_f = 1.0;
  /// Ramp durations for sweeps; empty means {t_f}.
  std::vector<double> t_f_grid;
  /// Particle numbers for N sweeps; empty means {N}.
  std::vector<int> n_grid;
  /// Anharmonicities for the integral-vs-gamma table.
  std::vector<double> gamma_grid;
  /// Empty means the scenario default.
  std::vector<RampChoice> ramps;
  AnsatzKind ansatz = AnsatzKind::ThomasFermi;
  /// Also propagate the quintic mean-field equation.
  bool mean_field = true;
  GridSpec grid;
  std::optional<double> dt;
  /// Off only for convergence studies that reuse a coarse-grid dt.
  bool enforce_dt_policy = true;
  std::string out_dir = "out";
  std::size_t threads = 1;
  std::uint64_t seed = 1;
  /// Density snapshot every this many steps in `evolve` (0 disables).
  std::size_t snapshot_interval = 0;

  /// Throws std::invalid_argument on inconsistent parameters.
  void validate() const;
  TrapSpec trap(double ramp_time) const;
  std::vector<double> durations() const;
  std::vector<int> particle_numbers() const;
  std::vector<RampChoice> ramp_choices() const;
};

/// Built-in defaults for a scenario (the checked-in presets restate them).
RunConfig preset(Scenario s);

/// Applies one key = value setting. Lists are comma separated;
/// `t_f_logspace = lo,hi,count` and `n_range = lo,hi,step` expand to grids.
/// Throws std::invalid_argument for unknown keys or malformed values.
void apply_setting(RunConfig& config, std::string_view key, std::string_view value);

/// key = value lines; '#' starts a comment. Returned in file order.
std::vector<std::pair<std::string, std::string>> read_settings(std::istream& in);
std::vector<std::pair<std::string, std::string>> read_settings(const std::filesystem::path& path);

/// Flat key/value view of a configuration (used for the metadata JSON).
std::vector<std::pair<std::string, std::string>> describe(const RunConfig& config);

RampSchedule build_ramp(RampChoice choice, const TrapSpec& trap, double N);

/// Ground states keyed by (omega^2, gamma). Orbitals are computed once for
/// the largest N requested and sliced; mean-field states are keyed by N too.
/// Thread safe.
class GroundStateCache {
 public:
  explicit GroundStateCache(SpatialGrid grid) : grid_(std::move(grid)) {}

  const SpatialGrid& grid() const { return grid_; }
  OrbitalSet orbitals(double omega_sq, double gamma, int N);
  MeanFieldState mean_field(double omega_sq, double gamma, int N);

 private:
  SpatialGrid grid_;
  std::mutex mutex_;
  std::map<std::pair<double, double>, OrbitalSet> orbitals_;
  std::map<std::tuple<double, double, int>, MeanFieldState> mean_field_;
};

struct TrajectorySpec {
  RampChoice ramp;
  double t_f;
  int N;
  bool mean_field;
};

struct SweepRow {
  double t_f = 0.0;
  int N = 0;
  double gamma = 0.0;
  double omegaf_sq = 0.0;
  std::string ramp_kind;
  std::string ansatz;
  double density_overlap = 0.0;
  double fidelity = 0.0;
  double log_fidelity = 0.0;
  /// Mean-field density overlap; NaN when the mean field was not propagated.
  double mf_density_overlap = 0.0;
  double gram_deviation = 0.0;
  double dt = 0.0;
  std::size_t steps = 0;
  /// "ok", or the error class and message for a failed trajectory.
  std::string status = "ok";

  bool ok() const { return status == "ok"; }
};

/// One trajectory. Solver errors are recorded in `status`, not thrown.
SweepRow run_trajectory(const RunConfig& config, const TrajectorySpec& spec,
                        GroundStateCache& cache, std::size_t orbital_threads = 1);

/// Called after each finished trajectory with (done, total, row); serialized.
using SweepProgress = std::function<void(std::size_t, std::size_t, const SweepRow&)>;

/// Runs all specs on config.threads workers; rows come back in spec order.
std::vector<SweepRow> run_sweep(const RunConfig& config, const std::vector<TrajectorySpec>& specs,
                                const SweepProgress& progress = {});

std::vector<SweepRow> run_fig2(const RunConfig& config, const SweepProgress& progress = {});
std::vector<SweepRow> run_fig4(const RunConfig& config, const SweepProgress& progress = {});
std::vector<SweepRow> run_fig5(const RunConfig& config, const SweepProgress& progress = {});

struct IntegralRow {
  std::string ansatz;
  double N;
  double gamma;
  double mu;
  double W;
  double F;
  double J;
  double K;
};

struct SlopeRow {
  std::string ansatz;
  double gamma;
  std::string integral;
  double slope;
};

struct Fig3Result {
  std::vector<IntegralRow> vs_n;
  std::vector<IntegralRow> vs_gamma;
  std::vector<SlopeRow> slopes;
};

/// Least-squares slope of log|y| against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

Fig3Result run_fig3(const RunConfig& config);

struct ConvergenceCheck {
  std::string name;
  double base = 0.0;
  double grid_refined = 0.0;
  double dt_refined = 0.0;
  double delta = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

/// Self-convergence under n -> 2n (same box, same dt) and dt -> dt/2.
std::vector<ConvergenceCheck> run_convergence(const RunConfig& config);

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);
void write_integral_csv(std::ostream& out, const std::vector<IntegralRow>& rows);
void write_slope_csv(std::ostream& out, const std::vector<SlopeRow>& rows);
void write_convergence_csv(std::ostream& out, const std::vector<ConvergenceCheck>& checks);

/// Metadata JSON next to the CSV outputs: scenario, configuration, code
/// version, tolerances and any extra string fields.
void write_metadata_json(const std::filesystem::path& path, const RunConfig& config,
                         std::string_view command,
                         const std::vector<std::pair<std::string, std::string>>& extra = {});

/// Library version string.
std::string_view version();

}  // namespace tgsta
