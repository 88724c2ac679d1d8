#pragma once

// Frequency ramps for compressing a trapped strongly interacting gas.
//
// The scaling factor b(t) is the smoothstep quintic between b0 and bf. The
// squared trap frequency is then obtained either from the Ermakov relation
// (harmonic, exact), from the variational ramp built on ansatz integrals
// (anharmonic, approximate), or by dropping the b'' term (reference ramp).

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

namespace tgsta {

/// Trap V = 1/2 omega^2(t) (x^2 + gamma x^4), compressed from omega0^2 to
/// omegaf^2 over t_f.
struct TrapSpec {
  double omega0_sq = 1.0;
  double omegaf_sq = 10.0;
  double gamma = 0.0;
  double t_f = 1.0;

  /// Throws std::invalid_argument on non-positive frequencies or duration,
  /// or negative gamma.
  void validate() const;
};

/// b(t) = sum_i a_i t^i, i = 0..5.
class ScalingPoly {
 public:
  ScalingPoly(std::array<double, 6> coefficients, double t_f, double b0, double bf);

  const std::array<double, 6>& coefficients() const { return a_; }
  double t_f() const { return t_f_; }
  double b0() const { return b0_; }
  double bf() const { return bf_; }

  double b(double t) const;
  double b_dot(double t) const;
  double b_ddot(double t) const;

 private:
  std::array<double, 6> a_;
  double t_f_;
  double b0_;
  double bf_;
};

/// Unique quintic with b(0)=b0, b(t_f)=bf and vanishing first and second
/// derivatives at both ends: b0 + (bf - b0)(10 s^3 - 15 s^4 + 6 s^5), s=t/t_f.
ScalingPoly build_scaling_poly(double b0, double bf, double t_f);

enum class AnsatzKind { Gaussian, ThomasFermi };

std::string_view to_string(AnsatzKind kind);
/// Accepts "gaussian"/"g" and "thomas-fermi"/"tf" (case-insensitive).
AnsatzKind parse_ansatz(std::string_view text);

/// Integrals of the scaled ansatz profile phi(y):
///   N = int |phi|^2, W = int y^2 |phi|^2, F = int (phi')^2,
///   J = int y^4 |phi|^2, K = int |phi|^6.
/// For the Thomas-Fermi ansatz F is the Hadamard finite part (the plain
/// integral diverges at the edges of the support) and is negative.
struct AnsatzIntegrals {
  AnsatzKind kind = AnsatzKind::ThomasFermi;
  double particle_number = 0.0;
  double gamma = 0.0;
  /// Chemical potential of the TF profile; unused (0) for the Gaussian.
  double mu = 0.0;
  double W = 0.0;
  double F = 0.0;
  double J = 0.0;
  double K = 0.0;

  /// F + pi^2 K / 3, the numerator constant of the variational ramp.
  double interaction_constant() const;
};

/// Gaussian ansatz sqrt(N) (2/pi)^(1/4) exp(-y^2): W = N/4, F = N,
/// J = 3N/16, K = 2N^3/(sqrt(3) pi). Independent of gamma, which is only
/// recorded.
AnsatzIntegrals gaussian_integrals(double N, double gamma = 0.0);

/// Chemical potential mu with N = (1/pi) int sqrt(2 mu - y^2 - gamma y^4) dy
/// over the support, found by bisection. Throws ConvergenceError if the
/// bracket cannot be established or bisection stalls. With omega_sq != 1 the
/// potential term becomes omega^2 (y^2 + gamma y^4).
double tf_chemical_potential(double N, double gamma, double omega_sq = 1.0);

/// Half-width R of the TF support: 2 mu = omega^2 (R^2 + gamma R^4).
double tf_support_radius(double mu, double gamma, double omega_sq = 1.0);

/// TF ansatz integrals by adaptive quadrature over the support.
AnsatzIntegrals tf_integrals(double N, double gamma);

AnsatzIntegrals ansatz_integrals(AnsatzKind kind, double N, double gamma);

/// Positive roots of 2 gamma J b^6 + W b^4 - (F + pi^2 K/3)/omega^2 = 0 at
/// omega0 and omegaf. Throws std::domain_error naming the endpoint when no
/// positive root exists (F + pi^2 K / 3 <= 0).
std::pair<double, double> boundary_b(const TrapSpec& trap, const AnsatzIntegrals& integrals);

/// Residual of the boundary polynomial at b for squared frequency omega_sq.
double boundary_residual(const AnsatzIntegrals& integrals, double omega_sq, double b);

enum class RampKind { ErmakovSTA, VariationalSTA, Reference };

std::string_view to_string(RampKind kind);

/// Squared-frequency schedule omega^2(t) on [0, t_f], evaluated analytically
/// from b(t). omega^2 may be negative (expulsive trap) and is never clipped.
class RampSchedule {
 public:
  RampSchedule(RampKind kind, TrapSpec trap, ScalingPoly poly,
               std::optional<AnsatzIntegrals> integrals);

  RampKind kind() const { return kind_; }
  const TrapSpec& trap() const { return trap_; }
  const ScalingPoly& poly() const { return poly_; }
  const std::optional<AnsatzIntegrals>& integrals() const { return integrals_; }
  double t_f() const { return trap_.t_f; }

  double omega_sq(double t) const;

  /// max |omega^2(t)| over a dense uniform sampling (4097 points).
  double max_abs_omega_sq() const;
  /// min omega^2(t) over the same sampling.
  double min_omega_sq() const;

 private:
  RampKind kind_;
  TrapSpec trap_;
  ScalingPoly poly_;
  std::optional<AnsatzIntegrals> integrals_;
};

/// omega^2 = omega0^2 / b^4 - b''/b with b0 = 1, bf = (omega0/omegaf)^(1/2).
/// Throws std::invalid_argument for gamma != 0.
RampSchedule ermakov_ramp(const TrapSpec& trap);

/// Harmonic reference ramp omega0^2 / b^4 on the Ermakov b(t). Throws
/// std::invalid_argument for gamma != 0; use the overload with integrals.
RampSchedule reference_ramp(const TrapSpec& trap);

/// Reference ramp for any gamma: the variational expression without the b''
/// term, on the same b(t), b0, bf as the variational ramp for `integrals`.
RampSchedule reference_ramp(const TrapSpec& trap, const AnsatzIntegrals& integrals);

/// omega^2 = [(F + pi^2 K/3) - b'' b^3 W] / (b^4 [W + 2 b^2 gamma J]).
RampSchedule variational_ramp(const TrapSpec& trap, const AnsatzIntegrals& integrals);
RampSchedule variational_ramp(const TrapSpec& trap, AnsatzKind ansatz, double N);

/// CSV export: '#' metadata, then columns t,b,b_dot,b_ddot,omega_sq on
/// `samples` uniformly spaced times including both endpoints.
void write_ramp_csv(std::ostream& out, const RampSchedule& ramp, std::size_t samples = 1001);

}  // namespace tgsta
