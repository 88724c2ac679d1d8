#include "tgsta/ramp.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cctype>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>

#include "tgsta/errors.hpp"

namespace tgsta {

namespace {

constexpr double kPi = std::numbers::pi;

double integrate(const auto& f, double a, double b) {
  double error = 0.0;
  const double value =
      boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 12, 1e-14, &error);
  if (!std::isfinite(value) || error > 1e-9 * std::max(1.0, std::abs(value))) {
    throw ConvergenceError("adaptive quadrature did not converge (error estimate " +
                           std::to_string(error) + ")");
  }
  return value;
}

// Thomas-Fermi profile rho(y) = (1/pi) sqrt(2 mu - a y^2 - c y^4) on |y| <= R.
// With y = R sin(theta) the radicand factors as R^2 cos^2(theta) h(y) with
// h = a + c R^2 + c y^2 > 0, so every moment becomes a smooth integral over
// theta in [-pi/2, pi/2].
struct TfProfile {
  double a;
  double c;
  double mu;
  double R;

  double h(double y) const { return a + c * R * R + c * y * y; }
  double y(double theta) const { return R * std::sin(theta); }
  // rho(y(theta)) * dy/dtheta
  double density_measure(double theta) const {
    const double ct = std::cos(theta);
    const double yy = y(theta);
    return R * R * ct * ct * std::sqrt(h(yy)) / kPi;
  }
  double rho(double theta) const {
    return R * std::cos(theta) * std::sqrt(h(y(theta))) / kPi;
  }
};

double support_radius(double mu, double a, double c) {
  if (mu <= 0.0) return 0.0;
  // Root of c R^4 + a R^2 - 2 mu = 0, written without cancellation.
  return std::sqrt(4.0 * mu / (a + std::sqrt(a * a + 8.0 * c * mu)));
}

TfProfile make_profile(double mu, double a, double c) {
  return TfProfile{a, c, mu, support_radius(mu, a, c)};
}

double tf_particle_number(double mu, double a, double c) {
  if (mu <= 0.0) return 0.0;
  const TfProfile p = make_profile(mu, a, c);
  return integrate([&](double t) { return p.density_measure(t); }, -kPi / 2, kPi / 2);
}

double tf_mu(double N, double a, double c) {
  if (!(N > 0.0)) throw std::invalid_argument("tf_chemical_potential: N must be positive");
  if (!(a > 0.0) || c < 0.0) {
    throw std::invalid_argument("tf_chemical_potential: need omega^2 > 0 and gamma >= 0");
  }
  // Harmonic case has mu = N sqrt(a); the quartic term only raises mu.
  double lo = 0.0;
  double hi = 2.0 * N * std::sqrt(a);
  int grow = 0;
  while (tf_particle_number(hi, a, c) < N) {
    lo = hi;
    hi *= 2.0;
    if (++grow > 200) throw ConvergenceError("tf_chemical_potential: cannot bracket mu");
  }
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) return mid;
    if (tf_particle_number(mid, a, c) < N) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo <= 2.0 * std::numeric_limits<double>::epsilon() * hi) return 0.5 * (lo + hi);
  }
  throw ConvergenceError("tf_chemical_potential: bisection did not converge");
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return out;
}

}  // namespace

void TrapSpec::validate() const {
  if (!(omega0_sq > 0.0) || !std::isfinite(omega0_sq)) {
    throw std::invalid_argument("TrapSpec: omega0_sq must be positive");
  }
  if (!(omegaf_sq > 0.0) || !std::isfinite(omegaf_sq)) {
    throw std::invalid_argument("TrapSpec: omegaf_sq must be positive");
  }
  if (!(t_f > 0.0) || !std::isfinite(t_f)) {
    throw std::invalid_argument("TrapSpec: t_f must be positive");
  }
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    throw std::invalid_argument("TrapSpec: gamma must be non-negative");
  }
}

ScalingPoly::ScalingPoly(std::array<double, 6> coefficients, double t_f, double b0, double bf)
    : a_(coefficients), t_f_(t_f), b0_(b0), bf_(bf) {}

double ScalingPoly::b(double t) const {
  double acc = a_[5];
  for (int i = 4; i >= 0; --i) acc = acc * t + a_[i];
  return acc;
}

double ScalingPoly::b_dot(double t) const {
  double acc = 5.0 * a_[5];
  for (int i = 4; i >= 1; --i) acc = acc * t + i * a_[i];
  return acc;
}

double ScalingPoly::b_ddot(double t) const {
  double acc = 20.0 * a_[5];
  for (int i = 4; i >= 2; --i) acc = acc * t + i * (i - 1) * a_[i];
  return acc;
}

ScalingPoly build_scaling_poly(double b0, double bf, double t_f) {
  if (!(b0 > 0.0) || !(bf > 0.0) || !(t_f > 0.0)) {
    throw std::invalid_argument("build_scaling_poly: b0, bf and t_f must be positive");
  }
  const double d = bf - b0;
  const double t3 = t_f * t_f * t_f;
  return ScalingPoly({b0, 0.0, 0.0, 10.0 * d / t3, -15.0 * d / (t3 * t_f),
                      6.0 * d / (t3 * t_f * t_f)},
                     t_f, b0, bf);
}

std::string_view to_string(AnsatzKind kind) {
  return kind == AnsatzKind::Gaussian ? "gaussian" : "thomas-fermi";
}

AnsatzKind parse_ansatz(std::string_view text) {
  const std::string s = lower(text);
  if (s == "gaussian" || s == "g") return AnsatzKind::Gaussian;
  if (s == "thomas-fermi" || s == "tf" || s == "thomasfermi") return AnsatzKind::ThomasFermi;
  throw std::invalid_argument("unknown ansatz '" + std::string(text) + "'");
}

double AnsatzIntegrals::interaction_constant() const { return F + kPi * kPi * K / 3.0; }

AnsatzIntegrals gaussian_integrals(double N, double gamma) {
  if (!(N > 0.0)) throw std::invalid_argument("gaussian_integrals: N must be positive");
  AnsatzIntegrals r;
  r.kind = AnsatzKind::Gaussian;
  r.particle_number = N;
  r.gamma = gamma;
  r.W = N / 4.0;
  r.F = N;
  r.J = 3.0 * N / 16.0;
  r.K = 2.0 * N * N * N / (std::sqrt(3.0) * kPi);
  return r;
}

double tf_chemical_potential(double N, double gamma, double omega_sq) {
  return tf_mu(N, omega_sq, omega_sq * gamma);
}

double tf_support_radius(double mu, double gamma, double omega_sq) {
  return support_radius(mu, omega_sq, omega_sq * gamma);
}

AnsatzIntegrals tf_integrals(double N, double gamma) {
  const double mu = tf_chemical_potential(N, gamma);
  const TfProfile p = make_profile(mu, 1.0, gamma);
  const double lo = -kPi / 2;
  const double hi = kPi / 2;

  AnsatzIntegrals r;
  r.kind = AnsatzKind::ThomasFermi;
  r.particle_number = N;
  r.gamma = gamma;
  r.mu = mu;
  r.W = integrate([&](double t) { const double y = p.y(t); return y * y * p.density_measure(t); },
                  lo, hi);
  r.J = integrate(
      [&](double t) { const double y2 = p.y(t) * p.y(t); return y2 * y2 * p.density_measure(t); },
      lo, hi);
  r.K = integrate(
      [&](double t) { const double rho = p.rho(t); return rho * rho * rho * p.R * std::cos(t); },
      lo, hi);

  // (phi')^2 dy = tan^2(theta) q(theta) dtheta / (4 pi), q = (1 + 2 gamma y^2)^2 / h^(3/2).
  // Finite part: integrate tan^2 = sec^2 - 1 and move the derivative onto q;
  // the boundary term q tan(theta) carries only the pure edge divergence.
  const double c = gamma;
  auto q = [&](double t) {
    const double y2 = p.y(t) * p.y(t);
    const double s = 1.0 + 2.0 * c * y2;
    return s * s / std::pow(p.h(p.y(t)), 1.5);
  };
  auto y_dq_dy = [&](double t) {
    const double y2 = p.y(t) * p.y(t);
    const double s = 1.0 + 2.0 * c * y2;
    const double hh = p.h(p.y(t));
    return c * y2 * s * (8.0 * hh - 3.0 * s) / std::pow(hh, 2.5);
  };
  r.F = -(integrate(q, lo, hi) + integrate(y_dq_dy, lo, hi)) / (4.0 * kPi);
  return r;
}

AnsatzIntegrals ansatz_integrals(AnsatzKind kind, double N, double gamma) {
  return kind == AnsatzKind::Gaussian ? gaussian_integrals(N, gamma) : tf_integrals(N, gamma);
}

double boundary_residual(const AnsatzIntegrals& in, double omega_sq, double b) {
  const double b2 = b * b;
  return 2.0 * in.gamma * in.J * b2 * b2 * b2 + in.W * b2 * b2 -
         in.interaction_constant() / omega_sq;
}

namespace {

double boundary_root(const AnsatzIntegrals& in, double omega_sq, const char* endpoint) {
  const double C = in.interaction_constant();
  if (!(C > 0.0)) {
    throw std::domain_error(std::string("boundary_b: no positive root at the ") + endpoint +
                            " frequency (F + pi^2 K/3 = " + std::to_string(C) + " <= 0)");
  }
  if (!(in.W > 0.0) || in.J < 0.0) {
    throw std::invalid_argument("boundary_b: need W > 0 and J >= 0");
  }
  // In u = b^2 the polynomial 2 gamma J u^3 + W u^2 - C/omega^2 is increasing
  // on u > 0, negative at 0 and non-negative at sqrt(C / (omega^2 W)).
  const double target = C / omega_sq;
  auto p = [&](double u) { return (2.0 * in.gamma * in.J * u + in.W) * u * u - target; };
  auto dp = [&](double u) { return (6.0 * in.gamma * in.J * u + 2.0 * in.W) * u; };
  double lo = 0.0;
  double hi = std::sqrt(target / in.W);
  for (int it = 0; it < 200 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi;
       ++it) {
    const double mid = 0.5 * (lo + hi);
    (p(mid) < 0.0 ? lo : hi) = mid;
  }
  double u = 0.5 * (lo + hi);
  for (int it = 0; it < 3; ++it) {
    const double d = dp(u);
    if (d <= 0.0) break;
    const double next = u - p(u) / d;
    if (next >= lo && next <= hi) u = next;
  }
  return std::sqrt(u);
}

}  // namespace

std::pair<double, double> boundary_b(const TrapSpec& trap, const AnsatzIntegrals& integrals) {
  trap.validate();
  return {boundary_root(integrals, trap.omega0_sq, "initial"),
          boundary_root(integrals, trap.omegaf_sq, "final")};
}

std::string_view to_string(RampKind kind) {
  switch (kind) {
    case RampKind::ErmakovSTA: return "ermakov";
    case RampKind::VariationalSTA: return "variational";
    case RampKind::Reference: return "reference";
  }
  return "unknown";
}

RampSchedule::RampSchedule(RampKind kind, TrapSpec trap, ScalingPoly poly,
                           std::optional<AnsatzIntegrals> integrals)
    : kind_(kind), trap_(trap), poly_(poly), integrals_(std::move(integrals)) {
  trap_.validate();
  if (kind_ == RampKind::VariationalSTA && !integrals_) {
    throw std::invalid_argument("RampSchedule: variational ramp needs ansatz integrals");
  }
}

double RampSchedule::omega_sq(double t) const {
  const double b = poly_.b(t);
  const double b2 = b * b;
  const double b4 = b2 * b2;
  const bool with_bddot = kind_ != RampKind::Reference;
  const double bdd = with_bddot ? poly_.b_ddot(t) : 0.0;
  if (!integrals_) return trap_.omega0_sq / b4 - bdd / b;
  const auto& in = *integrals_;
  return (in.interaction_constant() - bdd * b * b2 * in.W) /
         (b4 * (in.W + 2.0 * b2 * in.gamma * in.J));
}

double RampSchedule::max_abs_omega_sq() const {
  constexpr int kSamples = 4096;
  double m = 0.0;
  for (int i = 0; i <= kSamples; ++i) {
    m = std::max(m, std::abs(omega_sq(t_f() * i / kSamples)));
  }
  return m;
}

double RampSchedule::min_omega_sq() const {
  constexpr int kSamples = 4096;
  double m = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= kSamples; ++i) m = std::min(m, omega_sq(t_f() * i / kSamples));
  return m;
}

RampSchedule ermakov_ramp(const TrapSpec& trap) {
  trap.validate();
  if (trap.gamma != 0.0) {
    throw std::invalid_argument("ermakov_ramp: the Ermakov ramp is exact only for gamma = 0");
  }
  const double bf = std::pow(trap.omega0_sq / trap.omegaf_sq, 0.25);
  return RampSchedule(RampKind::ErmakovSTA, trap, build_scaling_poly(1.0, bf, trap.t_f),
                      std::nullopt);
}

RampSchedule reference_ramp(const TrapSpec& trap) {
  trap.validate();
  if (trap.gamma != 0.0) {
    throw std::invalid_argument(
        "reference_ramp: anharmonic reference ramps need ansatz integrals");
  }
  const double bf = std::pow(trap.omega0_sq / trap.omegaf_sq, 0.25);
  return RampSchedule(RampKind::Reference, trap, build_scaling_poly(1.0, bf, trap.t_f),
                      std::nullopt);
}

RampSchedule reference_ramp(const TrapSpec& trap, const AnsatzIntegrals& integrals) {
  const auto [b0, bf] = boundary_b(trap, integrals);
  return RampSchedule(RampKind::Reference, trap, build_scaling_poly(b0, bf, trap.t_f),
                      integrals);
}

RampSchedule variational_ramp(const TrapSpec& trap, const AnsatzIntegrals& integrals) {
  const auto [b0, bf] = boundary_b(trap, integrals);
  return RampSchedule(RampKind::VariationalSTA, trap, build_scaling_poly(b0, bf, trap.t_f),
                      integrals);
}

RampSchedule variational_ramp(const TrapSpec& trap, AnsatzKind ansatz, double N) {
  trap.validate();
  return variational_ramp(trap, ansatz_integrals(ansatz, N, trap.gamma));
}

void write_ramp_csv(std::ostream& out, const RampSchedule& ramp, std::size_t samples) {
  if (samples < 2) throw std::invalid_argument("write_ramp_csv: need at least two samples");
  const auto& trap = ramp.trap();
  out << std::setprecision(17);
  out << "# kind: " << to_string(ramp.kind()) << '\n';
  if (ramp.integrals()) {
    out << "# N: " << ramp.integrals()->particle_number << '\n';
    out << "# ansatz: " << to_string(ramp.integrals()->kind) << '\n';
  } else {
    out << "# N: any\n# ansatz: none\n";
  }
  out << "# gamma: " << trap.gamma << '\n';
  out << "# t_f: " << trap.t_f << '\n';
  out << "# omega0_sq: " << trap.omega0_sq << '\n';
  out << "# omegaf_sq: " << trap.omegaf_sq << '\n';
  out << "# b0: " << ramp.poly().b0() << '\n';
  out << "# bf: " << ramp.poly().bf() << '\n';
  out << "t,b,b_dot,b_ddot,omega_sq\n";
  const auto& poly = ramp.poly();
  for (std::size_t i = 0; i < samples; ++i) {
    const double t = trap.t_f * static_cast<double>(i) / static_cast<double>(samples - 1);
    out << t << ',' << poly.b(t) << ',' << poly.b_dot(t) << ',' << poly.b_ddot(t) << ','
        << ramp.omega_sq(t) << '\n';
  }
}

}  // namespace tgsta
