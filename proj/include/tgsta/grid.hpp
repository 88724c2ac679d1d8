#pragma once

// Uniform periodic grid, sampled complex fields and spectral operations on
// them. Units are scaled oscillator units: hbar = m = omega0 = 1, lengths in
// a0, times in 1/omega0.

#include <complex>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tgsta {

using complex_t = std::complex<double>;

/// Uniform 1D grid on [x_min, x_max) with n_points nodes, periodic closure.
///
/// Copies are cheap: node and wavenumber tables are shared.
class SpatialGrid {
 public:
  /// Throws std::invalid_argument unless x_min < x_max and n_points is a
  /// power of two >= 8.
  SpatialGrid(double x_min, double x_max, std::size_t n_points);

  double x_min() const { return x_min_; }
  double x_max() const { return x_max_; }
  std::size_t size() const { return n_; }
  double length() const { return x_max_ - x_min_; }
  double dx() const { return dx_; }
  /// Largest resolved angular wavenumber, pi/dx.
  double k_max() const;

  double x(std::size_t i) const { return (*nodes_)[i]; }
  std::span<const double> nodes() const { return *nodes_; }
  /// Angular wavenumbers in FFT order; k_i in [-pi/dx, pi/dx).
  std::span<const double> wavenumbers() const { return *wavenumbers_; }

  friend bool operator==(const SpatialGrid& a, const SpatialGrid& b) {
    return a.x_min_ == b.x_min_ && a.x_max_ == b.x_max_ && a.n_ == b.n_;
  }

 private:
  double x_min_;
  double x_max_;
  std::size_t n_;
  double dx_;
  std::shared_ptr<const std::vector<double>> nodes_;
  std::shared_ptr<const std::vector<double>> wavenumbers_;
};

SpatialGrid make_grid(double x_min, double x_max, std::size_t n_points);

/// Complex amplitude per grid node.
class ComplexField {
 public:
  /// Zero field.
  explicit ComplexField(SpatialGrid grid);
  /// Throws std::invalid_argument on size mismatch or non-finite entries.
  ComplexField(SpatialGrid grid, std::vector<complex_t> values);

  static ComplexField from_function(const SpatialGrid& grid,
                                    const std::function<complex_t(double)>& f);

  const SpatialGrid& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  std::span<const complex_t> values() const { return values_; }
  std::span<complex_t> values() { return values_; }
  complex_t operator[](std::size_t i) const { return values_[i]; }
  complex_t& operator[](std::size_t i) { return values_[i]; }

  ComplexField& operator*=(complex_t s);
  ComplexField& operator+=(const ComplexField& other);
  ComplexField& operator-=(const ComplexField& other);

 private:
  SpatialGrid grid_;
  std::vector<complex_t> values_;
};

ComplexField operator*(complex_t s, ComplexField f);
ComplexField operator+(ComplexField a, const ComplexField& b);
ComplexField operator-(ComplexField a, const ComplexField& b);

/// dx * sum |f_i|^2.
double norm(const ComplexField& f);

/// dx * sum conj(f_i) g_i. Throws std::invalid_argument on grid mismatch.
complex_t inner_product(const ComplexField& f, const ComplexField& g);

/// Fraction of norm held by the outer `outer_fraction` of the nodes (half on
/// each side). Zero for the zero field.
double edge_mass_fraction(const ComplexField& f, double outer_fraction = 0.05);

/// Fraction of spectral weight at |k| above (1 - top_fraction) * k_max.
double spectral_tail_fraction(const ComplexField& f, double top_fraction = 0.10);

inline constexpr double kEdgeMassThreshold = 1e-8;
inline constexpr double kSpectralTailThreshold = 1e-8;

/// Throws MonitorTrip if either monitor exceeds its threshold. `context`
/// is prefixed to the diagnostic.
void check_field_validity(const ComplexField& f, std::string_view context);

enum class EdgeCheck { kIgnore, kThrow };

/// Spectral d^2/dx^2: inverse FFT of -k^2 FFT(f). By default throws
/// MonitorTrip if the field has not decayed at the box edges, since the
/// periodic closure is then not a faithful representation.
ComplexField second_derivative(const ComplexField& f, EdgeCheck check = EdgeCheck::kThrow);

/// Evaluates the trigonometric interpolant of real samples at arbitrary
/// points (periodic continuation). The Nyquist mode is split symmetrically
/// so the interpolant of real data is real.
std::vector<double> fourier_interpolate(const SpatialGrid& grid, std::span<const double> samples,
                                        std::span<const double> points);

using Metadata = std::vector<std::pair<std::string, std::string>>;

/// CSV with '#'-prefixed "key: value" metadata lines, then the header
/// "x,re,im" and one row per node.
void write_field_csv(std::ostream& out, const ComplexField& f, const Metadata& metadata = {});
void write_field_csv(const std::string& path, const ComplexField& f, const Metadata& metadata = {});

struct FieldFile {
  ComplexField field;
  std::map<std::string, std::string> metadata;
};

/// Reads a file produced by write_field_csv. The grid is reconstructed from
/// the node positions (uniform spacing, x_max = last node + dx).
FieldFile read_field_csv(std::istream& in);
FieldFile read_field_csv(const std::string& path);

}  // namespace tgsta
