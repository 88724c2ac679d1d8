#include "tgsta/grid.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "tgsta/errors.hpp"
#include "tgsta/fft.hpp"

namespace tgsta {

SpatialGrid::SpatialGrid(double x_min, double x_max, std::size_t n_points)
    : x_min_(x_min), x_max_(x_max), n_(n_points) {
  if (!std::isfinite(x_min) || !std::isfinite(x_max) || !(x_min < x_max)) {
    throw std::invalid_argument("SpatialGrid: require finite x_min < x_max");
  }
  if (n_points < 8 || !std::has_single_bit(n_points)) {
    throw std::invalid_argument("SpatialGrid: n_points must be a power of two >= 8, got " +
                                std::to_string(n_points));
  }
  dx_ = (x_max - x_min) / static_cast<double>(n_points);

  std::vector<double> nodes(n_);
  for (std::size_t i = 0; i < n_; ++i) nodes[i] = x_min_ + static_cast<double>(i) * dx_;

  // FFT order: 0, 1, ..., n/2-1, -n/2, ..., -1 (in units of 2 pi / L).
  std::vector<double> k(n_);
  const double dk = 2.0 * std::numbers::pi / length();
  const auto half = static_cast<std::ptrdiff_t>(n_ / 2);
  for (std::size_t i = 0; i < n_; ++i) {
    auto m = static_cast<std::ptrdiff_t>(i);
    if (m >= half) m -= static_cast<std::ptrdiff_t>(n_);
    k[i] = dk * static_cast<double>(m);
  }
  nodes_ = std::make_shared<const std::vector<double>>(std::move(nodes));
  wavenumbers_ = std::make_shared<const std::vector<double>>(std::move(k));
}

double SpatialGrid::k_max() const { return std::numbers::pi / dx_; }

SpatialGrid make_grid(double x_min, double x_max, std::size_t n_points) {
  return SpatialGrid(x_min, x_max, n_points);
}

ComplexField::ComplexField(SpatialGrid grid)
    : grid_(std::move(grid)), values_(grid_.size(), complex_t{}) {}

ComplexField::ComplexField(SpatialGrid grid, std::vector<complex_t> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    throw std::invalid_argument("ComplexField: value count does not match grid size");
  }
  for (const auto& v : values_) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      throw std::invalid_argument("ComplexField: non-finite value");
    }
  }
}

ComplexField ComplexField::from_function(const SpatialGrid& grid,
                                         const std::function<complex_t(double)>& f) {
  std::vector<complex_t> v(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) v[i] = f(grid.x(i));
  return ComplexField(grid, std::move(v));
}

namespace {

void require_same_grid(const SpatialGrid& a, const SpatialGrid& b, const char* where) {
  if (!(a == b)) throw std::invalid_argument(std::string(where) + ": grid mismatch");
}

}  // namespace

ComplexField& ComplexField::operator*=(complex_t s) {
  for (auto& v : values_) v *= s;
  return *this;
}

ComplexField& ComplexField::operator+=(const ComplexField& other) {
  require_same_grid(grid_, other.grid_, "ComplexField::operator+=");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

ComplexField& ComplexField::operator-=(const ComplexField& other) {
  require_same_grid(grid_, other.grid_, "ComplexField::operator-=");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

ComplexField operator*(complex_t s, ComplexField f) { return f *= s; }
ComplexField operator+(ComplexField a, const ComplexField& b) { return a += b; }
ComplexField operator-(ComplexField a, const ComplexField& b) { return a -= b; }

double norm(const ComplexField& f) {
  double sum = 0.0;
  for (const auto& v : f.values()) sum += std::norm(v);
  return f.grid().dx() * sum;
}

complex_t inner_product(const ComplexField& f, const ComplexField& g) {
  require_same_grid(f.grid(), g.grid(), "inner_product");
  complex_t sum{};
  const auto a = f.values();
  const auto b = g.values();
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::conj(a[i]) * b[i];
  return f.grid().dx() * sum;
}

double edge_mass_fraction(const ComplexField& f, double outer_fraction) {
  const std::size_t n = f.size();
  const auto per_side = static_cast<std::size_t>(
      std::ceil(0.5 * outer_fraction * static_cast<double>(n)));
  double edge = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = std::norm(f[i]);
    total += w;
    if (i < per_side || i >= n - per_side) edge += w;
  }
  return total > 0.0 ? edge / total : 0.0;
}

double spectral_tail_fraction(const ComplexField& f, double top_fraction) {
  std::vector<complex_t> spec(f.values().begin(), f.values().end());
  thread_local_plan(spec.size()).forward(spec);
  const auto k = f.grid().wavenumbers();
  const double cut = (1.0 - top_fraction) * f.grid().k_max();
  double tail = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const double w = std::norm(spec[i]);
    total += w;
    if (std::abs(k[i]) > cut) tail += w;
  }
  return total > 0.0 ? tail / total : 0.0;
}

void check_field_validity(const ComplexField& f, std::string_view context) {
  const double edge = edge_mass_fraction(f);
  if (edge > kEdgeMassThreshold) {
    std::ostringstream msg;
    msg << context << ": edge mass fraction " << edge << " exceeds " << kEdgeMassThreshold
        << " (enlarge the box)";
    throw MonitorTrip(msg.str());
  }
  const double tail = spectral_tail_fraction(f);
  if (tail > kSpectralTailThreshold) {
    std::ostringstream msg;
    msg << context << ": spectral tail fraction " << tail << " exceeds "
        << kSpectralTailThreshold << " (refine the grid)";
    throw MonitorTrip(msg.str());
  }
}

ComplexField second_derivative(const ComplexField& f, EdgeCheck check) {
  if (check == EdgeCheck::kThrow) {
    const double edge = edge_mass_fraction(f);
    if (edge > kEdgeMassThreshold) {
      std::ostringstream msg;
      msg << "second_derivative: edge mass fraction " << edge << " exceeds "
          << kEdgeMassThreshold;
      throw MonitorTrip(msg.str());
    }
  }
  ComplexField out = f;
  auto v = out.values();
  const auto& plan = thread_local_plan(v.size());
  plan.forward(v);
  const auto k = f.grid().wavenumbers();
  const double inv_n = 1.0 / static_cast<double>(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] *= -k[i] * k[i] * inv_n;
  plan.backward(v);
  return out;
}

std::vector<double> fourier_interpolate(const SpatialGrid& grid, std::span<const double> samples,
                                        std::span<const double> points) {
  if (samples.size() != grid.size()) {
    throw std::invalid_argument("fourier_interpolate: sample count does not match grid");
  }
  const std::size_t n = grid.size();
  std::vector<complex_t> c(samples.begin(), samples.end());
  thread_local_plan(n).forward(c);
  const auto k = grid.wavenumbers();
  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<double> out(points.size());
  for (std::size_t p = 0; p < points.size(); ++p) {
    const double s = points[p] - grid.x_min();
    double acc = c[0].real();
    for (std::size_t m = 1; m < n / 2; ++m) {
      // Modes m and n-m are conjugate for real data.
      acc += 2.0 * (c[m] * std::polar(1.0, k[m] * s)).real();
    }
    acc += c[n / 2].real() * std::cos(k[n / 2] * s);
    out[p] = acc * inv_n;
  }
  return out;
}

void write_field_csv(std::ostream& out, const ComplexField& f, const Metadata& metadata) {
  out << "# x_min: " << std::setprecision(17) << f.grid().x_min() << '\n';
  out << "# x_max: " << f.grid().x_max() << '\n';
  out << "# n_points: " << f.grid().size() << '\n';
  for (const auto& [key, value] : metadata) out << "# " << key << ": " << value << '\n';
  out << "x,re,im\n";
  for (std::size_t i = 0; i < f.size(); ++i) {
    out << f.grid().x(i) << ',' << f[i].real() << ',' << f[i].imag() << '\n';
  }
}

void write_field_csv(const std::string& path, const ComplexField& f, const Metadata& metadata) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_field_csv: cannot open " + path);
  write_field_csv(out, f, metadata);
}

FieldFile read_field_csv(std::istream& in) {
  std::map<std::string, std::string> meta;
  std::vector<double> xs;
  std::vector<complex_t> vals;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto colon = line.find(':');
      if (colon == std::string::npos) continue;
      auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
      };
      meta[trim(line.substr(1, colon - 1))] = trim(line.substr(colon + 1));
      continue;
    }
    if (!header_seen) {
      if (line.rfind("x,re,im", 0) != 0) {
        throw std::invalid_argument("read_field_csv: expected header x,re,im");
      }
      header_seen = true;
      continue;
    }
    std::istringstream row(line);
    double x = 0, re = 0, im = 0;
    char c1 = 0, c2 = 0;
    if (!(row >> x >> c1 >> re >> c2 >> im) || c1 != ',' || c2 != ',') {
      throw std::invalid_argument("read_field_csv: malformed row: " + line);
    }
    xs.push_back(x);
    vals.emplace_back(re, im);
  }
  if (xs.size() < 2) throw std::invalid_argument("read_field_csv: too few rows");
  double x_min = xs.front();
  double x_max = xs.back() + (xs[1] - xs[0]);
  if (auto it = meta.find("x_min"); it != meta.end()) x_min = std::stod(it->second);
  if (auto it = meta.find("x_max"); it != meta.end()) x_max = std::stod(it->second);
  SpatialGrid grid(x_min, x_max, xs.size());
  return FieldFile{ComplexField(grid, std::move(vals)), std::move(meta)};
}

FieldFile read_field_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_field_csv: cannot open " + path);
  return read_field_csv(in);
}

}  // namespace tgsta
