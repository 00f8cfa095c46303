#include "slowbond/empirical.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace slowbond {

namespace {

constexpr double kSlack = 1e-12;

double wrap_signed(double d) { return d - std::round(d); }

// Number of lattice points y/N in (a, b], 0 <= a <= b <= 1, as a site range.
std::pair<std::int64_t, std::int64_t> sites_in(double a, double b, std::size_t n, bool closed_left) {
  const double nd = static_cast<double>(n);
  std::int64_t lo, hi;
  if (closed_left) {
    lo = static_cast<std::int64_t>(std::ceil(a * nd - kSlack));
    hi = static_cast<std::int64_t>(std::ceil(b * nd - kSlack)) - 1;  // [a, b)
  } else {
    lo = static_cast<std::int64_t>(std::floor(a * nd + kSlack)) + 1;  // (a, b]
    hi = static_cast<std::int64_t>(std::floor(b * nd + kSlack));
  }
  return {lo, hi};
}

}  // namespace

double pair(const Configuration& c, const std::function<double(double)>& g) {
  const double n = static_cast<double>(c.size());
  double s = 0;
  for (std::size_t x = 0; x < c.size(); ++x) {
    if (c[x]) s += g(static_cast<double>(x) / n);
  }
  return s / n;
}

std::size_t box_sites(std::size_t n, double eps) {
  return static_cast<std::size_t>(std::floor(eps * static_cast<double>(n) + 1e-9));
}

double local_average(const Configuration& c, std::size_t x, double eps) {
  const std::size_t n = c.size();
  const std::size_t k = box_sites(n, eps);
  if (k < 1) throw std::invalid_argument("local_average: eps N must be at least one");
  if (k >= n) throw std::invalid_argument("local_average: box wider than the torus");
  if (x >= n) throw std::out_of_range("local_average: site out of range");
  std::size_t sum = 0;
  if (x + k >= n) {
    for (std::size_t y = n - k; y < n; ++y) sum += c[y];
  } else {
    for (std::size_t y = x + 1; y <= x + k; ++y) sum += c[y];
  }
  return static_cast<double>(sum) / static_cast<double>(k);
}

BoxKernel::BoxKernel(double e) : eps(e) {
  if (!(eps > 0 && eps < 1)) throw std::invalid_argument("BoxKernel: eps must lie in (0,1)");
}

std::pair<double, double> BoxKernel::window(double v) const noexcept {
  v -= std::floor(v);
  if (v >= 1.0 - eps - kSlack) return {1.0 - eps, 1.0};
  return {v, v + eps};
}

double BoxKernel::operator()(double u, double v) const noexcept {
  u -= std::floor(u);
  const auto [a, b] = window(v);
  return (u > a && u < b) ? 1.0 / eps : 0.0;
}

SmoothKernel::SmoothKernel(double g) : gamma(g) {
  if (!(gamma > 0 && gamma < 1)) throw std::invalid_argument("SmoothKernel: gamma must lie in (0,1)");
}

double SmoothKernel::base(double s) noexcept {
  if (std::abs(s) > 0.25) return 0.0;
  const double c = std::cos(2 * std::numbers::pi * s);
  return 4 * c * c;
}

double SmoothKernel::base_cumulative(double s) noexcept {
  if (s <= -0.25) return 0.0;
  if (s >= 0.25) return 1.0;
  return 2 * (s + 0.25) + std::sin(4 * std::numbers::pi * s) / (2 * std::numbers::pi);
}

double SmoothKernel::operator()(double d) const noexcept { return base(wrap_signed(d) / gamma) / gamma; }

double SmoothKernel::mass_in(double c, double a, double b) const noexcept {
  double m = 0;
  for (int k = -1; k <= 1; ++k) {
    const double centre = c + k;
    m += base_cumulative((b - centre) / gamma) - base_cumulative((a - centre) / gamma);
  }
  return m;
}

double box_at(const Configuration& c, double eps, double v) {
  const BoxKernel kernel(eps);
  const auto [a, b] = kernel.window(v);
  const std::size_t n = c.size();
  // Left window [1-eps, 1) is closed on the left; the moving window (v, v+eps] on the right.
  const bool left_window = a >= 1.0 - eps - kSlack && b == 1.0;
  auto [lo, hi] = sites_in(a, b, n, left_window);
  std::size_t count = 0;
  for (std::int64_t y = std::max<std::int64_t>(lo, 0); y <= hi && y < static_cast<std::int64_t>(n); ++y) {
    count += c[static_cast<std::size_t>(y)];
  }
  return static_cast<double>(count) / (static_cast<double>(n) * eps);
}

DensityField convolve_box(const Configuration& c, double eps, std::size_t m) {
  std::vector<double> v(m);
  for (std::size_t j = 0; j < m; ++j) v[j] = box_at(c, eps, (j + 0.5) / m);
  return DensityField(std::move(v));
}

namespace {

double field_integral_to(const DensityField& rho, const std::vector<double>& cum, double u) {
  const std::size_t m = rho.size();
  const double pos = u * static_cast<double>(m);
  const auto j = std::min<std::size_t>(static_cast<std::size_t>(pos), m - 1);
  return cum[j] + (pos - static_cast<double>(j)) * rho[j] / static_cast<double>(m);
}

std::vector<double> cumulative_mass(const DensityField& rho) {
  const std::size_t m = rho.size();
  std::vector<double> cum(m + 1, 0.0);
  for (std::size_t j = 0; j < m; ++j) cum[j + 1] = cum[j] + rho[j] / static_cast<double>(m);
  return cum;
}

}  // namespace

DensityField convolve_box(const DensityField& rho, double eps) {
  const BoxKernel kernel(eps);
  const auto cum = cumulative_mass(rho);
  std::vector<double> out(rho.size());
  for (std::size_t j = 0; j < rho.size(); ++j) {
    const auto [a, b] = kernel.window(rho.center(j));
    out[j] = (field_integral_to(rho, cum, b) - field_integral_to(rho, cum, a)) / eps;
  }
  return DensityField(std::move(out));
}

double box_at(const DensityField& rho, double eps, double v) {
  const auto [a, b] = BoxKernel(eps).window(v);
  const auto cum = cumulative_mass(rho);
  return (field_integral_to(rho, cum, b) - field_integral_to(rho, cum, a)) / eps;
}

double smooth_at(const Configuration& c, double gamma, double u) {
  const SmoothKernel kernel(gamma);
  const double n = static_cast<double>(c.size());
  double s = 0;
  for (std::size_t x = 0; x < c.size(); ++x) {
    if (c[x]) s += kernel(u - static_cast<double>(x) / n);
  }
  return s / n;
}

DensityField convolve_smooth(const Configuration& c, double gamma, std::size_t m) {
  std::vector<double> v(m);
  for (std::size_t j = 0; j < m; ++j) v[j] = smooth_at(c, gamma, (j + 0.5) / m);
  return DensityField(std::move(v));
}

DensityField convolve_smooth(const DensityField& rho, double gamma) {
  const SmoothKernel kernel(gamma);
  const std::size_t m = rho.size();
  std::vector<double> out(m, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    // Kernel centred at the output point, integrated over each input cell.
    const double v = rho.center(j);
    double s = 0;
    for (std::size_t i = 0; i < m; ++i) {
      const double a = static_cast<double>(i) / m;
      const double b = static_cast<double>(i + 1) / m;
      if (std::abs(wrap_signed(rho.center(i) - v)) > gamma / 4 + 1.0 / m) continue;
      s += rho[i] * kernel.mass_in(v, a, b);
    }
    out[j] = s;
  }
  return DensityField(std::move(out));
}

double smooth_box_at(const Configuration& c, double gamma, double eps, double v) {
  const SmoothKernel kernel(gamma);
  const auto [a, b] = BoxKernel(eps).window(v);
  const double n = static_cast<double>(c.size());
  double s = 0;
  for (std::size_t x = 0; x < c.size(); ++x) {
    if (c[x]) s += kernel.mass_in(static_cast<double>(x) / n, a, b);
  }
  return s / (n * eps);
}

int g1(const Configuration& c, std::size_t x) {
  return c[x] * (1 - c.at(static_cast<std::int64_t>(x) + 1));
}

int g2(const Configuration& c, std::size_t x) {
  return c.at(static_cast<std::int64_t>(x) + 1) * (1 - c[x]);
}

}  // namespace slowbond
