#include "slowbond/density.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "slowbond/quadrature.hpp"

namespace slowbond {

double Profile::integral(double a, double b) const {
  if (cumulative) return cumulative(b) - cumulative(a);
  return quad::gauss(density, a, b, 4);
}

Profile constant_profile(double c) {
  return {[c](double) { return c; }, [c](double u) { return c * u; }};
}

DensityField::DensityField(std::vector<double> values) : values_(std::move(values)) {
  if (values_.size() < 2) throw std::invalid_argument("DensityField: need at least two cells");
}

DensityField DensityField::constant(std::size_t m, double c) {
  return DensityField(std::vector<double>(m, c));
}

DensityField DensityField::from_profile(const Profile& gamma, std::size_t m) {
  std::vector<double> v(m);
  for (std::size_t j = 0; j < m; ++j) {
    const double a = static_cast<double>(j) / m;
    const double b = static_cast<double>(j + 1) / m;
    v[j] = gamma.integral(a, b) * m;
  }
  return DensityField(std::move(v));
}

DensityField DensityField::sample(const std::function<double(double)>& f, std::size_t m) {
  std::vector<double> v(m);
  for (std::size_t j = 0; j < m; ++j) v[j] = f((j + 0.5) / m);
  return DensityField(std::move(v));
}

double DensityField::mass() const noexcept {
  return std::accumulate(values_.begin(), values_.end(), 0.0) / size();
}

double DensityField::side_plus() const noexcept { return 1.5 * values_[0] - 0.5 * values_[1]; }

double DensityField::side_minus() const noexcept {
  const std::size_t m = size();
  return 1.5 * values_[m - 1] - 0.5 * values_[m - 2];
}

double DensityField::min() const noexcept { return *std::min_element(values_.begin(), values_.end()); }

double DensityField::max() const noexcept { return *std::max_element(values_.begin(), values_.end()); }

bool DensityField::bounded(double tol) const noexcept { return min() >= -tol && max() <= 1.0 + tol; }

double l1_distance(const DensityField& a, const DensityField& b) {
  if (a.size() != b.size()) throw std::invalid_argument("l1_distance: grid mismatch");
  double s = 0;
  for (std::size_t j = 0; j < a.size(); ++j) s += std::abs(a[j] - b[j]);
  return s / a.size();
}

double l2_distance(const DensityField& a, const DensityField& b) {
  if (a.size() != b.size()) throw std::invalid_argument("l2_distance: grid mismatch");
  double s = 0;
  for (std::size_t j = 0; j < a.size(); ++j) s += (a[j] - b[j]) * (a[j] - b[j]);
  return std::sqrt(s / a.size());
}

DensityField coarsen(const DensityField& fine, std::size_t m) {
  if (m == 0 || fine.size() % m != 0) throw std::invalid_argument("coarsen: sizes not nested");
  const std::size_t r = fine.size() / m;
  std::vector<double> v(m, 0.0);
  for (std::size_t j = 0; j < fine.size(); ++j) v[j / r] += fine[j];
  for (auto& x : v) x /= static_cast<double>(r);
  return DensityField(std::move(v));
}

void write_csv(std::ostream& os, const DensityField& field) {
  os << "u,value\n";
  const auto old = os.precision(17);
  for (std::size_t j = 0; j < field.size(); ++j) os << field.center(j) << ',' << field[j] << '\n';
  os.precision(old);
}

}  // namespace slowbond
