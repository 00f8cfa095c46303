#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

namespace slowbond {

/// Macroscopic density profile gamma on the torus opened at the cut.
struct Profile {
  std::function<double(double)> density;
  /// Optional antiderivative F(u) = int_0^u density. When absent the
  /// integral is computed by Gauss-Legendre quadrature.
  std::function<double(double)> cumulative;

  double integral(double a, double b) const;
};

Profile constant_profile(double c);

/// Grid function on m cells of (0,1); cell j has centre (j + 1/2)/m.
///
/// Side values at the cut are second-order extrapolations from the two
/// adjacent cells: rho(0+) near u=0, rho(0-) near u=1.
class DensityField {
 public:
  DensityField() = default;
  explicit DensityField(std::vector<double> values);

  static DensityField constant(std::size_t m, double c);
  /// Cell averages of the profile.
  static DensityField from_profile(const Profile& gamma, std::size_t m);
  /// Point samples at cell centres.
  static DensityField sample(const std::function<double(double)>& f, std::size_t m);

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t j) const noexcept { return values_[j]; }
  double& operator[](std::size_t j) noexcept { return values_[j]; }
  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }

  double center(std::size_t j) const noexcept { return (static_cast<double>(j) + 0.5) / size(); }
  double mass() const noexcept;
  double side_plus() const noexcept;
  double side_minus() const noexcept;
  double min() const noexcept;
  double max() const noexcept;
  bool bounded(double tol = 0.0) const noexcept;

 private:
  std::vector<double> values_;
};

double l1_distance(const DensityField& a, const DensityField& b);
double l2_distance(const DensityField& a, const DensityField& b);

/// Averages a fine field onto a coarser grid; the fine size must be a
/// multiple of m.
DensityField coarsen(const DensityField& fine, std::size_t m);

/// CSV rows "u,value".
void write_csv(std::ostream& os, const DensityField& field);

}  // namespace slowbond
