#pragma once

#include <functional>
#include <utility>

#include "slowbond/density.hpp"
#include "slowbond/lattice.hpp"

namespace slowbond {

/// <pi^N, G> = (1/N) sum_x G(x/N) eta(x).
double pair(const Configuration& c, const std::function<double(double)>& g);

/// Number of sites in a box of macroscopic width eps: floor(eps N).
std::size_t box_sites(std::size_t n, double eps);

/// eta^{eps N}(x): mean occupation of the box of floor(eps N) sites to the
/// right of x, or of the box just left of the slow bond when x is within
/// floor(eps N) sites of it. No box contains the slow bond.
double local_average(const Configuration& c, std::size_t x, double eps);

/// Approximation of the identity iota_eps(u, v) on the cut torus.
///
/// For v < 1 - eps the window is (v, v + eps]; for v >= 1 - eps it is the
/// fixed window [1 - eps, 1) just left of the cut. Either way the window
/// lies inside (0,1), so averages never mix the two sides of the slow bond.
struct BoxKernel {
  double eps;

  explicit BoxKernel(double eps);
  std::pair<double, double> window(double v) const noexcept;
  double operator()(double u, double v) const noexcept;
};

/// Continuous approximation of the identity iota^s_gamma(u) = f(u/gamma)/gamma
/// with base profile f(s) = 4 cos^2(2 pi s) on |s| <= 1/4.
struct SmoothKernel {
  double gamma;

  explicit SmoothKernel(double gamma);
  static double base(double s) noexcept;
  /// int_{-inf}^s f.
  static double base_cumulative(double s) noexcept;
  /// Kernel value at signed torus displacement d.
  double operator()(double d) const noexcept;
  /// Mass of the kernel centred at c lying in the window (a, b), 0 <= a < b <= 1,
  /// counting periodic images.
  double mass_in(double c, double a, double b) const noexcept;
};

/// (pi^N * iota_eps)(v).
double box_at(const Configuration& c, double eps, double v);
/// (pi^N * iota_eps) at the m cell centres.
DensityField convolve_box(const Configuration& c, double eps, std::size_t m);
/// (rho * iota_eps) at the cell centres of rho's grid, exact for piecewise
/// constant rho.
DensityField convolve_box(const DensityField& rho, double eps);
/// (rho * iota_eps)(v) for piecewise constant rho.
double box_at(const DensityField& rho, double eps, double v);

/// (pi^N * iota^s_gamma)(u).
double smooth_at(const Configuration& c, double gamma, double u);
DensityField convolve_smooth(const Configuration& c, double gamma, std::size_t m);
/// Periodic smoothing of a piecewise constant field, evaluated exactly at cell centres.
DensityField convolve_smooth(const DensityField& rho, double gamma);
/// ((pi^N * iota^s_gamma) * iota_eps)(v), evaluated in closed form.
double smooth_box_at(const Configuration& c, double gamma, double eps, double v);

/// tau_x g1 = eta(x)(1 - eta(x+1)) and tau_x g2 = eta(x+1)(1 - eta(x)).
int g1(const Configuration& c, std::size_t x);
int g2(const Configuration& c, std::size_t x);
inline double g1_tilde(double a, double b) { return a * (1.0 - b); }
inline double g2_tilde(double a, double b) { return b * (1.0 - a); }

}  // namespace slowbond
