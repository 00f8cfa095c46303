#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

#include "slowbond/field.hpp"
#include "slowbond/rate_functional.hpp"

namespace slowbond {

/// A density path and its derivatives on the nodes u_k = k/M, k = 0..M, at one time.
/// q is d_t int_0^u rho_t, the mass flowing past 0+ minus the mass flowing past u.
struct PathSlice {
  std::vector<double> rho, du, duu, dt, q;
};

/// Smooth, strictly interior density path on [0, T].
class DensityPath {
 public:
  virtual ~DensityPath() = default;
  virtual double horizon() const = 0;
  /// Times at which the inverse problem is solved.
  virtual std::vector<double> times() const = 0;
  virtual PathSlice slice(double t, std::size_t nodes) const = 0;
};

/// Path given by formulas. q is obtained by integrating d_t rho in u with
/// Gauss-Legendre quadrature on each node interval.
class AnalyticPath final : public DensityPath {
 public:
  struct Functions {
    std::function<double(double, double)> rho, du, duu, dt;
  };
  AnalyticPath(Functions f, double horizon, std::size_t intervals);

  double horizon() const override { return horizon_; }
  std::vector<double> times() const override;
  PathSlice slice(double t, std::size_t nodes) const override;

 private:
  Functions f_;
  double horizon_;
  std::size_t intervals_;
};

/// Path sampled on a grid, e.g. a PDE solution. Spatial derivatives come
/// from cell differences, time derivatives from second-order differences
/// across neighbouring snapshots; slices are only available at the
/// snapshot times.
class GridPath final : public DensityPath {
 public:
  explicit GridPath(PathMeasure path);

  double horizon() const override { return path_.horizon(); }
  std::vector<double> times() const override { return path_.times; }
  PathSlice slice(double t, std::size_t nodes) const override;

 private:
  PathMeasure path_;
};

struct EllipticCoefficients {
  double alpha = 0;  // int 1/(2 chi(rho))
  double a = 0;      // int (d_u rho - q)/(2 chi(rho))
  double b = 0;      // rho(1)(1 - rho(0))
  double c = 0;      // rho(0)(1 - rho(1))
};

/// Trapezoid values on `nodes` + 1 nodes. Throws std::domain_error when
/// rho comes within `margin` of 0 or 1.
EllipticCoefficients coefficients(const DensityPath& rho, double t, std::size_t nodes, double margin = 1e-6);
EllipticCoefficients coefficients(const PathSlice& slice, double margin = 1e-6);

struct RootResult {
  double z0 = 0;
  double residual = 0;
  int iterations = 0;
};

/// g(z) = z - (B e^{-z} - C e^{z}) alpha - A.
double root_function(const EllipticCoefficients& k, double z);

/// Bisection to 1e-12 on an expanding bracket, then two Newton steps.
RootResult solve_root(const EllipticCoefficients& k);
/// Safeguarded Newton from z = A, independent of solve_root.
RootResult solve_root_newton(const EllipticCoefficients& k);

/// The perturbation built from a path: nodal values of H, d_u H and
/// d_uu H at each solve time. Between nodes H and d_u H are cubic Hermite
/// interpolants, d_uu H is linear; in time everything is linear.
class GridPerturbation final : public Perturbation {
 public:
  GridPerturbation(std::vector<double> times, std::size_t nodes, std::vector<std::vector<double>> h,
                   std::vector<std::vector<double>> dh, std::vector<std::vector<double>> ddh);

  double value(double t, double u) const override;
  double du(double t, double u) const override;
  double dt(double t, double u) const override;
  double duu(double t, double u) const override;

  const std::vector<double>& times() const { return times_; }
  std::size_t nodes() const { return nodes_; }
  const std::vector<double>& node_values(std::size_t i) const { return h_[i]; }
  const std::vector<double>& node_gradients(std::size_t i) const { return dh_[i]; }

 private:
  struct Locus {
    std::size_t i0, i1, k;
    double wt, s;  // time weight toward i1, position within node interval
  };
  Locus locate(double t, double u) const;
  double hermite(const std::vector<double>& f, const std::vector<double>& df, std::size_t k, double s) const;

  std::vector<double> times_;
  std::size_t nodes_;
  std::vector<std::vector<double>> h_, dh_, ddh_;
};

struct InverseResult {
  std::shared_ptr<const GridPerturbation> h;
  std::vector<EllipticCoefficients> coefficients;
  std::vector<RootResult> roots;
};

/// Solves the elliptic problem at every solve time of the path, gauge fixed by H_t(0+) = 0.
InverseResult build_H(const DensityPath& rho, std::size_t nodes);

/// CSV rows "t,u,H,dH" at the nodes of every solve time.
void write_csv(std::ostream& os, const GridPerturbation& h);

}  // namespace slowbond
