#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "slowbond/density.hpp"
#include "slowbond/field.hpp"
#include "slowbond/robin_pde.hpp"

namespace slowbond {

/// A density path t -> rho_t sampled at increasing times on a common grid.
struct PathMeasure {
  std::vector<double> times;
  std::vector<DensityField> fields;
  bool absolutely_continuous = true;
  /// Grid paths always have finite discrete energy; the flag is carried so
  /// the gating of J stays visible.
  bool finite_energy = true;

  static PathMeasure from_solution(const PdeSolution& solution);
  /// rho_t = c on m cells, with `intervals` uniform time steps on [0, T].
  static PathMeasure constant(std::size_t m, double c, double horizon, std::size_t intervals);
  /// Point samples rho(t, u_j) at cell centres on a uniform time grid.
  static PathMeasure sample(const std::function<double(double, double)>& rho, std::size_t m, double horizon,
                            std::size_t intervals);

  std::size_t cells() const { return fields.empty() ? 0 : fields.front().size(); }
  double horizon() const { return times.back(); }
  /// Throws when grids or times are inconsistent or a density leaves [0,1].
  void validate() const;
};

/// a rho + b lambda, pointwise; both paths must share times and grid.
PathMeasure mix(double a, const PathMeasure& rho, double b, const PathMeasure& lambda);

/// rho^eps = eps + (1 - 2 eps) rho: interpolation towards the constant paths 1 and 0.
PathMeasure interpolate_eps(const PathMeasure& rho, double eps);

namespace rate {

inline double chi(double a) { return a * (1.0 - a); }
double psi(double x);
/// Gamma(y) = 1 - e^y + y e^y = int_0^y s e^s ds.
double gamma(double y);

/// Linear part l_H(pi).
double ell(const PathMeasure& pi, const Perturbation& h);
/// Convex part Phi_H(pi).
double phi(const PathMeasure& pi, const Perturbation& h);
/// hat J_H = l_H - Phi_H.
double j_hat(const PathMeasure& pi, const Perturbation& h);
/// J_H: hat J_H on finite-energy paths, +infinity otherwise.
double j(const PathMeasure& pi, const Perturbation& h);

/// E_H(pi) = <<d_u H, rho>> - 2 <<H, H>> for H supported away from the cut.
/// Throws std::invalid_argument when H or d_u H is nonzero at u = 0 or u = 1.
double energy_of(const PathMeasure& pi, const Perturbation& h);
/// sup_H E_H(pi) = (1/8) int int (d_u rho)^2, with d_u rho from sixth-order
/// central differences in the interior of (0,1).
double energy(const PathMeasure& pi);
/// Cell-centre approximation of d_u rho used by `energy`.
std::vector<double> gradient(const DensityField& rho);

struct RateBreakdown {
  double grad_term = 0;   // int int chi(rho) (d_u H)^2
  double plus_term = 0;   // int rho(0-)(1 - rho(0+)) Gamma(delta H)
  double minus_term = 0;  // int rho(0+)(1 - rho(0-)) Gamma(-delta H)
  double total = 0;
};

/// Closed-form value of the rate at a solution of the perturbed equation.
RateBreakdown rate_closed_form(const PathMeasure& rho, const Perturbation& h);

/// max over the family of hat J_H, a lower bound for the rate I. The zero
/// field is always included implicitly, so the result is nonnegative.
double finite_family_rate(const PathMeasure& pi, const std::vector<FieldPtr>& family);

enum class CheckStatus { passed, failed, inapplicable };

struct ConvexityCheck {
  CheckStatus status = CheckStatus::inapplicable;
  double lhs = 0;     // I_F(theta rho + (1-theta) lambda)
  double rhs = 0;     // theta I_F(rho) + (1-theta) I_F(lambda)
  double margin = 0;  // rhs - lhs
};

/// Convexity of the finite-family rate along theta rho + (1-theta) lambda.
/// Inapplicable unless (rho(0+) - lambda(0+))(rho(0-) - lambda(0-)) >= 0 at every time.
ConvexityCheck rate_convex_combination_check(const PathMeasure& rho, const PathMeasure& lambda, double theta,
                                             const std::vector<FieldPtr>& family, double tol = 1e-10);

struct InterpolationCheck {
  CheckStatus status = CheckStatus::failed;
  double base = 0;           // I_F(rho)
  std::vector<double> eps;   // decreasing
  std::vector<double> rate;  // I_F(rho^eps)
};

/// lim sup_{eps -> 0} I_F(rho^eps) <= I_F(rho) along a decreasing list of eps:
/// passes when the excess max(0, I_F(rho^eps) - I_F(rho)) never grows as eps
/// shrinks and ends below max(tol, smallest eps).
InterpolationCheck rate_interpolation_check(const PathMeasure& rho, const std::vector<double>& eps,
                                            const std::vector<FieldPtr>& family, double tol = 1e-10);

/// Seeded family {random_test_field(seed + i)}, i < count.
std::vector<FieldPtr> test_family(std::uint64_t seed, std::size_t count, double horizon);

}  // namespace rate

}  // namespace slowbond
