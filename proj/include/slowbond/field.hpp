#pragma once

#include <array>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace slowbond {

/// A field H(t,u) on [0,T]x[0,1], smooth away from the cut at u=0.
///
/// The torus is opened at the slow bond: u=0 is the right-hand side 0+ and
/// u=1 is the left-hand side 0-. Fields are right continuous at zero, so
/// value(t, 0) is H_t(0+) and value(t, 1) is H_t(0-).
///
/// The same type serves as the perturbation driving the asymmetric dynamics
/// and as the test function G in weak formulations.
/// Values of H and its derivatives at one time and a list of positions.
struct FieldSlice {
  std::vector<double> value, du, dt, duu;
  void resize(std::size_t n);
};

class Perturbation {
 public:
  virtual ~Perturbation() = default;

  virtual double value(double t, double u) const = 0;
  virtual double du(double t, double u) const = 0;
  virtual double dt(double t, double u) const = 0;
  virtual double duu(double t, double u) const = 0;

  /// delta H_t(0) = H_t(0+) - H_t(0-).
  double jump(double t) const { return value(t, 0.0) - value(t, 1.0); }

  /// Evaluates everything at (t, u_i). Subclasses override this when the
  /// time dependence can be shared across positions.
  virtual void slice(double t, std::span<const double> u, FieldSlice& out) const;
};

using FieldPtr = std::shared_ptr<const Perturbation>;

struct FieldFunctions {
  std::function<double(double, double)> value;
  std::function<double(double, double)> du;
  std::function<double(double, double)> dt;
  std::function<double(double, double)> duu;
};

class AnalyticField final : public Perturbation {
 public:
  explicit AnalyticField(FieldFunctions f);

  double value(double t, double u) const override { return f_.value(t, u); }
  double du(double t, double u) const override { return f_.du(t, u); }
  double dt(double t, double u) const override { return f_.dt(t, u); }
  double duu(double t, double u) const override { return f_.duu(t, u); }

 private:
  FieldFunctions f_;
};

/// Sum of scaled fields, sum_i c_i H_i.
class LinearCombination final : public Perturbation {
 public:
  LinearCombination(std::vector<double> coefficients, std::vector<FieldPtr> terms);

  double value(double t, double u) const override;
  double du(double t, double u) const override;
  double dt(double t, double u) const override;
  double duu(double t, double u) const override;
  void slice(double t, std::span<const double> u, FieldSlice& out) const override;

 private:
  std::vector<double> coefficients_;
  std::vector<FieldPtr> terms_;
};

/// sum_i c_i a_i(t) b_i(u). Time and space factors report their own
/// derivatives, so slices cost one time evaluation per term.
struct SeparableTerm {
  double coefficient = 1.0;
  /// (t) -> {a(t), a'(t)}
  std::function<std::array<double, 2>(double)> time;
  /// (u) -> {b(u), b'(u), b''(u)}
  std::function<std::array<double, 3>(double)> space;
};

class SeparableField final : public Perturbation {
 public:
  explicit SeparableField(std::vector<SeparableTerm> terms);

  double value(double t, double u) const override;
  double du(double t, double u) const override;
  double dt(double t, double u) const override;
  double duu(double t, double u) const override;
  void slice(double t, std::span<const double> u, FieldSlice& out) const override;

 private:
  std::vector<SeparableTerm> terms_;
};

FieldPtr make_field(FieldFunctions f);
FieldPtr zero_field();
FieldPtr constant_field(double c);
FieldPtr combine(double a, FieldPtr h1, double b, FieldPtr h2);

/// H(t,u) + c(t): a gauge shift by a spatial constant.
FieldPtr shift_by(FieldPtr h, std::function<double(double)> c,
                  std::function<double(double)> dc);

/// Largest discrepancy between the analytic derivatives of `h` and centred
/// finite differences, over a (t,u) grid avoiding the cut. Used to catch
/// inconsistent derivative evaluators.
double derivative_mismatch(const Perturbation& h, double horizon, int grid = 24);

/// Sup norms of H and its derivatives, sampled on a (t,u) grid.
struct FieldNorms {
  double value = 0, du = 0, dt = 0, duu = 0, jump = 0;
};
FieldNorms sample_norms(const Perturbation& h, double horizon, int nt = 65, int nu = 513);

}  // namespace slowbond
