#include "slowbond/field.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace slowbond {

void FieldSlice::resize(std::size_t n) {
  value.resize(n);
  du.resize(n);
  dt.resize(n);
  duu.resize(n);
}

void Perturbation::slice(double t, std::span<const double> u, FieldSlice& out) const {
  out.resize(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    out.value[i] = value(t, u[i]);
    out.du[i] = du(t, u[i]);
    out.dt[i] = dt(t, u[i]);
    out.duu[i] = duu(t, u[i]);
  }
}

AnalyticField::AnalyticField(FieldFunctions f) : f_(std::move(f)) {
  if (!f_.value || !f_.du || !f_.dt || !f_.duu) {
    throw std::invalid_argument("AnalyticField: all four evaluators are required");
  }
}

LinearCombination::LinearCombination(std::vector<double> coefficients,
                                     std::vector<FieldPtr> terms)
    : coefficients_(std::move(coefficients)), terms_(std::move(terms)) {
  if (coefficients_.size() != terms_.size()) {
    throw std::invalid_argument("LinearCombination: size mismatch");
  }
  for (const auto& t : terms_) {
    if (!t) throw std::invalid_argument("LinearCombination: null term");
  }
}

double LinearCombination::value(double t, double u) const {
  double s = 0;
  for (std::size_t i = 0; i < terms_.size(); ++i) s += coefficients_[i] * terms_[i]->value(t, u);
  return s;
}

double LinearCombination::du(double t, double u) const {
  double s = 0;
  for (std::size_t i = 0; i < terms_.size(); ++i) s += coefficients_[i] * terms_[i]->du(t, u);
  return s;
}

double LinearCombination::dt(double t, double u) const {
  double s = 0;
  for (std::size_t i = 0; i < terms_.size(); ++i) s += coefficients_[i] * terms_[i]->dt(t, u);
  return s;
}

double LinearCombination::duu(double t, double u) const {
  double s = 0;
  for (std::size_t i = 0; i < terms_.size(); ++i) s += coefficients_[i] * terms_[i]->duu(t, u);
  return s;
}

SeparableField::SeparableField(std::vector<SeparableTerm> terms) : terms_(std::move(terms)) {
  for (const auto& term : terms_) {
    if (!term.time || !term.space) throw std::invalid_argument("SeparableField: missing factor");
  }
}

double SeparableField::value(double t, double u) const {
  double s = 0;
  for (const auto& term : terms_) s += term.coefficient * term.time(t)[0] * term.space(u)[0];
  return s;
}

double SeparableField::du(double t, double u) const {
  double s = 0;
  for (const auto& term : terms_) s += term.coefficient * term.time(t)[0] * term.space(u)[1];
  return s;
}

double SeparableField::dt(double t, double u) const {
  double s = 0;
  for (const auto& term : terms_) s += term.coefficient * term.time(t)[1] * term.space(u)[0];
  return s;
}

double SeparableField::duu(double t, double u) const {
  double s = 0;
  for (const auto& term : terms_) s += term.coefficient * term.time(t)[0] * term.space(u)[2];
  return s;
}

void SeparableField::slice(double t, std::span<const double> u, FieldSlice& out) const {
  out.resize(u.size());
  std::fill(out.value.begin(), out.value.end(), 0.0);
  std::fill(out.du.begin(), out.du.end(), 0.0);
  std::fill(out.dt.begin(), out.dt.end(), 0.0);
  std::fill(out.duu.begin(), out.duu.end(), 0.0);
  for (const auto& term : terms_) {
    const auto a = term.time(t);
    const double c0 = term.coefficient * a[0], c1 = term.coefficient * a[1];
    for (std::size_t i = 0; i < u.size(); ++i) {
      const auto b = term.space(u[i]);
      out.value[i] += c0 * b[0];
      out.du[i] += c0 * b[1];
      out.dt[i] += c1 * b[0];
      out.duu[i] += c0 * b[2];
    }
  }
}

void LinearCombination::slice(double t, std::span<const double> u, FieldSlice& out) const {
  out.resize(u.size());
  std::fill(out.value.begin(), out.value.end(), 0.0);
  std::fill(out.du.begin(), out.du.end(), 0.0);
  std::fill(out.dt.begin(), out.dt.end(), 0.0);
  std::fill(out.duu.begin(), out.duu.end(), 0.0);
  FieldSlice part;
  for (std::size_t k = 0; k < terms_.size(); ++k) {
    terms_[k]->slice(t, u, part);
    const double c = coefficients_[k];
    for (std::size_t i = 0; i < u.size(); ++i) {
      out.value[i] += c * part.value[i];
      out.du[i] += c * part.du[i];
      out.dt[i] += c * part.dt[i];
      out.duu[i] += c * part.duu[i];
    }
  }
}

FieldPtr make_field(FieldFunctions f) { return std::make_shared<AnalyticField>(std::move(f)); }

FieldPtr zero_field() { return constant_field(0.0); }

FieldPtr constant_field(double c) {
  auto zero = [](double, double) { return 0.0; };
  return make_field({[c](double, double) { return c; }, zero, zero, zero});
}

FieldPtr combine(double a, FieldPtr h1, double b, FieldPtr h2) {
  return std::make_shared<LinearCombination>(std::vector<double>{a, b},
                                             std::vector<FieldPtr>{std::move(h1), std::move(h2)});
}

FieldPtr shift_by(FieldPtr h, std::function<double(double)> c, std::function<double(double)> dc) {
  auto zero = [](double, double) { return 0.0; };
  auto shift = make_field({[c](double t, double) { return c(t); }, zero,
                           [dc](double t, double) { return dc(t); }, zero});
  return combine(1.0, std::move(h), 1.0, std::move(shift));
}

double derivative_mismatch(const Perturbation& h, double horizon, int grid) {
  const double step = 1e-5;
  double worst = 0;
  for (int i = 0; i <= grid; ++i) {
    // Stay a finite-difference stencil away from t=0, t=T and the cut.
    const double t = horizon * (0.05 + 0.9 * i / grid);
    for (int k = 0; k <= grid; ++k) {
      const double u = 0.02 + 0.96 * k / grid;
      const double fd_u = (h.value(t, u + step) - h.value(t, u - step)) / (2 * step);
      const double fd_t = (h.value(t + step, u) - h.value(t - step, u)) / (2 * step);
      const double fd_uu = (h.du(t, u + step) - h.du(t, u - step)) / (2 * step);
      worst = std::max({worst, std::abs(fd_u - h.du(t, u)), std::abs(fd_t - h.dt(t, u)),
                        std::abs(fd_uu - h.duu(t, u))});
    }
  }
  return worst;
}

FieldNorms sample_norms(const Perturbation& h, double horizon, int nt, int nu) {
  FieldNorms n;
  for (int i = 0; i < nt; ++i) {
    const double t = nt > 1 ? horizon * i / (nt - 1) : 0.0;
    n.jump = std::max(n.jump, std::abs(h.jump(t)));
    for (int k = 0; k < nu; ++k) {
      const double u = nu > 1 ? static_cast<double>(k) / (nu - 1) : 0.0;
      n.value = std::max(n.value, std::abs(h.value(t, u)));
      n.du = std::max(n.du, std::abs(h.du(t, u)));
      n.dt = std::max(n.dt, std::abs(h.dt(t, u)));
      n.duu = std::max(n.duu, std::abs(h.duu(t, u)));
    }
  }
  return n;
}

}  // namespace slowbond
