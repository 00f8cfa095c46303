#pragma once

#include <array>
#include <cmath>
#include <span>

namespace slowbond::quad {

// 5-point Gauss-Legendre nodes and weights on [-1,1].
inline constexpr std::array<double, 5> kGaussNodes = {
    -0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831, 0.9061798459386640};
inline constexpr std::array<double, 5> kGaussWeights = {
    0.2369268850561891, 0.4786286704993665, 0.5688888888888889, 0.4786286704993665,
    0.2369268850561891};

template <class F>
double gauss(F&& f, double a, double b, int panels = 1) {
  const double h = (b - a) / panels;
  double s = 0;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * h;
    for (std::size_t i = 0; i < kGaussNodes.size(); ++i) {
      s += kGaussWeights[i] * f(mid + 0.5 * h * kGaussNodes[i]);
    }
  }
  return 0.5 * h * s;
}

/// Trapezoid rule over possibly non-uniform abscissae.
inline double trapezoid(std::span<const double> x, std::span<const double> y) {
  double s = 0;
  for (std::size_t i = 1; i < x.size(); ++i) s += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
  return s;
}

}  // namespace slowbond::quad
