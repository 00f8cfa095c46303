#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "slowbond/density.hpp"
#include "slowbond/field.hpp"

namespace slowbond {

/// Named initial profiles:
///   constant [c], linear [a, b] (a + b u), cosine [mean, amp, k, phase],
///   smoothed_step [high, low, centre, width] (logistic, high to the left).
Profile named_profile(const std::string& name, const std::vector<double>& params);

/// Named fields H(t,u):
///   zero, constant [c], linear_u [a] (a u),
///   composite [a, b, k, c] ((a u + b sin(2 pi k u))(1 + c t)),
///   bump [amp, centre, halfwidth] (amp (1 - s^2)^4, s = (u - centre)/halfwidth),
///   random [seed, horizon] (see random_test_field).
FieldPtr named_field(const std::string& name, const std::vector<double>& params);

/// 0.5 + sum_{k=1..3} a_k cos(2 pi k u + p_k) with |a_k| <= 0.12.
Profile random_profile(std::uint64_t seed);

/// sum_{k,l<=2} c_kl u^k (1-u)^l cos(w_kl t + p_kl), coefficients in [-1,1],
/// frequencies in [0, 2 pi / horizon].
FieldPtr random_test_field(std::uint64_t seed, double horizon);

/// amp (1 - s^2)^4 on |s| < 1: C^3, supported inside (centre - halfwidth, centre + halfwidth).
FieldPtr bump_field(double amp, double centre, double halfwidth);

/// (1 - s^2)^p and its first three u-derivatives, s = (u - centre)/halfwidth, p >= 3.
std::array<double, 4> bump_derivatives(double centre, double halfwidth, double u, int power = 4);

/// A smooth path rho = 1/2 + sum_i a_i cos(w_i t + p_i) b_i(u) with C^7 bumps b_i
/// supported inside (0.1, 0.9), and the field -d_u rho / 4 that maximizes
/// the energy functional at rho.
struct EnergyTestPath {
  std::function<double(double, double)> rho;
  std::function<double(double, double)> du_rho;
  FieldPtr maximizer;
};
EnergyTestPath energy_test_path(std::uint64_t seed);

/// Sum of three C^7 bumps with random time modulation, supported inside (0.1, 0.9).
FieldPtr random_admissible_field(std::uint64_t seed, double horizon);

}  // namespace slowbond
