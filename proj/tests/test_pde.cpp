#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "slowbond/catalog.hpp"
#include "slowbond/robin_pde.hpp"

using namespace slowbond;

namespace {

constexpr double k = 2 * std::numbers::pi;

const Profile kStep = named_profile("smoothed_step", {1.0, 0.0, 0.5, 0.02});

DensityField step(std::size_t m) { return DensityField::from_profile(kStep, m); }

double mass_drift(const PdeSolution& s) {
  double worst = 0;
  for (const auto& f : s.fields) worst = std::max(worst, std::abs(f.mass() - s.fields.front().mass()));
  return worst;
}

double jump_at(const DensityField& f) { return f.side_plus() - f.side_minus(); }

// H = sin(2 pi u) u (1 - u) (1 + t): smooth, zero jump at the cut.
FieldPtr sine_field() {
  return make_field({[](double t, double u) { return std::sin(k * u) * u * (1 - u) * (1 + t); },
                     [](double t, double u) {
                       return (k * std::cos(k * u) * u * (1 - u) + std::sin(k * u) * (1 - 2 * u)) * (1 + t);
                     },
                     [](double, double u) { return std::sin(k * u) * u * (1 - u); },
                     [](double t, double u) {
                       return (-k * k * std::sin(k * u) * u * (1 - u) + 2 * k * std::cos(k * u) * (1 - 2 * u) -
                               2 * std::sin(k * u)) *
                              (1 + t);
                     }});
}

// G(t,u) = cos(2 pi u) + t u^2: nonzero derivative and jump at the cut.
FieldPtr test_function() {
  return make_field({[](double t, double u) { return std::cos(k * u) + t * u * u; },
                     [](double t, double u) { return -k * std::sin(k * u) + 2 * t * u; },
                     [](double, double u) { return u * u; },
                     [](double t, double u) { return -k * k * std::cos(k * u) + 2 * t; }});
}

}  // namespace

TEST_CASE("cut flux") {
  CHECK(cut_flux(0.7, 0.2, 0.0) == doctest::Approx(0.5));
  CHECK(cut_flux(0.3, 0.3, 0.0) == doctest::Approx(0.0));
  const double minus = 0.6, plus = 0.4, d = 0.3;
  CHECK(cut_flux(minus, plus, d) ==
        doctest::Approx(minus * (1 - plus) * std::exp(d) - plus * (1 - minus) * std::exp(-d)));
  CHECK(cut_flux(minus, plus, d) == doctest::Approx(-cut_flux(plus, minus, -d)));
}

TEST_CASE("solver preconditions") {
  CHECK_THROWS_AS(solve_symmetric(DensityField::constant(64, 0.5), 0.01, {.dt = 0.3 / (64.0 * 64)}),
                  std::invalid_argument);
  CHECK_THROWS_AS(solve_symmetric(DensityField::constant(64, 1.2), 0.01), std::invalid_argument);
  CHECK_THROWS_AS(solve_symmetric(DensityField::constant(64, 0.5), 0.01, {.m = 32}), std::invalid_argument);
  CHECK_THROWS_AS(solve_perturbed(DensityField::constant(64, 0.5), nullptr, 0.01), std::invalid_argument);
  CHECK_NOTHROW(solve_symmetric(DensityField::constant(64, 0.5), 0.01, {.dt = 0.25 / (64.0 * 64)}));
}

TEST_CASE("constants are stationary") {
  for (double c : {0.0, 0.3, 1.0}) {
    const auto s = solve_symmetric(DensityField::constant(128, c), 0.2);
    for (const auto& f : s.fields) {
      CHECK(f.min() == doctest::Approx(c).epsilon(1e-14));
      CHECK(f.max() == doctest::Approx(c).epsilon(1e-14));
    }
  }
}

TEST_CASE("zero field gives the symmetric solution") {
  const auto a = solve_symmetric(step(128), 0.05);
  const auto b = solve_perturbed(step(128), zero_field(), 0.05);
  REQUIRE(a.fields.size() == b.fields.size());
  CHECK(a.times == b.times);
  CHECK(l1_distance(a.fields.back(), b.fields.back()) < 1e-14);
  CHECK(std::abs(a.flux_at_cut.back() - b.flux_at_cut.back()) < 1e-12);
}

TEST_CASE("mass conservation") {
  SUBCASE("half filling with H = u over [0, 1]") {
    const auto s = solve_perturbed(DensityField::constant(64, 0.5), named_field("linear_u", {1.0}), 1.0);
    CHECK(mass_drift(s) < 1e-10);
    CHECK(s.fields.back().mass() == doctest::Approx(0.5).epsilon(1e-10));
    // The slope drives mass through the cut, so the profile is not constant.
    CHECK(s.fields.back().max() - s.fields.back().min() > 0.05);
  }
  SUBCASE("random profiles") {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      const auto gamma = DensityField::from_profile(random_profile(seed), 128);
      CHECK(mass_drift(solve_symmetric(gamma, 0.1)) < 1e-10);
      CHECK(mass_drift(solve_perturbed(gamma, named_field("composite", {1.0, 0.3, 1.0, 0.5}), 0.1)) < 1e-10);
    }
  }
}

TEST_CASE("densities stay in [0, 1]") {
  const auto s = solve_perturbed(step(128), named_field("composite", {2.0, 0.5, 1.0, 0.0}), 0.1);
  for (const auto& f : s.fields) CHECK(f.bounded(1e-9));
}

TEST_CASE("jump at the cut stays positive and decays") {
  // Coarse grid against a fine-grid solution of the same problem.
  const double horizon = 0.004;
  const auto coarse = solve_symmetric(step(256), horizon, {.observations = 8});
  const auto fine = solve_symmetric(step(4096), horizon, {.observations = 8});
  double last = 2.0;
  for (double t : {0.0005, 0.001, 0.002, 0.004}) {
    const double jc = jump_at(coarse.fields[nearest_observation(coarse, t)]);
    const double jf = jump_at(fine.fields[nearest_observation(fine, t)]);
    CHECK(jf > 0.0);
    CHECK(jf < last);
    CHECK(jc == doctest::Approx(jf).epsilon(0.02));
    last = jf;
  }
  const auto longer = solve_symmetric(step(256), 0.1);
  double prev = 2.0;
  bool positive = true, decaying = true;
  for (const auto& f : longer.fields) {
    positive = positive && jump_at(f) > 0;
    decaying = decaying && jump_at(f) <= prev + 1e-12;
    prev = jump_at(f);
  }
  CHECK(positive);
  CHECK(decaying);
}

TEST_CASE("grid refinement") {
  auto at = [](std::size_t m) { return solve_symmetric(step(m), 0.05).fields.back(); };
  const auto a = at(64), b = at(128), c = at(256);
  const double d1 = l1_distance(coarsen(b, 64), a);
  const double d2 = l1_distance(coarsen(c, 128), b);
  INFO("successive L1 distances " << d1 << ", " << d2);
  CHECK(d1 / d2 >= 1.8);
}

TEST_CASE("weak residual") {
  const auto g = test_function();
  SUBCASE("constant solution") {
    CHECK(weak_residual(solve_symmetric(DensityField::constant(64, 0.4), 0.05), *g) < 1e-10);
  }
  SUBCASE("constant test function measures mass change") {
    const auto s = solve_symmetric(step(128), 0.05);
    CHECK(weak_residual(s, *constant_field(1.0)) < 1e-10);
    const auto p = solve_perturbed(step(128), sine_field(), 0.05);
    CHECK(weak_residual(p, *constant_field(1.0)) < 1e-10);
  }
  SUBCASE("decays under refinement") {
    const auto gamma = random_profile(3);
    auto symmetric = [&](std::size_t m) {
      return weak_residual(solve_symmetric(DensityField::from_profile(gamma, m), 0.05), *g);
    };
    auto perturbed = [&](std::size_t m) {
      return weak_residual(solve_perturbed(DensityField::from_profile(gamma, m), sine_field(), 0.05), *g);
    };
    const double s1 = symmetric(64), s2 = symmetric(128);
    const double p1 = perturbed(64), p2 = perturbed(128);
    INFO("symmetric " << s1 << " -> " << s2 << ", perturbed " << p1 << " -> " << p2);
    CHECK(s1 / s2 >= 1.8);
    CHECK(p1 / p2 >= 1.8);
    CHECK(p2 < 1e-3);
  }
}

TEST_CASE("nearby initial data stay close") {
  const std::size_t m = 128;
  const auto a0 = DensityField::from_profile(random_profile(5), m);
  auto b0 = a0;
  for (std::size_t j = 0; j < m; ++j) b0[j] += 5e-4 * std::sin(2 * std::numbers::pi * 3 * b0.center(j));
  const double d0 = l2_distance(a0, b0);
  REQUIRE(d0 <= 1e-3);
  const auto a = solve_symmetric(a0, 0.1), b = solve_symmetric(b0, 0.1);
  double fitted = -1e300;
  for (std::size_t i = 1; i < a.fields.size(); ++i) {
    const double d = l2_distance(a.fields[i], b.fields[i]);
    fitted = std::max(fitted, std::log(d / d0) / a.times[i]);
  }
  INFO("fitted growth rate " << fitted);
  CHECK(fitted <= 10.0);
}

TEST_CASE("one-sided difference at the cut approaches the jump") {
  auto mismatch = [](std::size_t m) {
    const auto f = solve_symmetric(step(m), 0.02).fields.back();
    const double md = static_cast<double>(m);
    const double plus = (f[1] - f[0]) * md, minus = (f[m - 1] - f[m - 2]) * md;
    const double jump = f.side_plus() - f.side_minus();
    return std::max(std::abs(plus - jump), std::abs(minus - jump));
  };
  const double e1 = mismatch(64), e2 = mismatch(128), e3 = mismatch(256);
  INFO("mismatch " << e1 << ", " << e2 << ", " << e3);
  CHECK(e2 < e1);
  CHECK(e3 < e2);
  CHECK(e2 / e3 >= 1.5);
}

TEST_CASE("csv export") {
  const auto s = solve_symmetric(DensityField::constant(8, 0.5), 0.01, {.observations = 2});
  std::ostringstream os;
  write_csv(os, s);
  const auto text = os.str();
  CHECK(text.rfind("t,u,rho\n", 0) == 0);
  CHECK(static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')) == 1 + 8 * s.times.size());
}
