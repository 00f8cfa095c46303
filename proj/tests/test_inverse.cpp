#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "slowbond/catalog.hpp"
#include "slowbond/inverse.hpp"
#include "slowbond/robin_pde.hpp"

using namespace slowbond;

namespace {

constexpr double k = 2 * std::numbers::pi;

// rho = 1/2 + 0.2 e^{-t} sin(2 pi u) + 0.3 cos(t) (u - 1/2), inside [0.15, 0.85].
AnalyticPath::Functions analytic() {
  return {[](double t, double u) { return 0.5 + 0.2 * std::exp(-t) * std::sin(k * u) + 0.3 * std::cos(t) * (u - 0.5); },
          [](double t, double u) { return 0.2 * std::exp(-t) * k * std::cos(k * u) + 0.3 * std::cos(t); },
          [](double t, double u) { return -0.2 * std::exp(-t) * k * k * std::sin(k * u); },
          [](double t, double u) { return -0.2 * std::exp(-t) * std::sin(k * u) - 0.3 * std::sin(t) * (u - 0.5); }};
}

AnalyticPath::Functions constant_path(double c) {
  return {[c](double, double) { return c; }, [](double, double) { return 0.0; },
          [](double, double) { return 0.0; }, [](double, double) { return 0.0; }};
}

EllipticCoefficients random_coefficients(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  EllipticCoefficients c;
  c.alpha = 2 + 20 * unif(rng);
  c.a = 10 * (unif(rng) - 0.5);
  c.b = unif(rng);
  c.c = unif(rng);
  return c;
}

}  // namespace

TEST_CASE("coefficients of stationary constant paths") {
  const AnalyticPath half(constant_path(0.5), 1.0, 4);
  const auto h = coefficients(half, 0.3, 256);
  CHECK(h.alpha == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(h.a == 0.0);
  CHECK(h.b == 0.25);
  CHECK(h.c == 0.25);
  for (double c : {0.1, 0.3, 0.8}) {
    const auto k = coefficients(AnalyticPath(constant_path(c), 1.0, 4), 0.0, 64);
    CHECK(k.alpha == doctest::Approx(1 / (2 * c * (1 - c))).epsilon(1e-12));
    CHECK(k.a == 0.0);
    CHECK(k.b == doctest::Approx(c * (1 - c)));
    CHECK(k.c == doctest::Approx(c * (1 - c)));
  }
  CHECK_THROWS_AS(coefficients(AnalyticPath(constant_path(1.0), 1.0, 4), 0.0, 64), std::domain_error);
  CHECK_THROWS_AS(coefficients(AnalyticPath(constant_path(0.0), 1.0, 4), 0.0, 64), std::domain_error);
}

TEST_CASE("coefficient quadrature converges") {
  const AnalyticPath p(analytic(), 1.0, 4);
  for (double t : {0.0, 0.4, 1.0}) {
    const auto a = coefficients(p, t, 2048), b = coefficients(p, t, 4096);
    CHECK(a.alpha >= 2.0);
    CHECK(std::abs(a.alpha - b.alpha) <= 1e-6);
    CHECK(std::abs(a.a - b.a) <= 1e-6);
    CHECK(a.b == b.b);
    CHECK(a.c == b.c);
  }
}

TEST_CASE("root examples") {
  const auto sym = solve_root({.alpha = 2, .a = 0, .b = 0.25, .c = 0.25});
  CHECK(std::abs(sym.z0) <= 1e-12);
  const auto free = solve_root({.alpha = 3, .a = 1.7, .b = 0, .c = 0});
  CHECK(free.z0 == doctest::Approx(1.7).epsilon(1e-14));
  // Large A with small B: Newton from z = A has to fall back on bisection.
  const EllipticCoefficients steep{.alpha = 275.772, .a = 673.691, .b = 0.00275886, .c = 0.897709};
  const auto bis = solve_root(steep), newton = solve_root_newton(steep);
  CHECK(bis.residual <= 1e-12);
  CHECK(std::abs(bis.z0 - newton.z0) <= 1e-10);
  CHECK(newton.iterations < 200);
  CHECK_THROWS_AS(solve_root({.alpha = 0, .a = 0, .b = 0.1, .c = 0.1}), std::invalid_argument);
  CHECK_THROWS_AS(solve_root({.alpha = 1, .a = 0, .b = -0.1, .c = 0.1}), std::invalid_argument);
}

TEST_CASE("roots of random coefficients") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 100; ++i) {
    const auto c = random_coefficients(rng);
    const auto r = solve_root(c), n = solve_root_newton(c);
    CHECK(r.residual <= 1e-12);
    CHECK(r.residual == doctest::Approx(std::abs(r.z0 - (c.b * std::exp(-r.z0) - c.c * std::exp(r.z0)) * c.alpha - c.a)));
    CHECK(root_function(c, r.z0 - 1e-6) < 0.0);
    CHECK(root_function(c, r.z0 + 1e-6) > 0.0);
    CHECK(std::abs(r.z0 - n.z0) <= 1e-10);
  }
}

TEST_CASE("stationary half filling gives the zero field") {
  const auto built = build_H(AnalyticPath(constant_path(0.5), 0.5, 4), 64);
  for (double t : {0.0, 0.2, 0.5}) {
    for (double u : {0.0, 0.3, 1.0}) {
      CHECK(std::abs(built.h->value(t, u)) <= 1e-14);
      CHECK(std::abs(built.h->du(t, u)) <= 1e-14);
    }
  }
}

TEST_CASE("built field of an analytic path") {
  const std::size_t m = 2048;
  const auto f = analytic();
  const AnalyticPath path(f, 1.0, 8);
  const auto built = build_H(path, m);
  const auto& h = *built.h;
  double worst = 0, worst_cut = 0;
  for (std::size_t i = 0; i < h.times().size(); ++i) {
    const double t = h.times()[i];
    const auto& v = h.node_values(i);
    const auto& dv = h.node_gradients(i);
    CHECK(v.front() == 0.0);
    // H(0-) - H(0+) solves the root equation, so delta H = -z0.
    CHECK(std::abs(v.back() - built.roots[i].z0) <= 1e-10);

    // d_uu H + (d_u chi / chi) d_u H = (d_uu rho - d_t rho) / (2 chi), with
    // d_uu H from centred differences of the nodal gradient.
    const double step = 1.0 / static_cast<double>(m);
    for (std::size_t j = 1; j < m; ++j) {
      const double u = static_cast<double>(j) * step;
      const double r = f.rho(t, u), chi = r * (1 - r);
      const double duu_h = (dv[j + 1] - dv[j - 1]) / (2 * step);
      const double lhs = duu_h + (1 - 2 * r) * f.du(t, u) / chi * dv[j];
      const double rhs = (f.duu(t, u) - f.dt(t, u)) / (2 * chi);
      worst = std::max(worst, std::abs(lhs - rhs));
    }

    // Cut flux in the Robin form, from the built field.
    const double plus = f.rho(t, 0), minus = f.rho(t, 1), d = v.front() - v.back();
    const double flux = minus * (1 - plus) * std::exp(d) - plus * (1 - minus) * std::exp(-d);
    const double dh0 = (f.du(t, 0) + flux) / (2 * plus * (1 - plus));
    const double dh1 = (f.du(t, 1) + flux) / (2 * minus * (1 - minus));
    worst_cut = std::max({worst_cut, std::abs(dh0 - dv.front()), std::abs(dh1 - dv.back())});
  }
  INFO("interior residual " << worst << ", cut residual " << worst_cut);
  CHECK(worst <= 1e-3);
  CHECK(worst_cut <= 1e-8);
}

TEST_CASE("root depends continuously on time") {
  auto largest_step = [](std::size_t intervals) {
    const AnalyticPath path(analytic(), 1.0, intervals);
    const auto times = path.times();
    double prev = solve_root(coefficients(path, times[0], 512)).z0, worst = 0;
    for (std::size_t i = 1; i < times.size(); ++i) {
      const double z = solve_root(coefficients(path, times[i], 512)).z0;
      worst = std::max(worst, std::abs(z - prev));
      prev = z;
    }
    return worst;
  };
  const double a = largest_step(50), b = largest_step(100);
  INFO("largest increments " << a << ", " << b);
  CHECK(b > 0.0);
  CHECK(a / b >= 1.8);
}

TEST_CASE("round trip through the perturbed equation") {
  const std::size_t m = 1024;
  const double horizon = 0.05;
  // H0(t, 0+) = 0 and H0 is smooth on the circle cut at 0.
  const auto h0 = named_field("composite", {1.0, 0.3, 1.0, 0.5});
  const auto gamma = DensityField::from_profile(random_profile(2), m);
  const auto solution = solve_perturbed(gamma, h0, horizon);
  const auto built = build_H(GridPath(PathMeasure::from_solution(solution)), m);
  const auto& times = built.h->times();

  // Skip the first tenth of the horizon, where the initial profile relaxes
  // onto the boundary conditions.
  double err = 0, norm = 0, jump_err = 0, jump_norm = 0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double t = times[i];
    if (t < 0.1 * horizon) continue;
    const auto& dv = built.h->node_gradients(i);
    for (std::size_t j = 0; j <= m; ++j) {
      const double u = static_cast<double>(j) / m;
      const double want = h0->du(t, u);
      err += (dv[j] - want) * (dv[j] - want);
      norm += want * want;
    }
    const double want_jump = h0->value(t, 0) - h0->value(t, 1);
    const double got_jump = -built.roots[i].z0;
    jump_err += (got_jump - want_jump) * (got_jump - want_jump);
    jump_norm += want_jump * want_jump;
  }
  const double rel = std::sqrt(err / norm), rel_jump = std::sqrt(jump_err / jump_norm);
  INFO("gradient error " << rel << ", jump error " << rel_jump);
  CHECK(rel <= 0.05);
  CHECK(rel_jump <= 0.05);

  const auto path = PathMeasure::from_solution(solution);
  const auto closed = rate::rate_closed_form(path, *built.h);
  CHECK(std::isfinite(closed.total));
  CHECK(closed.total >= 0.0);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    CHECK(rate::j_hat(path, *random_test_field(seed, horizon)) <= closed.total + 1e-3);
  }
}

TEST_CASE("grid paths") {
  const auto s = solve_symmetric(DensityField::constant(16, 0.4), 0.01, {.observations = 4});
  const GridPath g(PathMeasure::from_solution(s));
  CHECK_THROWS_AS(g.slice(s.times[1], 8), std::invalid_argument);
  CHECK_THROWS_AS(g.slice(0.5 * (s.times[1] + s.times[2]), 16), std::invalid_argument);
  const auto slice = g.slice(s.times[2], 16);
  for (double x : slice.dt) CHECK(std::abs(x) <= 1e-10);
  for (double x : slice.q) CHECK(std::abs(x) <= 1e-10);
}

TEST_CASE("csv export") {
  const auto built = build_H(AnalyticPath(analytic(), 0.5, 2), 8);
  std::ostringstream os;
  write_csv(os, *built.h);
  const auto text = os.str();
  CHECK(text.rfind("t,u,H,dH\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 1 + 3 * 9);
}
