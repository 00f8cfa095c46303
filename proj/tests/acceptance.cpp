// Acceptance suite: one line per criterion, exit status 1 if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "slowbond/catalog.hpp"
#include "slowbond/harness.hpp"
#include "slowbond/parallel.hpp"
#include "slowbond/robin_pde.hpp"

using namespace slowbond;
using harness::ExperimentConfig;
using harness::ExperimentReport;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

const harness::NamedSpec kCosine{"cosine", {0.5, 0.2, 1.0, 0.0}};
const harness::NamedSpec kStep{"smoothed_step", {1.0, 0.0, 0.5, 0.05}};
// delta H(0) = H(0+) - H(0-) = -1.
const harness::NamedSpec kDrift{"composite", {1.0, 0.3, 1.0, 0.0}};
const harness::NamedSpec kDriftTimed{"composite", {1.0, 0.3, 1.0, 0.5}};

std::size_t g_threads = 1;
int g_failed = 0;

std::string fmt(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

void criterion(int id, const char* name, double budget, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("error: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool in_time = secs <= budget;
  const bool ok = o.passed && in_time;
  if (!ok) ++g_failed;
  std::printf("[%s] %2d %-34s %s | %.1f s (limit %.0f s%s)\n", ok ? "PASS" : "FAIL", id, name, o.detail.c_str(), secs,
              budget, in_time ? "" : ", over");
  std::fflush(stdout);
}

Outcome from_report(const ExperimentReport& r) {
  Outcome o{r.passed(), ""};
  for (const auto& c : r.checks) {
    if (!o.detail.empty()) o.detail += "; ";
    o.detail += c.name + fmt(" %.3g (tol %.3g)", c.value, c.tolerance) + (c.passed ? "" : " FAILED");
  }
  return o;
}

ExperimentConfig config(const std::string& kind) {
  ExperimentConfig c;
  c.kind = kind;
  c.seed = 20240611;
  return c;
}

double mass_drift(const PdeSolution& s) {
  double worst = 0;
  for (const auto& f : s.fields) worst = std::max(worst, std::abs(f.mass() - s.fields.front().mass()));
  return worst / s.horizon;
}

Outcome mass_conservation() {
  const auto h = named_field(kDriftTimed.name, kDriftTimed.params);
  double worst = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto gamma = DensityField::from_profile(random_profile(seed), 512);
    worst = std::max(worst, mass_drift(solve_symmetric(gamma, 0.5, {.observations = 64})));
    worst = std::max(worst, mass_drift(solve_perturbed(gamma, h, 0.5, {.observations = 64})));
  }
  return {worst <= 1e-10, fmt("max |mass drift| / T %.3g (tol %.0e)", worst, 1e-10)};
}

Outcome self_convergence() {
  const auto gamma = named_profile(kCosine.name, kCosine.params);
  const auto h = named_field(kDrift.name, kDrift.params);
  double worst = std::numeric_limits<double>::infinity();
  std::string detail;
  for (bool perturbed : {false, true}) {
    std::vector<DensityField> finals;
    for (std::size_t m : {256, 512, 1024}) {
      const auto g = DensityField::from_profile(gamma, m);
      const PdeOptions opt{.observations = 4};
      finals.push_back((perturbed ? solve_perturbed(g, h, 0.1, opt) : solve_symmetric(g, 0.1, opt)).fields.back());
    }
    const double d1 = l1_distance(coarsen(finals[1], 256), finals[0]);
    const double d2 = l1_distance(coarsen(finals[2], 512), finals[1]);
    worst = std::min(worst, d1 / d2);
    detail += fmt(perturbed ? "perturbed %.3g/%.3g" : "symmetric %.3g/%.3g, ", d1, d2);
  }
  return {worst >= 1.8, detail + fmt(", min ratio %.3g (tol >= %.1f)", worst, 1.8)};
}

Outcome weak_form() {
  const auto gamma = named_profile(kCosine.name, kCosine.params);
  const auto h = named_field(kDriftTimed.name, kDriftTimed.params);
  std::vector<FieldPtr> tests;
  for (std::uint64_t s = 0; s < 5; ++s) tests.push_back(random_test_field(s, 0.05));
  double fine = 0;
  bool decreasing = true;
  for (bool perturbed : {false, true}) {
    std::vector<double> coarse_r, fine_r;
    for (std::size_t m : {512, 1024}) {
      const auto g = DensityField::from_profile(gamma, m);
      const auto s = perturbed ? solve_perturbed(g, h, 0.05) : solve_symmetric(g, 0.05);
      for (const auto& t : tests) (m == 512 ? coarse_r : fine_r).push_back(weak_residual(s, *t));
    }
    for (std::size_t i = 0; i < tests.size(); ++i) {
      fine = std::max(fine, fine_r[i]);
      decreasing = decreasing && fine_r[i] < coarse_r[i];
    }
  }
  return {fine <= 1e-3 && decreasing,
          fmt("max residual at m=1024 %.3g (tol %.0e)", fine, 1e-3) + (decreasing ? ", decreasing" : ", NOT decreasing")};
}

Outcome hydro(bool perturbed) {
  auto c = config(perturbed ? "hydro_perturbed" : "hydro_symmetric");
  c.lattice_sizes = {128, 512};
  c.replicas = 200;
  c.grid = 1024;
  c.horizon = 0.1;
  c.eps = 1.0 / 16;
  c.profile = kStep;
  c.perturbation = kDrift;
  return from_report(harness::run(c, g_threads));
}

Outcome martingale() {
  auto c = config("martingale_check");
  c.lattice_sizes = {16};
  c.horizon = 0.05;
  c.replicas = 2000;
  c.profile = kCosine;
  c.perturbation = kDriftTimed;
  return from_report(harness::run(c, g_threads));
}

struct RatePaths {
  PathMeasure rho, lambda;
  FieldPtr h;
};

RatePaths rate_paths(std::size_t m) {
  const auto gamma = DensityField::from_profile(named_profile(kCosine.name, kCosine.params), m);
  auto h = named_field(kDriftTimed.name, kDriftTimed.params);
  return {PathMeasure::from_solution(solve_perturbed(gamma, h, 0.1)),
          PathMeasure::from_solution(solve_symmetric(gamma, 0.1)), h};
}

Outcome sup_attainment() {
  const auto p = rate_paths(1024);
  const double jh = rate::j_hat(p.rho, *p.h);
  const double gap = std::abs(jh - rate::rate_closed_form(p.rho, *p.h).total);
  double excess = -std::numeric_limits<double>::infinity();
  for (const auto& g : rate::test_family(7, 20, 0.1)) excess = std::max(excess, rate::j_hat(p.rho, *g) - jh);
  return {excess <= 1e-6 && gap <= 1e-4,
          fmt("max J_G - J_H %.3g (tol 1e-6); ", excess, 0) + fmt("|J_H - closed form| %.3g (tol %.0e)", gap, 1e-4)};
}

Outcome zero_rate() {
  const auto gamma = DensityField::from_profile(named_profile(kCosine.name, kCosine.params), 512);
  const auto lambda = PathMeasure::from_solution(solve_symmetric(gamma, 0.1));
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& g : rate::test_family(7, 20, 0.1)) worst = std::max(worst, rate::j_hat(lambda, *g));
  const double constant = std::abs(rate::j_hat(lambda, *constant_field(1.0)));
  return {worst <= 1e-6 && constant <= 1e-10,
          fmt("max J_G(lambda) %.3g (tol 1e-6); ", worst, 0) + fmt("|J_const| %.3g (tol %.0e)", constant, 1e-10)};
}

Outcome energy() {
  auto c = config("energy_check");
  c.grid = 1024;
  c.horizon = 0.1;
  return from_report(harness::run(c, g_threads));
}

Outcome round_trip() {
  auto c = config("invert_check");
  c.grid = 1024;
  c.horizon = 0.05;
  c.profile = kCosine;
  c.perturbation = kDriftTimed;
  return from_report(harness::run(c, g_threads));
}

Outcome entropy() {
  auto c = config("entropy_check");
  c.lattice_sizes = {32, 64, 128};
  c.replicas = 100;
  c.grid = 512;
  c.horizon = 0.1;
  c.profile = kCosine;
  c.perturbation = kDrift;
  return from_report(harness::run(c, g_threads));
}

Outcome convexity() {
  const auto p = rate_paths(256);
  auto family = rate::test_family(11, 20, 0.1);
  family.push_back(p.h);
  // Side values of rho stay inside (0.26, 0.74), so a flat 0.2 keeps one
  // ordering on both sides of the cut.
  PathMeasure flat = p.rho;
  for (auto& f : flat.fields) f = DensityField::constant(f.size(), 0.2);
  double margin = std::numeric_limits<double>::infinity();
  bool convex = true;
  for (double theta : {0.25, 0.5, 0.75}) {
    const auto c = rate::rate_convex_combination_check(p.rho, flat, theta, family);
    convex = convex && c.status == rate::CheckStatus::passed;
    margin = std::min(margin, c.margin);
  }
  const auto interp = rate::rate_interpolation_check(p.rho, {0.1, 0.01, 0.001}, family);
  const bool interp_ok = interp.status == rate::CheckStatus::passed;
  return {convex && interp_ok, fmt("convexity min margin %.3g; ", margin, 0) +
                                   fmt("interpolation excess at eps=1e-3 %.3g over base %.3g", interp.rate.back() - interp.base,
                                       interp.base) +
                                   (interp_ok ? "" : " FAILED")};
}

}  // namespace

int main() {
  g_threads = resolve_threads();
  std::printf("slowbond %s acceptance, %zu thread(s)\n", SLOWBOND_VERSION, g_threads);
  criterion(1, "mass conservation", 10, mass_conservation);
  criterion(2, "PDE self-convergence", 30, self_convergence);
  criterion(3, "weak-form residual", 60, weak_form);
  criterion(4, "hydrodynamic limit", 300, [] { return hydro(false); });
  criterion(5, "perturbed hydrodynamic limit", 300, [] { return hydro(true); });
  criterion(6, "martingale mean one", 60, martingale);
  criterion(7, "sup attainment", 60, sup_attainment);
  criterion(8, "zero rate at the solution", 60, zero_rate);
  criterion(9, "energy closed form", 30, energy);
  criterion(10, "elliptic round trip", 60, round_trip);
  criterion(11, "entropy to rate trend", 600, entropy);
  criterion(12, "convexity and interpolation", 60, convexity);
  std::printf("%d of 12 criteria failed\n", g_failed);
  return g_failed == 0 ? 0 : 1;
}
