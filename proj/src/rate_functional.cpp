#include "slowbond/rate_functional.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "slowbond/catalog.hpp"
#include "slowbond/quadrature.hpp"

namespace slowbond {

PathMeasure PathMeasure::from_solution(const PdeSolution& s) {
  PathMeasure p;
  p.times = s.times;
  p.fields = s.fields;
  return p;
}

PathMeasure PathMeasure::constant(std::size_t m, double c, double horizon, std::size_t intervals) {
  return sample([c](double, double) { return c; }, m, horizon, intervals);
}

PathMeasure PathMeasure::sample(const std::function<double(double, double)>& rho, std::size_t m, double horizon,
                                std::size_t intervals) {
  if (intervals < 1) throw std::invalid_argument("PathMeasure::sample: need at least one interval");
  PathMeasure p;
  for (std::size_t i = 0; i <= intervals; ++i) {
    const double t = horizon * static_cast<double>(i) / intervals;
    p.times.push_back(t);
    p.fields.push_back(DensityField::sample([&](double u) { return rho(t, u); }, m));
  }
  return p;
}

void PathMeasure::validate() const {
  if (times.size() < 2 || times.size() != fields.size()) {
    throw std::invalid_argument("PathMeasure: need matching times and fields, at least two of each");
  }
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (i > 0 && !(times[i] > times[i - 1])) throw std::invalid_argument("PathMeasure: times must increase");
    if (fields[i].size() != fields.front().size()) throw std::invalid_argument("PathMeasure: grid changes in time");
    if (!fields[i].bounded(1e-9)) throw std::invalid_argument("PathMeasure: density outside [0,1]");
  }
}

PathMeasure mix(double a, const PathMeasure& rho, double b, const PathMeasure& lambda) {
  if (rho.times != lambda.times || rho.cells() != lambda.cells()) {
    throw std::invalid_argument("mix: paths must share times and grid");
  }
  PathMeasure out = rho;
  for (std::size_t i = 0; i < out.fields.size(); ++i) {
    auto v = out.fields[i].values();
    const auto w = lambda.fields[i].values();
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = a * v[j] + b * w[j];
  }
  out.absolutely_continuous = rho.absolutely_continuous && lambda.absolutely_continuous;
  out.finite_energy = rho.finite_energy && lambda.finite_energy;
  return out;
}

PathMeasure interpolate_eps(const PathMeasure& rho, double eps) {
  if (!(eps >= 0 && eps <= 0.5)) throw std::invalid_argument("interpolate_eps: eps must lie in [0, 1/2]");
  PathMeasure out = rho;
  for (auto& f : out.fields) {
    for (auto& v : f.values()) v = eps + (1 - 2 * eps) * v;
  }
  return out;
}

namespace rate {

double psi(double x) { return std::expm1(x) - x; }

double gamma(double y) { return -std::expm1(y) + y * std::exp(y); }

namespace {

std::vector<double> centres(std::size_t m) {
  std::vector<double> u(m);
  for (std::size_t j = 0; j < m; ++j) u[j] = (static_cast<double>(j) + 0.5) / static_cast<double>(m);
  return u;
}

constexpr double kEnds[2] = {0.0, 1.0};

// Trapezoid in t of slice(t, rho, H at cell centres, H at u = 0 and u = 1).
template <class F>
double integrate(const PathMeasure& pi, const Perturbation& h, F&& slice) {
  const auto u = centres(pi.cells());
  FieldSlice bulk, ends;
  std::vector<double> y(pi.times.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    h.slice(pi.times[i], u, bulk);
    h.slice(pi.times[i], kEnds, ends);
    y[i] = slice(pi.fields[i], bulk, ends);
  }
  return quad::trapezoid(pi.times, y);
}

double pairing(const DensityField& rho, const Perturbation& h, double t) {
  FieldSlice s;
  h.slice(t, centres(rho.size()), s);
  double v = 0;
  for (std::size_t j = 0; j < rho.size(); ++j) v += rho[j] * s.value[j];
  return v / static_cast<double>(rho.size());
}

}  // namespace

double ell(const PathMeasure& pi, const Perturbation& h) {
  pi.validate();
  const double ends = pairing(pi.fields.back(), h, pi.horizon()) - pairing(pi.fields.front(), h, pi.times.front());
  const double body = integrate(pi, h, [](const DensityField& rho, const FieldSlice& b, const FieldSlice& e) {
    double bulk = 0;
    for (std::size_t j = 0; j < rho.size(); ++j) bulk += rho[j] * (b.dt[j] + b.duu[j]);
    bulk /= static_cast<double>(rho.size());
    const double plus = rho.side_plus(), minus = rho.side_minus();
    const double jump = e.value[0] - e.value[1];
    return bulk + plus * e.du[0] - minus * e.du[1] - (plus - minus) * jump;
  });
  return ends - body;
}

double phi(const PathMeasure& pi, const Perturbation& h) {
  pi.validate();
  return integrate(pi, h, [](const DensityField& rho, const FieldSlice& b, const FieldSlice& e) {
    double bulk = 0;
    for (std::size_t j = 0; j < rho.size(); ++j) bulk += chi(rho[j]) * b.du[j] * b.du[j];
    bulk /= static_cast<double>(rho.size());
    const double plus = rho.side_plus(), minus = rho.side_minus();
    const double d = e.value[0] - e.value[1];
    return bulk + minus * (1 - plus) * psi(d) + plus * (1 - minus) * psi(-d);
  });
}

double j_hat(const PathMeasure& pi, const Perturbation& h) { return ell(pi, h) - phi(pi, h); }

double j(const PathMeasure& pi, const Perturbation& h) {
  if (!pi.finite_energy) return std::numeric_limits<double>::infinity();
  return j_hat(pi, h);
}

double energy_of(const PathMeasure& pi, const Perturbation& h) {
  pi.validate();
  constexpr double kSupportTol = 1e-12;
  return integrate(pi, h, [](const DensityField& rho, const FieldSlice& b, const FieldSlice& e) {
    for (int k = 0; k < 2; ++k) {
      if (std::abs(e.value[k]) > kSupportTol || std::abs(e.du[k]) > kSupportTol) {
        throw std::invalid_argument("energy_of: test field must vanish near the cut");
      }
    }
    double s = 0;
    for (std::size_t j = 0; j < rho.size(); ++j) s += b.du[j] * rho[j] - 2 * b.value[j] * b.value[j];
    return s / static_cast<double>(rho.size());
  });
}

std::vector<double> gradient(const DensityField& rho) {
  const std::size_t m = rho.size();
  if (m < 8) throw std::invalid_argument("gradient: need at least eight cells");
  const double inv_h = static_cast<double>(m);
  std::vector<double> g(m);
  g[0] = (-3 * rho[0] + 4 * rho[1] - rho[2]) * 0.5 * inv_h;
  g[m - 1] = (3 * rho[m - 1] - 4 * rho[m - 2] + rho[m - 3]) * 0.5 * inv_h;
  for (std::size_t j : {std::size_t{1}, std::size_t{2}, m - 3, m - 2}) {
    g[j] = (rho[j + 1] - rho[j - 1]) * 0.5 * inv_h;
  }
  for (std::size_t j = 3; j + 3 < m; ++j) {
    g[j] = (0.75 * (rho[j + 1] - rho[j - 1]) - 0.15 * (rho[j + 2] - rho[j - 2]) +
            (rho[j + 3] - rho[j - 3]) / 60.0) *
           inv_h;
  }
  return g;
}

double energy(const PathMeasure& pi) {
  pi.validate();
  std::vector<double> y(pi.times.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    double s = 0;
    for (double g : gradient(pi.fields[i])) s += g * g;
    y[i] = s / static_cast<double>(pi.cells());
  }
  return quad::trapezoid(pi.times, y) / 8.0;
}

RateBreakdown rate_closed_form(const PathMeasure& rho, const Perturbation& h) {
  rho.validate();
  RateBreakdown r;
  r.grad_term = integrate(rho, h, [](const DensityField& f, const FieldSlice& b, const FieldSlice&) {
    double s = 0;
    for (std::size_t j = 0; j < f.size(); ++j) s += chi(f[j]) * b.du[j] * b.du[j];
    return s / static_cast<double>(f.size());
  });
  r.plus_term = integrate(rho, h, [](const DensityField& f, const FieldSlice&, const FieldSlice& e) {
    return f.side_minus() * (1 - f.side_plus()) * gamma(e.value[0] - e.value[1]);
  });
  r.minus_term = integrate(rho, h, [](const DensityField& f, const FieldSlice&, const FieldSlice& e) {
    return f.side_plus() * (1 - f.side_minus()) * gamma(e.value[1] - e.value[0]);
  });
  r.total = r.grad_term + r.plus_term + r.minus_term;
  return r;
}

double finite_family_rate(const PathMeasure& pi, const std::vector<FieldPtr>& family) {
  double best = 0;
  for (const auto& h : family) best = std::max(best, j_hat(pi, *h));
  return best;
}

ConvexityCheck rate_convex_combination_check(const PathMeasure& rho, const PathMeasure& lambda, double theta,
                                             const std::vector<FieldPtr>& family, double tol) {
  if (!(theta >= 0 && theta <= 1)) throw std::invalid_argument("convexity check: theta must lie in [0,1]");
  ConvexityCheck c;
  for (std::size_t i = 0; i < rho.fields.size() && i < lambda.fields.size(); ++i) {
    const double dp = rho.fields[i].side_plus() - lambda.fields[i].side_plus();
    const double dm = rho.fields[i].side_minus() - lambda.fields[i].side_minus();
    if (dp * dm < -tol) return c;
  }
  c.lhs = finite_family_rate(mix(theta, rho, 1 - theta, lambda), family);
  c.rhs = theta * finite_family_rate(rho, family) + (1 - theta) * finite_family_rate(lambda, family);
  c.margin = c.rhs - c.lhs;
  c.status = c.margin >= -tol ? CheckStatus::passed : CheckStatus::failed;
  return c;
}

InterpolationCheck rate_interpolation_check(const PathMeasure& rho, const std::vector<double>& eps,
                                            const std::vector<FieldPtr>& family, double tol) {
  if (eps.empty() || !std::is_sorted(eps.rbegin(), eps.rend())) {
    throw std::invalid_argument("interpolation check: eps must be a nonempty decreasing list");
  }
  InterpolationCheck c;
  c.base = finite_family_rate(rho, family);
  c.eps = eps;
  double previous = std::numeric_limits<double>::infinity();
  bool monotone = true;
  for (double e : eps) {
    c.rate.push_back(finite_family_rate(interpolate_eps(rho, e), family));
    const double excess = std::max(0.0, c.rate.back() - c.base);
    monotone = monotone && excess <= previous + tol;
    previous = excess;
  }
  c.status = monotone && previous <= std::max(tol, eps.back()) ? CheckStatus::passed : CheckStatus::failed;
  return c;
}

std::vector<FieldPtr> test_family(std::uint64_t seed, std::size_t count, double horizon) {
  std::vector<FieldPtr> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(random_test_field(seed + i, horizon));
  return out;
}

}  // namespace rate

}  // namespace slowbond
