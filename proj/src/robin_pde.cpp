#include "slowbond/robin_pde.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "slowbond/quadrature.hpp"

namespace slowbond {

double cut_flux(double minus, double plus, double jump) {
  return minus * (1.0 - plus) * std::exp(jump) - plus * (1.0 - minus) * std::exp(-jump);
}

namespace {

constexpr double kBoundTol = 1e-9;
constexpr double kRefreshSpan = 1e-4;

std::vector<std::size_t> observation_steps(std::size_t steps, std::size_t intervals) {
  intervals = std::clamp<std::size_t>(intervals, 1, steps);
  std::vector<std::size_t> s;
  for (std::size_t i = 0; i <= intervals; ++i) s.push_back(i * steps / intervals);
  const std::size_t stride = steps / intervals;
  for (std::size_t p = 1; p < stride; p *= 2) s.push_back(p);
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  return s;
}

// Drift d_u H on the interior faces u = k/m, k = 1..m-1, and the jump at the
// cut, sampled at one instant.
struct DriftSample {
  double t = 0;
  std::vector<double> grad;
  double jump = 0;
};

void sample_drift(const Perturbation& h, double t, std::size_t m, DriftSample& out) {
  std::vector<double> faces(m + 1);
  for (std::size_t k = 0; k <= m; ++k) faces[k] = static_cast<double>(k) / static_cast<double>(m);
  FieldSlice s;
  h.slice(t, faces, s);
  out.t = t;
  out.grad = s.du;
  out.grad[0] = out.grad[m] = 0.0;
  out.jump = s.value[0] - s.value[m];
}

PdeSolution solve(const DensityField& gamma, FieldPtr h, double horizon, const PdeOptions& opt) {
  const std::size_t m = gamma.size();
  if (m != opt.m && opt.m != 0) throw std::invalid_argument("solve: initial field size differs from options.m");
  if (m < 4) throw std::invalid_argument("solve: need at least four cells");
  if (!(horizon > 0)) throw std::invalid_argument("solve: horizon must be positive");
  if (!gamma.bounded(1e-12)) throw std::invalid_argument("solve: initial density outside [0,1]");
  const double md = static_cast<double>(m);
  const double cfl = 0.25 / (md * md);
  if (opt.dt > cfl * (1 + 1e-12)) throw std::invalid_argument("solve: time step violates dt <= 0.25/m^2");
  const double dt_max = opt.dt > 0 ? opt.dt : 0.2 / (md * md);
  const auto steps = static_cast<std::size_t>(std::max(1.0, std::ceil(horizon / dt_max - 1e-9)));
  const double dt = horizon / static_cast<double>(steps);

  PdeSolution sol;
  sol.dt = dt;
  sol.steps = steps;
  sol.horizon = horizon;
  sol.perturbation = h;
  sol.flux_at_cut.reserve(steps);

  const std::size_t intervals = opt.observations > 0 ? opt.observations : std::clamp<std::size_t>(4 * m, 512, 4096);
  const auto record = observation_steps(steps, intervals);
  std::size_t next_record = 0;

  std::vector<double> rho(gamma.values().begin(), gamma.values().end());
  std::vector<double> flux(m + 1, 0.0);
  std::vector<double> slope(m + 1, 0.0);  // b.grad - a.grad
  double w = 0;
  const std::size_t refresh = opt.field_refresh > 0
                                  ? opt.field_refresh
                                  : std::max<std::size_t>(1, static_cast<std::size_t>(kRefreshSpan / dt));
  DriftSample a, b;
  if (h) {
    sample_drift(*h, 0.0, m, a);
    sample_drift(*h, std::min(horizon, refresh * dt), m, b);
  }

  for (std::size_t n = 0; n <= steps; ++n) {
    if (next_record < record.size() && record[next_record] == n) {
      sol.times.push_back(n == steps ? horizon : n * dt);
      sol.fields.emplace_back(rho);
      ++next_record;
    }
    if (n == steps) break;

    const double t = n * dt;
    double jump = 0;
    if (h) {
      if (n > 0 && n % refresh == 0) {
        std::swap(a, b);
        sample_drift(*h, std::min(horizon, t + refresh * dt), m, b);
      }
      if (n % refresh == 0) {
        for (std::size_t k = 0; k <= m; ++k) slope[k] = b.grad[k] - a.grad[k];
      }
      w = b.t > a.t ? (t - a.t) / (b.t - a.t) : 0.0;
      jump = (1 - w) * a.jump + w * b.jump;
    }

    const double plus = 1.5 * rho[0] - 0.5 * rho[1];
    const double minus = 1.5 * rho[m - 1] - 0.5 * rho[m - 2];
    const double phi = h ? cut_flux(minus, plus, jump) : minus - plus;
    flux[0] = flux[m] = phi;
    if (h) {
      for (std::size_t k = 1; k < m; ++k) {
        const double mean = 0.5 * (rho[k] + rho[k - 1]);
        flux[k] = -md * (rho[k] - rho[k - 1]) + 2.0 * mobility(mean) * (a.grad[k] + w * slope[k]);
      }
    } else {
      for (std::size_t k = 1; k < m; ++k) flux[k] = -md * (rho[k] - rho[k - 1]);
    }
    const double c = dt * md;
    // A branch-free count keeps the update loop vectorizable.
    std::size_t outside = 0;
    for (std::size_t j = 0; j < m; ++j) {
      const double r = rho[j] + c * (flux[j] - flux[j + 1]);
      outside += (r < -kBoundTol) | (r > 1.0 + kBoundTol);
      rho[j] = r;
    }
    if (outside > 0) throw std::runtime_error("solve: density left [0,1] at t=" + std::to_string(t + dt));
    sol.flux_at_cut.push_back(phi);
  }
  return sol;
}

}  // namespace

PdeSolution solve_symmetric(const DensityField& gamma, double horizon, const PdeOptions& options) {
  return solve(gamma, nullptr, horizon, options);
}

PdeSolution solve_perturbed(const DensityField& gamma, FieldPtr h, double horizon, const PdeOptions& options) {
  if (!h) throw std::invalid_argument("solve_perturbed: missing perturbation");
  return solve(gamma, std::move(h), horizon, options);
}

double weak_residual(const PdeSolution& sol, const Perturbation& g) {
  if (sol.fields.size() < 2) throw std::invalid_argument("weak_residual: need at least two observations");
  const Perturbation* h = sol.perturbation.get();
  const std::size_t m = sol.fields.front().size();
  const double md = static_cast<double>(m);
  std::vector<double> u(m);
  for (std::size_t j = 0; j < m; ++j) u[j] = (j + 0.5) / md;
  const double ends[2] = {0.0, 1.0};
  FieldSlice gs, ge, hs, he;

  std::vector<double> integrand(sol.times.size());
  for (std::size_t i = 0; i < sol.times.size(); ++i) {
    const double t = sol.times[i];
    const DensityField& rho = sol.fields[i];
    g.slice(t, u, gs);
    g.slice(t, ends, ge);
    double bulk = 0;
    for (std::size_t j = 0; j < m; ++j) bulk += rho[j] * (gs.dt[j] + gs.duu[j]);
    const double plus = rho.side_plus();
    const double minus = rho.side_minus();
    const double g_jump = ge.value[0] - ge.value[1];
    double s = bulk / md + plus * ge.du[0] - minus * ge.du[1];
    if (h) {
      h->slice(t, u, hs);
      h->slice(t, ends, he);
      double drift = 0;
      for (std::size_t j = 0; j < m; ++j) drift += mobility(rho[j]) * hs.du[j] * gs.du[j];
      s += 2.0 * drift / md + cut_flux(minus, plus, he.value[0] - he.value[1]) * g_jump;
    } else {
      s += (minus - plus) * g_jump;
    }
    integrand[i] = s;
  }
  auto pairing = [&](const DensityField& rho, double t) {
    g.slice(t, u, gs);
    double s = 0;
    for (std::size_t j = 0; j < m; ++j) s += rho[j] * gs.value[j];
    return s / md;
  };
  const double lhs = pairing(sol.fields.back(), sol.times.back()) - pairing(sol.fields.front(), sol.times.front());
  return std::abs(lhs - quad::trapezoid(sol.times, integrand));
}

std::size_t nearest_observation(const PdeSolution& sol, double t) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < sol.times.size(); ++i) {
    if (std::abs(sol.times[i] - t) < std::abs(sol.times[best] - t)) best = i;
  }
  return best;
}

void write_csv(std::ostream& os, const PdeSolution& sol) {
  os << "t,u,rho\n";
  const auto old = os.precision(17);
  for (std::size_t i = 0; i < sol.times.size(); ++i) {
    const auto& f = sol.fields[i];
    for (std::size_t j = 0; j < f.size(); ++j) os << sol.times[i] << ',' << f.center(j) << ',' << f[j] << '\n';
  }
  os.precision(old);
}

}  // namespace slowbond
