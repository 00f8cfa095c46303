#include "slowbond/girsanov.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "slowbond/parallel.hpp"

namespace slowbond {

namespace {

constexpr double kGaussOffset = 0.57735026918962576;  // 1/sqrt(3)

struct Moments {
  double mean = 0, std_error = 0;
};

Moments moments(const std::vector<double>& x) {
  Moments m;
  if (x.empty()) return m;
  double s = 0;
  for (double v : x) s += v;
  m.mean = s / static_cast<double>(x.size());
  if (x.size() > 1) {
    double q = 0;
    for (double v : x) q += (v - m.mean) * (v - m.mean);
    m.std_error = std::sqrt(q / static_cast<double>(x.size() - 1) / static_cast<double>(x.size()));
  }
  return m;
}

}  // namespace

GirsanovAccumulator log_rn(const Trajectory& traj, const Perturbation& h, GirsanovOptions options) {
  if (!traj.events_recorded) throw std::invalid_argument("log_rn: trajectory has no event record");
  const std::size_t n = traj.spec.n;
  const double horizon = traj.spec.horizon;
  const double nd = static_cast<double>(n);
  const BondRates xi{n};
  if (traj.initial.size() != n) throw std::invalid_argument("log_rn: initial configuration size mismatch");

  std::vector<std::uint8_t> occ(traj.initial.occupancy().begin(), traj.initial.occupancy().end());
  auto right_of = [n](std::size_t x) { return x + 1 == n ? std::size_t{0} : x + 1; };
  auto site_u = [nd](std::size_t x) { return static_cast<double>(x) / nd; };

  GirsanovAccumulator acc;
  for (std::size_t x = 0; x < n; ++x) {
    if (occ[x]) acc.boundary_term -= h.value(0.0, site_u(x));
  }

  std::vector<double> site_since(n, 0.0), bond_since(n, 0.0);

  // Compensator densities of bond b in its current state, integrated over
  // [bond_since[b], t]: e^{+-d} - 1 and Gamma(+-d).
  auto flush = [&](std::size_t b, double t) {
    const double a = bond_since[b];
    bond_since[b] = t;
    const std::size_t c = right_of(b);
    const bool forward = occ[b] && !occ[c];
    const bool backward = occ[c] && !occ[b];
    if ((!forward && !backward) || !(t > a)) return;
    const auto panels = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil((t - a) / options.max_substep)));
    const double w = (t - a) / static_cast<double>(panels);
    double comp = 0, ent = 0;
    for (std::size_t p = 0; p < panels; ++p) {
      const double mid = a + (p + 0.5) * w;
      for (double s : {mid - 0.5 * w * kGaussOffset, mid + 0.5 * w * kGaussOffset}) {
        const double d = forward ? bond_gradient(h, n, b, s) : -bond_gradient(h, n, b, s);
        comp += std::expm1(d);
        ent += -std::expm1(d) + d * std::exp(d);
      }
    }
    const double scale = nd * nd * xi(b) * 0.5 * w;
    acc.jump_compensator += scale * comp;
    acc.entropy_compensator += scale * ent;
    if (b == xi.slow_bond()) acc.slow_bond_compensator += scale * comp;
  };

  for (const Event& e : traj.events) {
    const double t = e.time;
    const std::size_t x = e.bond;
    if (x >= n || t < 0 || t > horizon) throw std::invalid_argument("log_rn: malformed event");
    const std::size_t y = right_of(x);
    if (occ[x] == occ[y]) throw std::invalid_argument("log_rn: event on an inactive bond");
    flush(x == 0 ? n - 1 : x - 1, t);
    flush(x, t);
    flush(y, t);

    const double d = bond_gradient(h, n, x, t);
    const std::size_t from = occ[x] ? x : y;
    const std::size_t to = occ[x] ? y : x;
    acc.jump_sum += occ[x] ? d : -d;
    acc.time_integral += h.value(t, site_u(from)) - h.value(site_since[from], site_u(from));
    site_since[to] = t;
    std::swap(occ[x], occ[y]);
  }

  for (std::size_t b = 0; b < n; ++b) flush(b, horizon);
  for (std::size_t x = 0; x < n; ++x) {
    if (!occ[x]) continue;
    acc.time_integral += h.value(horizon, site_u(x)) - h.value(site_since[x], site_u(x));
    acc.boundary_term += h.value(horizon, site_u(x));
  }
  acc.total = acc.boundary_term - acc.time_integral - acc.jump_compensator;
  acc.total_jump_form = acc.jump_sum - acc.jump_compensator;
  return acc;
}

double log_rn_reverse(const GirsanovAccumulator& forward) {
  // Jumps contribute -delta, and the compensator of P relative to P^H is
  // N^2 sum xi [g1 (1 - e^{d}) + g2 (1 - e^{-d})]: every piece changes sign.
  return -forward.jump_sum + forward.jump_compensator;
}

double envelope_constant(const Perturbation& h, double horizon, std::size_t n) {
  const FieldNorms s = sample_norms(h, horizon);
  const double pad = 1.05;
  const double nd = static_cast<double>(n);
  double slow = 0;
  for (int i = 0; i <= 64; ++i) slow = std::max(slow, std::abs(h.jump(horizon * i / 64.0)));
  const double du = pad * s.du;
  return pad * (2 * s.value + horizon * (s.dt + s.duu + 2 * s.du + 0.5 * std::exp(du / nd) * du * du +
                                         std::exp(pad * slow)));
}

EntropyEstimate estimate_entropy(const DynamicsSpec& spec, const Configuration& initial, std::size_t replicas,
                                 std::size_t threads) {
  spec.validate();
  if (spec.mode != Mode::weakly_asymmetric) throw std::invalid_argument("estimate_entropy: need the perturbed law");
  if (replicas == 0) throw std::invalid_argument("estimate_entropy: zero replicas");
  const auto acc = parallel_map<GirsanovAccumulator>(replicas, threads, [&](std::size_t r) {
    const auto traj = simulate(spec, initial, {}, {.record_events = true, .replica = r});
    return log_rn(traj, *spec.perturbation);
  });
  std::vector<double> direct, compensated;
  for (const auto& a : acc) {
    direct.push_back(a.total / static_cast<double>(spec.n));
    compensated.push_back(a.entropy_compensator / static_cast<double>(spec.n));
  }
  const Moments m = moments(direct), c = moments(compensated);
  return {spec.n, replicas, m.mean, m.std_error, c.mean, c.std_error};
}

MartingaleEstimate martingale_mean(const DynamicsSpec& symmetric, const Configuration& initial,
                                   const Perturbation& h, std::size_t replicas, std::size_t threads) {
  symmetric.validate();
  if (symmetric.mode != Mode::symmetric) throw std::invalid_argument("martingale_mean: need the symmetric law");
  if (replicas == 0) throw std::invalid_argument("martingale_mean: zero replicas");
  const auto samples = parallel_map<double>(replicas, threads, [&](std::size_t r) {
    const auto traj = simulate(symmetric, initial, {}, {.record_events = true, .replica = r});
    return std::exp(log_rn(traj, h).total);
  });
  const Moments m = moments(samples);
  return {replicas, m.mean, m.std_error};
}

}  // namespace slowbond
