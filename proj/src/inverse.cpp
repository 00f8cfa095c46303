#include "slowbond/inverse.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "slowbond/quadrature.hpp"

namespace slowbond {

AnalyticPath::AnalyticPath(Functions f, double horizon, std::size_t intervals)
    : f_(std::move(f)), horizon_(horizon), intervals_(intervals) {
  if (!f_.rho || !f_.du || !f_.duu || !f_.dt) throw std::invalid_argument("AnalyticPath: missing evaluator");
  if (!(horizon > 0) || intervals < 1) throw std::invalid_argument("AnalyticPath: bad time grid");
}

std::vector<double> AnalyticPath::times() const {
  std::vector<double> t(intervals_ + 1);
  for (std::size_t i = 0; i <= intervals_; ++i) t[i] = horizon_ * static_cast<double>(i) / intervals_;
  return t;
}

PathSlice AnalyticPath::slice(double t, std::size_t nodes) const {
  PathSlice s;
  s.q.assign(nodes + 1, 0.0);
  for (std::size_t k = 0; k <= nodes; ++k) {
    const double u = static_cast<double>(k) / nodes;
    s.rho.push_back(f_.rho(t, u));
    s.du.push_back(f_.du(t, u));
    s.duu.push_back(f_.duu(t, u));
    s.dt.push_back(f_.dt(t, u));
    if (k > 0) {
      const double a = static_cast<double>(k - 1) / nodes;
      s.q[k] = s.q[k - 1] + quad::gauss([&](double w) { return f_.dt(t, w); }, a, u);
    }
  }
  return s;
}

GridPath::GridPath(PathMeasure path) : path_(std::move(path)) {
  path_.validate();
  if (path_.times.size() < 3) throw std::invalid_argument("GridPath: need at least three snapshots");
  if (path_.cells() < 4) throw std::invalid_argument("GridPath: need at least four cells");
}

namespace {

// Second-order derivative of f at index i on a non-uniform grid x.
double derivative(const std::vector<double>& x, const std::vector<double>& f, std::size_t i) {
  const std::size_t n = x.size();
  std::size_t a, b, c;
  if (i == 0) {
    a = 0, b = 1, c = 2;
  } else if (i + 1 == n) {
    a = n - 3, b = n - 2, c = n - 1;
  } else {
    a = i - 1, b = i, c = i + 1;
  }
  // Derivative at x[i] of the quadratic through the three points.
  const double xi = x[i];
  const double la = ((xi - x[b]) + (xi - x[c])) / ((x[a] - x[b]) * (x[a] - x[c]));
  const double lb = ((xi - x[a]) + (xi - x[c])) / ((x[b] - x[a]) * (x[b] - x[c]));
  const double lc = ((xi - x[a]) + (xi - x[b])) / ((x[c] - x[a]) * (x[c] - x[b]));
  return la * f[a] + lb * f[b] + lc * f[c];
}

// Node values and cumulative masses of one snapshot: nodes k/m, k = 0..m.
struct NodeData {
  std::vector<double> rho, cumulative;
};

NodeData nodes_of(const DensityField& f) {
  const std::size_t m = f.size();
  NodeData d;
  d.rho.resize(m + 1);
  d.cumulative.resize(m + 1, 0.0);
  d.rho[0] = f.side_plus();
  d.rho[m] = f.side_minus();
  for (std::size_t k = 1; k < m; ++k) d.rho[k] = 0.5 * (f[k - 1] + f[k]);
  for (std::size_t k = 1; k <= m; ++k) d.cumulative[k] = d.cumulative[k - 1] + f[k - 1] / static_cast<double>(m);
  return d;
}

}  // namespace

PathSlice GridPath::slice(double t, std::size_t nodes) const {
  const std::size_t m = path_.cells();
  if (nodes != m) throw std::invalid_argument("GridPath::slice: nodes must equal the number of cells");
  const auto& ts = path_.times;
  const auto it = std::min_element(ts.begin(), ts.end(), [t](double a, double b) {
    return std::abs(a - t) < std::abs(b - t);
  });
  if (std::abs(*it - t) > 1e-12 * std::max(1.0, std::abs(t))) {
    throw std::invalid_argument("GridPath::slice: t is not a snapshot time");
  }
  const auto i = static_cast<std::size_t>(it - ts.begin());
  const std::size_t i_lo = i == 0 ? 0 : (i + 1 == ts.size() ? i - 2 : i - 1);
  std::vector<double> local_t(ts.begin() + i_lo, ts.begin() + i_lo + 3);
  NodeData around[3] = {nodes_of(path_.fields[i_lo]), nodes_of(path_.fields[i_lo + 1]),
                        nodes_of(path_.fields[i_lo + 2])};
  const std::size_t li = i - i_lo;
  const DensityField& f = path_.fields[i];
  const double md = static_cast<double>(m);

  PathSlice s;
  s.rho = around[li].rho;
  s.du.resize(m + 1);
  s.duu.resize(m + 1);
  s.dt.resize(m + 1);
  s.q.resize(m + 1);
  s.du[0] = (-2 * f[0] + 3 * f[1] - f[2]) * md;
  s.du[m] = (2 * f[m - 1] - 3 * f[m - 2] + f[m - 3]) * md;
  for (std::size_t k = 1; k < m; ++k) s.du[k] = (f[k] - f[k - 1]) * md;
  for (std::size_t k = 2; k + 1 < m; ++k) s.duu[k] = 0.5 * (f[k + 1] - f[k] - f[k - 1] + f[k - 2]) * md * md;
  s.duu[0] = s.duu[1] = s.duu[2];
  s.duu[m] = s.duu[m - 1] = s.duu[m - 2];
  std::vector<double> series(3);
  for (std::size_t k = 0; k <= m; ++k) {
    for (int r = 0; r < 3; ++r) series[r] = around[r].rho[k];
    s.dt[k] = derivative(local_t, series, li);
    for (int r = 0; r < 3; ++r) series[r] = around[r].cumulative[k];
    s.q[k] = derivative(local_t, series, li);
  }
  return s;
}

EllipticCoefficients coefficients(const PathSlice& s, double margin) {
  const std::size_t n = s.rho.size();
  if (n < 2) throw std::invalid_argument("coefficients: empty slice");
  std::vector<double> f1(n), f2(n), u(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double r = s.rho[k];
    if (!(r >= margin && r <= 1 - margin)) throw std::domain_error("coefficients: density touches 0 or 1");
    const double w = 1.0 / (2 * rate::chi(r));
    f1[k] = w;
    f2[k] = (s.du[k] - s.q[k]) * w;
    u[k] = static_cast<double>(k) / (n - 1);
  }
  EllipticCoefficients c;
  c.alpha = quad::trapezoid(u, f1);
  c.a = quad::trapezoid(u, f2);
  const double plus = s.rho.front(), minus = s.rho.back();
  c.b = minus * (1 - plus);
  c.c = plus * (1 - minus);
  return c;
}

EllipticCoefficients coefficients(const DensityPath& rho, double t, std::size_t nodes, double margin) {
  return coefficients(rho.slice(t, nodes), margin);
}

double root_function(const EllipticCoefficients& k, double z) {
  return z - (k.b * std::exp(-z) - k.c * std::exp(z)) * k.alpha - k.a;
}

namespace {

double root_slope(const EllipticCoefficients& k, double z) {
  return 1 + k.alpha * (k.b * std::exp(-z) + k.c * std::exp(z));
}

std::pair<double, double> bracket(const EllipticCoefficients& k) {
  if (!(k.alpha > 0) || k.b < 0 || k.c < 0) throw std::invalid_argument("solve_root: invalid coefficients");
  double lo = -(std::abs(k.a) + k.alpha * k.b + 1);
  double hi = std::abs(k.a) + k.alpha * k.c + 1;
  // The stated bracket always holds on the left; widen defensively on both sides.
  for (int i = 0; i < 64 && root_function(k, lo) > 0; ++i) lo = 2 * lo - 1;
  for (int i = 0; i < 64 && root_function(k, hi) < 0; ++i) hi = 2 * hi + 1;
  if (root_function(k, lo) > 0 || root_function(k, hi) < 0) throw std::logic_error("solve_root: no sign change");
  return {lo, hi};
}

}  // namespace

RootResult solve_root(const EllipticCoefficients& k) {
  auto [lo, hi] = bracket(k);
  RootResult r;
  while (hi - lo > 1e-12 * std::max(1.0, std::abs(lo)) && r.iterations < 400) {
    const double mid = 0.5 * (lo + hi);
    (root_function(k, mid) < 0 ? lo : hi) = mid;
    ++r.iterations;
  }
  double z = 0.5 * (lo + hi);
  for (int i = 0; i < 2; ++i) z -= root_function(k, z) / root_slope(k, z);
  r.z0 = z;
  r.residual = std::abs(root_function(k, z));
  return r;
}

RootResult solve_root_newton(const EllipticCoefficients& k) {
  auto [lo, hi] = bracket(k);
  RootResult r;
  double z = std::clamp(k.a, lo, hi);
  double last_step = hi - lo;
  for (; r.iterations < 200; ++r.iterations) {
    const double g = root_function(k, z);
    if (g == 0) break;
    (g < 0 ? lo : hi) = z;
    double next = z - g / root_slope(k, z);
    // Far out on the exponential branch Newton creeps by about one unit per
    // step; bisect whenever it does not at least halve the previous step.
    if (!(next > lo && next < hi) || 2 * std::abs(next - z) > last_step) next = 0.5 * (lo + hi);
    last_step = std::abs(next - z);
    const bool done = std::abs(next - z) <= 1e-15 * std::max(1.0, std::abs(z));
    z = next;
    if (done) break;
  }
  r.z0 = z;
  r.residual = std::abs(root_function(k, z));
  return r;
}

GridPerturbation::GridPerturbation(std::vector<double> times, std::size_t nodes, std::vector<std::vector<double>> h,
                                   std::vector<std::vector<double>> dh, std::vector<std::vector<double>> ddh)
    : times_(std::move(times)), nodes_(nodes), h_(std::move(h)), dh_(std::move(dh)), ddh_(std::move(ddh)) {
  if (times_.size() < 2 || h_.size() != times_.size() || dh_.size() != times_.size() ||
      ddh_.size() != times_.size()) {
    throw std::invalid_argument("GridPerturbation: inconsistent sizes");
  }
}

GridPerturbation::Locus GridPerturbation::locate(double t, double u) const {
  Locus l;
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  l.i1 = std::clamp<std::size_t>(static_cast<std::size_t>(it - times_.begin()), 1, times_.size() - 1);
  l.i0 = l.i1 - 1;
  l.wt = std::clamp((t - times_[l.i0]) / (times_[l.i1] - times_[l.i0]), 0.0, 1.0);
  const double x = std::clamp(u, 0.0, 1.0) * static_cast<double>(nodes_);
  l.k = std::min<std::size_t>(static_cast<std::size_t>(x), nodes_ - 1);
  l.s = x - static_cast<double>(l.k);
  return l;
}

double GridPerturbation::hermite(const std::vector<double>& f, const std::vector<double>& df, std::size_t k,
                                 double s) const {
  const double h = 1.0 / static_cast<double>(nodes_);
  const double s2 = s * s, s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * f[k] + (s3 - 2 * s2 + s) * h * df[k] + (-2 * s3 + 3 * s2) * f[k + 1] +
         (s3 - s2) * h * df[k + 1];
}

double GridPerturbation::value(double t, double u) const {
  const auto l = locate(t, u);
  return (1 - l.wt) * hermite(h_[l.i0], dh_[l.i0], l.k, l.s) + l.wt * hermite(h_[l.i1], dh_[l.i1], l.k, l.s);
}

double GridPerturbation::du(double t, double u) const {
  const auto l = locate(t, u);
  return (1 - l.wt) * hermite(dh_[l.i0], ddh_[l.i0], l.k, l.s) + l.wt * hermite(dh_[l.i1], ddh_[l.i1], l.k, l.s);
}

double GridPerturbation::dt(double t, double u) const {
  const auto l = locate(t, u);
  return (hermite(h_[l.i1], dh_[l.i1], l.k, l.s) - hermite(h_[l.i0], dh_[l.i0], l.k, l.s)) /
         (times_[l.i1] - times_[l.i0]);
}

double GridPerturbation::duu(double t, double u) const {
  const auto l = locate(t, u);
  auto lin = [&](const std::vector<double>& f) { return (1 - l.s) * f[l.k] + l.s * f[l.k + 1]; };
  return (1 - l.wt) * lin(ddh_[l.i0]) + l.wt * lin(ddh_[l.i1]);
}

InverseResult build_H(const DensityPath& rho, std::size_t nodes) {
  if (nodes < 4) throw std::invalid_argument("build_H: need at least four node intervals");
  InverseResult out;
  const auto times = rho.times();
  std::vector<std::vector<double>> hs, dhs, ddhs;
  for (double t : times) {
    const PathSlice s = rho.slice(t, nodes);
    const auto k = coefficients(s);
    const auto root = solve_root(k);
    const double flux = k.b * std::exp(-root.z0) - k.c * std::exp(root.z0);  // phi at the cut
    std::vector<double> h(nodes + 1, 0.0), dh(nodes + 1), ddh(nodes + 1);
    for (std::size_t j = 0; j <= nodes; ++j) {
      const double r = s.rho[j];
      const double w = 1.0 / (2 * rate::chi(r));
      const double num = flux + s.du[j] - s.q[j];
      dh[j] = num * w;
      ddh[j] = (s.duu[j] - s.dt[j]) * w - num * (1 - 2 * r) * s.du[j] * w * w * 2;
    }
    const double step = 1.0 / static_cast<double>(nodes);
    for (std::size_t j = 1; j <= nodes; ++j) h[j] = h[j - 1] + 0.5 * step * (dh[j - 1] + dh[j]);
    hs.push_back(std::move(h));
    dhs.push_back(std::move(dh));
    ddhs.push_back(std::move(ddh));
    out.coefficients.push_back(k);
    out.roots.push_back(root);
  }
  out.h = std::make_shared<GridPerturbation>(times, nodes, std::move(hs), std::move(dhs), std::move(ddhs));
  return out;
}

void write_csv(std::ostream& os, const GridPerturbation& h) {
  os << "t,u,H,dH\n";
  const auto old = os.precision(17);
  for (std::size_t i = 0; i < h.times().size(); ++i) {
    const auto& v = h.node_values(i);
    const auto& d = h.node_gradients(i);
    for (std::size_t k = 0; k < v.size(); ++k) {
      os << h.times()[i] << ',' << static_cast<double>(k) / h.nodes() << ',' << v[k] << ',' << d[k] << '\n';
    }
  }
  os.precision(old);
}

}  // namespace slowbond
