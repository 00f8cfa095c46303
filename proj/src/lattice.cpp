#include "slowbond/lattice.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "slowbond/fenwick.hpp"


namespace slowbond {

Configuration::Configuration(std::vector<std::uint8_t> occupancy) : occ_(std::move(occupancy)) {
  for (auto v : occ_) {
    if (v > 1) throw std::invalid_argument("Configuration: occupation must be 0 or 1");
  }
}

Configuration Configuration::vacant(std::size_t n) { return Configuration(std::vector<std::uint8_t>(n, 0)); }

Configuration Configuration::full(std::size_t n) { return Configuration(std::vector<std::uint8_t>(n, 1)); }

int Configuration::at(std::int64_t x) const noexcept {
  const auto n = static_cast<std::int64_t>(occ_.size());
  return occ_[static_cast<std::size_t>(((x % n) + n) % n)];
}

std::size_t Configuration::particle_count() const noexcept {
  std::size_t c = 0;
  for (auto v : occ_) c += v;
  return c;
}

void Configuration::exchange_in_place(std::size_t bond) noexcept {
  const std::size_t y = bond + 1 == occ_.size() ? 0 : bond + 1;
  std::swap(occ_[bond], occ_[y]);
}

Configuration exchange(Configuration c, std::size_t bond) {
  if (bond >= c.size()) throw std::out_of_range("exchange: bond index out of range");
  c.exchange_in_place(bond);
  return c;
}

void DynamicsSpec::validate() const {
  if (n < 2) throw std::invalid_argument("DynamicsSpec: need at least two sites");
  if (!(horizon > 0)) throw std::invalid_argument("DynamicsSpec: horizon must be positive");
  if ((mode == Mode::weakly_asymmetric) != static_cast<bool>(perturbation)) {
    throw std::invalid_argument(
        "DynamicsSpec: a perturbation is required exactly in weakly asymmetric mode");
  }
}

double bond_gradient(const Perturbation& h, std::size_t n, std::size_t bond, double t) {
  const double nd = static_cast<double>(n);
  const double right = bond + 1 == n ? 0.0 : static_cast<double>(bond + 1) / nd;
  return h.value(t, right) - h.value(t, static_cast<double>(bond) / nd);
}

double bond_rate(const Configuration& c, std::size_t bond, double t, const DynamicsSpec& spec) {
  if (t < 0 || t > spec.horizon) throw std::domain_error("bond_rate: time outside [0, T]");
  if (bond >= c.size()) throw std::out_of_range("bond_rate: bond index out of range");
  const std::size_t n = c.size();
  const double base = static_cast<double>(n) * static_cast<double>(n) * BondRates{n}(bond);
  const int a = c[bond];
  const int b = c[bond + 1 == n ? 0 : bond + 1];
  if (a == b) return 0.0;
  if (spec.mode == Mode::symmetric) return base;
  const double g = bond_gradient(*spec.perturbation, n, bond, t);
  return base * (a == 1 ? std::exp(g) : std::exp(-g));
}

std::mt19937_64 replica_engine(std::uint64_t seed, std::uint64_t replica) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(replica), static_cast<std::uint32_t>(replica >> 32),
                    0x5b0du};
  return std::mt19937_64(seq);
}

Configuration sample_product(std::size_t n, double alpha, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(alpha);
  std::vector<std::uint8_t> occ(n);
  for (auto& v : occ) v = coin(rng) ? 1 : 0;
  return Configuration(std::move(occ));
}

namespace {

// Range of delta_N H_x over [0, T] per bond, sampled on a time grid and
// padded so it encloses the true range for smooth H.
struct GradientRange {
  std::vector<double> lo, hi;
};

GradientRange gradient_ranges(const Perturbation& h, std::size_t n, double horizon) {
  constexpr int kSamples = 257;
  GradientRange r{std::vector<double>(n), std::vector<double>(n)};
  for (std::size_t x = 0; x < n; ++x) {
    double lo = bond_gradient(h, n, x, 0.0), hi = lo;
    for (int i = 1; i < kSamples; ++i) {
      const double g = bond_gradient(h, n, x, horizon * i / (kSamples - 1));
      lo = std::min(lo, g);
      hi = std::max(hi, g);
    }
    const double pad = 0.02 * std::max(std::abs(lo), std::abs(hi)) + 1e-3;
    r.lo[x] = lo - pad;
    r.hi[x] = hi + pad;
  }
  return r;
}

}  // namespace

Trajectory simulate(const DynamicsSpec& spec, const Configuration& initial,
                    std::span<const double> observe_at, SimulateOptions options) {
  spec.validate();
  if (initial.size() != spec.n) throw std::invalid_argument("simulate: initial size differs from spec.n");
  for (std::size_t i = 0; i < observe_at.size(); ++i) {
    if (observe_at[i] < 0 || observe_at[i] > spec.horizon || (i > 0 && observe_at[i] < observe_at[i - 1])) {
      throw std::invalid_argument("simulate: observation times must be sorted inside [0, T]");
    }
  }

  const std::size_t n = spec.n;
  const double n2 = static_cast<double>(n) * static_cast<double>(n);
  const BondRates xi{n};
  const bool asym = spec.mode == Mode::weakly_asymmetric;

  // Per-bond bounds e^{lo} <= e^{+-delta} <= e^{hi} on the rate ratio.
  GradientRange range;
  std::vector<double> exp_lo, exp_hi, factor(n, 1.0);
  if (asym) {
    range = gradient_ranges(*spec.perturbation, n, spec.horizon);
    for (std::size_t x = 0; x < n; ++x) {
      exp_lo.push_back(std::exp(range.lo[x]));
      exp_hi.push_back(std::exp(range.hi[x]));
      factor[x] = std::max(exp_hi[x], 1.0 / exp_lo[x]);
    }
  }

  Trajectory traj;
  traj.spec = spec;
  traj.initial = initial;
  traj.events_recorded = options.record_events;

  std::vector<std::uint8_t> occ(initial.occupancy().begin(), initial.occupancy().end());
  auto right_of = [n](std::size_t x) { return x + 1 == n ? std::size_t{0} : x + 1; };

  auto rng = replica_engine(spec.seed, options.replica);
  auto uniform = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };

  // A proposal on active bond x is accepted when level < e^{+-delta}, where
  // level is uniform on [0, scale) and scale is the proposal rate of x over
  // n^2 xi(x). The gradient range gives a squeeze, so H is evaluated only
  // when level falls between the two rate bounds.
  auto accept = [&](std::size_t x, double scale, double t) {
    if (!asym && scale == 1.0) return true;
    const double level = uniform() * scale;
    if (!asym) return level < 1.0;
    const bool forward = occ[x] == 1;
    if (level < (forward ? exp_lo[x] : 1.0 / exp_hi[x])) return true;
    if (level >= (forward ? exp_hi[x] : 1.0 / exp_lo[x])) return false;
    const double g = bond_gradient(*spec.perturbation, n, x, t);
    if (g > range.hi[x] + 1e-12 || g < range.lo[x] - 1e-12) {
      throw std::logic_error("simulate: gradient range violated");
    }
    return level < std::exp(forward ? g : -g);
  };
  auto apply = [&](std::size_t x, double t) {
    std::swap(occ[x], occ[right_of(x)]);
    ++traj.event_count;
    if (x == xi.slow_bond()) ++traj.slow_bond_events;
    if (options.record_events) traj.events.push_back({t, static_cast<std::uint32_t>(x)});
  };

  std::size_t next_obs = 0;
  auto record_until = [&](double limit, bool inclusive) {
    while (next_obs < observe_at.size() &&
           (observe_at[next_obs] < limit || (inclusive && observe_at[next_obs] <= limit))) {
      traj.snapshots.push_back({observe_at[next_obs], Configuration(occ)});
      ++next_obs;
    }
  };

  if (options.sampler == Sampler::event_driven) {
    auto proposal_rate = [&](std::size_t x) {
      return occ[x] != occ[right_of(x)] ? n2 * xi(x) * factor[x] : 0.0;
    };
    FenwickTree tree(n);
    for (std::size_t x = 0; x < n; ++x) tree.set(x, proposal_rate(x));
    tree.rebuild();
    double t = 0;
    std::uint64_t updates = 0;
    for (;;) {
      const double total = tree.total();
      if (!(total > 0)) break;
      t -= std::log1p(-uniform()) / total;
      if (t > spec.horizon) break;
      const std::size_t x = tree.find(uniform() * total);
      if (tree.weight(x) <= 0) continue;  // roundoff at an empty bond; a null proposal
      ++traj.proposals;
      if (!accept(x, factor[x], t)) continue;
      record_until(t, false);
      apply(x, t);
      const std::size_t left = x == 0 ? n - 1 : x - 1;
      const std::size_t right = right_of(x);
      tree.set(left, proposal_rate(left));
      tree.set(x, proposal_rate(x));
      tree.set(right, proposal_rate(right));
      if ((++updates & 0xFFFF) == 0) tree.rebuild();
    }
    record_until(spec.horizon, true);
    return traj;
  }

  // Uniformized: candidates at total rate n^3 * bound, uniform over bonds.
  // The bound weights each bond by its conductance, so the slow bond's O(1)
  // gradient does not inflate the candidate rate.
  double bound = 1.0;
  for (std::size_t x = 0; x < n; ++x) bound = std::max(bound, xi(x) * factor[x]);
  const double total_rate = n2 * static_cast<double>(n) * bound;
  __extension__ using wide = unsigned __int128;
  auto pick = [&rng, n] { return static_cast<std::size_t>((static_cast<wide>(rng()) * n) >> 64); };
  auto candidate = [&](double t) {
    const std::size_t x = pick();
    return occ[x] != occ[right_of(x)] && accept(x, bound / xi(x), t) ? x : n;
  };

  if (!asym && !options.record_events) {
    // Time-homogeneous and no event times wanted: only the number of
    // candidates between observations matters.
    double from = 0;
    auto advance_to = [&](double to) {
      std::poisson_distribution<std::uint64_t> count(total_rate * (to - from));
      const std::uint64_t k = count(rng);
      for (std::uint64_t i = 0; i < k; ++i) {
        if (const std::size_t x = candidate(to); x < n) apply(x, to);
      }
      traj.proposals += k;
      from = to;
    };
    for (double obs : observe_at) {
      if (obs > from) advance_to(obs);
      record_until(obs, true);
    }
    if (spec.horizon > from) advance_to(spec.horizon);
  } else {
    double t = 0;
    for (;;) {
      t -= std::log1p(-uniform()) / total_rate;
      if (t > spec.horizon) break;
      ++traj.proposals;
      const std::size_t x = candidate(t);
      if (x == n) continue;
      record_until(t, false);
      apply(x, t);
    }
  }
  record_until(spec.horizon, true);
  return traj;
}

Configuration initial_from_profile(const Profile& gamma, std::size_t n) {
  if (n < 1) throw std::invalid_argument("initial_from_profile: n must be positive");
  const std::size_t probes = std::max<std::size_t>(8 * n, 1024);
  for (std::size_t i = 0; i <= probes; ++i) {
    const double g = gamma.density(static_cast<double>(i) / probes);
    if (!(g >= -1e-12 && g <= 1.0 + 1e-12)) {
      throw std::invalid_argument("initial_from_profile: profile leaves [0,1]");
    }
  }
  std::vector<double> cum(n + 1, 0.0);
  for (std::size_t k = 1; k <= n; ++k) {
    const double a = static_cast<double>(k - 1) / n;
    const double b = static_cast<double>(k) / n;
    cum[k] = gamma.cumulative ? gamma.cumulative(b) - gamma.cumulative(0.0) : cum[k - 1] + gamma.integral(a, b);
  }
  std::vector<std::uint8_t> occ(n);
  const double nd = static_cast<double>(n);
  auto lattice_count = [&](std::size_t k) { return std::floor(nd * cum[k] + 1e-9); };
  for (std::size_t x = 0; x < n; ++x) {
    const double d = lattice_count(x + 1) - lattice_count(x);
    occ[x] = d >= 1.0 ? 1 : 0;
  }
  return Configuration(std::move(occ));
}

void write_snapshots_csv(std::ostream& os, const Trajectory& traj) {
  os << "time,site,occupancy\n";
  const auto old = os.precision(17);
  for (const auto& s : traj.snapshots) {
    for (std::size_t x = 0; x < s.config.size(); ++x) os << s.time << ',' << x << ',' << s.config[x] << '\n';
  }
  os.precision(old);
}

namespace {

constexpr char kMagic[4] = {'S', 'B', 'T', 'R'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ostream& os, T v) {
  static_assert(std::endian::native == std::endian::little, "binary format assumes little-endian host");
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw std::runtime_error("read_snapshots_binary: truncated input");
  return v;
}

}  // namespace

void write_snapshots_binary(std::ostream& os, const Trajectory& traj) {
  os.write(kMagic, 4);
  put<std::uint32_t>(os, kVersion);
  put<std::uint64_t>(os, traj.spec.n);
  put<double>(os, traj.spec.horizon);
  put<std::uint64_t>(os, traj.snapshots.size());
  const std::size_t words = (traj.spec.n + 63) / 64;
  for (const auto& s : traj.snapshots) {
    put<double>(os, s.time);
    std::vector<std::uint64_t> bits(words, 0);
    for (std::size_t x = 0; x < s.config.size(); ++x) {
      if (s.config[x]) bits[x / 64] |= std::uint64_t{1} << (x % 64);
    }
    for (auto w : bits) put<std::uint64_t>(os, w);
  }
}

SnapshotFile read_snapshots_binary(std::istream& is) {
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0) throw std::runtime_error("read_snapshots_binary: bad magic");
  if (get<std::uint32_t>(is) != kVersion) throw std::runtime_error("read_snapshots_binary: unsupported version");
  SnapshotFile f;
  f.n = get<std::uint64_t>(is);
  f.horizon = get<double>(is);
  const auto count = get<std::uint64_t>(is);
  const std::size_t words = (f.n + 63) / 64;
  f.snapshots.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const double time = get<double>(is);
    std::vector<std::uint8_t> occ(f.n);
    for (std::size_t w = 0; w < words; ++w) {
      const auto bits = get<std::uint64_t>(is);
      for (std::size_t b = 0; b < 64 && w * 64 + b < f.n; ++b) occ[w * 64 + b] = (bits >> b) & 1u;
    }
    f.snapshots.push_back({time, Configuration(std::move(occ))});
  }
  return f;
}

}  // namespace slowbond
