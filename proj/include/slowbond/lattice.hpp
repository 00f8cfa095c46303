#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <vector>

#include "slowbond/density.hpp"
#include "slowbond/field.hpp"

namespace slowbond {

/// Occupation variables eta(x), x in {0,...,n-1}, on the discrete torus.
/// Site -1 is stored as n-1; bond x joins sites x and x+1 (mod n), so the
/// slow bond is bond n-1.
class Configuration {
 public:
  Configuration() = default;
  explicit Configuration(std::vector<std::uint8_t> occupancy);

  static Configuration vacant(std::size_t n);
  static Configuration full(std::size_t n);

  std::size_t size() const noexcept { return occ_.size(); }
  int operator[](std::size_t x) const noexcept { return occ_[x]; }
  /// Occupation at a torus site; negative indices wrap.
  int at(std::int64_t x) const noexcept;
  std::size_t particle_count() const noexcept;
  std::span<const std::uint8_t> occupancy() const noexcept { return occ_; }

  void exchange_in_place(std::size_t bond) noexcept;

  friend bool operator==(const Configuration&, const Configuration&) = default;

 private:
  std::vector<std::uint8_t> occ_;
};

/// eta^{x,x+1}.
Configuration exchange(Configuration c, std::size_t bond);

/// Conductance xi_x: 1 everywhere except 1/n on the slow bond.
struct BondRates {
  std::size_t n;

  std::size_t slow_bond() const noexcept { return n - 1; }
  double operator()(std::size_t bond) const noexcept {
    return bond == n - 1 ? 1.0 / static_cast<double>(n) : 1.0;
  }
};

enum class Mode { symmetric, weakly_asymmetric };

struct DynamicsSpec {
  std::size_t n = 0;
  Mode mode = Mode::symmetric;
  FieldPtr perturbation;  // present exactly when mode is weakly_asymmetric
  double horizon = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct Event {
  double time;
  std::uint32_t bond;
};

struct Snapshot {
  double time;
  Configuration config;
};

struct Trajectory {
  DynamicsSpec spec;
  Configuration initial;
  std::vector<Event> events;
  std::vector<Snapshot> snapshots;
  bool events_recorded = true;
  std::uint64_t event_count = 0;
  std::uint64_t proposals = 0;
  std::uint64_t slow_bond_events = 0;
};

/// delta_N H_x at time t: H_t((x+1)/n) - H_t(x/n), with site n identified
/// with u=0 (the 0+ side).
double bond_gradient(const Perturbation& h, std::size_t n, std::size_t bond, double t);

/// Jump rate across `bond` in configuration c at time t, including the
/// diffusive speed-up n^2.
double bond_rate(const Configuration& c, std::size_t bond, double t, const DynamicsSpec& spec);

enum class Sampler {
  /// Categorical selection over active bonds with a binary indexed tree;
  /// O(log N) per event.
  event_driven,
  /// Candidates uniform over all bonds at a constant total rate, accepted
  /// with probability rate / bound. O(1) per candidate, about 1/(2 chi)
  /// candidates per event; faster at moderate densities.
  uniformized,
};

struct SimulateOptions {
  bool record_events = true;
  Sampler sampler = Sampler::event_driven;
  /// Replica index mixed into the seed; replicas are independent streams.
  std::uint64_t replica = 0;
};

/// Exact continuous-time sample of the exclusion dynamics on [0, horizon].
/// Snapshots are taken at `observe_at` (sorted, inside [0, horizon]).
Trajectory simulate(const DynamicsSpec& spec, const Configuration& initial,
                    std::span<const double> observe_at, SimulateOptions options = {});

/// Deterministic configuration from gamma by cumulative rounding:
/// eta(x) = floor(n F((x+1)/n)) - floor(n F(x/n)).
Configuration initial_from_profile(const Profile& gamma, std::size_t n);

/// Engine for one replica, derived from (seed, replica).
std::mt19937_64 replica_engine(std::uint64_t seed, std::uint64_t replica);

/// Bernoulli product sample with constant marginal alpha.
Configuration sample_product(std::size_t n, double alpha, std::mt19937_64& rng);

/// CSV rows "time,site,occupancy" for every snapshot.
void write_snapshots_csv(std::ostream& os, const Trajectory& traj);

/// Packed little-endian binary: magic "SBTR", u32 version, u64 n, f64 T,
/// u64 count, then per snapshot f64 time and ceil(n/64) u64 words (bit x of
/// word x/64 is eta(x)).
void write_snapshots_binary(std::ostream& os, const Trajectory& traj);

struct SnapshotFile {
  std::size_t n = 0;
  double horizon = 0;
  std::vector<Snapshot> snapshots;
};
SnapshotFile read_snapshots_binary(std::istream& is);

}  // namespace slowbond
