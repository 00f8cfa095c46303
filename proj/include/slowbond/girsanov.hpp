#pragma once

#include <cstddef>

#include "slowbond/field.hpp"
#include "slowbond/lattice.hpp"

namespace slowbond {

/// Pieces of log dP^H/dP along one trajectory on [0, T].
struct GirsanovAccumulator {
  double boundary_term = 0;     // N [<pi_T, H_T> - <pi_0, H_0>]
  double time_integral = 0;     // N int <pi_t, d_t H_t> dt
  double jump_compensator = 0;  // N^2 int sum_x xi_x [g1 (e^{d} - 1) + g2 (e^{-d} - 1)] dt
  double slow_bond_compensator = 0;  // the slow bond's share of jump_compensator
  double jump_sum = 0;               // sum over jumps of +-delta_N H at the jump time
  double total = 0;                  // boundary - time integral - compensator
  double total_jump_form = 0;        // jump_sum - compensator
  /// N^2 int sum_x xi_x [g1 Gamma(d) + g2 Gamma(-d)] dt: the compensator of
  /// log dP^H/dP under P^H, so its mean under P^H is the relative entropy.
  double entropy_compensator = 0;
};

struct GirsanovOptions {
  /// Longest time span integrated by a single two-point Gauss rule.
  double max_substep = 1.0 / 64;
};

/// Exact log Radon-Nikodym derivative of the perturbed law with respect to
/// the symmetric one, evaluated on a trajectory with a full event record.
GirsanovAccumulator log_rn(const Trajectory& traj, const Perturbation& h, GirsanovOptions options = {});

/// log dP/dP^H for the same trajectory: the negative of log_rn's total.
double log_rn_reverse(const GirsanovAccumulator& forward);

/// C(H, T) bounding |log dP^H/dP| / N, from sampled sup norms of H and
/// its derivatives (padded by 5%).
double envelope_constant(const Perturbation& h, double horizon, std::size_t n);

struct EntropyEstimate {
  std::size_t n = 0;
  std::size_t replicas = 0;
  double mean_per_site = 0;
  double std_error = 0;
  /// Same expectation estimated through entropy_compensator; no jump noise.
  double compensated_mean = 0;
  double compensated_std_error = 0;
};

/// Monte Carlo estimate of (1/N) H(P^H | P) from trajectories simulated
/// under the perturbed law. `spec` must be weakly asymmetric.
EntropyEstimate estimate_entropy(const DynamicsSpec& spec, const Configuration& initial, std::size_t replicas,
                                 std::size_t threads = 1);

struct MartingaleEstimate {
  std::size_t replicas = 0;
  double mean = 0;       // sample mean of exp(log dP^H/dP) under P
  double std_error = 0;
};

/// Sample mean of the Radon-Nikodym derivative over symmetric trajectories.
MartingaleEstimate martingale_mean(const DynamicsSpec& symmetric, const Configuration& initial,
                                   const Perturbation& h, std::size_t replicas, std::size_t threads = 1);

}  // namespace slowbond
