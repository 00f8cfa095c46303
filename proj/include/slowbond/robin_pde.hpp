#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "slowbond/density.hpp"
#include "slowbond/field.hpp"

namespace slowbond {

struct PdeOptions {
  /// Grid size; 0 accepts the size of the initial field, anything else must match it.
  std::size_t m = 0;
  /// Time step; 0 selects 0.2/m^2. Values above 0.25/m^2 are rejected.
  double dt = 0.0;
  /// Number of uniform observation intervals on [0, T]; 0 selects
  /// clamp(4m, 512, 4096). Early steps 1, 2, 4, ... are recorded as well so
  /// time quadrature resolves the initial boundary layer.
  std::size_t observations = 0;
  /// The drift field is refreshed every this many steps and linearly
  /// interpolated in between. 0 picks the largest count spanning at most
  /// 1e-4 time units, where the interpolation error is far below the
  /// spatial error.
  std::size_t field_refresh = 0;
};

struct PdeSolution {
  std::vector<double> times;
  std::vector<DensityField> fields;
  /// Flux across the cut in the +u direction (from 0- to 0+), one entry per step.
  std::vector<double> flux_at_cut;
  double dt = 0;
  std::size_t steps = 0;
  double horizon = 0;
  FieldPtr perturbation;  // null for the symmetric equation
};

inline double mobility(double a) { return a * (1.0 - a); }

/// phi_t(rho, H): net flux from 0- to 0+ for side values rho(0-), rho(0+)
/// and jump delta H = H(0+) - H(0-). Reduces to rho(0-) - rho(0+) at zero jump.
double cut_flux(double minus, double plus, double jump);

/// Heat equation on the cut torus with the linear Robin condition
/// d_u rho(0+) = d_u rho(0-) = rho(0+) - rho(0-).
PdeSolution solve_symmetric(const DensityField& gamma, double horizon, const PdeOptions& options = {});

/// d_t rho = Lap rho - 2 d_u(chi(rho) d_u H) with the nonlinear Robin
/// condition given by cut_flux.
PdeSolution solve_perturbed(const DensityField& gamma, FieldPtr h, double horizon,
                            const PdeOptions& options = {});

/// |LHS - RHS| of the integral equation tested against G at the final time.
/// Uses the perturbation stored in the solution when present.
double weak_residual(const PdeSolution& solution, const Perturbation& g);

/// Index of the stored observation closest to t.
std::size_t nearest_observation(const PdeSolution& solution, double t);

/// CSV rows "t,u,rho" for every stored observation.
void write_csv(std::ostream& os, const PdeSolution& solution);

}  // namespace slowbond
