#pragma once

#include <vector>

#include "diagnostics.hpp"
#include "semigroup.hpp"
#include "spectral.hpp"
#include "symbol.hpp"

namespace lkpz {

/** One initial-value problem u_t = -Lu + lambda |grad u|^q. */
struct ProblemSpec {
  SymbolSpec symbol;
  double lambda = 0.0;
  double q = 2.0;
  Field initial;
  double horizon = 1.0;
  double dt = 0.01;
  std::vector<double> sample_times;
};

enum class RunStatus { Completed, BlowUp, StepControlFailure };

struct Trajectory {
  ProblemSpec problem;
  double p0 = 0.0;
  std::vector<double> times;
  std::vector<Field> fields;
  std::vector<DiagnosticsRecord> records;
  RunStatus status = RunStatus::Completed;
  double failure_time = 0.0;
  double m_inf_estimate = 0.0;  // mass at the last recorded sample
};

/** lambda * |grad f|^q with spectral gradient, dealiased. */
Field nonlinearity(const Field& f, double lambda, double q);

/** One second-order exponential-integrator step; throws on blow-up. */
Field step(const Field& f, double dt, const ProblemSpec& problem);

/** Fixed-dt mild-solution march with per-step maximum-principle and
 * blow-up guards; violations terminate the trajectory via its status. */
Trajectory run(const ProblemSpec& problem);

struct PicardResult {
  Field fixed_point;               // iterate at the horizon
  std::vector<double> distances;   // successive sup distances
  std::vector<double> ratios;      // contraction ratios
  int iterations = 0;
};

/** Duhamel fixed-point iteration on a composite-midpoint quadrature grid.
 * Throws HorizonTooLarge when the map stops contracting, NoConvergence
 * when max_iter is exhausted. */
PicardResult picard_solve(const ProblemSpec& problem, double horizon,
                          int max_iter, double tol, int nodes = 64);

/** max_s |M(t_s) - M(0) - lambda Q(t_s)| / M(0) over recorded samples. */
double mass_identity_residual(const Trajectory& traj);

}  // namespace lkpz
