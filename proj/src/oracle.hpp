#pragma once

#include "solver.hpp"
#include "spectral.hpp"

namespace lkpz {

/** e^{-tL} for the pure fractional symbol, realized as a direct periodic
 * convolution against the sampled kernel (clipped at 0 and normalized so
 * constants map to themselves).  Quadratic cost; n is capped at 256 in
 * one dimension and 64 per dimension in two. */
Field convolve_semigroup(const Field& f, double t, double alpha);

/** Explicit centered-difference Euler march for the alpha = 2 symbol;
 * requires dt <= h^2 / (2 * dim * ell * safety) with safety 2. */
Trajectory fd_solve(const ProblemSpec& problem);

}  // namespace lkpz
