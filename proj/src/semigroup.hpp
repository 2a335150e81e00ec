#pragma once

#include <span>

#include "spectral.hpp"
#include "symbol.hpp"

namespace lkpz {

/** e^{-tL} as the Fourier multiplier exp(-t*a(xi)); mass preserving. */
Field apply_semigroup(const Field& f, double t, const SymbolSpec& symbol);
SpectralField apply_semigroup(const SpectralField& F, double t,
                              const SymbolSpec& symbol);

struct KernelSpec {
  double alpha;
  double t;
  PeriodicGrid grid;
};

/** Periodized alpha-stable kernel p_alpha(., t); integrates to 1 exactly.
 *
 * Requires the kernel width t^(1/alpha) to be at least 4 grid spacings,
 * otherwise a Resolution error is raised.
 */
Field stable_kernel(const KernelSpec& spec);

/** Evaluates the kernel's truncated Fourier series at an arbitrary point. */
double kernel_value(const PeriodicGrid& grid, double alpha, double t,
                    std::span<const double> x);

/** Max deviation (relative to the peak) between p(., t2) and the
 * self-similar rescaling of p(., t1); t2/t1 must be a power of two. */
double verify_self_similarity(double alpha, double t1, double t2,
                              const PeriodicGrid& grid);

}  // namespace lkpz
