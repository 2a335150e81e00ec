#pragma once

#include <vector>

#include "semigroup.hpp"
#include "spectral.hpp"
#include "symbol.hpp"

namespace lkpz {

/** Per-sample diagnostics row; the CSV schema mirrors these fields. */
struct DiagnosticsRecord {
  double t = 0.0;
  double mass = 0.0;
  double l1 = 0.0, l2 = 0.0, linf = 0.0;
  double g1 = 0.0, gp0 = 0.0, g2 = 0.0, gq = 0.0, ginf = 0.0;
  double q_cum = 0.0;                // cumulative integral of |grad u|_q^q
  double sse_r1 = 0.0, sse_r2 = 0.0; // rescaled self-similar errors
  double tail_frac = 0.0;            // |u| mass fraction outside |x|_inf > box/2
};

/** Signed integral of f over the box. */
double mass(const Field& f);

/** Fraction of the |f| integral carried by the region |x|_inf > box/2. */
double box_tail_fraction(const Field& f);

/** Decay-weight exponent beta(p) = (dim/alpha)(1 - 1/p). */
double decay_beta(int dim, double alpha, double p);

/** Midpoint of the admissible gradient-decay exponent interval
 * ((dim+alpha)/(dim+1), min(dim/(dim+1-alpha), q)).  When q caps the
 * interval to emptiness the cap is dropped (diagnostic use only). */
double p0_midpoint(int dim, double alpha, double q);

struct DValue {
  double value = 0.0;
  double t_argmax = 0.0;
  bool bracketed = false;  // argmax strictly inside the ladder
};

/** sup_t t^(1/alpha) (1+t)^beta |grad e^{-tL} v|_p over the ladder. */
DValue d_quantity(const Field& v, double p, const SymbolSpec& symbol,
                  const std::vector<double>& t_ladder);

/** Geometric default ladder 0.01 * 2^m, m = 0..14 (4+ decades). */
std::vector<double> default_time_ladder();

/** t^(dim(1-1/r)/alpha) * |u - m_inf p_alpha(., t)|_r. */
double self_similar_error(const Field& u, double m_inf, double t, double r,
                          double alpha);

struct PowerLawFit {
  double t_lo = 0.0, t_hi = 0.0;
  double slope = 0.0, intercept = 0.0, rms = 0.0;
  int count = 0;
};

/** Least-squares fit of log v against log t inside [t_lo, t_hi].
 * Requires at least 5 samples in the window and positive values. */
PowerLawFit fit_power_law(const std::vector<double>& t,
                          const std::vector<double>& v, double t_lo,
                          double t_hi);

/** Slack in the localization inequality
 * |w|_1 <= 2R int_{|x|<=3R} |grad w| + 2 int_{|x|>R} |w|; requires 3R < box. */
double ben_artzi_koch_gap(const Field& w, double R);

}  // namespace lkpz
