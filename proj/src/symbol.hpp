#pragma once

#include <span>
#include <string>
#include <vector>

#include "error.hpp"

namespace lkpz {

enum class SymbolKind { Fractional, Multifractional, Tabulated };

struct SymbolTerm {
  double coeff;
  double exponent;
};

struct PerturbationCheck {
  bool ok = false;
  std::vector<double> xi;     // ladder of |xi| values, decreasing
  std::vector<double> ratio;  // k(xi)/|xi|^alpha along the ladder
  std::string detail;
};

/** Radial Fourier symbol a(xi) = ell*|xi|^alpha + k(xi).
 *
 * Symbols are real, nonnegative, radial, and vanish at xi = 0.  The
 * dominant exponent alpha is the smallest exponent of the expansion; the
 * remainder k must be a lower-order perturbation at xi -> 0, which
 * check_perturbation probes on a geometric ladder.
 */
class SymbolSpec {
 public:
  static SymbolSpec fractional(double alpha, double ell = 1.0);
  static SymbolSpec multifractional(const std::vector<SymbolTerm>& terms);
  /** Piecewise-linear table of (|xi|, a) samples starting at (0, 0). */
  static SymbolSpec tabulated(double alpha, double ell,
                              const std::vector<double>& xi,
                              const std::vector<double>& values);

  SymbolKind kind() const { return kind_; }
  double dominant_alpha() const { return alpha_; }
  double ell() const { return ell_; }
  const std::vector<SymbolTerm>& terms() const { return terms_; }

  double evaluate_radial(double r) const;
  double evaluate(std::span<const double> xi) const;

  /** Largest |xi| the symbol can be evaluated at (finite for tables). */
  double support_max() const;

  PerturbationCheck check_perturbation(double xi_min, double ratio_tol,
                                       int rungs = 20) const;

 private:
  SymbolKind kind_ = SymbolKind::Fractional;
  double alpha_ = 0.0;
  double ell_ = 0.0;
  std::vector<SymbolTerm> terms_;
  std::vector<double> table_xi_;
  std::vector<double> table_a_;
};

}  // namespace lkpz
