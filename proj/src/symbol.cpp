#include "symbol.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace lkpz {

namespace {

void check_exponent(double alpha) {
  if (!(alpha > 0.0) || !(alpha <= 2.0))
    throw Error(ErrorCode::InvalidArgument,
                "symbol exponent must lie in (0, 2]");
}

}  // namespace

SymbolSpec SymbolSpec::fractional(double alpha, double ell) {
  check_exponent(alpha);
  if (!(ell > 0.0))
    throw Error(ErrorCode::InvalidArgument, "ell must be positive");
  SymbolSpec s;
  s.kind_ = SymbolKind::Fractional;
  s.alpha_ = alpha;
  s.ell_ = ell;
  s.terms_ = {{ell, alpha}};
  return s;
}

SymbolSpec SymbolSpec::multifractional(const std::vector<SymbolTerm>& terms) {
  if (terms.empty())
    throw Error(ErrorCode::InvalidArgument, "at least one term required");
  double alpha = std::numeric_limits<double>::infinity();
  double ell = 0.0;
  for (const SymbolTerm& t : terms) {
    check_exponent(t.exponent);
    if (!(t.coeff > 0.0))
      throw Error(ErrorCode::InvalidArgument,
                  "term coefficients must be positive");
    alpha = std::min(alpha, t.exponent);
  }
  for (const SymbolTerm& t : terms)
    if (t.exponent == alpha) ell += t.coeff;
  SymbolSpec s;
  s.kind_ = SymbolKind::Multifractional;
  s.alpha_ = alpha;
  s.ell_ = ell;
  s.terms_ = terms;
  return s;
}

SymbolSpec SymbolSpec::tabulated(double alpha, double ell,
                                 const std::vector<double>& xi,
                                 const std::vector<double>& values) {
  check_exponent(alpha);
  if (!(ell > 0.0))
    throw Error(ErrorCode::InvalidArgument, "ell must be positive");
  if (xi.size() != values.size() || xi.size() < 2)
    throw Error(ErrorCode::InvalidArgument,
                "table needs >= 2 matching samples");
  if (xi.front() != 0.0 || values.front() != 0.0)
    throw Error(ErrorCode::InvalidArgument, "table must start at (0, 0)");
  for (std::size_t i = 1; i < xi.size(); ++i) {
    if (!(xi[i] > xi[i - 1]))
      throw Error(ErrorCode::InvalidArgument,
                  "table abscissae must be strictly increasing");
    if (values[i] < values[i - 1])
      throw Error(ErrorCode::InvalidArgument,
                  "table values must be nondecreasing");
  }
  SymbolSpec s;
  s.kind_ = SymbolKind::Tabulated;
  s.alpha_ = alpha;
  s.ell_ = ell;
  s.table_xi_ = xi;
  s.table_a_ = values;
  return s;
}

double SymbolSpec::evaluate_radial(double r) const {
  if (!(r >= 0.0) || !std::isfinite(r))
    throw Error(ErrorCode::InvalidArgument, "|xi| must be finite and >= 0");
  if (kind_ == SymbolKind::Tabulated) {
    if (r > table_xi_.back())
      throw Error(ErrorCode::OutOfRange, "|xi| beyond tabulated range");
    auto it = std::upper_bound(table_xi_.begin(), table_xi_.end(), r);
    if (it == table_xi_.begin()) return table_a_.front();
    if (it == table_xi_.end()) return table_a_.back();
    std::size_t hi = it - table_xi_.begin();
    double x0 = table_xi_[hi - 1], x1 = table_xi_[hi];
    double a0 = table_a_[hi - 1], a1 = table_a_[hi];
    return a0 + (a1 - a0) * (r - x0) / (x1 - x0);
  }
  double acc = 0.0;
  for (const SymbolTerm& t : terms_)
    acc += t.coeff * std::pow(r, t.exponent);
  return acc;
}

double SymbolSpec::evaluate(std::span<const double> xi) const {
  if (xi.empty() || xi.size() > 2)
    throw Error(ErrorCode::InvalidArgument, "xi must have 1 or 2 components");
  double r2 = 0.0;
  for (double c : xi) r2 += c * c;
  return evaluate_radial(std::sqrt(r2));
}

double SymbolSpec::support_max() const {
  if (kind_ == SymbolKind::Tabulated) return table_xi_.back();
  return std::numeric_limits<double>::infinity();
}

PerturbationCheck SymbolSpec::check_perturbation(double xi_min,
                                                 double ratio_tol,
                                                 int rungs) const {
  PerturbationCheck out;
  if (!(xi_min > 0.0) || !(ratio_tol > 0.0) || rungs < 2) {
    out.detail = "xi_min, ratio_tol must be positive, rungs >= 2";
    return out;
  }
  double top = xi_min * std::pow(2.0, rungs - 1);
  // tables cannot be probed above their range; clamp the ladder start
  double cap = support_max();
  while (top > cap && rungs > 2) {
    --rungs;
    top = xi_min * std::pow(2.0, rungs - 1);
  }
  for (int m = 0; m < rungs; ++m) {
    double r = xi_min * std::pow(2.0, rungs - 1 - m);
    double k = evaluate_radial(r) - ell_ * std::pow(r, alpha_);
    out.xi.push_back(r);
    out.ratio.push_back(k / std::pow(r, alpha_));
  }
  for (std::size_t i = 0; i + 1 < out.ratio.size(); ++i) {
    double slack = 1e-9 * std::max(1.0, std::abs(out.ratio[i]));
    if (out.ratio[i + 1] > out.ratio[i] + slack) {
      std::ostringstream os;
      os << "ratio k(xi)/|xi|^alpha increases towards xi -> 0 near |xi| = "
         << out.xi[i + 1];
      out.detail = os.str();
      return out;
    }
  }
  if (!(std::abs(out.ratio.back()) < ratio_tol)) {
    std::ostringstream os;
    os << "ratio at |xi| = " << out.xi.back() << " is " << out.ratio.back()
       << ", not below " << ratio_tol;
    out.detail = os.str();
    return out;
  }
  out.ok = true;
  out.detail = "ok";
  return out;
}

}  // namespace lkpz
