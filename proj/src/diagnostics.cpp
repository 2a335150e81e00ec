#include "diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lkpz {

double mass(const Field& f) {
  double acc = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) acc += f[i];
  return acc * f.grid().cell_volume();
}

double box_tail_fraction(const Field& f) {
  const PeriodicGrid& g = f.grid();
  double half = g.box / 2.0;
  double total = 0.0, tail = 0.0;
  if (g.dim == 1) {
    for (int j = 0; j < g.n; ++j) {
      double a = std::abs(f[j]);
      total += a;
      if (std::abs(g.coord(j)) > half) tail += a;
    }
  } else {
    std::size_t idx = 0;
    for (int j1 = 0; j1 < g.n; ++j1)
      for (int j2 = 0; j2 < g.n; ++j2, ++idx) {
        double a = std::abs(f[idx]);
        total += a;
        if (std::max(std::abs(g.coord(j1)), std::abs(g.coord(j2))) > half)
          tail += a;
      }
  }
  return total > 0.0 ? tail / total : 0.0;
}

double decay_beta(int dim, double alpha, double p) {
  return (dim / alpha) * (1.0 - 1.0 / p);
}

double p0_midpoint(int dim, double alpha, double q) {
  double lo = (dim + alpha) / (dim + 1.0);
  double hi = dim + 1.0 - alpha > 0.0
                  ? dim / (dim + 1.0 - alpha)
                  : std::numeric_limits<double>::infinity();
  double capped = std::min(hi, q);
  if (capped > lo) return 0.5 * (lo + capped);
  return std::isinf(hi) ? 2.0 * lo : 0.5 * (lo + hi);
}

DValue d_quantity(const Field& v, double p, const SymbolSpec& symbol,
                  const std::vector<double>& t_ladder) {
  if (!(p >= 1.0))
    throw Error(ErrorCode::InvalidArgument, "d_quantity requires p >= 1");
  if (t_ladder.size() < 2)
    throw Error(ErrorCode::InvalidArgument, "ladder needs >= 2 rungs");
  for (std::size_t i = 0; i + 1 < t_ladder.size(); ++i)
    if (!(t_ladder[i] > 0.0) || !(t_ladder[i] < t_ladder[i + 1]))
      throw Error(ErrorCode::InvalidArgument,
                  "ladder must be positive and increasing");
  if (!(t_ladder.back() / t_ladder.front() >= 1e4))
    throw Error(ErrorCode::InvalidArgument,
                "ladder must span at least 4 decades");
  double alpha = symbol.dominant_alpha();
  double beta = decay_beta(v.grid().dim, alpha, p);
  SpectralField V = forward(v);
  DValue out;
  std::size_t arg = 0;
  for (std::size_t i = 0; i < t_ladder.size(); ++i) {
    double t = t_ladder[i];
    SpectralField Vt = apply_semigroup(V, t, symbol);
    double norm = lp_norm(magnitude(gradient(Vt)), p);
    double w = std::pow(t, 1.0 / alpha) * std::pow(1.0 + t, beta) * norm;
    if (w > out.value) {
      out.value = w;
      out.t_argmax = t;
      arg = i;
    }
  }
  out.bracketed = arg > 0 && arg + 1 < t_ladder.size();
  return out;
}

std::vector<double> default_time_ladder() {
  std::vector<double> t;
  for (int m = 0; m <= 14; ++m) t.push_back(0.01 * std::pow(2.0, m));
  return t;
}

double self_similar_error(const Field& u, double m_inf, double t, double r,
                          double alpha) {
  if (!(r >= 1.0))
    throw Error(ErrorCode::InvalidArgument, "r must be >= 1");
  Field p = stable_kernel({alpha, t, u.grid()});
  Field err = add_scaled(u, 1.0, p, -m_inf);
  double weight =
      std::pow(t, (u.grid().dim * (1.0 - 1.0 / r)) / alpha);
  return weight * lp_norm(err, r);
}

PowerLawFit fit_power_law(const std::vector<double>& t,
                          const std::vector<double>& v, double t_lo,
                          double t_hi) {
  if (t.size() != v.size())
    throw Error(ErrorCode::InvalidArgument, "mismatched sample vectors");
  if (!(t_lo > 0.0) || !(t_hi > t_lo))
    throw Error(ErrorCode::InvalidArgument, "need 0 < t_lo < t_hi");
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t_lo || t[i] > t_hi) continue;
    if (!(v[i] > 0.0))
      throw Error(ErrorCode::InvalidArgument,
                  "power-law fit requires positive values in the window");
    xs.push_back(std::log(t[i]));
    ys.push_back(std::log(v[i]));
  }
  if (xs.size() < 5)
    throw Error(ErrorCode::InvalidArgument,
                "power-law fit needs at least 5 samples in the window");
  double n = double(xs.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  double denom = n * sxx - sx * sx;
  PowerLawFit fit;
  fit.t_lo = t_lo;
  fit.t_hi = t_hi;
  fit.count = int(xs.size());
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  double ss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
    ss += r * r;
  }
  fit.rms = std::sqrt(ss / n);
  return fit;
}

double ben_artzi_koch_gap(const Field& w, double R) {
  const PeriodicGrid& g = w.grid();
  if (!(R > 0.0) || !(3.0 * R < g.box))
    throw Error(ErrorCode::InvalidArgument, "need 0 < 3R < box");
  Field gm = magnitude(gradient(w));
  double h = g.cell_volume();
  double lhs = lp_norm(w, 1.0);
  double grad_inner = 0.0, outer = 0.0;
  if (g.dim == 1) {
    for (int j = 0; j < g.n; ++j) {
      double r = std::abs(g.coord(j));
      if (r <= 3.0 * R) grad_inner += gm[j];
      if (r > R) outer += std::abs(w[j]);
    }
  } else {
    std::size_t idx = 0;
    for (int j1 = 0; j1 < g.n; ++j1)
      for (int j2 = 0; j2 < g.n; ++j2, ++idx) {
        double r = std::hypot(g.coord(j1), g.coord(j2));
        if (r <= 3.0 * R) grad_inner += gm[idx];
        if (r > R) outer += std::abs(w[idx]);
      }
  }
  return 2.0 * R * grad_inner * h + 2.0 * outer * h - lhs;
}

}  // namespace lkpz
