#include "oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace lkpz {

namespace {

void check_oracle_grid(const PeriodicGrid& g) {
  int cap = g.dim == 1 ? 256 : 64;
  if (g.n > cap)
    throw Error(ErrorCode::InvalidArgument,
                "oracle grids are capped at 256 (1d) / 64 per dim (2d)");
}

double fd_gradient_sq(const Field& u, const PeriodicGrid& g, int j1, int j2) {
  double inv2h = 1.0 / (2.0 * g.spacing());
  if (g.dim == 1) {
    int jm = (j1 + g.n - 1) % g.n, jp = (j1 + 1) % g.n;
    double d = (u[jp] - u[jm]) * inv2h;
    return d * d;
  }
  int n = g.n;
  auto at = [&](int a, int b) { return u[std::size_t(a) * n + b]; };
  int am = (j1 + n - 1) % n, ap = (j1 + 1) % n;
  int bm = (j2 + n - 1) % n, bp = (j2 + 1) % n;
  double dx = (at(ap, j2) - at(am, j2)) * inv2h;
  double dy = (at(j1, bp) - at(j1, bm)) * inv2h;
  return dx * dx + dy * dy;
}

double fd_laplacian(const Field& u, const PeriodicGrid& g, int j1, int j2) {
  double invh2 = 1.0 / (g.spacing() * g.spacing());
  if (g.dim == 1) {
    int jm = (j1 + g.n - 1) % g.n, jp = (j1 + 1) % g.n;
    return (u[jp] - 2.0 * u[j1] + u[jm]) * invh2;
  }
  int n = g.n;
  auto at = [&](int a, int b) { return u[std::size_t(a) * n + b]; };
  int am = (j1 + n - 1) % n, ap = (j1 + 1) % n;
  int bm = (j2 + n - 1) % n, bp = (j2 + 1) % n;
  return (at(ap, j2) + at(am, j2) + at(j1, bp) + at(j1, bm) -
          4.0 * at(j1, j2)) *
         invh2;
}

}  // namespace

Field convolve_semigroup(const Field& f, double t, double alpha) {
  const PeriodicGrid& g = f.grid();
  check_oracle_grid(g);
  if (t == 0.0) return f;
  Field kernel = stable_kernel({alpha, t, g});
  std::vector<double> w(kernel.size());
  double total = 0.0;
  for (std::size_t i = 0; i < kernel.size(); ++i) {
    w[i] = std::max(kernel[i], 0.0);
    total += w[i];
  }
  for (double& x : w) x /= total;

  // kernel samples start at x = -box, so displacement d*h lives at d + n/2
  Field out(g);
  if (g.dim == 1) {
    int half = g.n / 2;
    for (int i = 0; i < g.n; ++i) {
      double acc = 0.0;
      for (int j = 0; j < g.n; ++j)
        acc += w[(i - j + half + g.n) % g.n] * f[j];
      out[i] = acc;
    }
  } else {
    int n = g.n, half = n / 2;
    for (int i1 = 0; i1 < n; ++i1)
      for (int i2 = 0; i2 < n; ++i2) {
        double acc = 0.0;
        for (int j1 = 0; j1 < n; ++j1) {
          int d1 = (i1 - j1 + half + n) % n;
          for (int j2 = 0; j2 < n; ++j2)
            acc += w[std::size_t(d1) * n + (i2 - j2 + half + n) % n] *
                   f[std::size_t(j1) * n + j2];
        }
        out[std::size_t(i1) * n + i2] = acc;
      }
  }
  return out;
}

Trajectory fd_solve(const ProblemSpec& problem) {
  const PeriodicGrid& g = problem.initial.grid();
  check_oracle_grid(g);
  const SymbolSpec& s = problem.symbol;
  if (s.terms().size() != 1 || s.dominant_alpha() != 2.0)
    throw Error(ErrorCode::InvalidArgument,
                "fd_solve requires the pure alpha = 2 symbol");
  double nu = s.ell();
  double h = g.spacing();
  double bound = h * h / (2.0 * g.dim * nu * 2.0);
  if (problem.dt > bound * (1.0 + 1e-12))
    throw Error(ErrorCode::InvalidArgument,
                "dt violates the explicit stability bound h^2/(4 dim ell)");
  double steps_d = problem.horizon / problem.dt;
  if (std::abs(steps_d - std::round(steps_d)) > 1e-6)
    throw Error(ErrorCode::InvalidArgument,
                "horizon must be an integer multiple of dt");

  Trajectory traj;
  traj.problem = problem;
  traj.p0 = p0_midpoint(g.dim, 2.0, problem.q);
  const double inf = std::numeric_limits<double>::infinity();

  Field u = problem.initial;
  long steps = std::lround(steps_d);
  std::size_t next_sample = 0;
  auto grad_q_integral = [&](const Field& v) {
    double acc = 0.0;
    for (int j1 = 0; j1 < g.n; ++j1) {
      int rows = g.dim == 1 ? 1 : g.n;
      for (int j2 = 0; j2 < rows; ++j2)
        acc += std::pow(fd_gradient_sq(v, g, j1, j2), problem.q / 2.0);
    }
    return acc * g.cell_volume();
  };
  double rect_sum = 0.0;
  double g0_integral = grad_q_integral(u);

  for (long m = 0; m < steps; ++m) {
    rect_sum += problem.dt * grad_q_integral(u);
    Field next(g);
    int rows = g.dim == 1 ? 1 : g.n;
    for (int j1 = 0; j1 < g.n; ++j1)
      for (int j2 = 0; j2 < rows; ++j2) {
        std::size_t idx = g.dim == 1 ? j1 : std::size_t(j1) * g.n + j2;
        double grad2 = fd_gradient_sq(u, g, j1, j2);
        next[idx] = u[idx] + problem.dt *
                                 (nu * fd_laplacian(u, g, j1, j2) +
                                  problem.lambda *
                                      std::pow(grad2, problem.q / 2.0));
      }
    u = next;
    double t = (m + 1) * problem.dt;
    if (!u.all_finite()) {
      traj.status = RunStatus::StepControlFailure;
      traj.failure_time = t;
      break;
    }
    if (next_sample < problem.sample_times.size() &&
        std::abs(problem.sample_times[next_sample] - t) < 0.5 * problem.dt) {
      DiagnosticsRecord rec;
      rec.t = t;
      rec.mass = mass(u);
      rec.l1 = lp_norm(u, 1.0);
      rec.l2 = lp_norm(u, 2.0);
      rec.linf = lp_norm(u, inf);
      double gq = grad_q_integral(u);
      rec.gq = std::pow(gq, 1.0 / problem.q);
      rec.q_cum = rect_sum + 0.5 * problem.dt * (gq - g0_integral);
      rec.tail_frac = box_tail_fraction(u);
      traj.records.push_back(rec);
      traj.times.push_back(t);
      traj.fields.push_back(u);
      ++next_sample;
    }
  }
  traj.m_inf_estimate =
      traj.records.empty() ? mass(problem.initial) : traj.records.back().mass;
  return traj;
}

}  // namespace lkpz
