#include "solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace lkpz {

namespace {

constexpr double kGuardSlack = 1e-9;
constexpr double kBlowUpFactor = 10.0;
constexpr double kTailRatio = 1e-8;

double phi1(double z) {
  if (std::abs(z) < 1e-4)
    return 1.0 + z / 2.0 + z * z / 6.0 + z * z * z / 24.0;
  return std::expm1(z) / z;
}

double phi2(double z) {
  if (std::abs(z) < 1e-4)
    return 0.5 + z / 6.0 + z * z / 24.0 + z * z * z / 120.0;
  return (std::expm1(z) - z) / (z * z);
}

std::vector<double> mode_symbol(const PeriodicGrid& g, const SymbolSpec& s) {
  std::vector<double> a(g.point_count());
  if (g.dim == 1) {
    for (int i = 0; i < g.n; ++i)
      a[i] = s.evaluate_radial(std::abs(g.wavenumber(g.signed_mode(i))));
  } else {
    std::size_t idx = 0;
    for (int i1 = 0; i1 < g.n; ++i1)
      for (int i2 = 0; i2 < g.n; ++i2, ++idx) {
        double k1 = g.wavenumber(g.signed_mode(i1));
        double k2 = g.wavenumber(g.signed_mode(i2));
        a[idx] = s.evaluate_radial(std::hypot(k1, k2));
      }
  }
  return a;
}

// max |coefficient| over the outer quarter of mode space vs. overall
double spectral_tail_ratio(const SpectralField& F) {
  const PeriodicGrid& g = F.grid();
  double cutoff = 0.75 * (g.n / 2);
  double peak = 0.0, tail = 0.0;
  if (g.dim == 1) {
    for (int i = 0; i < g.n; ++i) {
      double m = std::abs(F.data()[i]);
      peak = std::max(peak, m);
      if (std::abs(g.signed_mode(i)) >= cutoff) tail = std::max(tail, m);
    }
  } else {
    std::size_t idx = 0;
    for (int i1 = 0; i1 < g.n; ++i1)
      for (int i2 = 0; i2 < g.n; ++i2, ++idx) {
        double m = std::abs(F.data()[idx]);
        peak = std::max(peak, m);
        if (std::abs(g.signed_mode(i1)) >= cutoff ||
            std::abs(g.signed_mode(i2)) >= cutoff)
          tail = std::max(tail, m);
      }
  }
  return peak > 0.0 ? tail / peak : 0.0;
}

void validate_problem(const ProblemSpec& p) {
  if (!(p.q > 1.0))
    throw Error(ErrorCode::InvalidArgument, "nonlinearity exponent q must exceed 1");
  if (!(p.dt > 0.0) || !(p.horizon >= p.dt))
    throw Error(ErrorCode::InvalidArgument, "need 0 < dt <= horizon");
  double steps = p.horizon / p.dt;
  if (std::abs(steps - std::round(steps)) > 1e-6)
    throw Error(ErrorCode::InvalidArgument,
                "horizon must be an integer multiple of dt");
  if (!p.initial.all_finite())
    throw Error(ErrorCode::InvalidArgument, "initial data must be finite");
  double prev = 0.0;
  for (double t : p.sample_times) {
    if (!(t > prev) || t > p.horizon * (1.0 + 1e-12))
      throw Error(ErrorCode::InvalidArgument,
                  "sample times must increase within (0, horizon]");
    double m = t / p.dt;
    if (std::abs(m - std::round(m)) > 1e-6)
      throw Error(ErrorCode::InvalidArgument,
                  "sample times must be multiples of dt");
    prev = t;
  }
}

struct ModeCoefficients {
  std::vector<double> decay;  // exp(-dt a)
  std::vector<double> w1;     // dt * phi1(-dt a)
  std::vector<double> w2;     // dt * phi2(-dt a)
};

ModeCoefficients make_coefficients(const std::vector<double>& a, double dt) {
  ModeCoefficients c;
  c.decay.resize(a.size());
  c.w1.resize(a.size());
  c.w2.resize(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    double z = -dt * a[i];
    c.decay[i] = std::exp(z);
    c.w1[i] = dt * phi1(z);
    c.w2[i] = dt * phi2(z);
  }
  return c;
}

struct GradientInfo {
  std::vector<Field> comps;
  double sup = 0.0;        // sup |grad u|
  double q_integral = 0.0; // int |grad u|^q dx
};

GradientInfo gradient_info(const SpectralField& U, double q) {
  GradientInfo info;
  info.comps = gradient(U);
  const Field& first = info.comps[0];
  double cell = first.grid().cell_volume();
  double acc = 0.0;
  for (std::size_t i = 0; i < first.size(); ++i) {
    double s = 0.0;
    for (const Field& c : info.comps) s += c[i] * c[i];
    double m = std::sqrt(s);
    info.sup = std::max(info.sup, m);
    acc += std::pow(m, q);
  }
  info.q_integral = acc * cell;
  return info;
}

// lambda |grad|^q from precomputed gradient components
Field power_field(const std::vector<Field>& comps, double lambda, double q) {
  Field out(comps[0].grid());
  for (std::size_t i = 0; i < out.size(); ++i) {
    double s = 0.0;
    for (const Field& c : comps) s += c[i] * c[i];
    out[i] = lambda * std::pow(s, q / 2.0);
  }
  return out;
}

SpectralField etd2_advance(const SpectralField& U, const ModeCoefficients& c,
                           const ProblemSpec& p,
                           const std::vector<Field>& grads) {
  const PeriodicGrid& g = U.grid();
  std::size_t count = g.point_count();
  if (p.lambda == 0.0) {
    SpectralField out(g);
    for (std::size_t i = 0; i < count; ++i)
      out.data()[i] = c.decay[i] * U.data()[i];
    return out;
  }
  SpectralField NL = dealias(forward(power_field(grads, p.lambda, p.q)), p.q);
  SpectralField pred(g);
  for (std::size_t i = 0; i < count; ++i)
    pred.data()[i] = c.decay[i] * U.data()[i] + c.w1[i] * NL.data()[i];
  SpectralField NLp =
      dealias(forward(power_field(gradient(pred), p.lambda, p.q)), p.q);
  for (std::size_t i = 0; i < count; ++i)
    pred.data()[i] += c.w2[i] * (NLp.data()[i] - NL.data()[i]);
  return pred;
}

}  // namespace

Field nonlinearity(const Field& f, double lambda, double q) {
  if (!(q > 1.0))
    throw Error(ErrorCode::InvalidArgument, "nonlinearity requires q > 1");
  Field raw = power_field(gradient(f), lambda, q);
  return inverse(dealias(forward(raw), q));
}

Field step(const Field& f, double dt, const ProblemSpec& problem) {
  if (!(dt > 0.0))
    throw Error(ErrorCode::InvalidArgument, "dt must be positive");
  if (!(problem.q > 1.0))
    throw Error(ErrorCode::InvalidArgument, "q must exceed 1");
  std::vector<double> a = mode_symbol(f.grid(), problem.symbol);
  ModeCoefficients c = make_coefficients(a, dt);
  SpectralField U = forward(f);
  Field out = inverse(etd2_advance(U, c, problem, gradient(U)));
  double sup0 = lp_norm(problem.initial, std::numeric_limits<double>::infinity());
  double sup = lp_norm(out, std::numeric_limits<double>::infinity());
  if (!out.all_finite() || sup > kBlowUpFactor * sup0)
    throw Error(ErrorCode::BlowUp, "step exceeded the blow-up threshold");
  return out;
}

Trajectory run(const ProblemSpec& problem) {
  validate_problem(problem);
  const PeriodicGrid& g = problem.initial.grid();
  const double inf = std::numeric_limits<double>::infinity();

  Trajectory traj;
  traj.problem = problem;
  traj.p0 = p0_midpoint(g.dim, problem.symbol.dominant_alpha(), problem.q);

  SpectralField U = forward(problem.initial);
  if (spectral_tail_ratio(U) > kTailRatio)
    throw Error(ErrorCode::Resolution,
                "initial data is under-resolved (spectral tail above 1e-8)");

  std::vector<double> a = mode_symbol(g, problem.symbol);
  ModeCoefficients coeff = make_coefficients(a, problem.dt);

  Field u = problem.initial;
  double sup0 = lp_norm(u, inf);
  GradientInfo ginfo = gradient_info(U, problem.q);
  double gsup0 = ginfo.sup;
  double g0_integral = ginfo.q_integral;
  double sup_bound = sup0 * (1.0 + kGuardSlack);
  double gsup_bound = gsup0 * (1.0 + kGuardSlack);

  long steps = std::lround(problem.horizon / problem.dt);
  double rect_sum = 0.0;  // sum dt * G_m over completed steps
  std::size_t next_sample = 0;

  for (long m = 0; m < steps; ++m) {
    if (m > 0) {
      ginfo = gradient_info(U, problem.q);
      if (ginfo.sup > gsup_bound) {
        traj.status = RunStatus::StepControlFailure;
        traj.failure_time = m * problem.dt;
        break;
      }
    }
    SpectralField Unew = etd2_advance(U, coeff, problem, ginfo.comps);
    Field unew = inverse(Unew);
    double t = (m + 1) * problem.dt;
    rect_sum += problem.dt * ginfo.q_integral;

    if (!unew.all_finite()) {
      traj.status = RunStatus::StepControlFailure;
      traj.failure_time = t;
      break;
    }
    double sup = lp_norm(unew, inf);
    if (sup > kBlowUpFactor * sup0) {
      traj.status = RunStatus::BlowUp;
      traj.failure_time = t;
      break;
    }
    if (sup > sup_bound) {
      traj.status = RunStatus::StepControlFailure;
      traj.failure_time = t;
      break;
    }
    u = unew;
    U = Unew;

    if (next_sample < problem.sample_times.size() &&
        std::abs(problem.sample_times[next_sample] - t) <
            0.5 * problem.dt) {
      GradientInfo gs = gradient_info(U, problem.q);
      if (gs.sup > gsup_bound) {
        traj.status = RunStatus::StepControlFailure;
        traj.failure_time = t;
        break;
      }
      DiagnosticsRecord rec;
      rec.t = t;
      rec.mass = mass(u);
      rec.l1 = lp_norm(u, 1.0);
      rec.l2 = lp_norm(u, 2.0);
      rec.linf = lp_norm(u, inf);
      Field gm = magnitude(gs.comps);
      rec.g1 = lp_norm(gm, 1.0);
      rec.gp0 = lp_norm(gm, traj.p0);
      rec.g2 = lp_norm(gm, 2.0);
      rec.gq = lp_norm(gm, problem.q);
      rec.ginf = gs.sup;
      rec.q_cum = rect_sum + 0.5 * problem.dt * (gs.q_integral - g0_integral);
      rec.tail_frac = box_tail_fraction(u);
      traj.records.push_back(rec);
      traj.times.push_back(t);
      traj.fields.push_back(u);
      ++next_sample;
    }
  }

  traj.m_inf_estimate =
      traj.records.empty() ? mass(problem.initial) : traj.records.back().mass;
  double alpha = problem.symbol.dominant_alpha();
  for (std::size_t i = 0; i < traj.records.size(); ++i) {
    DiagnosticsRecord& rec = traj.records[i];
    try {
      rec.sse_r1 = self_similar_error(traj.fields[i], traj.m_inf_estimate,
                                      rec.t, 1.0, alpha);
      rec.sse_r2 = self_similar_error(traj.fields[i], traj.m_inf_estimate,
                                      rec.t, 2.0, alpha);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Resolution) throw;
      rec.sse_r1 = std::numeric_limits<double>::quiet_NaN();
      rec.sse_r2 = std::numeric_limits<double>::quiet_NaN();
    }
  }
  return traj;
}

PicardResult picard_solve(const ProblemSpec& problem, double horizon,
                          int max_iter, double tol, int nodes) {
  if (!(problem.q > 1.0))
    throw Error(ErrorCode::InvalidArgument, "q must exceed 1");
  if (!(horizon > 0.0))
    throw Error(ErrorCode::InvalidArgument, "horizon must be positive");
  if (nodes < 16)
    throw Error(ErrorCode::InvalidArgument, "need at least 16 quadrature nodes");
  if (max_iter < 1 || !(tol > 0.0))
    throw Error(ErrorCode::InvalidArgument, "bad iteration controls");
  if (!problem.initial.all_finite())
    throw Error(ErrorCode::InvalidArgument, "initial data must be finite");

  const PeriodicGrid& g = problem.initial.grid();
  const std::size_t count = g.point_count();
  const double inf = std::numeric_limits<double>::infinity();
  double delta = horizon / nodes;

  std::vector<double> a = mode_symbol(g, problem.symbol);
  // decay over m full subintervals and over (m + 1/2) subintervals
  std::vector<std::vector<double>> e_full(nodes), e_half(nodes);
  {
    std::vector<double> acc(count, 1.0), e1(count), eh(count);
    for (std::size_t i = 0; i < count; ++i) {
      e1[i] = std::exp(-delta * a[i]);
      eh[i] = std::exp(-0.5 * delta * a[i]);
    }
    for (int m = 0; m < nodes; ++m) {
      e_full[m] = acc;
      e_half[m].resize(count);
      for (std::size_t i = 0; i < count; ++i) {
        e_half[m][i] = acc[i] * eh[i];
        acc[i] *= e1[i];
      }
    }
  }

  SpectralField U0 = forward(problem.initial);
  // linear part at the nodes and at the horizon
  std::vector<SpectralField> lin(nodes, SpectralField(g));
  for (int j = 0; j < nodes; ++j)
    for (std::size_t i = 0; i < count; ++i)
      lin[j].data()[i] = e_half[j][i] * U0.data()[i];
  SpectralField lin_end(g);
  for (std::size_t i = 0; i < count; ++i)
    lin_end.data()[i] = e_full[nodes - 1][i] *
                        std::exp(-delta * a[i]) * U0.data()[i];

  std::vector<Field> iterate(nodes);
  for (int j = 0; j < nodes; ++j) iterate[j] = inverse(lin[j]);
  Field end_value = inverse(lin_end);

  PicardResult result;
  int stall = 0;
  for (int it = 1; it <= max_iter; ++it) {
    std::vector<SpectralField> nl(nodes);
    for (int j = 0; j < nodes; ++j)
      nl[j] = dealias(
          forward(power_field(gradient(iterate[j]), problem.lambda, problem.q)),
          problem.q);

    double dist = 0.0;
    std::vector<Field> next(nodes);
    for (int j = 0; j < nodes; ++j) {
      SpectralField acc = lin[j];
      // full subintervals [0, j*delta] by composite midpoint (node-to-node
      // decay spans whole subintervals), plus the trailing half
      // subinterval ending at the node itself
      for (int i = 0; i < j; ++i) {
        const std::vector<double>& e = e_full[j - i];
        for (std::size_t m = 0; m < count; ++m)
          acc.data()[m] += delta * e[m] * nl[i].data()[m];
      }
      for (std::size_t m = 0; m < count; ++m)
        acc.data()[m] += 0.5 * delta * nl[j].data()[m];
      next[j] = inverse(acc);
      dist = std::max(dist,
                      lp_norm(add_scaled(next[j], 1.0, iterate[j], -1.0), inf));
    }
    SpectralField acc_end = lin_end;
    for (int i = 0; i < nodes; ++i) {
      const std::vector<double>& e = e_half[nodes - 1 - i];
      for (std::size_t m = 0; m < count; ++m)
        acc_end.data()[m] += delta * e[m] * nl[i].data()[m];
    }
    Field next_end = inverse(acc_end);
    dist = std::max(dist,
                    lp_norm(add_scaled(next_end, 1.0, end_value, -1.0), inf));

    result.iterations = it;
    if (!result.distances.empty() && result.distances.back() > 0.0)
      result.ratios.push_back(dist / result.distances.back());
    result.distances.push_back(dist);
    iterate = std::move(next);
    end_value = std::move(next_end);

    if (dist < tol) {
      result.fixed_point = end_value;
      return result;
    }
    if (!result.ratios.empty() && result.ratios.back() >= 1.0) {
      if (++stall >= 3)
        throw Error(ErrorCode::HorizonTooLarge,
                    "fixed-point map is not contracting on this horizon");
    } else {
      stall = 0;
    }
  }
  throw Error(ErrorCode::NoConvergence,
              "fixed-point iteration did not reach tolerance");
}

double mass_identity_residual(const Trajectory& traj) {
  double m0 = mass(traj.problem.initial);
  if (m0 == 0.0)
    throw Error(ErrorCode::InvalidArgument,
                "mass identity requires nonzero initial mass");
  double worst = 0.0;
  for (const DiagnosticsRecord& rec : traj.records)
    worst = std::max(worst, std::abs(rec.mass - m0 -
                                     traj.problem.lambda * rec.q_cum) /
                                std::abs(m0));
  return worst;
}

}  // namespace lkpz
