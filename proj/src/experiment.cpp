#include "experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "diagnostics.hpp"
#include "field_io.hpp"
#include "semigroup.hpp"

namespace fs = std::filesystem;

namespace lkpz {
namespace {

constexpr double kGateBound = 0.1;
constexpr double kPlateauTol = 0.01;
constexpr double kSlopeTol = 0.05;

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

/** A handful of sup-normalized low modes; keeps perturbed data resolved. */
Field perturbation_profile(const PeriodicGrid& grid, unsigned long seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const int modes = 6;
  std::vector<double> a(modes * grid.dim), b(modes * grid.dim);
  for (double& c : a) c = unit(rng);
  for (double& c : b) c = unit(rng);
  Field eta = Field::sample(grid, [&](const double* x) {
    double v = 0.0;
    for (int d = 0; d < grid.dim; ++d)
      for (int k = 1; k <= modes; ++k) {
        double phase = M_PI * k * x[d] / grid.box;
        int i = d * modes + k - 1;
        v += (a[i] * std::cos(phase) + b[i] * std::sin(phase)) / k;
      }
    return v;
  });
  double sup = lp_norm(eta, std::numeric_limits<double>::infinity());
  return sup > 0.0 ? scaled(eta, 1.0 / sup) : eta;
}

DiagnosticsRecord initial_record(const Field& u0, double p0, double q) {
  const double inf = std::numeric_limits<double>::infinity();
  DiagnosticsRecord rec;
  rec.t = 0.0;
  rec.mass = mass(u0);
  rec.l1 = lp_norm(u0, 1.0);
  rec.l2 = lp_norm(u0, 2.0);
  rec.linf = lp_norm(u0, inf);
  Field gm = magnitude(gradient(u0));
  rec.g1 = lp_norm(gm, 1.0);
  rec.gp0 = lp_norm(gm, p0);
  rec.g2 = lp_norm(gm, 2.0);
  rec.gq = lp_norm(gm, q);
  rec.ginf = lp_norm(gm, inf);
  rec.q_cum = 0.0;
  rec.sse_r1 = std::numeric_limits<double>::quiet_NaN();
  rec.sse_r2 = std::numeric_limits<double>::quiet_NaN();
  rec.tail_frac = box_tail_fraction(u0);
  return rec;
}

struct RunOutcome {
  PreparedRun pr;
  Trajectory traj;
  DiagnosticsRecord rec0;
  std::string error;  // nonempty when run() threw before finishing

  bool completed() const {
    return error.empty() && traj.status == RunStatus::Completed;
  }
  std::string status_line() const {
    if (!error.empty()) return "failed (" + error + ")";
    switch (traj.status) {
      case RunStatus::Completed:
        return "completed";
      case RunStatus::BlowUp:
        return fmt("blow-up at t = %g", traj.failure_time);
      default:
        return fmt("step-control failure at t = %g", traj.failure_time);
    }
  }
};

RunOutcome perform(const ExperimentConfig& cfg) {
  RunOutcome oc;
  oc.pr = prepare_run(cfg);
  oc.rec0 = initial_record(oc.pr.problem.initial, oc.pr.p0, oc.pr.problem.q);
  try {
    oc.traj = run(oc.pr.problem);
  } catch (const Error& e) {
    oc.error = e.what();
  }
  std::vector<DiagnosticsRecord> rows;
  rows.push_back(oc.rec0);
  rows.insert(rows.end(), oc.traj.records.begin(), oc.traj.records.end());
  write_diagnostics_csv(cfg.output_dir + "/diagnostics.csv", rows);
  return oc;
}

const DiagnosticsRecord* find_record(const std::vector<DiagnosticsRecord>& recs,
                                     double t) {
  for (const DiagnosticsRecord& r : recs)
    if (std::abs(r.t - t) <= 1e-9 * std::max(1.0, t)) return &r;
  return nullptr;
}

void add(ExperimentResult& res, const std::string& name, bool ok,
         const std::string& detail) {
  res.checks.push_back({name, ok ? "PASS" : "FAIL", detail});
}

void add_inconclusive(ExperimentResult& res, const std::string& name,
                      const std::string& detail) {
  res.checks.push_back({name, "INCONCLUSIVE", detail});
}

struct Column {
  const char* name;
  double DiagnosticsRecord::* field;
};

const Column kColumns[] = {
    {"M", &DiagnosticsRecord::mass},   {"L1", &DiagnosticsRecord::l1},
    {"L2", &DiagnosticsRecord::l2},    {"Linf", &DiagnosticsRecord::linf},
    {"G1", &DiagnosticsRecord::g1},    {"Gp0", &DiagnosticsRecord::gp0},
    {"G2", &DiagnosticsRecord::g2},    {"Gq", &DiagnosticsRecord::gq},
    {"Ginf", &DiagnosticsRecord::ginf}};

std::vector<double> column_values(const std::vector<DiagnosticsRecord>& recs,
                                  double DiagnosticsRecord::* field) {
  std::vector<double> v;
  v.reserve(recs.size());
  for (const DiagnosticsRecord& r : recs) v.push_back(r.*field);
  return v;
}

struct FitRow {
  std::string quantity;
  PowerLawFit fit;
};

void write_fits_csv(const std::string& path, const std::vector<FitRow>& rows) {
  std::ofstream out(path);
  out << "quantity,t_a,t_b,slope,rms\n";
  for (const FitRow& r : rows)
    out << r.quantity << ',' << csv_double(r.fit.t_lo) << ','
        << csv_double(r.fit.t_hi) << ',' << csv_double(r.fit.slope) << ','
        << csv_double(r.fit.rms) << '\n';
}

void write_report(const std::string& path, const ExperimentResult& res,
                  const std::vector<std::string>& warnings,
                  const std::string& status_line) {
  std::ofstream out(path);
  out << "preset = " << res.preset << "\n";
  out << "status = " << status_line << "\n";
  for (const std::string& w : warnings) out << "warning = " << w << "\n";
  for (const CheckLine& c : res.checks) {
    out << "CHECK " << c.name << ": " << c.status;
    if (!c.detail.empty()) out << " (" << c.detail << ")";
    out << "\n";
  }
  for (const auto& [key, value] : res.metrics)
    out << "METRIC " << key << " = " << csv_double(value) << "\n";
  out << "result = " << (res.exit_code == 0 ? "PASS" : "FAIL") << "\n";
}

void finalize_exit_code(ExperimentResult& res, bool solver_failed) {
  res.exit_code = 0;
  for (const CheckLine& c : res.checks)
    if (c.status == "FAIL") res.exit_code = 1;
  if (solver_failed) res.exit_code = 3;
}

/** Nonincreasing within a relative slack of 1e-12. */
bool nonincreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[i - 1] + 1e-12 * std::abs(v[i - 1])) return false;
  return true;
}

void check_mass_identity(ExperimentResult& res, const RunOutcome& oc) {
  double tol = oc.pr.problem.lambda == 0.0 ? 1e-12 : 1e-4;
  double residual = mass_identity_residual(oc.traj);
  res.metrics["mass_identity_residual"] = residual;
  add(res, "mass-identity", residual < tol,
      fmt("normalized residual %.3g, tolerance %.3g", residual, tol));
}

void check_max_principle(ExperimentResult& res, const RunOutcome& oc) {
  double sup0 = oc.rec0.linf, gsup0 = oc.rec0.ginf;
  double sup = 0.0, gsup = 0.0;
  for (const DiagnosticsRecord& r : oc.traj.records) {
    sup = std::max(sup, r.linf);
    gsup = std::max(gsup, r.ginf);
  }
  bool ok = sup <= sup0 * (1.0 + 1e-9) && gsup <= gsup0 * (1.0 + 1e-9);
  add(res, "max-principle", ok,
      fmt("sup ratio %.12g, gradient sup ratio %.12g", sup / sup0,
          gsup / gsup0));
}

void check_mass_monotone(ExperimentResult& res, const RunOutcome& oc) {
  double lam = oc.pr.problem.lambda;
  if (lam == 0.0) return;
  double slack = 1e-10 * oc.rec0.mass;
  double prev = oc.rec0.mass;
  bool ok = true;
  for (const DiagnosticsRecord& r : oc.traj.records) {
    if (lam > 0.0 ? r.mass < prev - slack : r.mass > prev + slack) ok = false;
    prev = r.mass;
  }
  add(res, "mass-monotone", ok,
      lam > 0.0 ? "nondecreasing within 1e-10 of M(0)"
                : "nonincreasing within 1e-10 of M(0)");
}

void check_q_monotone(ExperimentResult& res, const RunOutcome& oc) {
  bool ok = true;
  double prev = 0.0;
  for (const DiagnosticsRecord& r : oc.traj.records) {
    if (r.q_cum < prev - 1e-12 * (1.0 + std::abs(prev))) ok = false;
    prev = r.q_cum;
  }
  add(res, "q-integral-monotone", ok, "cumulative integral nondecreasing");
}

void check_plateau(ExperimentResult& res, const RunOutcome& oc) {
  double T = oc.pr.problem.horizon;
  const DiagnosticsRecord* full = find_record(oc.traj.records, T);
  const DiagnosticsRecord* half = find_record(oc.traj.records, T / 2);
  if (!full || !half) {
    add_inconclusive(res, "mass-plateau", "needs samples at T/2 and T");
    return;
  }
  double plateau = std::abs(full->mass - half->mass) / std::abs(full->mass);
  res.metrics["mass_plateau"] = plateau;
  add(res, "mass-plateau", plateau < kPlateauTol,
      fmt("|M(T)-M(T/2)|/M(T) = %.3g, tolerance %.3g", plateau, kPlateauTol));
}

void check_gradient_bound(ExperimentResult& res, const RunOutcome& oc) {
  const PeriodicGrid& g = oc.pr.problem.initial.grid();
  double alpha = oc.pr.problem.symbol.dominant_alpha();
  double beta = decay_beta(g.dim, alpha, oc.pr.p0);
  double worst = 0.0;
  for (const DiagnosticsRecord& r : oc.traj.records) {
    double w = std::pow(r.t, 1.0 / alpha) * std::pow(1.0 + r.t, beta) * r.gp0;
    worst = std::max(worst, w);
  }
  double bound = 3.0 * oc.pr.d0;
  res.metrics["gradient_weighted_max"] = worst;
  res.metrics["gradient_bound"] = bound;
  add(res, "gradient-decay-bound", worst <= bound,
      fmt("max weighted gradient norm %.3g, bound 3 D(u0,p0) = %.3g", worst,
          bound));
}

void check_gate(ExperimentResult& res, const RunOutcome& oc) {
  add(res, "smallness-gate", oc.pr.gate_combination < kGateBound,
      fmt("combination %.3g, bound %.3g (amplitude scale %.3g)",
          oc.pr.gate_combination, kGateBound, oc.pr.amplitude_scale));
}

void check_selfsim_halving(ExperimentResult& res, const RunOutcome& oc,
                           double t_lo, double t_hi) {
  const DiagnosticsRecord* lo = find_record(oc.traj.records, t_lo);
  const DiagnosticsRecord* hi = find_record(oc.traj.records, t_hi);
  if (!lo || !hi || !std::isfinite(lo->sse_r1) || !std::isfinite(hi->sse_r1)) {
    add_inconclusive(res, "selfsim-error-halving",
                     fmt("needs resolved errors at t = %g and t = %g", t_lo,
                         t_hi));
    return;
  }
  res.metrics["sse_r1_early"] = lo->sse_r1;
  res.metrics["sse_r1_late"] = hi->sse_r1;
  add(res, "selfsim-error-halving", hi->sse_r1 < 0.5 * lo->sse_r1,
      fmt("|u-M p|_1: %.3g at t=%g vs %.3g at t=%g", hi->sse_r1, t_hi,
          lo->sse_r1, t_lo));
  if (std::isfinite(lo->sse_r2) && std::isfinite(hi->sse_r2)) {
    res.metrics["sse_r2_early"] = lo->sse_r2;
    res.metrics["sse_r2_late"] = hi->sse_r2;
    add(res, "selfsim-error-r2-decreasing", hi->sse_r2 < lo->sse_r2,
        fmt("weighted r=2 error %.3g at t=%g vs %.3g at t=%g", hi->sse_r2,
            t_hi, lo->sse_r2, t_lo));
  } else {
    add_inconclusive(res, "selfsim-error-r2-decreasing",
                     "weighted r=2 errors unresolved");
  }
}

PowerLawFit try_fit(const std::vector<DiagnosticsRecord>& recs,
                    double DiagnosticsRecord::* field, double t_lo,
                    double t_hi, bool* ok) {
  *ok = false;
  try {
    PowerLawFit fit = fit_power_law(column_values(recs, &DiagnosticsRecord::t),
                                    column_values(recs, field), t_lo, t_hi);
    *ok = true;
    return fit;
  } catch (const Error&) {
    return PowerLawFit{};
  }
}

void check_decay_slope(ExperimentResult& res, const RunOutcome& oc,
                       const std::string& name,
                       double DiagnosticsRecord::* field, double target) {
  double T = oc.pr.problem.horizon;
  bool ok = false;
  PowerLawFit fit = try_fit(oc.traj.records, field, T / 16.0, T, &ok);
  if (!ok) {
    add_inconclusive(res, name, "fit window lacks usable samples");
    return;
  }
  res.metrics[name + "_slope"] = fit.slope;
  bool pass = std::abs(fit.slope - target) <= kSlopeTol * std::abs(target);
  add(res, name, pass,
      fmt("fitted slope %.4g, expected %.4g within 5%%", fit.slope, target));
}

void linear_checks(ExperimentResult& res, const RunOutcome& oc) {
  const PeriodicGrid& g = oc.pr.problem.initial.grid();
  double alpha = oc.pr.problem.symbol.dominant_alpha();
  check_decay_slope(res, oc, "sup-decay-slope", &DiagnosticsRecord::linf,
                    -double(g.dim) / alpha);
  check_decay_slope(res, oc, "gradient-sup-decay-slope",
                    &DiagnosticsRecord::ginf, -(g.dim + 1.0) / alpha);

  double T = oc.pr.problem.horizon;
  std::vector<double> errs;
  for (const DiagnosticsRecord& r : oc.traj.records)
    if (r.t >= T / 16.0 - 1e-9 && std::isfinite(r.sse_r1))
      errs.push_back(r.sse_r1);
  if (errs.size() < 3) {
    add_inconclusive(res, "selfsim-error-monotone",
                     "needs resolved errors over [T/16, T]");
  } else {
    add(res, "selfsim-error-monotone", nonincreasing(errs),
        fmt("%zu samples from %.3g down to %.3g", errs.size(), errs.front(),
            errs.back()));
    add(res, "selfsim-error-halving", errs.back() < 0.5 * errs.front(),
        fmt("final %.3g vs 0.5 * initial %.3g", errs.back(),
            0.5 * errs.front()));
  }
}

void single_checks(ExperimentResult& res, const RunOutcome& oc,
                   const ExperimentConfig& cfg) {
  const std::vector<DiagnosticsRecord>& recs = oc.traj.records;
  double T = oc.pr.problem.horizon;
  double m0 = oc.rec0.mass;
  double mT = recs.empty() ? m0 : recs.back().mass;
  double alpha = oc.pr.problem.symbol.dominant_alpha();
  double q = oc.pr.problem.q;

  check_mass_identity(res, oc);
  check_max_principle(res, oc);
  check_mass_monotone(res, oc);
  check_q_monotone(res, oc);

  if (cfg.preset == "linear-selfsim") {
    linear_checks(res, oc);
  } else if (cfg.preset == "deposition-subcritical") {
    add(res, "mass-growth", mT / m0 > 2.0,
        fmt("M(T)/M(0) = %.4g, needs > 2", mT / m0));
    bool ok = false;
    PowerLawFit fit =
        try_fit(recs, &DiagnosticsRecord::mass, T / 16.0, T, &ok);
    double floor = (1.0 + alpha - 2.0 * q) / (2.0 * q) - 0.05;
    if (ok) {
      res.metrics["mass_slope"] = fit.slope;
      add(res, "mass-growth-slope", fit.slope >= floor,
          fmt("fitted slope %.4g, lower bound %.4g", fit.slope, floor));
    } else {
      add_inconclusive(res, "mass-growth-slope", "mass fit unavailable");
    }
  } else if (cfg.preset == "deposition-supercritical") {
    check_gate(res, oc);
    check_plateau(res, oc);
    check_gradient_bound(res, oc);
  } else if (cfg.preset == "deposition-brownian-q2") {
    check_plateau(res, oc);
    const DiagnosticsRecord* full = find_record(recs, T);
    const DiagnosticsRecord* half = find_record(recs, T / 2);
    if (full && half && full->q_cum > 0.0 && std::isfinite(full->q_cum)) {
      double cauchy = (full->q_cum - half->q_cum) / full->q_cum;
      res.metrics["q_integral_cauchy"] = cauchy;
      add(res, "q-integral-cauchy", cauchy < kPlateauTol,
          fmt("last dyadic increment %.3g of total, tolerance %.3g", cauchy,
              kPlateauTol));
    } else {
      add_inconclusive(res, "q-integral-cauchy",
                       "needs finite Q at T/2 and T");
    }
  } else if (cfg.preset == "evaporation-subcritical") {
    add(res, "mass-decay", mT / m0 < 0.2,
        fmt("M(T)/M(0) = %.4g, needs < 0.2", mT / m0));
    bool ok = false;
    PowerLawFit fit =
        try_fit(recs, &DiagnosticsRecord::mass, T / 16.0, T, &ok);
    if (ok) {
      res.metrics["mass_slope"] = fit.slope;
      add(res, "mass-slope-negative", fit.slope < 0.0,
          fmt("fitted slope %.4g", fit.slope));
    } else {
      add_inconclusive(res, "mass-slope-negative", "mass fit unavailable");
    }
    const PeriodicGrid& g = oc.pr.problem.initial.grid();
    for (double r : {1.0, 2.0}) {
      double w = double(g.dim) * (1.0 - 1.0 / r) / alpha;
      std::vector<double> seq;
      for (const DiagnosticsRecord& rec : recs)
        if (rec.t >= T / 16.0 - 1e-9)
          seq.push_back(std::pow(rec.t, w) * (r == 1.0 ? rec.l1 : rec.l2));
      std::string name = fmt("weighted-l%g-decreasing", r);
      if (seq.size() < 3)
        add_inconclusive(res, name, "needs samples over [T/16, T]");
      else
        add(res, name, nonincreasing(seq),
            fmt("t^%.3g |u|_%g from %.3g down to %.3g", w, r, seq.front(),
                seq.back()));
    }
  } else if (cfg.preset == "evaporation-supercritical") {
    check_gate(res, oc);
    check_plateau(res, oc);
    double m_inf = extrapolate_mass_limit(recs);
    res.metrics["m_inf_aitken"] = m_inf;
    add(res, "mass-limit-positive", m_inf > 0.5 * m0,
        fmt("extrapolated limit %.4g, needs > 0.5 M(0) = %.4g", m_inf,
            0.5 * m0));
    check_selfsim_halving(res, oc, T / 16.0, T / 2.0);
    check_gradient_bound(res, oc);
  }
}

ExperimentResult run_single(const ExperimentConfig& cfg) {
  auto t_begin = std::chrono::steady_clock::now();
  ExperimentResult res;
  res.preset = cfg.preset;
  fs::create_directories(cfg.output_dir);

  RunOutcome oc = perform(cfg);
  const std::vector<DiagnosticsRecord>& recs = oc.traj.records;
  double T = oc.pr.problem.horizon;

  res.metrics["m0"] = oc.rec0.mass;
  res.metrics["m_final"] = recs.empty() ? oc.rec0.mass : recs.back().mass;
  res.metrics["mass_ratio"] = res.metrics["m_final"] / oc.rec0.mass;
  res.metrics["p0"] = oc.pr.p0;
  res.metrics["d0"] = oc.pr.d0;
  res.metrics["grad0_sup"] = oc.pr.grad0_sup;
  res.metrics["gate_combination"] = oc.pr.gate_combination;
  res.metrics["amplitude_scale"] = oc.pr.amplitude_scale;
  res.metrics["q_c"] =
      (oc.pr.problem.initial.grid().dim +
       oc.pr.problem.symbol.dominant_alpha()) /
      (oc.pr.problem.initial.grid().dim + 1.0);

  if (oc.completed()) {
    single_checks(res, oc, cfg);
    std::vector<FitRow> fits;
    for (const Column& col : kColumns) {
      bool ok = false;
      PowerLawFit fit = try_fit(recs, col.field, T / 16.0, T, &ok);
      if (ok) fits.push_back({col.name, fit});
    }
    write_fits_csv(cfg.output_dir + "/fits.csv", fits);
  } else {
    add(res, "solver-completed", false, oc.status_line());
  }

  if (cfg.snapshots) {
    write_snapshot(oc.pr.problem.initial, cfg.output_dir + "/initial.lkpz");
    if (!oc.traj.fields.empty())
      write_snapshot(oc.traj.fields.back(), cfg.output_dir + "/final.lkpz");
  }

  res.metrics["runtime_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_begin)
          .count();
  finalize_exit_code(res, !oc.completed());
  write_report(cfg.output_dir + "/report.txt", res, cfg.warnings,
               oc.status_line());
  return res;
}

struct SweepRow {
  double q = 0.0;
  double mass_ratio = 0.0;
  double slope = 0.0;
  double plateau = 0.0;
  std::string regime;
};

void check_dichotomy(ExperimentResult& res, const std::vector<SweepRow>& rows,
                     double q_c, double lambda) {
  if (lambda == 0.0) {
    bool ok = true;
    for (const SweepRow& r : rows)
      if (r.regime != "plateau" || std::abs(r.slope) > 1e-6) ok = false;
    add(res, "zero-lambda-rows", ok,
        "every row plateau with slope within 1e-6 of zero");
    return;
  }
  double step = 0.0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    double d = rows[i].q - rows[i - 1].q;
    if (step == 0.0 || (d > 0.0 && d < step)) step = d;
  }
  if (step == 0.0) {
    add_inconclusive(res, "critical-dichotomy", "needs at least two q values");
    return;
  }
  res.metrics["q_step"] = step;
  const std::string low = lambda < 0.0 ? "decaying-to-zero" : "growing";
  bool ok = true;
  std::string why = fmt("flip consistent with q_c = %.4g within %.3g", q_c,
                        step);
  int last_low = -1, first_plateau = -1;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].regime == low) last_low = int(i);
    if (rows[i].regime == "plateau" && first_plateau < 0)
      first_plateau = int(i);
    if (rows[i].q <= q_c - step + 1e-9 && rows[i].regime != low) {
      ok = false;
      why = fmt("q = %.4g at or below q_c - step classified %s", rows[i].q,
                rows[i].regime.c_str());
    }
    if (rows[i].q >= q_c + step - 1e-9 && rows[i].regime != "plateau") {
      ok = false;
      why = fmt("q = %.4g at or above q_c + step classified %s", rows[i].q,
                rows[i].regime.c_str());
    }
  }
  if (last_low >= 0 && first_plateau >= 0 && first_plateau < last_low) {
    ok = false;
    why = "regimes interleave across the sweep";
  }
  add(res, "critical-dichotomy", ok, why);
}

ExperimentResult run_sweep(const ExperimentConfig& cfg) {
  ExperimentResult res;
  res.preset = cfg.preset;
  fs::create_directories(cfg.output_dir);

  std::vector<double> qs = cfg.q_values;
  std::sort(qs.begin(), qs.end());

  std::vector<SweepRow> rows;
  bool any_failure = false;
  double q_c = 0.0;
  for (double q : qs) {
    ExperimentConfig sub = cfg;
    sub.q = q;
    sub.output_dir = cfg.output_dir + "/" + fmt("q_%g", q);
    RunOutcome oc = perform(sub);
    q_c = (oc.pr.problem.initial.grid().dim +
           oc.pr.problem.symbol.dominant_alpha()) /
          (oc.pr.problem.initial.grid().dim + 1.0);

    SweepRow row;
    row.q = q;
    const std::vector<DiagnosticsRecord>& recs = oc.traj.records;
    if (!oc.completed() || recs.empty()) {
      row.mass_ratio = row.slope = row.plateau =
          std::numeric_limits<double>::quiet_NaN();
      row.regime = "failed";
      any_failure = true;
    } else {
      double T = oc.pr.problem.horizon;
      row.mass_ratio = recs.back().mass / oc.rec0.mass;
      bool ok = false;
      PowerLawFit fit =
          try_fit(recs, &DiagnosticsRecord::mass, T / 16.0, T, &ok);
      row.slope = ok ? fit.slope : std::numeric_limits<double>::quiet_NaN();
      const DiagnosticsRecord* full = find_record(recs, T);
      const DiagnosticsRecord* half = find_record(recs, T / 2);
      row.plateau = full && half
                        ? std::abs(full->mass - half->mass) /
                              std::abs(full->mass)
                        : std::numeric_limits<double>::quiet_NaN();
      row.regime = classify_regime(row.mass_ratio, row.slope, row.plateau);
    }
    rows.push_back(row);
  }

  std::ofstream out(cfg.output_dir + "/sweep.csv");
  out << "q,mass_ratio,slope,plateau,regime\n";
  for (const SweepRow& r : rows)
    out << csv_double(r.q) << ',' << csv_double(r.mass_ratio) << ','
        << csv_double(r.slope) << ',' << csv_double(r.plateau) << ','
        << r.regime << '\n';
  out.close();

  res.metrics["q_c"] = q_c;
  check_dichotomy(res, rows, q_c, cfg.lambda.value_or(0.0));
  finalize_exit_code(res, any_failure);
  write_report(cfg.output_dir + "/report.txt", res, cfg.warnings,
               any_failure ? "one or more sweep runs failed" : "completed");
  return res;
}

double heat_kernel(double x, double t) {
  return std::exp(-x * x / (4.0 * t)) / std::sqrt(4.0 * M_PI * t);
}

double cauchy_kernel(double x, double t) {
  return t / (M_PI * (x * x + t * t));
}

ExperimentResult run_kernel_table(const ExperimentConfig& cfg) {
  ExperimentResult res;
  res.preset = cfg.preset;
  fs::create_directories(cfg.output_dir);

  PeriodicGrid grid = PeriodicGrid::make(*cfg.dim, *cfg.n, *cfg.box);
  double t = *cfg.kernel_t;
  double ratio = *cfg.kernel_ratio;

  std::ofstream out(cfg.output_dir + "/kernel.csv");
  out << "alpha,x,p\n";
  for (double alpha : cfg.kernel_alphas) {
    try {
      Field k = stable_kernel({alpha, t, grid});
      for (int j = 0; j < grid.n; ++j)
        out << csv_double(alpha) << ',' << csv_double(grid.coord(j)) << ','
            << csv_double(k[j]) << '\n';
    } catch (const Error& e) {
      add_inconclusive(res, fmt("tabulation-alpha-%g", alpha), e.what());
    }
  }
  out.close();

  for (double alpha : cfg.kernel_alphas) {
    KernelCheck kc = check_kernel(alpha, t, ratio);
    std::string suffix = fmt("alpha-%g", alpha);
    if (!kc.feasible) {
      add_inconclusive(res, "kernel-selfsim-" + suffix,
                       "no desk-scale verification grid resolves this kernel");
      continue;
    }
    res.metrics[fmt("selfsim_dev_%g", alpha)] = kc.selfsim_dev;
    add(res, "kernel-mass-" + suffix, kc.mass_error <= 1e-12,
        fmt("|mass - 1| = %.3g", kc.mass_error));
    add(res, "kernel-selfsim-" + suffix, kc.selfsim_dev < 1e-6,
        fmt("deviation %.3g at t-ratio %g on n = %d, box = %g",
            kc.selfsim_dev, ratio, kc.grid.n, kc.grid.box));
    if (std::isfinite(kc.closed_form_dev)) {
      res.metrics[fmt("closed_form_dev_%g", alpha)] = kc.closed_form_dev;
      add(res, "kernel-closed-form-" + suffix, kc.closed_form_dev < 1e-6,
          fmt("sup deviation %.3g on the inner half", kc.closed_form_dev));
    }
  }

  finalize_exit_code(res, false);
  write_report(cfg.output_dir + "/report.txt", res, cfg.warnings, "completed");
  return res;
}

}  // namespace

std::string csv_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Field build_initial(const ExperimentConfig& cfg, const PeriodicGrid& grid) {
  Field u;
  if (cfg.initial_type == "file") {
    u = read_snapshot(cfg.initial_path);
    if (!(u.grid() == grid))
      throw Error(ErrorCode::BadConfig,
                  "initial snapshot grid does not match the configured grid");
  } else {
    double a = cfg.amplitude.value_or(1.0);
    double w = cfg.width.value_or(1.0);
    std::vector<double> c = cfg.center;
    c.resize(grid.dim, 0.0);
    bool bump = cfg.initial_type == "bump";
    u = Field::sample(grid, [&](const double* x) {
      double r2 = 0.0;
      for (int d = 0; d < grid.dim; ++d) {
        double dx = x[d] - c[d];
        r2 += dx * dx;
      }
      double s = r2 / (w * w);
      if (bump) return s < 1.0 ? a * std::exp(1.0 - 1.0 / (1.0 - s)) : 0.0;
      return a * std::exp(-0.5 * s);
    });
  }
  if (cfg.perturb > 0.0) {
    Field eta = perturbation_profile(grid, cfg.seed);
    for (std::size_t i = 0; i < u.size(); ++i)
      u[i] *= 1.0 + cfg.perturb * eta[i];
  }
  return u;
}

std::vector<double> dyadic_schedule(double horizon, int count) {
  std::vector<double> t(count);
  for (int i = 0; i < count; ++i)
    t[i] = std::ldexp(horizon, -(count - 1 - i));
  return t;
}

double smallness_combination(double lambda, double q, double p0,
                             double grad_sup, double d_value) {
  return std::abs(lambda) * std::pow(grad_sup, q - p0) *
         std::pow(d_value, p0 - 1.0);
}

double extrapolate_mass_limit(const std::vector<DiagnosticsRecord>& records) {
  std::size_t k = records.size();
  if (k == 0) return 0.0;
  if (k < 3) return records.back().mass;
  double m1 = records[k - 3].mass;
  double m2 = records[k - 2].mass;
  double m3 = records[k - 1].mass;
  double denom = m3 - 2.0 * m2 + m1;
  double scale = std::max({std::abs(m1), std::abs(m2), std::abs(m3), 1e-300});
  if (std::abs(denom) < 1e-13 * scale) return m3;
  double est = m3 - (m3 - m2) * (m3 - m2) / denom;
  return std::isfinite(est) ? est : m3;
}

PreparedRun prepare_run(const ExperimentConfig& cfg) {
  PeriodicGrid grid = PeriodicGrid::make(*cfg.dim, *cfg.n, *cfg.box);
  SymbolSpec symbol = symbol_from_config(cfg);
  Field u0 = build_initial(cfg, grid);

  PreparedRun pr;
  double alpha = symbol.dominant_alpha();
  pr.p0 = p0_midpoint(grid.dim, alpha, *cfg.q);
  std::vector<double> ladder = default_time_ladder();
  auto measure = [&](const Field& v) {
    pr.grad0_sup =
        lp_norm(magnitude(gradient(v)), std::numeric_limits<double>::infinity());
    pr.d0 = d_quantity(v, pr.p0, symbol, ladder).value;
    pr.gate_combination = smallness_combination(*cfg.lambda, *cfg.q, pr.p0,
                                                pr.grad0_sup, pr.d0);
  };
  measure(u0);

  bool gated = cfg.gate == "auto" &&
               (cfg.preset == "deposition-supercritical" ||
                cfg.preset == "evaporation-supercritical");
  if (gated && pr.gate_combination >= kGateBound) {
    pr.amplitude_scale =
        0.999 * std::pow(kGateBound / pr.gate_combination,
                         1.0 / (*cfg.q - 1.0));
    u0 = scaled(u0, pr.amplitude_scale);
    measure(u0);
  }

  pr.problem.symbol = symbol;
  pr.problem.lambda = *cfg.lambda;
  pr.problem.q = *cfg.q;
  pr.problem.initial = std::move(u0);
  pr.problem.horizon = *cfg.horizon;
  pr.problem.dt = *cfg.dt;
  pr.problem.sample_times =
      cfg.schedule == "list"
          ? cfg.sample_list
          : dyadic_schedule(*cfg.horizon, cfg.sample_count.value_or(8));
  return pr;
}

PeriodicGrid kernel_check_grid(double alpha, double t_lo, double t_hi) {
  double w_lo = std::pow(t_lo, 1.0 / alpha);
  // coefficient tail exp(-t_lo (pi/h)^alpha) <= 1e-8
  double h_alias = M_PI * std::pow(t_lo / 18.42, 1.0 / alpha);
  double h = std::min(w_lo / 4.0, h_alias);

  double box;
  if (alpha >= 2.0 - 1e-12) {
    box = std::max(32.0, 12.0 * std::sqrt(t_hi));
  } else {
    // nearest-image density 2 C t (1.5 box)^-(1+alpha) <= 2.5e-7 * peak
    double c = std::tgamma(1.0 + alpha) * std::sin(0.5 * M_PI * alpha) / M_PI;
    double peak =
        std::tgamma(1.0 + 1.0 / alpha) / M_PI * std::pow(t_hi, -1.0 / alpha);
    double target = 2.0 * c * t_hi / (2.5e-7 * peak);
    box = std::pow(target, 1.0 / (1.0 + alpha)) / 1.5;
    box = std::max(box, 8.0 * std::pow(t_hi, 1.0 / alpha));
  }

  double points = 2.0 * box / h;
  int n = 8;
  while (n < points && n < (1 << 18)) n <<= 1;
  if (n < points) return PeriodicGrid{};
  return PeriodicGrid::make(1, n, box);
}

KernelCheck check_kernel(double alpha, double t, double ratio) {
  KernelCheck kc;
  kc.alpha = alpha;
  kc.closed_form_dev = std::numeric_limits<double>::quiet_NaN();
  kc.grid = kernel_check_grid(alpha, t, t * ratio);
  if (kc.grid.n == 0) return kc;
  kc.feasible = true;

  Field k = stable_kernel({alpha, t, kc.grid});
  kc.mass_error = std::abs(mass(k) - 1.0);
  kc.selfsim_dev = verify_self_similarity(alpha, t, t * ratio, kc.grid);

  bool is_heat = std::abs(alpha - 2.0) < 1e-12;
  bool is_cauchy = std::abs(alpha - 1.0) < 1e-12;
  if (is_heat || is_cauchy) {
    double dev = 0.0;
    for (int j = 0; j < kc.grid.n; ++j) {
      double x = kc.grid.coord(j);
      if (std::abs(x) > kc.grid.box / 2.0) continue;
      double exact = is_heat ? heat_kernel(x, t) : cauchy_kernel(x, t);
      dev = std::max(dev, std::abs(k[j] - exact));
    }
    kc.closed_form_dev = dev;
  }
  return kc;
}

std::string classify_regime(double mass_ratio, double slope, double plateau) {
  (void)plateau;
  if (slope > 0.02) return "growing";
  // nan slope with a collapsed ratio means the mass hit zero inside the
  // fit window (extinction overshoot), which is decay, not a fit failure
  if (mass_ratio < 0.2 && !(slope >= 0.0)) return "decaying-to-zero";
  return "plateau";
}

void write_diagnostics_csv(const std::string& path,
                           const std::vector<DiagnosticsRecord>& records) {
  std::ofstream out(path);
  out << "t,M,L1,L2,Linf,G1,Gp0,G2,Gq,Ginf,Qcum,SSE_r1,SSE_r2,tail_frac\n";
  for (const DiagnosticsRecord& r : records)
    out << csv_double(r.t) << ',' << csv_double(r.mass) << ','
        << csv_double(r.l1) << ',' << csv_double(r.l2) << ','
        << csv_double(r.linf) << ',' << csv_double(r.g1) << ','
        << csv_double(r.gp0) << ',' << csv_double(r.g2) << ','
        << csv_double(r.gq) << ',' << csv_double(r.ginf) << ','
        << csv_double(r.q_cum) << ',' << csv_double(r.sse_r1) << ','
        << csv_double(r.sse_r2) << ',' << csv_double(r.tail_frac) << '\n';
}

ExperimentResult execute(const ExperimentConfig& cfg) {
  if (cfg.preset == "validate") {
    ExperimentResult res;
    res.preset = cfg.preset;
    fs::create_directories(cfg.output_dir);
    add(res, "config-valid", true, "parsed and validated");
    write_report(cfg.output_dir + "/report.txt", res, cfg.warnings,
                 "parse only");
    return res;
  }
  if (cfg.preset == "kernel-table") return run_kernel_table(cfg);
  if (cfg.preset == "sweep-q") return run_sweep(cfg);
  return run_single(cfg);
}

}  // namespace lkpz
