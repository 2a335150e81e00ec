#pragma once

#include <map>
#include <string>
#include <vector>

#include "config.hpp"
#include "solver.hpp"

namespace lkpz {

struct CheckLine {
  std::string name;
  std::string status;  // PASS | FAIL | INCONCLUSIVE
  std::string detail;
};

struct ExperimentResult {
  std::string preset;
  std::vector<CheckLine> checks;
  std::map<std::string, double> metrics;
  int exit_code = 0;  // 0 all PASS, 1 any FAIL, 3 solver failure
};

/** %.17g with NaN spelled "nan"; CSV cells and report metrics use this. */
std::string csv_double(double v);

Field build_initial(const ExperimentConfig& cfg, const PeriodicGrid& grid);

/** {T * 2^-(count-1), ..., T/2, T}. */
std::vector<double> dyadic_schedule(double horizon, int count);

/** |lambda| * |grad v|_inf^(q-p0) * D(v, p0)^(p0-1); the small-data gate
 * compares this against 0.1. */
double smallness_combination(double lambda, double q, double p0,
                             double grad_sup, double d_value);

/** Aitken extrapolation of the mass limit from the last three samples;
 * falls back to the final mass when the increments degenerate. */
double extrapolate_mass_limit(const std::vector<DiagnosticsRecord>& records);

struct PreparedRun {
  ProblemSpec problem;
  double p0 = 0.0;
  double d0 = 0.0;        // D(u0, p0)
  double grad0_sup = 0.0;
  double gate_combination = 0.0;
  double amplitude_scale = 1.0;  // factor applied by the smallness gate
};

/** Assembles the problem for a single-run preset; supercritical presets
 * with smallness_gate = auto get their amplitude rescaled under 0.1. */
PreparedRun prepare_run(const ExperimentConfig& cfg);

struct KernelCheck {
  double alpha = 0.0;
  double mass_error = 0.0;
  double selfsim_dev = 0.0;
  double closed_form_dev = 0.0;  // NaN when alpha has no closed form
  bool feasible = false;         // a desk-scale verification grid exists
  PeriodicGrid grid;
};

/** Verification grid sized so kernels at t in [t_lo, t_hi] are resolved,
 * alias-free to ~1e-8, and wrap-around stays below ~2.5e-7 of the peak;
 * n = 0 when no grid under 2^18 points suffices. */
PeriodicGrid kernel_check_grid(double alpha, double t_lo, double t_hi);

/** Mass, self-similarity (t -> ratio*t) and closed-form deviations of the
 * stable kernel on an auto-sized verification grid. */
KernelCheck check_kernel(double alpha, double t, double ratio);

/** Decision list: growing (fitted slope > 0.02), decaying-to-zero
 * (M(T)/M(0) < 0.2 with falling mass), else plateau.  The plateau quality
 * |M(T)-M(T/2)|/M(T) is reported alongside but does not gate the label:
 * monotone bounded mass always converges, so plateau is the residual claim. */
std::string classify_regime(double mass_ratio, double slope, double plateau);

void write_diagnostics_csv(const std::string& path,
                           const std::vector<DiagnosticsRecord>& records);

/** Runs the configured preset and writes its artifacts (diagnostics.csv,
 * fits.csv, report.txt, optional snapshots; sweep.csv / kernel.csv for the
 * sweep and kernel presets) under cfg.output_dir. */
ExperimentResult execute(const ExperimentConfig& cfg);

}  // namespace lkpz
