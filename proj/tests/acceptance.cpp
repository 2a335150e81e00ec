#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "config.hpp"
#include "diagnostics.hpp"
#include "experiment.hpp"
#include "oracle.hpp"
#include "semigroup.hpp"
#include "solver.hpp"
#include "spectral.hpp"
#include "symbol.hpp"

using namespace lkpz;
namespace fs = std::filesystem;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

struct Stopwatch {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  }
};

int g_failures = 0;

void criterion(int num, const char* label,
               const std::function<bool(std::string&)>& body) {
  std::string detail;
  bool ok = false;
  try {
    ok = body(detail);
  } catch (const std::exception& e) {
    detail = fmt("exception: %s", e.what());
    ok = false;
  }
  std::printf("%s %2d %s: %s\n", ok ? "PASS" : "FAIL", num, label,
              detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

Field gaussian(const PeriodicGrid& g, double a, double sigma,
               double center = 0.0) {
  return Field::sample(g, [=](const double* x) {
    double dx = x[0] - center;
    return a * std::exp(-0.5 * dx * dx / (sigma * sigma));
  });
}

Field bump(const PeriodicGrid& g, double a, double w, double center) {
  return Field::sample(g, [=](const double* x) {
    double s = (x[0] - center) * (x[0] - center) / (w * w);
    return s < 1.0 ? a * std::exp(1.0 - 1.0 / (1.0 - s)) : 0.0;
  });
}

double sup_diff(const Field& a, const Field& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

double grad_sup(const Field& f) { return lp_norm(magnitude(gradient(f)), kInf); }

struct PresetRun {
  PreparedRun pr;
  Trajectory traj;
  double m0 = 0.0, linf0 = 0.0, ginf0 = 0.0;
  double seconds = 0.0;
};

const PresetRun& preset_run(const std::string& name) {
  static std::map<std::string, PresetRun> cache;
  auto it = cache.find(name);
  if (it != cache.end()) return it->second;

  ParseResult parsed =
      parse_config_text("[experiment]\npreset = " + name + "\n");
  if (!parsed.ok())
    throw Error(ErrorCode::BadConfig,
                name + " config: " + format_issues(parsed.issues));
  PresetRun r;
  r.pr = prepare_run(parsed.config);
  const Field& u0 = r.pr.problem.initial;
  r.m0 = mass(u0);
  r.linf0 = lp_norm(u0, kInf);
  r.ginf0 = grad_sup(u0);
  Stopwatch sw;
  r.traj = run(r.pr.problem);
  r.seconds = sw.seconds();
  if (r.traj.status != RunStatus::Completed)
    throw Error(ErrorCode::Internal,
                name + fmt(" stopped at t = %g", r.traj.failure_time));
  return cache.emplace(name, std::move(r)).first->second;
}

const DiagnosticsRecord& record_at(const Trajectory& traj, double t) {
  for (const DiagnosticsRecord& r : traj.records)
    if (std::abs(r.t - t) <= 1e-9 * std::max(1.0, t)) return r;
  throw Error(ErrorCode::Internal, fmt("no sample at t = %g", t));
}

const Field& field_at(const Trajectory& traj, double t) {
  for (std::size_t i = 0; i < traj.times.size(); ++i)
    if (std::abs(traj.times[i] - t) <= 1e-9 * std::max(1.0, t))
      return traj.fields[i];
  throw Error(ErrorCode::Internal, fmt("no field at t = %g", t));
}

const std::vector<std::string> kTheoremPresets = {
    "deposition-subcritical", "deposition-supercritical",
    "deposition-brownian-q2", "evaporation-subcritical",
    "evaporation-supercritical"};

}  // namespace

int main() {
  std::printf("acceptance: nonlocal KPZ simulator, 18 criteria\n");

  criterion(1, "semigroup-closed-form-alpha2", [](std::string& d) {
    Stopwatch sw;
    PeriodicGrid g = PeriodicGrid::make(1, 512, 32.0);
    double a = 1.0, s = 1.0;
    Field u0 = gaussian(g, a, s);
    SymbolSpec sym = SymbolSpec::fractional(2.0);
    double worst = 0.0;
    for (double t : {0.25, 1.0, 4.0}) {
      Field ut = apply_semigroup(u0, t, sym);
      double var = s * s + 2.0 * t;
      for (int j = 0; j < g.n; ++j) {
        double x = g.coord(j);
        double exact = a * s / std::sqrt(var) * std::exp(-0.5 * x * x / var);
        worst = std::max(worst, std::abs(ut[j] - exact));
      }
    }
    double sec = sw.seconds();
    d = fmt("sup error %.3g (limit 1e-8) on n = 512, %.3f s (limit 1)", worst,
            sec);
    return worst < 1e-8 && sec < 1.0;
  });

  criterion(2, "kernel-closed-forms", [](std::string& d) {
    PeriodicGrid gh = PeriodicGrid::make(1, 512, 32.0);
    Field heat = stable_kernel({2.0, 1.0, gh});
    double dev_heat = 0.0;
    for (int j = 0; j < gh.n; ++j) {
      double x = gh.coord(j);
      if (std::abs(x) > gh.box / 2.0) continue;
      double exact = std::exp(-x * x / 4.0) / std::sqrt(4.0 * M_PI);
      dev_heat = std::max(dev_heat, std::abs(heat[j] - exact));
    }
    PeriodicGrid gc = PeriodicGrid::make(1, 32768, 2048.0);
    Field cauchy = stable_kernel({1.0, 1.0, gc});
    double dev_cauchy = 0.0;
    for (int j = 0; j < gc.n; ++j) {
      double x = gc.coord(j);
      if (std::abs(x) > gc.box / 2.0) continue;
      double exact = 1.0 / (M_PI * (x * x + 1.0));
      dev_cauchy = std::max(dev_cauchy, std::abs(cauchy[j] - exact));
    }
    d = fmt("inner-half sup error: heat %.3g, cauchy %.3g (limit 1e-6)",
            dev_heat, dev_cauchy);
    return dev_heat < 1e-6 && dev_cauchy < 1e-6;
  });

  criterion(3, "kernel-self-similarity", [](std::string& d) {
    double worst = 0.0;
    for (double a : {1.0, 1.5, 2.0}) {
      PeriodicGrid g = kernel_check_grid(a, 1.0, 4.0);
      if (g.n == 0) {
        d = fmt("no verification grid for alpha = %g", a);
        return false;
      }
      worst = std::max(worst, verify_self_similarity(a, 1.0, 4.0, g));
    }
    d = fmt("max deviation %.3g over alpha in {1, 1.5, 2}, t-ratio 4 "
            "(limit 1e-6)",
            worst);
    return worst < 1e-6;
  });

  criterion(4, "oracle-equivalence", [](std::string& d) {
    Stopwatch sw;
    PeriodicGrid g = PeriodicGrid::make(1, 256, 16.0);
    Field u0 = gaussian(g, 1.0, 1.0);
    double dev = sup_diff(convolve_semigroup(u0, 1.0, 2.0),
                          apply_semigroup(u0, 1.0, SymbolSpec::fractional(2.0)));

    PeriodicGrid gf = PeriodicGrid::make(1, 256, 8.0);
    ProblemSpec p;
    p.symbol = SymbolSpec::fractional(2.0);
    p.lambda = -1.0;
    p.q = 2.0;
    p.initial = gaussian(gf, 1.0, 1.2);
    p.horizon = 1.0;
    p.dt = 1.0 / 1024;
    p.sample_times = {1.0};
    Trajectory fd = fd_solve(p);
    Trajectory sp = run(p);
    const Field& a = fd.fields.back();
    const Field& b = sp.fields.back();
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      num += (a[i] - b[i]) * (a[i] - b[i]);
      den += b[i] * b[i];
    }
    double rel = std::sqrt(num / den);
    double sec = sw.seconds();
    d = fmt("convolution dev %.3g (limit 1e-8); fd rel-L2 %.3g (limit 1e-3); "
            "%.1f s (limit 30)",
            dev, rel, sec);
    return dev < 1e-8 && rel < 1e-3 && sec < 30.0;
  });

  criterion(5, "linear-decay-slopes", [](std::string& d) {
    bool ok = true;
    std::string parts;
    for (double a : {1.5, 2.0}) {
      PeriodicGrid g = a < 2.0 ? PeriodicGrid::make(1, 2048, 128.0)
                               : PeriodicGrid::make(1, 1024, 64.0);
      Field v = gaussian(g, 1.0, 0.5);
      SymbolSpec sym = SymbolSpec::fractional(a);
      std::vector<double> ts, sups, gsups;
      for (int j = 0; j <= 8; ++j) {
        double t = 4.0 * std::pow(2.0, 0.5 * j);
        Field u = apply_semigroup(v, t, sym);
        ts.push_back(t);
        sups.push_back(lp_norm(u, kInf));
        gsups.push_back(grad_sup(u));
      }
      double su = fit_power_law(ts, sups, 4.0, 64.0).slope;
      double sg = fit_power_law(ts, gsups, 4.0, 64.0).slope;
      double tu = -1.0 / a, tg = -2.0 / a;
      bool here = std::abs(su - tu) <= 0.05 * std::abs(tu) &&
                  std::abs(sg - tg) <= 0.05 * std::abs(tg);
      ok = ok && here;
      parts += fmt("%salpha %g: %.4g vs %.4g, %.4g vs %.4g",
                   parts.empty() ? "" : "; ", a, su, tu, sg, tg);
    }
    d = parts + " (5% windows)";
    return ok;
  });

  criterion(6, "mass-identity", [](std::string& d) {
    double worst = 0.0;
    for (const std::string& name : kTheoremPresets)
      worst = std::max(worst, mass_identity_residual(preset_run(name).traj));
    double lin = mass_identity_residual(preset_run("linear-selfsim").traj);
    d = fmt("max nonlinear residual %.3g (limit 1e-4); lambda = 0 residual "
            "%.3g (limit 1e-12)",
            worst, lin);
    return worst < 1e-4 && lin < 1e-12;
  });

  criterion(7, "maximum-principle", [](std::string& d) {
    double worst_u = 0.0, worst_g = 0.0;
    std::vector<std::string> names = kTheoremPresets;
    names.push_back("linear-selfsim");
    for (const std::string& name : names) {
      const PresetRun& r = preset_run(name);
      for (const DiagnosticsRecord& rec : r.traj.records) {
        worst_u = std::max(worst_u, rec.linf / r.linf0);
        worst_g = std::max(worst_g, rec.ginf / r.ginf0);
      }
    }
    d = fmt("worst sup ratio %.12g, worst gradient sup ratio %.12g "
            "(limit 1 + 1e-9)",
            worst_u, worst_g);
    return worst_u <= 1.0 + 1e-9 && worst_g <= 1.0 + 1e-9;
  });

  criterion(8, "comparison-principle", [](std::string& d) {
    PeriodicGrid g = PeriodicGrid::make(1, 512, 32.0);
    ProblemSpec base;
    base.symbol = SymbolSpec::fractional(1.5);
    base.q = 1.5;
    base.horizon = 2.0;
    base.dt = 1.0 / 64;
    base.sample_times = {0.5, 1.0, 2.0};

    Field lo = gaussian(g, 1.0, 1.0);
    Field hi = gaussian(g, 1.0, 1.5);
    double worst_gap = 0.0;
    Trajectory tl_minus;
    for (double lambda : {-1.0, 1.0}) {
      ProblemSpec pl = base, ph = base;
      pl.lambda = ph.lambda = lambda;
      pl.initial = lo;
      ph.initial = hi;
      Trajectory tl = run(pl), th = run(ph);
      for (std::size_t i = 0; i < tl.fields.size(); ++i) {
        Field diff = add_scaled(th.fields[i], 1.0, tl.fields[i], -1.0);
        worst_gap = std::min(worst_gap, diff.min_value());
      }
      if (lambda < 0.0) tl_minus = tl;
    }

    double shift = 0.5;
    ProblemSpec ps = base;
    ps.lambda = -1.0;
    ps.initial = shifted(lo, shift);
    Trajectory ts = run(ps);
    double worst_shift = 0.0;
    for (std::size_t i = 0; i < ts.fields.size(); ++i) {
      Field expect = shifted(tl_minus.fields[i], shift);
      worst_shift = std::max(worst_shift, sup_diff(ts.fields[i], expect));
    }
    d = fmt("min ordering gap %.3g (limit -1e-9); constant-shift error %.3g "
            "(limit 1e-10)",
            worst_gap, worst_shift);
    return worst_gap >= -1e-9 * lp_norm(lo, kInf) && worst_shift < 1e-10;
  });

  criterion(9, "deposition-subcritical-growth", [](std::string& d) {
    const PresetRun& r = preset_run("deposition-subcritical");
    double T = r.pr.problem.horizon;
    double alpha = r.pr.problem.symbol.dominant_alpha();
    double q = r.pr.problem.q;
    double ratio = r.traj.records.back().mass / r.m0;
    std::vector<double> ts, ms;
    for (const DiagnosticsRecord& rec : r.traj.records) {
      ts.push_back(rec.t);
      ms.push_back(rec.mass);
    }
    double slope = fit_power_law(ts, ms, T / 16.0, T).slope;
    double floor = (1.0 + alpha - 2.0 * q) / (2.0 * q) - 0.05;
    d = fmt("M(T)/M(0) = %.3g (needs > 2); slope %.4g (floor %.4g); %.1f s "
            "(limit 120)",
            ratio, slope, floor, r.seconds);
    return ratio > 2.0 && slope >= floor && r.seconds < 120.0;
  });

  criterion(10, "deposition-supercritical-plateau", [](std::string& d) {
    const PresetRun& r = preset_run("deposition-supercritical");
    double T = r.pr.problem.horizon;
    double mT = record_at(r.traj, T).mass;
    double plateau = std::abs(mT - record_at(r.traj, T / 2).mass) / mT;
    d = fmt("plateau %.3g (limit 0.01); smallness gate %.3g (bound 0.1)",
            plateau, r.pr.gate_combination);
    return plateau < 0.01 && r.pr.gate_combination < 0.1;
  });

  criterion(11, "deposition-brownian-q2", [](std::string& d) {
    const PresetRun& r = preset_run("deposition-brownian-q2");
    double T = r.pr.problem.horizon;
    const DiagnosticsRecord& full = record_at(r.traj, T);
    const DiagnosticsRecord& half = record_at(r.traj, T / 2);
    double plateau = std::abs(full.mass - half.mass) / full.mass;
    double cauchy = (full.q_cum - half.q_cum) / full.q_cum;
    d = fmt("plateau %.3g, last dyadic Q increment %.3g of total "
            "(limits 0.01); Q(T) = %.3g finite",
            plateau, cauchy, full.q_cum);
    return plateau < 0.01 && cauchy < 0.01 && std::isfinite(full.q_cum) &&
           full.q_cum > 0.0;
  });

  criterion(12, "evaporation-subcritical-decay", [](std::string& d) {
    const PresetRun& r = preset_run("evaporation-subcritical");
    double T = r.pr.problem.horizon;
    double ratio = r.traj.records.back().mass / r.m0;
    std::vector<double> ts, ms;
    for (const DiagnosticsRecord& rec : r.traj.records) {
      ts.push_back(rec.t);
      ms.push_back(rec.mass);
    }
    double slope = fit_power_law(ts, ms, T / 16.0, T).slope;
    d = fmt("M(T)/M(0) = %.3g (needs < 0.2); slope %.4g (needs < 0)", ratio,
            slope);
    return ratio < 0.2 && slope < 0.0;
  });

  criterion(13, "evaporation-supercritical-limit", [](std::string& d) {
    const PresetRun& r = preset_run("evaporation-supercritical");
    double T = r.pr.problem.horizon;
    double mT = record_at(r.traj, T).mass;
    double plateau = std::abs(mT - record_at(r.traj, T / 2).mass) / mT;
    double m_inf = extrapolate_mass_limit(r.traj.records);
    d = fmt("extrapolated limit %.4g (needs > %.4g); plateau %.3g "
            "(limit 0.01)",
            m_inf, 0.5 * r.m0, plateau);
    return m_inf > 0.5 * r.m0 && plateau < 0.01;
  });

  criterion(14, "self-similar-convergence", [](std::string& d) {
    const PresetRun& r = preset_run("evaporation-supercritical");
    double alpha = r.pr.problem.symbol.dominant_alpha();
    const PeriodicGrid& g = r.pr.problem.initial.grid();
    double m_inf = extrapolate_mass_limit(r.traj.records);
    auto err = [&](double t, double p) {
      Field kern = stable_kernel({alpha, t, g});
      Field diff = add_scaled(field_at(r.traj, t), 1.0, kern, -m_inf);
      return std::pow(t, g.dim * (1.0 - 1.0 / p) / alpha) * lp_norm(diff, p);
    };
    double e1_lo = err(8.0, 1.0), e1_hi = err(64.0, 1.0);
    double e2_lo = err(8.0, 2.0), e2_hi = err(64.0, 2.0);
    d = fmt("|u - M p|_1: %.3g at t=64 vs %.3g at t=8 (needs halving); "
            "weighted r=2: %.3g vs %.3g (needs decrease)",
            e1_hi, e1_lo, e2_hi, e2_lo);
    return e1_hi < 0.5 * e1_lo && e2_hi < e2_lo;
  });

  criterion(15, "gradient-decay-bound", [](std::string& d) {
    bool ok = true;
    std::string parts;
    for (const char* name :
         {"deposition-supercritical", "evaporation-supercritical"}) {
      const PresetRun& r = preset_run(name);
      double alpha = r.pr.problem.symbol.dominant_alpha();
      const PeriodicGrid& g = r.pr.problem.initial.grid();
      double beta = g.dim * (1.0 - 1.0 / r.pr.p0) / alpha;
      double worst = 0.0;
      for (const DiagnosticsRecord& rec : r.traj.records) {
        double w = std::pow(rec.t, 1.0 / alpha) *
                   std::pow(1.0 + rec.t, beta) * rec.gp0;
        worst = std::max(worst, w);
      }
      ok = ok && worst <= 3.0 * r.pr.d0;
      parts += fmt("%s%s: %.3g vs 3 D = %.3g", parts.empty() ? "" : "; ", name,
                   worst, 3.0 * r.pr.d0);
    }
    d = parts;
    return ok;
  });

  criterion(16, "d-functional-homogeneity", [](std::string& d) {
    PeriodicGrid g = PeriodicGrid::make(1, 512, 32.0);
    Field v = gaussian(g, 1.0, 1.0);
    SymbolSpec sym = SymbolSpec::fractional(1.5);
    std::vector<double> ladder = default_time_ladder();
    double base = d_quantity(v, 1.625, sym, ladder).value;
    double worst = 0.0;
    for (double eps : {0.1, 0.5}) {
      double got = d_quantity(scaled(v, eps), 1.625, sym, ladder).value;
      worst = std::max(worst, std::abs(got - eps * base));
    }
    d = fmt("max |D(eps v) - eps D(v)| = %.3g over eps in {0.1, 0.5} "
            "(limit 1e-10; D(v) = %.3g)",
            worst, base);
    return worst < 1e-10;
  });

  criterion(17, "ben-artzi-koch-gap", [](std::string& d) {
    PeriodicGrid g = PeriodicGrid::make(1, 1024, 32.0);
    std::vector<Field> corpus;
    corpus.push_back(gaussian(g, 1.0, 0.5));
    corpus.push_back(gaussian(g, 1.0, 2.0));
    corpus.push_back(gaussian(g, 0.7, 1.0, 5.0));
    corpus.push_back(bump(g, 1.0, 3.0, 0.0));
    corpus.push_back(add_scaled(gaussian(g, 1.0, 1.0, -6.0), 1.0,
                                gaussian(g, 0.7, 1.5, 6.0), -1.0));
    double worst = kInf;
    int cases = 0;
    for (const Field& w : corpus)
      for (double R : {1.0, 2.0, 4.0, 8.0}) {
        worst = std::min(worst, ben_artzi_koch_gap(w, R));
        ++cases;
      }
    d = fmt("min gap %.3g over %d cases (limit -1e-8)", worst, cases);
    return cases == 20 && worst >= -1e-8;
  });

  criterion(18, "critical-sweep-dichotomy", [](std::string& d) {
    fs::path dir = fs::temp_directory_path() / "lkpz_acceptance_sweep";
    fs::remove_all(dir);
    ParseResult parsed = parse_config_text("[experiment]\npreset = sweep-q\n");
    if (!parsed.ok()) {
      d = "sweep config rejected: " + format_issues(parsed.issues);
      return false;
    }
    parsed.config.output_dir = dir.string();
    ExperimentResult res = execute(parsed.config);

    std::ifstream in(dir / "sweep.csv");
    std::string line;
    std::getline(in, line);
    std::vector<std::pair<double, std::string>> rows;
    while (std::getline(in, line)) {
      std::size_t last = line.rfind(',');
      std::size_t first = line.find(',');
      if (last == std::string::npos || first == std::string::npos) continue;
      rows.push_back(
          {std::stod(line.substr(0, first)), line.substr(last + 1)});
    }
    fs::remove_all(dir);

    if (rows.size() != 20) {
      d = fmt("expected 20 sweep rows, found %zu", rows.size());
      return false;
    }
    double q_c = 1.25, step = 0.05;
    bool consistent = true;
    std::string bad;
    for (const auto& [q, regime] : rows) {
      if (q <= q_c - step + 1e-9 && regime != "decaying-to-zero") {
        consistent = false;
        bad = fmt("q = %g is %s", q, regime.c_str());
      }
      if (q >= q_c + step - 1e-9 && regime != "plateau") {
        consistent = false;
        bad = fmt("q = %g is %s", q, regime.c_str());
      }
      if (regime != "decaying-to-zero" && regime != "plateau") {
        consistent = false;
        bad = fmt("q = %g is %s", q, regime.c_str());
      }
    }
    d = consistent ? fmt("20 rows, q_c = %.3g, flip within one step of 0.05; "
                         "library verdict exit %d",
                         q_c, res.exit_code)
                   : bad;
    return consistent && res.exit_code == 0;
  });

  std::printf("%d/18 criteria passed\n", 18 - g_failures);
  return g_failures == 0 ? 0 : 1;
}
