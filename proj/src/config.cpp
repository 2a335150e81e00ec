#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "diagnostics.hpp"
#include "spectral.hpp"

namespace lkpz {

const std::vector<std::string> kPresetNames = {
    "linear-selfsim",         "deposition-subcritical",
    "deposition-supercritical", "deposition-brownian-q2",
    "evaporation-subcritical", "evaporation-supercritical",
    "sweep-q",                "kernel-table",
    "validate"};

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

struct Parser {
  ExperimentConfig cfg;
  std::vector<ConfigIssue> issues;

  void fail(int line, const std::string& msg) { issues.push_back({line, msg}); }

  bool to_double(int line, const std::string& key, const std::string& v,
                 double* out) {
    try {
      std::size_t pos;
      *out = std::stod(v, &pos);
      if (pos != v.size()) throw std::invalid_argument(v);
      return true;
    } catch (...) {
      fail(line, key + ": expected a number, got '" + v + "'");
      return false;
    }
  }

  bool to_int(int line, const std::string& key, const std::string& v,
              int* out) {
    try {
      std::size_t pos;
      long x = std::stol(v, &pos);
      if (pos != v.size()) throw std::invalid_argument(v);
      *out = int(x);
      return true;
    } catch (...) {
      fail(line, key + ": expected an integer, got '" + v + "'");
      return false;
    }
  }

  bool to_bool(int line, const std::string& key, const std::string& v,
               bool* out) {
    if (v == "true" || v == "false") {
      *out = v == "true";
      return true;
    }
    fail(line, key + ": expected true or false, got '" + v + "'");
    return false;
  }

  std::vector<double> to_double_list(int line, const std::string& key,
                                     const std::string& v) {
    std::vector<double> out;
    for (const std::string& item : split(v, ',')) {
      double x;
      if (!to_double(line, key, item, &x)) return {};
      out.push_back(x);
    }
    return out;
  }

  void parse_terms(int line, const std::string& v) {
    for (const std::string& item : split(v, ',')) {
      auto parts = split(item, ':');
      double c, e;
      if (parts.size() != 2 || !to_double(line, "terms", parts[0], &c) ||
          !to_double(line, "terms", parts[1], &e)) {
        fail(line, "terms: expected coeff:exponent pairs");
        return;
      }
      cfg.terms.push_back({c, e});
    }
  }

  void parse_table(int line, const std::string& v) {
    for (const std::string& item : split(v, ',')) {
      auto parts = split(item, ':');
      double x, a;
      if (parts.size() != 2 || !to_double(line, "table", parts[0], &x) ||
          !to_double(line, "table", parts[1], &a)) {
        fail(line, "table: expected |xi|:value pairs");
        return;
      }
      cfg.table_xi.push_back(x);
      cfg.table_a.push_back(a);
    }
  }

  void handle(int line, const std::string& section, const std::string& key,
              const std::string& value) {
    auto is = [&](const char* s, const char* k) {
      return section == s && key == k;
    };
    double d;
    int i;
    bool b;
    if (is("experiment", "preset")) cfg.preset = value;
    else if (is("experiment", "output_dir")) cfg.output_dir = value;
    else if (is("experiment", "seed")) {
      if (to_int(line, key, value, &i)) cfg.seed = (unsigned long)i;
    } else if (is("experiment", "snapshots")) {
      if (to_bool(line, key, value, &b)) cfg.snapshots = b;
    } else if (is("symbol", "kind")) cfg.symbol_kind = value;
    else if (is("symbol", "alpha")) {
      if (to_double(line, key, value, &d)) cfg.alpha = d;
    } else if (is("symbol", "ell")) {
      if (to_double(line, key, value, &d)) cfg.ell = d;
    } else if (is("symbol", "terms")) parse_terms(line, value);
    else if (is("symbol", "table")) parse_table(line, value);
    else if (is("grid", "dim")) {
      if (to_int(line, key, value, &i)) cfg.dim = i;
    } else if (is("grid", "n")) {
      if (to_int(line, key, value, &i)) cfg.n = i;
    } else if (is("grid", "box")) {
      if (to_double(line, key, value, &d)) cfg.box = d;
    } else if (is("problem", "lambda")) {
      if (to_double(line, key, value, &d)) cfg.lambda = d;
    } else if (is("problem", "q")) {
      if (to_double(line, key, value, &d)) cfg.q = d;
    } else if (is("problem", "horizon")) {
      if (to_double(line, key, value, &d)) cfg.horizon = d;
    } else if (is("problem", "dt")) {
      if (to_double(line, key, value, &d)) cfg.dt = d;
    } else if (is("problem", "smallness_gate")) cfg.gate = value;
    else if (is("initial", "type")) cfg.initial_type = value;
    else if (is("initial", "amplitude")) {
      if (to_double(line, key, value, &d)) cfg.amplitude = d;
    } else if (is("initial", "width")) {
      if (to_double(line, key, value, &d)) cfg.width = d;
    } else if (is("initial", "center")) cfg.center = to_double_list(line, key, value);
    else if (is("initial", "perturb")) {
      if (to_double(line, key, value, &d)) cfg.perturb = d;
    } else if (is("initial", "path")) cfg.initial_path = value;
    else if (is("samples", "schedule")) cfg.schedule = value;
    else if (is("samples", "count")) {
      if (to_int(line, key, value, &i)) cfg.sample_count = i;
    } else if (is("samples", "times")) cfg.sample_list = to_double_list(line, key, value);
    else if (is("sweep", "q_values")) cfg.q_values = to_double_list(line, key, value);
    else if (is("kernel", "alphas")) cfg.kernel_alphas = to_double_list(line, key, value);
    else if (is("kernel", "t")) {
      if (to_double(line, key, value, &d)) cfg.kernel_t = d;
    } else if (is("kernel", "ratio")) {
      if (to_double(line, key, value, &d)) cfg.kernel_ratio = d;
    } else {
      fail(line, "unknown key '" + key + "' in section [" + section + "]");
    }
  }
};

bool known_section(const std::string& s) {
  static const std::vector<std::string> sections = {
      "experiment", "symbol", "grid", "problem",
      "initial",    "samples", "sweep", "kernel"};
  return std::find(sections.begin(), sections.end(), s) != sections.end();
}

struct PresetDefaults {
  const char* kind;
  double alpha, ell;
  int dim, n;
  double box;
  double lambda, q, horizon, dt;
  const char* initial;
  double amplitude, width;
  int sample_count;
};

// desk-scale defaults; boxes obey box >= 8 * horizon^(1/alpha)
const PresetDefaults* preset_defaults(const std::string& name) {
  static const PresetDefaults linear{
      "fractional", 1.5, 1.0,
      1, 2048, 128.0, 0.0, 2.0, 64.0, 1.0 / 64, "gaussian", 1.0, 0.5, 8};
  static const PresetDefaults dep_sub{
      "fractional", 1.5, 1.0,
      1, 2048, 512.0, 1.0, 1.2, 256.0, 1.0 / 128, "gaussian", 2.0, 2.0, 10};
  static const PresetDefaults dep_super{
      "fractional", 1.5, 1.0,
      1, 1024, 256.0, 1.0, 1.8, 128.0, 1.0 / 128, "gaussian", 1.0, 2.0, 9};
  static const PresetDefaults dep_brown{
      "fractional", 2.0, 1.0,
      1, 4096, 256.0, 1.0, 2.0, 512.0, 1.0 / 128, "gaussian", 0.25, 0.5, 10};
  static const PresetDefaults evap_sub{
      "fractional", 1.5, 1.0,
      1, 2048, 512.0, -1.0, 1.2, 256.0, 1.0 / 128, "gaussian", 4.0, 1.5, 10};
  static const PresetDefaults evap_super{
      "fractional", 1.5, 1.0,
      1, 1024, 256.0, -1.0, 2.0, 128.0, 1.0 / 128, "gaussian", 1.0, 2.0, 9};
  static const PresetDefaults sweep{
      "fractional", 1.5, 1.0,
      1, 1024, 256.0, -1.0, 2.0, 128.0, 1.0 / 64, "gaussian", 1.0, 1.5, 8};
  static const PresetDefaults kernel{
      "fractional", 1.5, 1.0,
      1, 4096, 512.0, 0.0, 2.0, 1.0, 1.0 / 64, "gaussian", 1.0, 2.0, 3};
  if (name == "linear-selfsim") return &linear;
  if (name == "deposition-subcritical") return &dep_sub;
  if (name == "deposition-supercritical") return &dep_super;
  if (name == "deposition-brownian-q2") return &dep_brown;
  if (name == "evaporation-subcritical") return &evap_sub;
  if (name == "evaporation-supercritical") return &evap_super;
  if (name == "sweep-q") return &sweep;
  if (name == "kernel-table") return &kernel;
  if (name == "validate") return &linear;
  return nullptr;
}

void apply_defaults(ExperimentConfig& cfg) {
  const PresetDefaults* d = preset_defaults(cfg.preset);
  if (!d) return;
  if (!cfg.symbol_kind) cfg.symbol_kind = d->kind;
  if (!cfg.alpha) cfg.alpha = d->alpha;
  if (!cfg.ell) cfg.ell = d->ell;
  if (!cfg.dim) cfg.dim = d->dim;
  if (!cfg.n) cfg.n = d->n;
  if (!cfg.box) cfg.box = d->box;
  if (!cfg.lambda) cfg.lambda = d->lambda;
  if (!cfg.q) cfg.q = d->q;
  if (!cfg.horizon) cfg.horizon = d->horizon;
  if (!cfg.dt) cfg.dt = d->dt;
  if (cfg.initial_type.empty()) cfg.initial_type = d->initial;
  if (!cfg.amplitude) cfg.amplitude = d->amplitude;
  if (!cfg.width) cfg.width = d->width;
  if (cfg.center.empty()) cfg.center.assign(*cfg.dim, 0.0);
  if (cfg.schedule.empty()) cfg.schedule = "dyadic";
  if (!cfg.sample_count) cfg.sample_count = d->sample_count;
  if (cfg.preset == "sweep-q" && cfg.q_values.empty())
    for (int i = 0; i <= 19; ++i) cfg.q_values.push_back(1.05 + 0.05 * i);
  if (cfg.preset == "kernel-table") {
    if (cfg.kernel_alphas.empty()) cfg.kernel_alphas = {1.0, 1.5, 2.0};
    if (!cfg.kernel_t) cfg.kernel_t = 1.0;
    if (!cfg.kernel_ratio) cfg.kernel_ratio = 4.0;
  }
}

bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

void validate(ExperimentConfig& cfg, std::vector<ConfigIssue>& issues) {
  auto fail = [&](const std::string& m) { issues.push_back({0, m}); };

  if (std::find(kPresetNames.begin(), kPresetNames.end(), cfg.preset) ==
      kPresetNames.end()) {
    fail("unknown preset '" + cfg.preset +
         "' ([experiment] preset is required)");
    return;
  }
  if (cfg.preset == "validate") return;

  if (*cfg.dim != 1 && *cfg.dim != 2) fail("grid dim must be 1 or 2");
  if (!power_of_two(*cfg.n) || *cfg.n < 8)
    fail("grid n must be a power of two >= 8");
  if (!(*cfg.box > 0.0)) fail("grid box must be positive");

  SymbolSpec symbol = SymbolSpec::fractional(1.5);
  bool symbol_ok = true;
  try {
    symbol = symbol_from_config(cfg);
  } catch (const Error& e) {
    fail(std::string("symbol: ") + e.what());
    symbol_ok = false;
  }

  if (cfg.preset == "kernel-table") {
    if (*cfg.dim != 1) fail("kernel-table tabulates one-dimensional kernels");
    for (double a : cfg.kernel_alphas)
      if (!(a > 0.0) || !(a <= 2.0))
        fail("kernel alphas must lie in (0, 2]");
    if (!(*cfg.kernel_t > 0.0)) fail("kernel t must be positive");
    double r = cfg.kernel_ratio.value_or(0.0);
    if (!(r >= 1.0) ||
        std::abs(std::log2(r) - std::round(std::log2(r))) > 1e-9)
      fail("kernel ratio must be an integer power of two");
    return;
  }

  if (!(*cfg.q > 1.0)) fail("q must exceed 1");
  if (!(*cfg.horizon > 0.0)) fail("horizon must be positive");
  if (!(*cfg.dt > 0.0)) fail("dt must be positive");
  if (*cfg.dt > 0.0 && *cfg.horizon > 0.0) {
    double steps = *cfg.horizon / *cfg.dt;
    if (std::abs(steps - std::round(steps)) > 1e-6)
      fail("horizon must be an integer multiple of dt");
  }

  double alpha = symbol_ok ? symbol.dominant_alpha() : 1.5;
  double qc = (*cfg.dim + alpha) / (*cfg.dim + 1.0);
  bool nonlinear = *cfg.lambda != 0.0;
  if (nonlinear && symbol_ok && !(alpha > 1.0))
    fail("nonlinear runs require the dominant exponent alpha > 1");

  const std::string& p = cfg.preset;
  if (p == "linear-selfsim" && *cfg.lambda != 0.0)
    fail("linear-selfsim requires lambda = 0");
  if (p == "deposition-subcritical" || p == "deposition-supercritical" ||
      p == "deposition-brownian-q2") {
    if (!(*cfg.lambda > 0.0)) fail(p + " requires lambda > 0 (deposition)");
  }
  if (p == "evaporation-subcritical" || p == "evaporation-supercritical") {
    if (!(*cfg.lambda < 0.0)) fail(p + " requires lambda < 0 (evaporation)");
  }
  if ((p == "deposition-subcritical" || p == "evaporation-subcritical") &&
      symbol_ok && !(*cfg.q <= qc)) {
    std::ostringstream os;
    os << p << " requires q <= (dim+alpha)/(dim+1) = " << qc
       << " (boundary accepted)";
    fail(os.str());
  }
  if ((p == "deposition-supercritical" || p == "evaporation-supercritical") &&
      symbol_ok && !(*cfg.q > qc)) {
    std::ostringstream os;
    os << p << " requires q > (dim+alpha)/(dim+1) = " << qc;
    fail(os.str());
  }
  if (p == "deposition-brownian-q2") {
    if (!(*cfg.q >= 2.0)) fail(p + " requires q >= 2");
    bool brownian = false;
    for (const SymbolTerm& t : symbol.terms())
      if (t.exponent == 2.0) brownian = true;
    if (symbol_ok && symbol.kind() != SymbolKind::Tabulated && !brownian)
      fail(p + " requires a nondegenerate Brownian part (an exponent-2 term)");
  }
  if (p == "sweep-q") {
    if (cfg.q_values.empty()) fail("sweep-q needs [sweep] q_values");
    for (double qv : cfg.q_values)
      if (!(qv > 1.0)) fail("sweep q values must exceed 1");
  }

  if (cfg.gate != "auto" && cfg.gate != "off")
    fail("smallness_gate must be auto or off");

  if (cfg.initial_type == "gaussian" || cfg.initial_type == "bump") {
    if (!(cfg.amplitude.value_or(0.0) > 0.0))
      fail("initial amplitude must be positive");
    if (!(cfg.width.value_or(0.0) > 0.0)) fail("initial width must be positive");
    if (int(cfg.center.size()) != *cfg.dim)
      fail("initial center needs one component per dimension");
  } else if (cfg.initial_type == "file") {
    if (cfg.initial_path.empty()) fail("initial type file needs a path");
  } else {
    fail("initial type must be gaussian, bump or file");
  }
  if (!(cfg.perturb >= 0.0) || cfg.perturb >= 1.0)
    fail("perturb must lie in [0, 1)");

  if (cfg.schedule == "dyadic") {
    if (cfg.sample_count.value_or(0) < 1) fail("sample count must be >= 1");
  } else if (cfg.schedule == "list") {
    if (cfg.sample_list.empty()) fail("sample schedule list needs times");
    double prev = 0.0;
    for (double t : cfg.sample_list) {
      if (!(t > prev) || t > *cfg.horizon)
        fail("sample times must increase within (0, horizon]");
      prev = t;
    }
  } else {
    fail("sample schedule must be dyadic or list");
  }

  if (symbol_ok && *cfg.box > 0.0 && *cfg.horizon > 0.0) {
    double need = 8.0 * std::pow(*cfg.horizon, 1.0 / alpha);
    if (*cfg.box < need) {
      std::ostringstream os;
      os << "box " << *cfg.box << " is below 8 * horizon^(1/alpha) = " << need
         << "; far-field wrap-around may pollute diagnostics";
      cfg.warnings.push_back(os.str());
    }
  }
}

}  // namespace

SymbolSpec symbol_from_config(const ExperimentConfig& cfg) {
  const std::string kind = cfg.symbol_kind.value_or("fractional");
  if (kind == "fractional")
    return SymbolSpec::fractional(cfg.alpha.value_or(0.0),
                                  cfg.ell.value_or(1.0));
  if (kind == "multifractional") return SymbolSpec::multifractional(cfg.terms);
  if (kind == "tabulated")
    return SymbolSpec::tabulated(cfg.alpha.value_or(0.0), cfg.ell.value_or(1.0),
                                 cfg.table_xi, cfg.table_a);
  throw Error(ErrorCode::BadConfig,
              "symbol kind must be fractional, multifractional or tabulated");
}

ParseResult parse_config_text(const std::string& text) {
  Parser p;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        p.fail(lineno, "malformed section header");
        continue;
      }
      section = trim(line.substr(1, line.size() - 2));
      if (!known_section(section))
        p.fail(lineno, "unknown section [" + section + "]");
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      p.fail(lineno, "expected key = value");
      continue;
    }
    if (section.empty()) {
      p.fail(lineno, "key outside any section");
      continue;
    }
    if (!known_section(section)) continue;  // already reported
    p.handle(lineno, section, trim(line.substr(0, eq)),
             trim(line.substr(eq + 1)));
  }
  apply_defaults(p.cfg);
  validate(p.cfg, p.issues);
  return {std::move(p.cfg), std::move(p.issues)};
}

ParseResult parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    ParseResult r;
    r.issues.push_back({0, "cannot open config file " + path});
    return r;
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string format_issues(const std::vector<ConfigIssue>& issues) {
  std::ostringstream os;
  for (const ConfigIssue& i : issues) {
    if (i.line > 0)
      os << "line " << i.line << ": " << i.message << "\n";
    else
      os << i.message << "\n";
  }
  return os.str();
}

}  // namespace lkpz
