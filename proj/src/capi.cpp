#include "lkpz/lkpz.h"

#include <cmath>
#include <cstring>
#include <string>

#include "config.hpp"
#include "error.hpp"
#include "experiment.hpp"
#include "field_io.hpp"
#include "semigroup.hpp"
#include "spectral.hpp"
#include "symbol.hpp"

struct lkpz_config {
  lkpz::ParseResult parsed;
  std::string issues_text;
};

struct lkpz_result {
  lkpz::ExperimentResult result;
};

struct lkpz_symbol {
  lkpz::SymbolSpec spec;
};

struct lkpz_field {
  lkpz::Field field;
};

namespace {

thread_local std::string g_last_error;

lkpz_status map_code(lkpz::ErrorCode code) {
  switch (code) {
    case lkpz::ErrorCode::InvalidArgument:
      return LKPZ_INVALID_ARGUMENT;
    case lkpz::ErrorCode::BadConfig:
      return LKPZ_BAD_CONFIG;
    case lkpz::ErrorCode::Resolution:
      return LKPZ_RESOLUTION;
    case lkpz::ErrorCode::OutOfRange:
      return LKPZ_OUT_OF_RANGE;
    case lkpz::ErrorCode::BlowUp:
      return LKPZ_BLOW_UP;
    case lkpz::ErrorCode::StepControlFailure:
      return LKPZ_STEP_CONTROL;
    case lkpz::ErrorCode::NoConvergence:
      return LKPZ_NO_CONVERGENCE;
    case lkpz::ErrorCode::HorizonTooLarge:
      return LKPZ_HORIZON_TOO_LARGE;
    case lkpz::ErrorCode::Io:
      return LKPZ_IO;
    default:
      return LKPZ_INTERNAL;
  }
}

template <typename Fn>
lkpz_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return LKPZ_OK;
  } catch (const lkpz::Error& e) {
    g_last_error = e.what();
    return map_code(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return LKPZ_INTERNAL;
  }
}

lkpz_status invalid(const char* message) {
  g_last_error = message;
  return LKPZ_INVALID_ARGUMENT;
}

}  // namespace

extern "C" {

const char* lkpz_version(void) { return "0.1.0"; }

const char* lkpz_last_error(void) { return g_last_error.c_str(); }

lkpz_status lkpz_config_parse_file(const char* path, lkpz_config** out) {
  if (!path || !out) return invalid("null argument");
  return guarded([&] {
    auto cfg = new lkpz_config{lkpz::parse_config_file(path), {}};
    cfg->issues_text = lkpz::format_issues(cfg->parsed.issues);
    *out = cfg;
  });
}

lkpz_status lkpz_config_parse_text(const char* text, lkpz_config** out) {
  if (!text || !out) return invalid("null argument");
  return guarded([&] {
    auto cfg = new lkpz_config{lkpz::parse_config_text(text), {}};
    cfg->issues_text = lkpz::format_issues(cfg->parsed.issues);
    *out = cfg;
  });
}

size_t lkpz_config_issue_count(const lkpz_config* cfg) {
  return cfg ? cfg->parsed.issues.size() : 0;
}

const char* lkpz_config_issues(const lkpz_config* cfg) {
  return cfg ? cfg->issues_text.c_str() : "";
}

const char* lkpz_config_preset(const lkpz_config* cfg) {
  return cfg ? cfg->parsed.config.preset.c_str() : "";
}

lkpz_status lkpz_config_set_output_dir(lkpz_config* cfg, const char* dir) {
  if (!cfg || !dir) return invalid("null argument");
  cfg->parsed.config.output_dir = dir;
  return LKPZ_OK;
}

void lkpz_config_free(lkpz_config* cfg) { delete cfg; }

lkpz_status lkpz_execute(const lkpz_config* cfg, lkpz_result** out) {
  if (!cfg || !out) return invalid("null argument");
  if (!cfg->parsed.ok()) {
    g_last_error = "config has violations:\n" + cfg->issues_text;
    return LKPZ_BAD_CONFIG;
  }
  return guarded(
      [&] { *out = new lkpz_result{lkpz::execute(cfg->parsed.config)}; });
}

int lkpz_result_exit_code(const lkpz_result* res) {
  return res ? res->result.exit_code : 3;
}

size_t lkpz_result_check_count(const lkpz_result* res) {
  return res ? res->result.checks.size() : 0;
}

const char* lkpz_result_check_name(const lkpz_result* res, size_t i) {
  return res && i < res->result.checks.size()
             ? res->result.checks[i].name.c_str()
             : "";
}

const char* lkpz_result_check_status(const lkpz_result* res, size_t i) {
  return res && i < res->result.checks.size()
             ? res->result.checks[i].status.c_str()
             : "";
}

const char* lkpz_result_check_detail(const lkpz_result* res, size_t i) {
  return res && i < res->result.checks.size()
             ? res->result.checks[i].detail.c_str()
             : "";
}

double lkpz_result_metric(const lkpz_result* res, const char* key) {
  if (res && key) {
    auto it = res->result.metrics.find(key);
    if (it != res->result.metrics.end()) return it->second;
  }
  return std::nan("");
}

void lkpz_result_free(lkpz_result* res) { delete res; }

lkpz_status lkpz_symbol_fractional(double alpha, double ell,
                                   lkpz_symbol** out) {
  if (!out) return invalid("null argument");
  return guarded(
      [&] { *out = new lkpz_symbol{lkpz::SymbolSpec::fractional(alpha, ell)}; });
}

lkpz_status lkpz_symbol_multifractional(const double* coeffs,
                                        const double* exponents, size_t count,
                                        lkpz_symbol** out) {
  if (!coeffs || !exponents || !out) return invalid("null argument");
  return guarded([&] {
    std::vector<lkpz::SymbolTerm> terms(count);
    for (size_t i = 0; i < count; ++i) terms[i] = {coeffs[i], exponents[i]};
    *out = new lkpz_symbol{lkpz::SymbolSpec::multifractional(terms)};
  });
}

lkpz_status lkpz_symbol_tabulated(double alpha, double ell, const double* xi,
                                  const double* values, size_t count,
                                  lkpz_symbol** out) {
  if (!xi || !values || !out) return invalid("null argument");
  return guarded([&] {
    std::vector<double> r(xi, xi + count), a(values, values + count);
    *out = new lkpz_symbol{lkpz::SymbolSpec::tabulated(alpha, ell, r, a)};
  });
}

lkpz_status lkpz_symbol_eval(const lkpz_symbol* sym, const double* xi, int dim,
                             double* out) {
  if (!sym || !xi || !out) return invalid("null argument");
  return guarded([&] {
    *out = sym->spec.evaluate(std::span<const double>(xi, size_t(dim)));
  });
}

void lkpz_symbol_free(lkpz_symbol* sym) { delete sym; }

lkpz_status lkpz_kernel(double alpha, double t, int dim, int n, double box,
                        lkpz_field** out) {
  if (!out) return invalid("null argument");
  return guarded([&] {
    lkpz::PeriodicGrid grid = lkpz::PeriodicGrid::make(dim, n, box);
    *out = new lkpz_field{lkpz::stable_kernel({alpha, t, grid})};
  });
}

lkpz_status lkpz_field_read(const char* path, lkpz_field** out) {
  if (!path || !out) return invalid("null argument");
  return guarded([&] { *out = new lkpz_field{lkpz::read_snapshot(path)}; });
}

lkpz_status lkpz_field_write(const lkpz_field* f, const char* path) {
  if (!f || !path) return invalid("null argument");
  return guarded([&] { lkpz::write_snapshot(f->field, path); });
}

int lkpz_field_dim(const lkpz_field* f) { return f ? f->field.grid().dim : 0; }

int lkpz_field_n(const lkpz_field* f) { return f ? f->field.grid().n : 0; }

double lkpz_field_box(const lkpz_field* f) {
  return f ? f->field.grid().box : 0.0;
}

const double* lkpz_field_data(const lkpz_field* f) {
  return f ? f->field.data() : nullptr;
}

size_t lkpz_field_size(const lkpz_field* f) { return f ? f->field.size() : 0; }

double lkpz_field_coord(const lkpz_field* f, int j) {
  return f ? f->field.grid().coord(j) : 0.0;
}

void lkpz_field_free(lkpz_field* f) { delete f; }

}  // extern "C"
