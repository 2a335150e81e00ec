#pragma once

#include <optional>
#include <string>
#include <vector>

#include "symbol.hpp"

namespace lkpz {

struct ConfigIssue {
  int line = 0;  // 0 for semantic issues not tied to a line
  std::string message;
};

/** Parsed experiment description.  Unset optionals are filled from the
 * preset's defaults before semantic validation. */
struct ExperimentConfig {
  std::string preset;
  std::string output_dir = "out";
  unsigned long seed = 0;
  bool snapshots = false;

  std::optional<std::string> symbol_kind;
  std::optional<double> alpha;
  std::optional<double> ell;
  std::vector<SymbolTerm> terms;
  std::vector<double> table_xi, table_a;

  std::optional<int> dim;
  std::optional<int> n;
  std::optional<double> box;

  std::optional<double> lambda, q, horizon, dt;
  std::string gate = "auto";  // auto | off

  std::string initial_type;  // gaussian | bump | file
  std::optional<double> amplitude, width;
  std::vector<double> center;
  double perturb = 0.0;
  std::string initial_path;

  std::string schedule;  // dyadic | list
  std::optional<int> sample_count;
  std::vector<double> sample_list;

  std::vector<double> q_values;       // sweep-q
  std::vector<double> kernel_alphas;  // kernel-table
  std::optional<double> kernel_t;
  std::optional<double> kernel_ratio;

  std::vector<std::string> warnings;
};

struct ParseResult {
  ExperimentConfig config;
  std::vector<ConfigIssue> issues;
  bool ok() const { return issues.empty(); }
};

extern const std::vector<std::string> kPresetNames;

/** Builds the SymbolSpec described by a validated config. */
SymbolSpec symbol_from_config(const ExperimentConfig& cfg);

/** Parses `key = value` lines under [section] headers, applies preset
 * defaults, and validates; every violation is collected with its line. */
ParseResult parse_config_text(const std::string& text);
ParseResult parse_config_file(const std::string& path);

std::string format_issues(const std::vector<ConfigIssue>& issues);

}  // namespace lkpz
