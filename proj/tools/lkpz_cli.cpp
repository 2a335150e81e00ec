#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "lkpz/lkpz.h"

namespace {

int map_failure(lkpz_status status) {
  switch (status) {
    case LKPZ_BAD_CONFIG:
    case LKPZ_INVALID_ARGUMENT:
    case LKPZ_OUT_OF_RANGE:
      return 2;
    default:
      return 3;
  }
}

int run_config(const std::string& path, const std::string& out_dir,
               const char* required_preset) {
  lkpz_config* cfg = nullptr;
  lkpz_status status = lkpz_config_parse_file(path.c_str(), &cfg);
  if (status != LKPZ_OK) {
    std::fprintf(stderr, "error: %s\n", lkpz_last_error());
    return 2;
  }
  if (lkpz_config_issue_count(cfg) > 0) {
    std::fprintf(stderr, "%s", lkpz_config_issues(cfg));
    lkpz_config_free(cfg);
    return 2;
  }
  if (required_preset &&
      std::string(lkpz_config_preset(cfg)) != required_preset) {
    std::fprintf(stderr, "error: needs preset %s, config declares %s\n",
                 required_preset, lkpz_config_preset(cfg));
    lkpz_config_free(cfg);
    return 2;
  }
  if (!out_dir.empty()) lkpz_config_set_output_dir(cfg, out_dir.c_str());

  lkpz_result* res = nullptr;
  status = lkpz_execute(cfg, &res);
  if (status != LKPZ_OK) {
    std::fprintf(stderr, "error: %s\n", lkpz_last_error());
    lkpz_config_free(cfg);
    return map_failure(status);
  }
  for (size_t i = 0; i < lkpz_result_check_count(res); ++i) {
    const char* detail = lkpz_result_check_detail(res, i);
    if (*detail)
      std::printf("%s %s (%s)\n", lkpz_result_check_status(res, i),
                  lkpz_result_check_name(res, i), detail);
    else
      std::printf("%s %s\n", lkpz_result_check_status(res, i),
                  lkpz_result_check_name(res, i));
  }
  int code = lkpz_result_exit_code(res);
  lkpz_result_free(res);
  lkpz_config_free(cfg);
  return code;
}

int validate_config(const std::string& path) {
  lkpz_config* cfg = nullptr;
  if (lkpz_config_parse_file(path.c_str(), &cfg) != LKPZ_OK) {
    std::fprintf(stderr, "error: %s\n", lkpz_last_error());
    return 2;
  }
  int code = 0;
  if (lkpz_config_issue_count(cfg) > 0) {
    std::fprintf(stderr, "%s", lkpz_config_issues(cfg));
    code = 2;
  } else {
    std::printf("ok: preset %s\n", lkpz_config_preset(cfg));
  }
  lkpz_config_free(cfg);
  return code;
}

int kernel_command(double alpha, double t, const std::string& grid_spec) {
  int dim = 0, n = 0;
  double box = 0.0;
  if (std::sscanf(grid_spec.c_str(), "%d,%d,%lf", &dim, &n, &box) != 3) {
    std::fprintf(stderr, "error: --grid expects N,n,Lbox\n");
    return 2;
  }
  lkpz_field* field = nullptr;
  lkpz_status status = lkpz_kernel(alpha, t, dim, n, box, &field);
  if (status != LKPZ_OK) {
    std::fprintf(stderr, "error: %s\n", lkpz_last_error());
    return map_failure(status);
  }
  const double* p = lkpz_field_data(field);
  if (dim == 1) {
    std::printf("x,p\n");
    for (int j = 0; j < n; ++j)
      std::printf("%.17g,%.17g\n", lkpz_field_coord(field, j), p[j]);
  } else {
    std::printf("x1,x2,p\n");
    for (int j1 = 0; j1 < n; ++j1)
      for (int j2 = 0; j2 < n; ++j2)
        std::printf("%.17g,%.17g,%.17g\n", lkpz_field_coord(field, j1),
                    lkpz_field_coord(field, j2),
                    p[size_t(j1) * n + j2]);
  }
  lkpz_field_free(field);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pseudo-spectral simulator for u_t = -Lu + lambda |grad u|^q"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  auto* run_cmd = app.add_subcommand("run", "run a preset experiment");
  run_cmd->add_option("config", config_path, "experiment config")->required();
  run_cmd->add_option("--output-dir", out_dir, "override the output directory");

  auto* sweep_cmd =
      app.add_subcommand("sweep", "run a q-sweep across the critical exponent");
  sweep_cmd->add_option("config", config_path, "experiment config")->required();
  sweep_cmd->add_option("--output-dir", out_dir,
                        "override the output directory");

  auto* validate_cmd =
      app.add_subcommand("validate", "parse and validate a config");
  validate_cmd->add_option("config", config_path, "experiment config")
      ->required();

  double alpha = 0.0, t = 0.0;
  std::string grid_spec;
  auto* kernel_cmd =
      app.add_subcommand("kernel", "print the stable kernel on a grid");
  kernel_cmd->add_option("--alpha", alpha, "stability index in (0, 2]")
      ->required();
  kernel_cmd->add_option("--t", t, "time, > 0")->required();
  kernel_cmd->add_option("--grid", grid_spec, "N,n,Lbox")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (run_cmd->parsed()) return run_config(config_path, out_dir, nullptr);
  if (sweep_cmd->parsed()) return run_config(config_path, out_dir, "sweep-q");
  if (validate_cmd->parsed()) return validate_config(config_path);
  if (kernel_cmd->parsed()) return kernel_command(alpha, t, grid_spec);
  return 2;
}
