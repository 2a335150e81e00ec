#include <doctest.h>

#include <cmath>

#include "oracle.hpp"

using namespace lkpz;

namespace {

Field gaussian(const PeriodicGrid& g, double A, double sigma) {
  return Field::sample(g, [=](const double* x) {
    double r2 = x[0] * x[0];
    if (g.dim == 2) r2 += x[1] * x[1];
    return A * std::exp(-0.5 * r2 / (sigma * sigma));
  });
}

double sup_diff(const Field& a, const Field& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

}  // namespace

TEST_CASE("direct convolution cross-validates the spectral semigroup") {
  PeriodicGrid g = PeriodicGrid::make(1, 256, 16.0);
  Field u0 = gaussian(g, 1.0, 1.0);
  for (double alpha : {2.0, 1.5}) {
    SymbolSpec s = SymbolSpec::fractional(alpha);
    Field direct = convolve_semigroup(u0, 1.0, alpha);
    Field spectral = apply_semigroup(u0, 1.0, s);
    CHECK(sup_diff(direct, spectral) < 1e-8);
  }
}

TEST_CASE("convolution maps constants to themselves") {
  PeriodicGrid g = PeriodicGrid::make(1, 128, 8.0);
  Field c(g, 1.7);
  Field out = convolve_semigroup(c, 2.0, 1.5);
  CHECK(sup_diff(out, c) < 1e-12);
  Field same = convolve_semigroup(c, 0.0, 1.5);
  CHECK(sup_diff(same, c) == 0.0);
}

TEST_CASE("convolution in two dimensions") {
  PeriodicGrid g = PeriodicGrid::make(2, 64, 8.0);
  Field u0 = gaussian(g, 1.0, 1.0);
  Field direct = convolve_semigroup(u0, 2.0, 2.0);
  Field spectral = apply_semigroup(u0, 2.0, SymbolSpec::fractional(2.0));
  CHECK(sup_diff(direct, spectral) < 1e-8);
}

TEST_CASE("oracle grids are capped") {
  Field big(PeriodicGrid::make(1, 512, 16.0), 1.0);
  CHECK_THROWS_AS(convolve_semigroup(big, 1.0, 2.0), Error);
  Field big2(PeriodicGrid::make(2, 128, 8.0), 1.0);
  CHECK_THROWS_AS(convolve_semigroup(big2, 1.0, 2.0), Error);
}

TEST_CASE("finite differences cross-validate the nonlinear march") {
  PeriodicGrid g = PeriodicGrid::make(1, 256, 8.0);
  ProblemSpec p;
  p.symbol = SymbolSpec::fractional(2.0);
  p.lambda = -1.0;
  p.q = 2.0;
  p.initial = gaussian(g, 1.0, 1.2);
  p.horizon = 1.0;
  p.dt = 1.0 / 1024;  // exactly the h^2/4 stability bound
  p.sample_times = {1.0};

  Trajectory fd = fd_solve(p);
  REQUIRE(fd.status == RunStatus::Completed);
  Trajectory sp = run(p);
  REQUIRE(sp.status == RunStatus::Completed);

  const Field& a = fd.fields.back();
  const Field& b = sp.fields.back();
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  CHECK(std::sqrt(num / den) < 1e-3);
  CHECK(std::abs(fd.records.back().mass - sp.records.back().mass) < 1e-3);
}

TEST_CASE("finite differences march the heat equation exactly enough") {
  PeriodicGrid g = PeriodicGrid::make(1, 128, 16.0);
  ProblemSpec p;
  p.symbol = SymbolSpec::fractional(2.0, 1.0);
  p.lambda = 0.0;
  p.q = 2.0;
  p.initial = gaussian(g, 1.0, 2.0);
  p.horizon = 1.0;
  p.dt = 1.0 / 256;
  p.sample_times = {1.0};
  Trajectory fd = fd_solve(p);
  Field exact = apply_semigroup(p.initial, 1.0, p.symbol);
  CHECK(sup_diff(fd.fields.back(), exact) < 5e-4);
}

TEST_CASE("finite differences enforce their stability bound") {
  PeriodicGrid g = PeriodicGrid::make(1, 256, 16.0);
  ProblemSpec p;
  p.symbol = SymbolSpec::fractional(2.0);
  p.lambda = 0.0;
  p.q = 2.0;
  p.initial = gaussian(g, 1.0, 1.5);
  p.horizon = 1.0;
  p.dt = 1.0 / 128;  // above h^2/(4 ell) ~ 1/1024
  p.sample_times = {1.0};
  CHECK_THROWS_AS(fd_solve(p), Error);
}

TEST_CASE("finite differences require the pure alpha = 2 symbol") {
  PeriodicGrid g = PeriodicGrid::make(1, 128, 16.0);
  ProblemSpec p;
  p.symbol = SymbolSpec::fractional(1.5);
  p.lambda = 0.0;
  p.q = 2.0;
  p.initial = gaussian(g, 1.0, 2.0);
  p.horizon = 0.5;
  p.dt = 1.0 / 256;
  p.sample_times = {0.5};
  CHECK_THROWS_AS(fd_solve(p), Error);
  p.symbol = SymbolSpec::multifractional({{1.0, 2.0}, {0.5, 1.0}});
  CHECK_THROWS_AS(fd_solve(p), Error);
}
