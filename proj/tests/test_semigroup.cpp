#include <doctest.h>

#include <cmath>

#include "diagnostics.hpp"
#include "semigroup.hpp"

using namespace lkpz;

namespace {

// e^{t d^2/dx^2} applied to A exp(-x^2/(2 s^2))
double heat_of_gaussian(double x, double t, double A, double s) {
  double v = s * s + 2.0 * t;
  return A * s / std::sqrt(v) * std::exp(-x * x / (2.0 * v));
}

double heat_kernel(double x, double t) {
  return std::exp(-x * x / (4.0 * t)) / std::sqrt(4.0 * M_PI * t);
}

double cauchy_kernel(double x, double t) {
  return t / (M_PI * (x * x + t * t));
}

}  // namespace

TEST_CASE("alpha = 2 semigroup reproduces the analytic heat evolution") {
  PeriodicGrid g = PeriodicGrid::make(1, 512, 32.0);
  SymbolSpec heat = SymbolSpec::fractional(2.0);
  Field u0 = Field::sample(
      g, [](const double* x) { return std::exp(-0.5 * x[0] * x[0]); });
  for (double t : {0.25, 1.0, 4.0}) {
    Field ut = apply_semigroup(u0, t, heat);
    double worst = 0.0;
    for (int j = 0; j < g.n; ++j)
      worst = std::max(
          worst, std::abs(ut[j] - heat_of_gaussian(g.coord(j), t, 1.0, 1.0)));
    CHECK(worst < 1e-8);
  }
}

TEST_CASE("semigroup preserves mass and composes") {
  PeriodicGrid g = PeriodicGrid::make(1, 256, 16.0);
  SymbolSpec s = SymbolSpec::fractional(1.5, 0.7);
  Field u0 = Field::sample(g, [](const double* x) {
    return std::exp(-x[0] * x[0]) * (1.0 + 0.2 * std::sin(x[0]));
  });
  double m0 = mass(u0);
  Field u1 = apply_semigroup(u0, 0.8, s);
  CHECK(mass(u1) == doctest::Approx(m0).epsilon(1e-13));

  Field two_steps = apply_semigroup(apply_semigroup(u0, 0.3, s), 0.5, s);
  double worst = 0.0;
  for (std::size_t i = 0; i < u1.size(); ++i)
    worst = std::max(worst, std::abs(two_steps[i] - u1[i]));
  CHECK(worst < 1e-13);
}

TEST_CASE("t = 0 is the identity") {
  PeriodicGrid g = PeriodicGrid::make(1, 64, 4.0);
  SymbolSpec s = SymbolSpec::fractional(1.0);
  Field u0 = Field::sample(g, [](const double* x) { return std::cos(x[0]); });
  Field u = apply_semigroup(u0, 0.0, s);
  for (int j = 0; j < g.n; ++j) CHECK(u[j] == doctest::Approx(u0[j]));
  CHECK_THROWS_AS(apply_semigroup(u0, -0.1, s), Error);
}

TEST_CASE("stable kernel integrates to one") {
  for (double alpha : {0.8, 1.0, 1.5, 2.0}) {
    PeriodicGrid g = PeriodicGrid::make(1, 1024, 64.0);
    Field k = stable_kernel({alpha, 2.0, g});
    CHECK(std::abs(mass(k) - 1.0) < 1e-13);
  }
}

TEST_CASE("alpha = 2 kernel matches the heat kernel") {
  PeriodicGrid g = PeriodicGrid::make(1, 512, 32.0);
  Field k = stable_kernel({2.0, 1.0, g});
  double worst = 0.0;
  for (int j = 0; j < g.n; ++j)
    if (std::abs(g.coord(j)) <= g.box / 2.0)
      worst = std::max(worst, std::abs(k[j] - heat_kernel(g.coord(j), 1.0)));
  CHECK(worst < 1e-6);
  // peak value (4 pi t)^(-1/2) at the origin
  CHECK(k[g.n / 2] == doctest::Approx(0.28209479177387814).epsilon(1e-12));
}

TEST_CASE("alpha = 1 kernel matches the Cauchy kernel on the inner half") {
  PeriodicGrid g = PeriodicGrid::make(1, 32768, 2048.0);
  Field k = stable_kernel({1.0, 1.0, g});
  double worst = 0.0;
  for (int j = 0; j < g.n; ++j)
    if (std::abs(g.coord(j)) <= g.box / 2.0)
      worst = std::max(worst, std::abs(k[j] - cauchy_kernel(g.coord(j), 1.0)));
  CHECK(worst < 1e-6);
}

TEST_CASE("kernel wrap-around doubles the value at the box edge") {
  // at x = -box the periodized Cauchy kernel sums two equidistant images
  PeriodicGrid g = PeriodicGrid::make(1, 32768, 2048.0);
  Field k = stable_kernel({1.0, 1.0, g});
  double free_tail = cauchy_kernel(g.box, 1.0);
  CHECK(k[0] == doctest::Approx(2.0 * free_tail).epsilon(1e-3));
}

TEST_CASE("kernel positivity and symmetry") {
  PeriodicGrid g = PeriodicGrid::make(1, 1024, 64.0);
  for (double alpha : {0.5, 1.3, 2.0}) {
    Field k = stable_kernel({alpha, 3.0, g});
    CHECK(k.min_value() > -1e-12);
    double peak = k[g.n / 2], worst = 0.0;
    for (int j = 1; j < g.n / 2; ++j)
      worst = std::max(worst, std::abs(k[g.n / 2 + j] - k[g.n / 2 - j]));
    CHECK(worst < 1e-12 * peak);
  }
}

TEST_CASE("stable kernel validates its inputs") {
  PeriodicGrid g = PeriodicGrid::make(1, 64, 8.0);
  CHECK_THROWS_AS(stable_kernel({2.5, 1.0, g}), Error);
  CHECK_THROWS_AS(stable_kernel({0.0, 1.0, g}), Error);
  CHECK_THROWS_AS(stable_kernel({2.0, 0.0, g}), Error);
  try {
    stable_kernel({2.0, 0.25, g});  // width 0.5 < 4 h = 1
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Resolution);
  }
}

TEST_CASE("kernel_value agrees with grid samples and fills between them") {
  PeriodicGrid g = PeriodicGrid::make(1, 512, 32.0);
  Field k = stable_kernel({2.0, 1.0, g});
  double x = g.coord(300);
  CHECK(kernel_value(g, 2.0, 1.0, {&x, 1}) == doctest::Approx(k[300]).epsilon(1e-12));
  double mid = g.coord(300) + 0.5 * g.spacing();
  CHECK(kernel_value(g, 2.0, 1.0, {&mid, 1}) ==
        doctest::Approx(heat_kernel(mid, 1.0)).epsilon(1e-8));
}

TEST_CASE("self-similarity deviation is small for resolved kernels") {
  PeriodicGrid g = PeriodicGrid::make(1, 4096, 256.0);
  CHECK(verify_self_similarity(2.0, 1.0, 4.0, g) < 1e-6);
  CHECK(verify_self_similarity(1.5, 1.0, 4.0, g) < 1e-5);
  CHECK_THROWS_AS(verify_self_similarity(2.0, 1.0, 3.0, g), Error);
}

TEST_CASE("kernel reproduces the semigroup applied to itself") {
  PeriodicGrid g = PeriodicGrid::make(1, 512, 32.0);
  Field k1 = stable_kernel({1.5, 1.0, g});
  Field k2 = stable_kernel({1.5, 3.0, g});
  Field evolved = apply_semigroup(k1, 2.0, SymbolSpec::fractional(1.5));
  double worst = 0.0;
  for (std::size_t i = 0; i < evolved.size(); ++i)
    worst = std::max(worst, std::abs(evolved[i] - k2[i]));
  CHECK(worst < 1e-12);
}
