#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <vector>

#include "error.hpp"

namespace lkpz {

/** Uniform periodic grid on [-box, box)^dim.
 *
 * dim is 1 or 2, n is the number of points per dimension (a power of two,
 * at least 8).  Grid points are x_j = -box + j*spacing with spacing
 * 2*box/n, and the discrete wavenumbers are pi*k/box for signed mode
 * index k in [-n/2, n/2).
 */
struct PeriodicGrid {
  int dim = 1;
  int n = 0;
  double box = 0.0;

  static PeriodicGrid make(int dim, int n, double box);

  double spacing() const { return 2.0 * box / n; }
  std::size_t point_count() const {
    return dim == 1 ? std::size_t(n) : std::size_t(n) * n;
  }
  double cell_volume() const;
  double coord(int j) const { return -box + j * spacing(); }
  int signed_mode(int i) const { return i < n / 2 ? i : i - n; }
  double wavenumber(int k) const;
  double nyquist() const { return wavenumber(n / 2); }
  bool operator==(const PeriodicGrid&) const = default;
};

/** Real scalar field sampled on a PeriodicGrid (row-major in 2d). */
class Field {
 public:
  Field() = default;
  explicit Field(const PeriodicGrid& grid, double fill = 0.0)
      : grid_(grid), v_(grid.point_count(), fill) {}

  // samples f(x) (dim 1) or f(x, y) (dim 2) at the grid points
  static Field sample(const PeriodicGrid& grid,
                      const std::function<double(const double*)>& f);

  const PeriodicGrid& grid() const { return grid_; }
  std::size_t size() const { return v_.size(); }
  double* data() { return v_.data(); }
  const double* data() const { return v_.data(); }
  double& operator[](std::size_t i) { return v_[i]; }
  double operator[](std::size_t i) const { return v_[i]; }

  bool all_finite() const;
  double max_value() const;
  double min_value() const;

 private:
  PeriodicGrid grid_;
  std::vector<double> v_;
};

/** Fourier coefficients of a Field, stored in FFT layout.
 *
 * coefficient(k) is taken with respect to the basis exp(i*xi_k*x) on the
 * box, so that a constant field c has coefficient(0) = c and
 * cos(pi*x/box) has coefficient(+-1) = 1/2.
 */
class SpectralField {
 public:
  SpectralField() = default;
  explicit SpectralField(const PeriodicGrid& grid)
      : grid_(grid), c_(grid.point_count()) {}

  const PeriodicGrid& grid() const { return grid_; }
  std::size_t size() const { return c_.size(); }
  std::complex<double>* data() { return c_.data(); }
  const std::complex<double>* data() const { return c_.data(); }

  std::complex<double> coefficient(int k) const;
  std::complex<double> coefficient(int k1, int k2) const;

 private:
  PeriodicGrid grid_;
  std::vector<std::complex<double>> c_;
};

SpectralField forward(const Field& f);
Field inverse(const SpectralField& F);

/** Spectral derivative along `axis`; the unpaired Nyquist mode is zeroed. */
SpectralField derivative(const SpectralField& F, int axis);
std::vector<Field> gradient(const Field& f);
std::vector<Field> gradient(const SpectralField& F);

/** Discrete Lp norm (sum |f|^p * h^dim)^(1/p); p = INFINITY for the sup. */
double lp_norm(const Field& f, double p);

double dealias_fraction(double q);
/** Zeroes modes with any |k| component above dealias_fraction(q)*(n/2). */
SpectralField dealias(const SpectralField& F, double q);

// small field helpers
Field add_scaled(const Field& a, double ca, const Field& b, double cb);
Field scaled(const Field& a, double c);
Field shifted(const Field& a, double c);
Field magnitude(const std::vector<Field>& components);

}  // namespace lkpz
