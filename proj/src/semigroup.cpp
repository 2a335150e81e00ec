#include "semigroup.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace lkpz {

namespace {

void check_time(double t) {
  if (!(t >= 0.0) || !std::isfinite(t))
    throw Error(ErrorCode::InvalidArgument, "time must be finite and >= 0");
}

// |xi| for every mode in FFT layout
std::vector<double> mode_radii(const PeriodicGrid& g) {
  std::vector<double> r(g.point_count());
  if (g.dim == 1) {
    for (int i = 0; i < g.n; ++i)
      r[i] = std::abs(g.wavenumber(g.signed_mode(i)));
  } else {
    std::size_t idx = 0;
    for (int i1 = 0; i1 < g.n; ++i1)
      for (int i2 = 0; i2 < g.n; ++i2, ++idx) {
        double k1 = g.wavenumber(g.signed_mode(i1));
        double k2 = g.wavenumber(g.signed_mode(i2));
        r[idx] = std::hypot(k1, k2);
      }
  }
  return r;
}

bool integer_power_of_two_ratio(double ratio, int* log2_out) {
  if (!(ratio >= 1.0)) return false;
  double l = std::log2(ratio);
  double rounded = std::round(l);
  if (std::abs(l - rounded) > 1e-9) return false;
  *log2_out = int(rounded);
  return true;
}

}  // namespace

SpectralField apply_semigroup(const SpectralField& F, double t,
                              const SymbolSpec& symbol) {
  check_time(t);
  const PeriodicGrid& g = F.grid();
  std::vector<double> radii = mode_radii(g);
  SpectralField out(g);
  for (std::size_t i = 0; i < radii.size(); ++i)
    out.data()[i] = F.data()[i] * std::exp(-t * symbol.evaluate_radial(radii[i]));
  return out;
}

Field apply_semigroup(const Field& f, double t, const SymbolSpec& symbol) {
  return inverse(apply_semigroup(forward(f), t, symbol));
}

Field stable_kernel(const KernelSpec& spec) {
  if (!(spec.alpha > 0.0) || !(spec.alpha <= 2.0))
    throw Error(ErrorCode::InvalidArgument, "alpha must lie in (0, 2]");
  if (!(spec.t > 0.0))
    throw Error(ErrorCode::InvalidArgument, "kernel time must be positive");
  const PeriodicGrid& g = spec.grid;
  double width = std::pow(spec.t, 1.0 / spec.alpha);
  if (width < 4.0 * g.spacing())
    throw Error(ErrorCode::Resolution,
                "kernel width below 4 grid spacings; refine the grid");
  std::vector<double> radii = mode_radii(g);
  SpectralField F(g);
  double norm = g.dim == 1 ? 1.0 / (2.0 * g.box)
                           : 1.0 / (4.0 * g.box * g.box);
  for (std::size_t i = 0; i < radii.size(); ++i)
    F.data()[i] = norm * std::exp(-spec.t * std::pow(radii[i], spec.alpha));
  return inverse(F);
}

double kernel_value(const PeriodicGrid& grid, double alpha, double t,
                    std::span<const double> x) {
  if (int(x.size()) != grid.dim)
    throw Error(ErrorCode::InvalidArgument, "point dim mismatch");
  // The unpaired Nyquist mode is folded in as a cosine so the series is
  // real; its weight is negligible whenever the kernel is resolved.
  if (grid.dim == 1) {
    double acc = 1.0;  // k = 0
    for (int k = 1; k < grid.n / 2; ++k) {
      double xi = grid.wavenumber(k);
      acc += 2.0 * std::exp(-t * std::pow(xi, alpha)) * std::cos(xi * x[0]);
    }
    double xi_ny = grid.nyquist();
    acc += std::exp(-t * std::pow(xi_ny, alpha)) * std::cos(xi_ny * x[0]);
    return acc / (2.0 * grid.box);
  }
  double acc = 0.0;
  for (int i1 = 0; i1 < grid.n; ++i1) {
    double k1 = grid.wavenumber(grid.signed_mode(i1));
    for (int i2 = 0; i2 < grid.n; ++i2) {
      double k2 = grid.wavenumber(grid.signed_mode(i2));
      double r = std::hypot(k1, k2);
      acc += std::exp(-t * std::pow(r, alpha)) *
             std::cos(k1 * x[0] + k2 * x[1]);
    }
  }
  return acc / (4.0 * grid.box * grid.box);
}

double verify_self_similarity(double alpha, double t1, double t2,
                              const PeriodicGrid& grid) {
  if (!(t1 > 0.0) || !(t2 > 0.0) || t2 < t1)
    throw Error(ErrorCode::InvalidArgument, "need 0 < t1 <= t2");
  int j = 0;
  if (!integer_power_of_two_ratio(t2 / t1, &j))
    throw Error(ErrorCode::InvalidArgument,
                "t2/t1 must be an integer power of two");
  Field p2 = stable_kernel({alpha, t2, grid});
  Field p1 = stable_kernel({alpha, t1, grid});
  double s = std::pow(t2 / t1, 1.0 / alpha);
  double peak = lp_norm(p2, std::numeric_limits<double>::infinity());
  double h = grid.spacing();

  // compare on points of the inner half of the box; when x/s falls on a
  // grid point, look it up, otherwise evaluate the Fourier series there
  auto rescaled_value = [&](const std::vector<double>& y) {
    bool on_grid = true;
    std::vector<int> idx(grid.dim);
    for (int d = 0; d < grid.dim; ++d) {
      double jj = (y[d] + grid.box) / h;
      double rounded = std::round(jj);
      if (std::abs(jj - rounded) > 1e-9) {
        on_grid = false;
        break;
      }
      int ji = int(rounded);
      if (ji < 0 || ji >= grid.n) {
        on_grid = false;
        break;
      }
      idx[d] = ji;
    }
    if (on_grid) {
      std::size_t flat =
          grid.dim == 1 ? idx[0] : std::size_t(idx[0]) * grid.n + idx[1];
      return p1[flat];
    }
    return kernel_value(grid, alpha, t1, std::span<const double>(y));
  };

  double scale = grid.dim == 1 ? 1.0 / s : 1.0 / (s * s);
  double dev = 0.0;
  if (grid.dim == 1) {
    int lo = grid.n / 4, hi = 3 * grid.n / 4;
    int stride = std::max(1, (hi - lo) / 256);
    for (int i = lo; i < hi; i += stride) {
      double x = grid.coord(i);
      std::vector<double> y = {x / s};
      dev = std::max(dev, std::abs(p2[i] - scale * rescaled_value(y)));
    }
  } else {
    int lo = grid.n / 4, hi = 3 * grid.n / 4;
    int stride = std::max(1, (hi - lo) / 16);
    for (int i1 = lo; i1 < hi; i1 += stride)
      for (int i2 = lo; i2 < hi; i2 += stride) {
        std::vector<double> y = {grid.coord(i1) / s, grid.coord(i2) / s};
        std::size_t flat = std::size_t(i1) * grid.n + i2;
        dev = std::max(dev, std::abs(p2[flat] - scale * rescaled_value(y)));
      }
  }
  return dev / peak;
}

}  // namespace lkpz
