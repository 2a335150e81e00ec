#include "spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <tuple>

namespace lkpz {

namespace {

bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

// Plans are cached per (dim, n, sign) and executed on scratch buffers via
// the new-array interface.  fftw_alloc_complex keeps the alignment FFTW
// planned with, and plan creation is serialized (execution is re-entrant).
class PlanCache {
 public:
  fftw_plan get(int dim, int n, int sign) {
    std::lock_guard<std::mutex> lock(mu_);
    auto key = std::make_tuple(dim, n, sign);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;
    std::size_t count = dim == 1 ? std::size_t(n) : std::size_t(n) * n;
    fftw_complex* in = fftw_alloc_complex(count);
    fftw_complex* out = fftw_alloc_complex(count);
    fftw_plan p = dim == 1
                      ? fftw_plan_dft_1d(n, in, out, sign, FFTW_ESTIMATE)
                      : fftw_plan_dft_2d(n, n, in, out, sign, FFTW_ESTIMATE);
    fftw_free(in);
    fftw_free(out);
    plans_.emplace(key, p);
    return p;
  }

 private:
  std::mutex mu_;
  std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

struct ComplexBuffer {
  explicit ComplexBuffer(std::size_t count) : p(fftw_alloc_complex(count)) {}
  ~ComplexBuffer() { fftw_free(p); }
  ComplexBuffer(const ComplexBuffer&) = delete;
  ComplexBuffer& operator=(const ComplexBuffer&) = delete;
  fftw_complex* p;
};

// (-1)^(i1 + i2) translates between the FFT convention (indices from 0)
// and coefficients with respect to exp(i*xi_k*x) on [-box, box).
inline double index_phase(const PeriodicGrid& g, std::size_t i) {
  if (g.dim == 1) return (i & 1) ? -1.0 : 1.0;
  std::size_t i1 = i / g.n, i2 = i % g.n;
  return ((i1 + i2) & 1) ? -1.0 : 1.0;
}

void check_same_grid(const PeriodicGrid& a, const PeriodicGrid& b) {
  if (!(a == b))
    throw Error(ErrorCode::InvalidArgument, "fields live on different grids");
}

}  // namespace

PeriodicGrid PeriodicGrid::make(int dim, int n, double box) {
  if (dim != 1 && dim != 2)
    throw Error(ErrorCode::InvalidArgument, "grid dim must be 1 or 2");
  if (n < 8 || !power_of_two(n))
    throw Error(ErrorCode::InvalidArgument,
                "grid n must be a power of two >= 8");
  if (!(box > 0.0) || !std::isfinite(box))
    throw Error(ErrorCode::InvalidArgument, "grid box must be positive");
  return PeriodicGrid{dim, n, box};
}

double PeriodicGrid::cell_volume() const {
  double h = spacing();
  return dim == 1 ? h : h * h;
}

double PeriodicGrid::wavenumber(int k) const { return M_PI * k / box; }

Field Field::sample(const PeriodicGrid& grid,
                    const std::function<double(const double*)>& f) {
  Field out(grid);
  if (grid.dim == 1) {
    for (int j = 0; j < grid.n; ++j) {
      double x = grid.coord(j);
      out[j] = f(&x);
    }
  } else {
    std::size_t idx = 0;
    for (int j1 = 0; j1 < grid.n; ++j1)
      for (int j2 = 0; j2 < grid.n; ++j2) {
        double x[2] = {grid.coord(j1), grid.coord(j2)};
        out[idx++] = f(x);
      }
  }
  return out;
}

bool Field::all_finite() const {
  for (double x : v_)
    if (!std::isfinite(x)) return false;
  return true;
}

double Field::max_value() const {
  return *std::max_element(v_.begin(), v_.end());
}

double Field::min_value() const {
  return *std::min_element(v_.begin(), v_.end());
}

std::complex<double> SpectralField::coefficient(int k) const {
  if (grid_.dim != 1)
    throw Error(ErrorCode::InvalidArgument, "1d accessor on 2d field");
  if (k < -grid_.n / 2 || k >= grid_.n / 2)
    throw Error(ErrorCode::OutOfRange, "mode index out of range");
  return c_[k >= 0 ? k : k + grid_.n];
}

std::complex<double> SpectralField::coefficient(int k1, int k2) const {
  if (grid_.dim != 2)
    throw Error(ErrorCode::InvalidArgument, "2d accessor on 1d field");
  int half = grid_.n / 2;
  if (k1 < -half || k1 >= half || k2 < -half || k2 >= half)
    throw Error(ErrorCode::OutOfRange, "mode index out of range");
  std::size_t i1 = k1 >= 0 ? k1 : k1 + grid_.n;
  std::size_t i2 = k2 >= 0 ? k2 : k2 + grid_.n;
  return c_[i1 * grid_.n + i2];
}

SpectralField forward(const Field& f) {
  const PeriodicGrid& g = f.grid();
  std::size_t count = g.point_count();
  ComplexBuffer in(count), out(count);
  for (std::size_t i = 0; i < count; ++i) {
    in.p[i][0] = f[i];
    in.p[i][1] = 0.0;
  }
  fftw_execute_dft(plan_cache().get(g.dim, g.n, FFTW_FORWARD), in.p, out.p);
  SpectralField F(g);
  double scale = 1.0 / double(count);
  for (std::size_t i = 0; i < count; ++i) {
    double s = index_phase(g, i) * scale;
    F.data()[i] = {out.p[i][0] * s, out.p[i][1] * s};
  }
  return F;
}

Field inverse(const SpectralField& F) {
  const PeriodicGrid& g = F.grid();
  std::size_t count = g.point_count();
  ComplexBuffer in(count), out(count);
  for (std::size_t i = 0; i < count; ++i) {
    double s = index_phase(g, i);
    in.p[i][0] = F.data()[i].real() * s;
    in.p[i][1] = F.data()[i].imag() * s;
  }
  fftw_execute_dft(plan_cache().get(g.dim, g.n, FFTW_BACKWARD), in.p, out.p);
  Field f(g);
  for (std::size_t i = 0; i < count; ++i) f[i] = out.p[i][0];
  return f;
}

SpectralField derivative(const SpectralField& F, int axis) {
  const PeriodicGrid& g = F.grid();
  if (axis < 0 || axis >= g.dim)
    throw Error(ErrorCode::InvalidArgument, "derivative axis out of range");
  SpectralField D(g);
  const std::complex<double> I(0.0, 1.0);
  if (g.dim == 1) {
    for (int i = 0; i < g.n; ++i) {
      if (i == g.n / 2) {
        D.data()[i] = 0.0;
        continue;
      }
      D.data()[i] = I * g.wavenumber(g.signed_mode(i)) * F.data()[i];
    }
  } else {
    std::size_t idx = 0;
    for (int i1 = 0; i1 < g.n; ++i1)
      for (int i2 = 0; i2 < g.n; ++i2, ++idx) {
        int i_axis = axis == 0 ? i1 : i2;
        if (i_axis == g.n / 2) {
          D.data()[idx] = 0.0;
          continue;
        }
        D.data()[idx] =
            I * g.wavenumber(g.signed_mode(i_axis)) * F.data()[idx];
      }
  }
  return D;
}

std::vector<Field> gradient(const SpectralField& F) {
  std::vector<Field> out;
  out.reserve(F.grid().dim);
  for (int axis = 0; axis < F.grid().dim; ++axis)
    out.push_back(inverse(derivative(F, axis)));
  return out;
}

std::vector<Field> gradient(const Field& f) { return gradient(forward(f)); }

double lp_norm(const Field& f, double p) {
  if (std::isinf(p)) {
    double m = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i)
      m = std::max(m, std::abs(f[i]));
    return m;
  }
  if (!(p >= 1.0))
    throw Error(ErrorCode::InvalidArgument, "lp_norm requires p >= 1");
  double acc = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i)
    acc += std::pow(std::abs(f[i]), p);
  return std::pow(acc * f.grid().cell_volume(), 1.0 / p);
}

double dealias_fraction(double q) { return q <= 3.0 ? 2.0 / 3.0 : 0.5; }

SpectralField dealias(const SpectralField& F, double q) {
  if (!(q > 1.0))
    throw Error(ErrorCode::InvalidArgument, "dealias requires q > 1");
  const PeriodicGrid& g = F.grid();
  double cutoff = dealias_fraction(q) * (g.n / 2);
  SpectralField out = F;
  if (g.dim == 1) {
    for (int i = 0; i < g.n; ++i)
      if (std::abs(g.signed_mode(i)) > cutoff) out.data()[i] = 0.0;
  } else {
    std::size_t idx = 0;
    for (int i1 = 0; i1 < g.n; ++i1)
      for (int i2 = 0; i2 < g.n; ++i2, ++idx)
        if (std::abs(g.signed_mode(i1)) > cutoff ||
            std::abs(g.signed_mode(i2)) > cutoff)
          out.data()[idx] = 0.0;
  }
  return out;
}

Field add_scaled(const Field& a, double ca, const Field& b, double cb) {
  check_same_grid(a.grid(), b.grid());
  Field out(a.grid());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = ca * a[i] + cb * b[i];
  return out;
}

Field scaled(const Field& a, double c) {
  Field out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= c;
  return out;
}

Field shifted(const Field& a, double c) {
  Field out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += c;
  return out;
}

Field magnitude(const std::vector<Field>& components) {
  if (components.empty())
    throw Error(ErrorCode::InvalidArgument, "magnitude of empty vector");
  Field out(components[0].grid());
  for (std::size_t i = 0; i < out.size(); ++i) {
    double s = 0.0;
    for (const Field& c : components) s += c[i] * c[i];
    out[i] = std::sqrt(s);
  }
  return out;
}

}  // namespace lkpz
