#include "voxmill/morphology.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>

namespace voxmill {

namespace {

// FFTW's planner is not thread-safe; executing plans on distinct arrays is.
std::mutex& planner_mutex() {
  static std::mutex mu;
  return mu;
}

// Smallest 5-smooth integer >= n (fast FFT size).
int next_fast_size(int n) {
  if (n <= 1) return 1;
  for (int m = n;; ++m) {
    int r = m;
    for (int p : {2, 3, 5})
      while (r % p == 0) r /= p;
    if (r == 1) return m;
  }
}

void require_rotatable(const ScalarField& f, const Orientation& R) {
  if (!f.spec().isotropic())
    throw UnsupportedError("rotate_resample: grid spacing must be isotropic");
  if (f.spec().is_2d() && !R.is_planar())
    throw UnsupportedError("rotate_resample: 2D fields only rotate about z");
}

}  // namespace

GridSpec rotated_bounds(const GridSpec& spec, const Orientation& R) {
  const double s = spec.spacing[0];
  // Support box of the field (voxel extents, not centers).
  Vec3 lo{spec.origin[0] - 0.5 * spec.spacing[0], spec.origin[1] - 0.5 * spec.spacing[1],
          spec.origin[2] - 0.5 * spec.spacing[2]};
  Vec3 hi{spec.origin[0] + (spec.dims[0] - 0.5) * spec.spacing[0],
          spec.origin[1] + (spec.dims[1] - 0.5) * spec.spacing[1],
          spec.origin[2] + (spec.dims[2] - 0.5) * spec.spacing[2]};
  double mn[3] = {1e300, 1e300, 1e300}, mx[3] = {-1e300, -1e300, -1e300};
  for (int c = 0; c < 8; ++c) {
    Vec3 p{c & 1 ? hi.x : lo.x, c & 2 ? hi.y : lo.y, c & 4 ? hi.z : lo.z};
    Vec3 q = R.apply(p);
    double qa[3] = {q.x, q.y, q.z};
    for (int a = 0; a < 3; ++a) {
      mn[a] = std::min(mn[a], qa[a]);
      mx[a] = std::max(mx[a], qa[a]);
    }
  }
  GridSpec out;
  out.spacing = spec.spacing;
  for (int a = 0; a < 3; ++a) {
    long long c_lo = static_cast<long long>(std::floor(mn[a] / s - 0.5 + 1e-9)) + 1;
    long long c_hi = static_cast<long long>(std::ceil(mx[a] / s + 0.5 - 1e-9)) - 1;
    if (c_hi < c_lo) c_hi = c_lo;
    out.dims[a] = static_cast<int>(c_hi - c_lo + 1);
    out.origin[a] = s * static_cast<double>(c_lo);
  }
  if (spec.is_2d()) {  // planar rotations keep the single layer
    out.dims[2] = 1;
    out.origin[2] = spec.origin[2];
  }
  return out;
}

ScalarField rotate_resample(const ScalarField& f, const Orientation& R) {
  if (R.is_identity()) return f;
  require_rotatable(f, R);
  GridSpec out_spec = rotated_bounds(f.spec(), R);
  ScalarField out(out_spec);
  for (int z = 0; z < out_spec.dims[2]; ++z)
    for (int y = 0; y < out_spec.dims[1]; ++y)
      for (int x = 0; x < out_spec.dims[0]; ++x) {
        Vec3 p = R.apply_inverse(out_spec.center(x, y, z));
        double v = sample_trilinear(f, p);
        if (v != 0.0) out.at(x, y, z) = v;
      }
  return out;
}

ScalarField reflect(const ScalarField& f) {
  const GridSpec& g = f.spec();
  GridSpec out_spec = g;
  for (int a = 0; a < 3; ++a)
    out_spec.origin[a] = -(g.origin[a] + (g.dims[a] - 1) * g.spacing[a]);
  ScalarField out(out_spec);
  for (int z = 0; z < g.dims[2]; ++z)
    for (int y = 0; y < g.dims[1]; ++y)
      for (int x = 0; x < g.dims[0]; ++x)
        out.at(g.dims[0] - 1 - x, g.dims[1] - 1 - y, g.dims[2] - 1 - z) = f.at(x, y, z);
  return out;
}

ScalarField positive_support(const ScalarField& f) {
  ScalarField out(f.spec());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = f[i] > 0.0 ? 1.0 : 0.0;
  return out;
}

// -- ConvolutionPlan ---------------------------------------------------------

struct ConvolutionPlan::Impl {
  GridSpec stationary_spec;
  std::array<int, 3> max_kernel{};
  std::array<int, 3> padded{};
  std::size_t n_real = 0;
  std::size_t n_complex = 0;
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
  std::vector<std::complex<double>> spectrum_a;
  bool has_stationary = false;

  ~Impl() {
    std::lock_guard<std::mutex> lk(planner_mutex());
    if (forward) fftw_destroy_plan(forward);
    if (inverse) fftw_destroy_plan(inverse);
  }
};

ConvolutionPlan::ConvolutionPlan(const GridSpec& stationary,
                                 const std::array<int, 3>& max_kernel_dims)
    : impl_(std::make_unique<Impl>()) {
  stationary.validate();
  for (int a = 0; a < 3; ++a)
    if (max_kernel_dims[a] < 1) throw ParamError("convolution kernel dims must be >= 1");
  impl_->stationary_spec = stationary;
  impl_->max_kernel = max_kernel_dims;
  for (int a = 0; a < 3; ++a)
    impl_->padded[a] = next_fast_size(stationary.dims[a] + max_kernel_dims[a] - 1);

  const auto& p = impl_->padded;
  impl_->n_real = static_cast<std::size_t>(p[0]) * p[1] * p[2];
  impl_->n_complex = static_cast<std::size_t>(p[0] / 2 + 1) * p[1] * p[2];

  // x is the contiguous axis, so FFTW sees the array as [nz][ny][nx].
  std::vector<double> real(impl_->n_real);
  std::vector<std::complex<double>> cplx(impl_->n_complex);
  std::lock_guard<std::mutex> lk(planner_mutex());
  impl_->forward = fftw_plan_dft_r2c_3d(p[2], p[1], p[0], real.data(),
                                        reinterpret_cast<fftw_complex*>(cplx.data()),
                                        FFTW_ESTIMATE | FFTW_UNALIGNED);
  impl_->inverse = fftw_plan_dft_c2r_3d(p[2], p[1], p[0],
                                        reinterpret_cast<fftw_complex*>(cplx.data()),
                                        real.data(), FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (!impl_->forward || !impl_->inverse) throw Error("FFTW plan creation failed");
}

ConvolutionPlan::~ConvolutionPlan() = default;

const std::array<int, 3>& ConvolutionPlan::padded_dims() const { return impl_->padded; }

std::size_t ConvolutionPlan::workspace_bytes() const {
  return impl_->n_real * sizeof(double) + impl_->n_complex * sizeof(std::complex<double>);
}

namespace {

// Copies f into the corner of a zero-padded buffer laid out as [pz][py][px].
void pack_padded(const ScalarField& f, const std::array<int, 3>& p, std::vector<double>& buf) {
  buf.assign(static_cast<std::size_t>(p[0]) * p[1] * p[2], 0.0);
  const auto& d = f.spec().dims;
  for (int z = 0; z < d[2]; ++z)
    for (int y = 0; y < d[1]; ++y) {
      const double* src = &f.values()[f.spec().index(0, y, z)];
      double* dst = &buf[(static_cast<std::size_t>(z) * p[1] + y) * p[0]];
      std::copy(src, src + d[0], dst);
    }
}

}  // namespace

void ConvolutionPlan::set_stationary(const ScalarField& a) {
  if (a.spec() != impl_->stationary_spec)
    throw ShapeError("ConvolutionPlan: stationary field grid changed");
  std::vector<double> real;
  pack_padded(a, impl_->padded, real);
  impl_->spectrum_a.assign(impl_->n_complex, {});
  fftw_execute_dft_r2c(impl_->forward, real.data(),
                       reinterpret_cast<fftw_complex*>(impl_->spectrum_a.data()));
  impl_->has_stationary = true;
}

ScalarField ConvolutionPlan::convolve_with(const ScalarField& b) const {
  if (!impl_->has_stationary)
    throw ParamError("ConvolutionPlan: stationary field not set");
  const GridSpec& ga = impl_->stationary_spec;
  const GridSpec& gb = b.spec();
  if (!ga.same_spacing(gb)) throw ShapeError("convolve: spacing mismatch");
  for (int a = 0; a < 3; ++a)
    if (gb.dims[a] > impl_->max_kernel[a])
      throw ShapeError("convolve: kernel exceeds planned size");

  std::vector<double> real;
  pack_padded(b, impl_->padded, real);
  std::vector<std::complex<double>> spec_b(impl_->n_complex);
  fftw_execute_dft_r2c(impl_->forward, real.data(),
                       reinterpret_cast<fftw_complex*>(spec_b.data()));

  const double scale = ga.dv() / static_cast<double>(impl_->n_real);
  for (std::size_t i = 0; i < impl_->n_complex; ++i)
    spec_b[i] *= impl_->spectrum_a[i] * scale;
  fftw_execute_dft_c2r(impl_->inverse, reinterpret_cast<fftw_complex*>(spec_b.data()),
                       real.data());

  GridSpec out_spec;
  out_spec.spacing = ga.spacing;
  for (int a = 0; a < 3; ++a) {
    out_spec.dims[a] = ga.dims[a] + gb.dims[a] - 1;
    out_spec.origin[a] = ga.origin[a] + gb.origin[a];
  }
  ScalarField out(out_spec);
  const auto& p = impl_->padded;
  double max_abs = 0.0;
  for (int z = 0; z < out_spec.dims[2]; ++z)
    for (int y = 0; y < out_spec.dims[1]; ++y) {
      const double* src = &real[(static_cast<std::size_t>(z) * p[1] + y) * p[0]];
      double* dst = &out.values()[out_spec.index(0, y, z)];
      for (int x = 0; x < out_spec.dims[0]; ++x) {
        dst[x] = src[x];
        max_abs = std::max(max_abs, std::abs(src[x]));
      }
    }
  const double eps = 1e-12 * std::max(ga.dv(), max_abs);
  for (double& v : out.values())
    if (std::abs(v) < eps) v = 0.0;
  return out;
}

ScalarField convolve(const ScalarField& a, const ScalarField& b) {
  ConvolutionPlan plan(a.spec(), b.spec().dims);
  plan.set_stationary(a);
  return plan.convolve_with(b);
}

ScalarField cobstacle_slice(const ScalarField& rho_O, const ScalarField& tool,
                            const Orientation& R) {
  ScalarField oriented = R.is_identity() ? tool : threshold(rotate_resample(tool, R), 0.5);
  return convolve(rho_O, reflect(oriented));
}

ScalarField sweep_accessible(const ScalarField& D_free, const ScalarField& cutter,
                             const Orientation& R, const GridSpec* domain) {
  ScalarField oriented =
      R.is_identity() ? cutter : threshold(rotate_resample(cutter, R), 0.5);
  ScalarField swept = positive_support(convolve(D_free, oriented));
  if (domain) return resample_onto(swept, *domain);
  return swept;
}

}  // namespace voxmill
