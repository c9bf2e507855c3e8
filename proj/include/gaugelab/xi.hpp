#pragma once

// Gauge propagators Xi^mu with d_mu Xi^mu = delta^4, applied against
// connection fields:  phi(x) = Int Xi^mu(x-y) u_mu(y) d^4y.
//
//  * grad_retarded / grad_advanced / affine: Xi = grad of a zero-mass Green's
//    function. Applied as G * (div u): spatial axes go through the FFT, the
//    time axis through an explicitly causal (resp. anti-causal) linear
//    convolution with  g_k(t) = theta(t) sin(|k|t)/|k|,  so retarded support
//    is exact rather than an i-epsilon approximation.
//  * steinmann / steinmann_prime: half-line quadrature along the tetrad
//    directions of the defining spinor Z, with multilinear interpolation.
//  * spatial(v): equal-time Coulomb-gradient kernel; momentum-space fast path
//    for v along the time axis, direct plane quadrature for tilted v.

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "gaugelab/algebra.hpp"
#include "gaugelab/connection.hpp"
#include "gaugelab/fft.hpp"
#include "gaugelab/fields.hpp"

namespace gaugelab {

struct XiKernel {
  enum class Variant { grad_retarded, grad_advanced, affine, steinmann, steinmann_prime, spatial };
  Variant variant = Variant::grad_retarded;
  double lambda_ret = 0.5;                  // affine: weight of the retarded part
  Spinor z{cd(1.0), cd(0.0), cd(0.0), cd(0.0)};  // steinmann variants
  std::array<double, 4> v{1.0, 0.0, 0.0, 0.0};   // spatial variant; must be timelike

  static XiKernel retarded() { return XiKernel{}; }
  static XiKernel advanced() {
    XiKernel k;
    k.variant = Variant::grad_advanced;
    return k;
  }
  static XiKernel affine(double lambda) {
    XiKernel k;
    k.variant = Variant::affine;
    k.lambda_ret = lambda;
    return k;
  }
  static XiKernel steinmann(const Spinor& z) {
    XiKernel k;
    k.variant = Variant::steinmann;
    k.z = z;
    return k;
  }
  static XiKernel steinmann_prime(const Spinor& z) {
    XiKernel k;
    k.variant = Variant::steinmann_prime;
    k.z = z;
    return k;
  }
  static XiKernel spatial(const std::array<double, 4>& v) {
    XiKernel k;
    k.variant = Variant::spatial;
    k.v = v;
    return k;
  }
};

struct XiDiagnostics {
  double max_imag_residue = 0.0;  // discarded imaginary part of phi
  double boundary_leak = 0.0;     // max |u| on the lattice seam / max |u|
};

namespace detail {

inline double vector_field_max(const VectorGridField& u) {
  double m = 0.0;
  for (double v : u.data) m = std::max(m, std::abs(v));
  return m;
}

inline double boundary_leak(const VectorGridField& u) {
  double m = 0.0;
  for (std::size_t s = 0; s < u.lat.sites(); ++s) {
    const auto i = u.lat.unindex(s);
    if (i[0] != 0 && i[1] != 0 && i[2] != 0 && i[3] != 0) continue;
    for (int c = 0; c < 4; ++c) m = std::max(m, std::abs(u.at(s)[c]));
  }
  const double peak = vector_field_max(u);
  return peak > 0.0 ? m / peak : 0.0;
}

// Multilinear interpolation of the contraction u_mu(x) d^mu at an arbitrary
// point; zero outside the (non-periodic) sampled box.
inline double interp_contraction(const VectorGridField& u, const std::array<double, 4>& x,
                                 const std::array<double, 4>& dir) {
  std::array<int, 4> base{};
  std::array<double, 4> frac{};
  for (int j = 0; j < 4; ++j) {
    const auto sj = std::size_t(j);
    const double t = (x[sj] - u.lat.origin[sj]) / u.lat.a[sj];
    const double fl = std::floor(t);
    base[sj] = int(fl);
    frac[sj] = t - fl;
    if (base[sj] < 0 || base[sj] + 1 >= u.lat.n[sj]) return 0.0;
  }
  double acc = 0.0;
  for (int corner = 0; corner < 16; ++corner) {
    double w = 1.0;
    std::array<int, 4> idx = base;
    for (int j = 0; j < 4; ++j) {
      if (corner & (1 << j)) {
        idx[std::size_t(j)] += 1;
        w *= frac[std::size_t(j)];
      } else {
        w *= 1.0 - frac[std::size_t(j)];
      }
    }
    const double* uv = u.at(u.lat.index(idx[0], idx[1], idx[2], idx[3]));
    double dot = 0.0;
    for (int mu = 0; mu < 4; ++mu) dot += uv[mu] * dir[std::size_t(mu)];
    acc += w * dot;
  }
  return acc;
}

// Catmull-Rom variant of interp_contraction, O(h^3); used for single-point
// diagnostics where the extra 16x corner count does not matter.
inline double interp_contraction_cubic(const VectorGridField& u, const std::array<double, 4>& x,
                                       const std::array<double, 4>& dir) {
  std::array<int, 4> base{};
  std::array<std::array<double, 4>, 4> wt{};  // per axis, 4 stencil weights
  for (int j = 0; j < 4; ++j) {
    const auto sj = std::size_t(j);
    const double t = (x[sj] - u.lat.origin[sj]) / u.lat.a[sj];
    const double fl = std::floor(t);
    base[sj] = int(fl);
    const double f = t - fl;
    if (base[sj] < 1 || base[sj] + 2 >= u.lat.n[sj]) return interp_contraction(u, x, dir);
    const double f2 = f * f, f3 = f2 * f;
    wt[sj] = {0.5 * (-f3 + 2.0 * f2 - f), 0.5 * (3.0 * f3 - 5.0 * f2 + 2.0),
              0.5 * (-3.0 * f3 + 4.0 * f2 + f), 0.5 * (f3 - f2)};
  }
  double acc = 0.0;
  for (int c0 = 0; c0 < 4; ++c0)
    for (int c1 = 0; c1 < 4; ++c1)
      for (int c2 = 0; c2 < 4; ++c2)
        for (int c3 = 0; c3 < 4; ++c3) {
          const double w = wt[0][std::size_t(c0)] * wt[1][std::size_t(c1)] *
                           wt[2][std::size_t(c2)] * wt[3][std::size_t(c3)];
          const double* uv = u.at(
              u.lat.index(base[0] + c0 - 1, base[1] + c1 - 1, base[2] + c2 - 1, base[3] + c3 - 1));
          double dot = 0.0;
          for (int mu = 0; mu < 4; ++mu) dot += uv[mu] * dir[std::size_t(mu)];
          acc += w * dot;
        }
  return acc;
}

// Int_0^{exit} u_mu(x - s n) n^mu ds by the midpoint rule; n contravariant.
inline double half_line_integral(const VectorGridField& u, const std::array<double, 4>& x,
                                 const std::array<double, 4>& n, bool cubic = false) {
  double min_a = u.lat.a[0];
  for (int j = 1; j < 4; ++j) min_a = std::min(min_a, u.lat.a[std::size_t(j)]);
  const double ds = 0.4 * min_a;
  // distance until the line leaves the sampled box
  double s_exit = 0.0;
  for (int j = 0; j < 4; ++j) {
    const auto sj = std::size_t(j);
    const double lo = u.lat.origin[sj];
    const double hi = u.lat.origin[sj] + (u.lat.n[sj] - 1) * u.lat.a[sj];
    const double span = (n[sj] > 0.0) ? (x[sj] - lo) : (hi - x[sj]);
    if (std::abs(n[sj]) > 1e-15) s_exit = std::max(s_exit, span / std::abs(n[sj]));
  }
  const int steps = int(std::ceil(s_exit / ds));
  double acc = 0.0;
  for (int m = 0; m < steps; ++m) {
    const double s = (m + 0.5) * ds;
    const std::array<double, 4> y{x[0] - s * n[0], x[1] - s * n[1], x[2] - s * n[2], x[3] - s * n[3]};
    acc += cubic ? interp_contraction_cubic(u, y, n) : interp_contraction(u, y, n);
  }
  return acc * ds;
}

struct SteinmannFrame {
  std::array<double, 4> time_dir;   // J / |J|, timelike unit
  std::array<double, 4> space_dir;  // Z-vector / |Z|, spacelike unit
  double wt = 0.0;                  // sigma^2 / (sigma^2 + omega^2)
  double ws = 1.0;
};

inline SteinmannFrame steinmann_frame(const Spinor& z) {
  const Bilinears b = bilinears(z);
  const double n2 = b.sigma.real() * b.sigma.real() + b.omega.real() * b.omega.real();
  if (!(n2 > 1e-30)) throw std::invalid_argument("steinmann kernel: degenerate spinor Z (sigma^2+omega^2 ~ 0)");
  const double norm = std::sqrt(n2);
  SteinmannFrame f;
  for (int mu = 0; mu < 4; ++mu) {
    f.time_dir[std::size_t(mu)] = b.J[std::size_t(mu)] / norm;
    f.space_dir[std::size_t(mu)] = b.Z[std::size_t(mu)] / norm;
  }
  f.wt = b.sigma.real() * b.sigma.real() / n2;
  f.ws = b.omega.real() * b.omega.real() / n2;
  return f;
}

// direction index convention: space_dir/time_dir are contravariant; the line
// integral contracts them against the stored covariant u_mu directly.

// Temporal causal convolution against g(t) = theta(t) sin(|k|t)/|k| for every
// spatial momentum bin, in place on the slice-transformed divergence.
inline void temporal_green_convolve(const Lattice& lat, std::vector<cd>& slices, bool retarded) {
  const int nt = lat.n[0];
  const double at = lat.a[0];
  const std::size_t nsp = lat.sites() / std::size_t(nt);
  std::vector<cd> in(std::size_t(nt), cd{});
  std::vector<double> g(std::size_t(nt), 0.0);
  for (std::size_t s = 0; s < nsp; ++s) {
    std::array<int, 4> bi{0, 0, 0, 0};
    std::size_t r = s;
    bi[3] = int(r % std::size_t(lat.n[3]));
    r /= std::size_t(lat.n[3]);
    bi[2] = int(r % std::size_t(lat.n[2]));
    bi[1] = int(r / std::size_t(lat.n[2]));
    double w2 = 0.0;
    for (int j = 1; j < 4; ++j) {
      const double kj = spatial_bin_freq(lat, j, bi[std::size_t(j)]);
      w2 += kj * kj;
    }
    const double w = std::sqrt(w2);
    for (int dt = 0; dt < nt; ++dt) {
      const double t = dt * at;
      g[std::size_t(dt)] = (w > 0.0) ? std::sin(w * t) / w : t;
    }
    for (int t = 0; t < nt; ++t) in[std::size_t(t)] = slices[std::size_t(t) * nsp + s];
    for (int t = 0; t < nt; ++t) {
      cd acc = 0.0;
      if (retarded) {
        for (int tp = 0; tp <= t; ++tp) acc += g[std::size_t(t - tp)] * in[std::size_t(tp)];
      } else {
        // advanced: G_adv(t) = -theta(-t) sin(|k|t)/|k|
        for (int tp = t; tp < nt; ++tp) acc += g[std::size_t(tp - t)] * in[std::size_t(tp)];
      }
      // Euler-Maclaurin endpoint correction: the trapezoid error at the s = t
      // endpoint is -(at^2/12) g'(0) q(t) with g'(0) = 1, the far endpoint
      // sits in the decayed region. Lifts the temporal rule to O(at^4).
      slices[std::size_t(t) * nsp + s] = acc * at + (at * at / 12.0) * in[std::size_t(t)];
    }
  }
}

inline RealScalarField apply_green_gradient(const VectorGridField& u, double w_ret, double w_adv,
                                            XiDiagnostics* diag) {
  const Lattice& lat = u.lat;
  const RealScalarField div = divergence(u);
  std::vector<cd> work(lat.sites());
  for (std::size_t s = 0; s < lat.sites(); ++s) work[s] = div.data[s];
  fourier_spatial_forward(lat, work, 1);

  std::vector<cd> acc(lat.sites(), cd{});
  if (w_ret != 0.0) {
    std::vector<cd> r = work;
    temporal_green_convolve(lat, r, true);
    for (std::size_t s = 0; s < lat.sites(); ++s) acc[s] += w_ret * r[s];
  }
  if (w_adv != 0.0) {
    // G_adv(t-s) = -theta(s-t) sin(w(t-s))/w = +theta(s-t) sin(w(s-t))/w:
    // the kernel sign and the reversed argument cancel
    std::vector<cd> a = work;
    temporal_green_convolve(lat, a, false);
    for (std::size_t s = 0; s < lat.sites(); ++s) acc[s] += w_adv * a[s];
  }
  fourier_spatial_inverse(lat, acc, 1);

  RealScalarField phi;
  phi.lat = lat;
  phi.data.resize(lat.sites());
  double imres = 0.0;
  for (std::size_t s = 0; s < lat.sites(); ++s) {
    phi.data[s] = acc[s].real();
    imres = std::max(imres, std::abs(acc[s].imag()));
  }
  if (diag) diag->max_imag_residue = imres;
  return phi;
}

// spatial kernel with v along the time axis: per slice, phi^ = -i k_j u^_j / |k|^2
inline RealScalarField apply_spatial_aligned(const VectorGridField& u, XiDiagnostics* diag) {
  const Lattice& lat = u.lat;
  std::vector<cd> work(4 * lat.sites());
  for (std::size_t i = 0; i < u.data.size(); ++i) work[i] = u.data[i];
  fourier_spatial_forward(lat, work, 4);

  const std::size_t nsp = lat.sites() / std::size_t(lat.n[0]);
  std::vector<cd> out(lat.sites(), cd{});
  for (std::size_t s = 0; s < nsp; ++s) {
    std::array<int, 4> bi{0, 0, 0, 0};
    std::size_t r = s;
    bi[3] = int(r % std::size_t(lat.n[3]));
    r /= std::size_t(lat.n[3]);
    bi[2] = int(r % std::size_t(lat.n[2]));
    bi[1] = int(r / std::size_t(lat.n[2]));
    std::array<double, 3> k{};
    double k2 = 0.0;
    for (int j = 1; j < 4; ++j) {
      k[std::size_t(j - 1)] = spatial_bin_freq(lat, j, bi[std::size_t(j)]);
      k2 += k[std::size_t(j - 1)] * k[std::size_t(j - 1)];
    }
    if (!(k2 > 0.0)) continue;  // k=0 mode of the transverse kernel is zero
    for (int t = 0; t < lat.n[0]; ++t) {
      const cd* uv = work.data() + 4 * (std::size_t(t) * nsp + s);
      cd acc = 0.0;
      for (int j = 0; j < 3; ++j) acc += cd(0.0, -k[std::size_t(j)] / k2) * uv[j + 1];
      out[std::size_t(t) * nsp + s] = acc;
    }
  }
  fourier_spatial_inverse(lat, out, 1);

  RealScalarField phi;
  phi.lat = lat;
  phi.data.resize(lat.sites());
  double imres = 0.0;
  for (std::size_t s = 0; s < lat.sites(); ++s) {
    phi.data[s] = out[s].real();
    imres = std::max(imres, std::abs(out[s].imag()));
  }
  if (diag) diag->max_imag_residue = imres;
  return phi;
}

// Minkowski-orthonormal spacelike triad spanning the orthogonal complement of
// the timelike vector v.
inline std::array<std::array<double, 4>, 3> spacelike_triad(const std::array<double, 4>& v) {
  const double vv = mdot(v, v);
  std::array<std::array<double, 4>, 3> e{};
  int found = 0;
  for (int axis = 0; axis < 4 && found < 3; ++axis) {
    std::array<double, 4> c{};
    c[std::size_t(axis)] = 1.0;
    // project out v and previously found directions
    const double cv = mdot(c, v);
    for (int j = 0; j < 4; ++j) c[std::size_t(j)] -= cv / vv * v[std::size_t(j)];
    for (int p = 0; p < found; ++p) {
      const double ce = mdot(c, e[std::size_t(p)]);  // e.e = -1
      for (int j = 0; j < 4; ++j) c[std::size_t(j)] += ce * e[std::size_t(p)][std::size_t(j)];
    }
    const double c2 = -mdot(c, c);
    if (c2 < 1e-12) continue;
    const double inv = 1.0 / std::sqrt(c2);
    for (int j = 0; j < 4; ++j) e[std::size_t(found)][std::size_t(j)] = c[std::size_t(j)] * inv;
    ++found;
  }
  if (found != 3) throw std::runtime_error("spacelike_triad: failed to complete the frame");
  return e;
}

// phi(x) = 1/(4 pi (v.v)) Int d^3xi  (xi . e)^mu u_mu(x - xi.e) / |xi|^3
inline double spatial_plane_eval(const VectorGridField& u, const std::array<double, 4>& x,
                                 const std::array<double, 4>& v,
                                 const std::array<std::array<double, 4>, 3>& e) {
  double min_a = u.lat.a[0];
  for (int j = 1; j < 4; ++j) min_a = std::min(min_a, u.lat.a[std::size_t(j)]);
  const double h = 0.5 * min_a;
  double span = 0.0;
  for (int j = 0; j < 4; ++j) span = std::max(span, u.lat.box_length(j));
  const int half = int(std::ceil(span / h));
  double acc = 0.0;
  for (int i1 = -half; i1 <= half; ++i1)
    for (int i2 = -half; i2 <= half; ++i2)
      for (int i3 = -half; i3 <= half; ++i3) {
        const double r2 = (i1 * i1 + i2 * i2 + i3 * i3) * h * h;
        if (r2 < 0.25 * h * h) continue;  // odd kernel: the inner cell cancels
        std::array<double, 4> w{}, y{};
        for (int j = 0; j < 4; ++j) {
          w[std::size_t(j)] = h * (i1 * e[0][std::size_t(j)] + i2 * e[1][std::size_t(j)] + i3 * e[2][std::size_t(j)]);
          y[std::size_t(j)] = x[std::size_t(j)] - w[std::size_t(j)];
        }
        const double dot = interp_contraction(u, y, w);
        acc += dot / (r2 * std::sqrt(r2));
      }
  const double pi = 3.14159265358979323846;
  (void)v;  // kernel depends on v only through the triad (direction, not scale)
  return acc * h * h * h / (4.0 * pi);
}

}  // namespace detail

// phi at a single point (line/plane kernels); x_phys must lie on the lattice
inline double apply_xi_at(const XiKernel& k, const VectorGridField& u, const std::array<double, 4>& x) {
  switch (k.variant) {
    case XiKernel::Variant::steinmann: {
      const auto f = detail::steinmann_frame(k.z);
      return detail::half_line_integral(u, x, f.space_dir);
    }
    case XiKernel::Variant::steinmann_prime: {
      const auto f = detail::steinmann_frame(k.z);
      double phi = 0.0;
      if (f.wt > 0.0) phi += f.wt * detail::half_line_integral(u, x, f.time_dir);
      if (f.ws > 0.0) phi += f.ws * detail::half_line_integral(u, x, f.space_dir);
      return phi;
    }
    case XiKernel::Variant::spatial: {
      if (!(mdot(k.v, k.v) > 0.0)) throw std::invalid_argument("spatial kernel: v must be timelike (v.v > 0)");
      const auto e = detail::spacelike_triad(k.v);
      return detail::spatial_plane_eval(u, x, k.v, e);
    }
    default:
      throw std::logic_error("apply_xi_at: pointwise evaluation only for distributional kernels");
  }
}

inline RealScalarField apply_xi(const XiKernel& k, const VectorGridField& u, XiDiagnostics* diag = nullptr) {
  if (diag) diag->boundary_leak = detail::boundary_leak(u);
  switch (k.variant) {
    case XiKernel::Variant::grad_retarded:
      return detail::apply_green_gradient(u, 1.0, 0.0, diag);
    case XiKernel::Variant::grad_advanced:
      return detail::apply_green_gradient(u, 0.0, 1.0, diag);
    case XiKernel::Variant::affine:
      return detail::apply_green_gradient(u, k.lambda_ret, 1.0 - k.lambda_ret, diag);
    case XiKernel::Variant::spatial: {
      if (!(mdot(k.v, k.v) > 0.0)) throw std::invalid_argument("spatial kernel: v must be timelike (v.v > 0)");
      if (k.v[1] == 0.0 && k.v[2] == 0.0 && k.v[3] == 0.0) return detail::apply_spatial_aligned(u, diag);
      break;  // tilted v: direct plane quadrature below (expensive; test-scale lattices)
    }
    case XiKernel::Variant::steinmann:
    case XiKernel::Variant::steinmann_prime:
      break;
  }
  RealScalarField phi;
  phi.lat = u.lat;
  phi.data.resize(u.lat.sites());
  parallel_for(u.lat.sites(), [&](std::size_t b, std::size_t e) {
    for (std::size_t s = b; s < e; ++s) phi.data[s] = apply_xi_at(k, u, u.lat.coord(u.lat.unindex(s)));
  });
  return phi;
}

// Int Xi^mu(x) d_mu f(x) d^4x, the weak form of d_mu Xi^mu = delta^4; should
// be close to -f(0). Evaluated as [Xi * w](0) with w(y) = (grad f)(-y), which
// reuses the exact gauge-cancellation path of apply_xi.
inline cd weak_divergence_check(const XiKernel& k, const RealScalarField& f) {
  const Lattice& lat = f.lat;
  for (int j = 0; j < 4; ++j) {
    const double center = lat.origin[std::size_t(j)] + 0.5 * lat.n[std::size_t(j)] * lat.a[std::size_t(j)];
    if (std::abs(center) > 1e-9 * lat.a[std::size_t(j)])
      throw std::invalid_argument("weak_divergence_check requires a centered lattice");
  }
  VectorGridField w = gradient(f);
  // reflect x -> -x, sites map to sites on a centered even lattice
  VectorGridField wr;
  wr.lat = lat;
  wr.data.resize(w.data.size());
  for (std::size_t s = 0; s < lat.sites(); ++s) {
    const auto i = lat.unindex(s);
    const std::size_t r = lat.index(lat.reflect(0, i[0]), lat.reflect(1, i[1]), lat.reflect(2, i[2]),
                                    lat.reflect(3, i[3]));
    for (int c = 0; c < 4; ++c) wr.at(r)[c] = w.at(s)[c];
  }
  const std::array<double, 4> zero{0.0, 0.0, 0.0, 0.0};
  switch (k.variant) {
    case XiKernel::Variant::steinmann: {
      const auto fr = detail::steinmann_frame(k.z);
      return detail::half_line_integral(wr, zero, fr.space_dir, true);
    }
    case XiKernel::Variant::steinmann_prime: {
      const auto fr = detail::steinmann_frame(k.z);
      double phi = 0.0;
      if (fr.wt > 0.0) phi += fr.wt * detail::half_line_integral(wr, zero, fr.time_dir, true);
      if (fr.ws > 0.0) phi += fr.ws * detail::half_line_integral(wr, zero, fr.space_dir, true);
      return phi;
    }
    case XiKernel::Variant::spatial:
      if (!(k.v[1] == 0.0 && k.v[2] == 0.0 && k.v[3] == 0.0)) return apply_xi_at(k, wr, zero);
      break;
    default:
      break;
  }
  const RealScalarField phi = apply_xi(k, wr);
  const std::size_t origin_site = lat.index(lat.n[0] / 2, lat.n[1] / 2, lat.n[2] / 2, lat.n[3] / 2);
  return phi.data[origin_site];
}

}  // namespace gaugelab
