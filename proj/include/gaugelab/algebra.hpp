#pragma once

// Finite-dimensional realization of the Dirac algebra C(1,3): gamma matrices
// in the standard (Dirac) representation, metric diag(1,-1,-1,-1), spinor
// conjugations and the Lorentz bilinears sigma, omega, J, Z, X, Y.
//
// Conventions frozen here and used everywhere else:
//   gamma^5 = i gamma^0 gamma^1 gamma^2 gamma^3   (so gamma^5 = [[0,I],[I,0]])
//   Dirac conjugate  ubar = u^dagger gamma^0
//   charge conjugate u^c  = i gamma^2 u^*         (one fixed phase choice;
//                                                  the phase cancels in every
//                                                  quantity computed here)

#include <array>
#include <complex>
#include <cstddef>

namespace gaugelab {

using cd = std::complex<double>;

struct Mat4 {
  std::array<cd, 16> a{};  // row-major

  cd& operator()(int r, int c) { return a[std::size_t(4 * r + c)]; }
  const cd& operator()(int r, int c) const { return a[std::size_t(4 * r + c)]; }

  friend Mat4 operator*(const Mat4& x, const Mat4& y) {
    Mat4 z;
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) {
        cd s = 0.0;
        for (int k = 0; k < 4; ++k) s += x(r, k) * y(k, c);
        z(r, c) = s;
      }
    return z;
  }
  friend Mat4 operator+(const Mat4& x, const Mat4& y) {
    Mat4 z;
    for (int i = 0; i < 16; ++i) z.a[std::size_t(i)] = x.a[std::size_t(i)] + y.a[std::size_t(i)];
    return z;
  }
  friend Mat4 operator-(const Mat4& x, const Mat4& y) {
    Mat4 z;
    for (int i = 0; i < 16; ++i) z.a[std::size_t(i)] = x.a[std::size_t(i)] - y.a[std::size_t(i)];
    return z;
  }
  friend Mat4 operator*(cd s, const Mat4& x) {
    Mat4 z;
    for (int i = 0; i < 16; ++i) z.a[std::size_t(i)] = s * x.a[std::size_t(i)];
    return z;
  }
  double max_abs() const {
    double m = 0.0;
    for (const cd& v : a) m = std::max(m, std::abs(v));
    return m;
  }
};

using Spinor = std::array<cd, 4>;    // column vector
using CoSpinor = std::array<cd, 4>;  // row vector

inline constexpr double metric_diag(int mu) { return mu == 0 ? 1.0 : -1.0; }

// Minkowski inner product of real 4-vectors, <a,b> = a0 b0 - a.b
inline double mdot(const std::array<double, 4>& x, const std::array<double, 4>& y) {
  return x[0] * y[0] - x[1] * y[1] - x[2] * y[2] - x[3] * y[3];
}

namespace detail {
inline Mat4 make_zero() { return Mat4{}; }

inline Mat4 make_ident() {
  Mat4 m;
  for (int i = 0; i < 4; ++i) m(i, i) = 1.0;
  return m;
}

inline Mat4 make_gamma0() {
  Mat4 m;
  m(0, 0) = 1.0; m(1, 1) = 1.0; m(2, 2) = -1.0; m(3, 3) = -1.0;
  return m;
}

// gamma^i = [[0, sigma_i], [-sigma_i, 0]]
inline Mat4 make_gamma1() {
  Mat4 m;
  m(0, 3) = 1.0; m(1, 2) = 1.0; m(2, 1) = -1.0; m(3, 0) = -1.0;
  return m;
}
inline Mat4 make_gamma2() {
  const cd i(0.0, 1.0);
  Mat4 m;
  m(0, 3) = -i; m(1, 2) = i; m(2, 1) = i; m(3, 0) = -i;
  return m;
}
inline Mat4 make_gamma3() {
  Mat4 m;
  m(0, 2) = 1.0; m(1, 3) = -1.0; m(2, 0) = -1.0; m(3, 1) = 1.0;
  return m;
}
}  // namespace detail

inline const Mat4& ident() {
  static const Mat4 m = detail::make_ident();
  return m;
}

inline const Mat4& gamma(int mu) {
  static const std::array<Mat4, 4> g = {detail::make_gamma0(), detail::make_gamma1(),
                                        detail::make_gamma2(), detail::make_gamma3()};
  return g[std::size_t(mu)];
}

inline const Mat4& gamma5() {
  static const Mat4 m = cd(0.0, 1.0) * (gamma(0) * gamma(1) * gamma(2) * gamma(3));
  return m;
}

// chiral projectors (1 +- gamma^5)/2
inline const Mat4& chiral_proj(int sign) {
  static const Mat4 p = cd(0.5) * (ident() + gamma5());
  static const Mat4 q = cd(0.5) * (ident() - gamma5());
  return sign > 0 ? p : q;
}

inline Spinor apply(const Mat4& m, const Spinor& u) {
  Spinor v{};
  for (int r = 0; r < 4; ++r) {
    cd s = 0.0;
    for (int c = 0; c < 4; ++c) s += m(r, c) * u[std::size_t(c)];
    v[std::size_t(r)] = s;
  }
  return v;
}

// ubar = u^dagger gamma^0; in this basis that is (u0*, u1*, -u2*, -u3*)
inline CoSpinor dirac_conjugate(const Spinor& u) {
  return {std::conj(u[0]), std::conj(u[1]), -std::conj(u[2]), -std::conj(u[3])};
}

// u^c = i gamma^2 u^*
inline Spinor charge_conjugate(const Spinor& u) {
  const cd i(0.0, 1.0);
  Spinor c{};
  const Mat4& g2 = gamma(2);
  for (int r = 0; r < 4; ++r) {
    cd s = 0.0;
    for (int k = 0; k < 4; ++k) s += g2(r, k) * std::conj(u[std::size_t(k)]);
    c[std::size_t(r)] = i * s;
  }
  return c;
}

inline cd pair(const CoSpinor& b, const Spinor& u) {
  return b[0] * u[0] + b[1] * u[1] + b[2] * u[2] + b[3] * u[3];
}

// ubar M v
inline cd sandwich(const CoSpinor& b, const Mat4& m, const Spinor& v) {
  return gaugelab::pair(b, gaugelab::apply(m, v));
}

struct Bilinears {
  cd sigma;                 // ubar u
  cd omega;                 // ubar i gamma^5 u
  std::array<double, 4> J;  // ubar gamma^mu u
  std::array<double, 4> Z;  // ubar gamma^5 gamma^mu u
  std::array<double, 4> X;  // Re[ubar gamma^mu u^c]
  std::array<double, 4> Y;  // Im[ubar gamma^mu u^c]
};

inline Bilinears bilinears(const Spinor& u) {
  const cd i(0.0, 1.0);
  Bilinears b;
  const CoSpinor ub = dirac_conjugate(u);
  const Spinor uc = charge_conjugate(u);
  b.sigma = gaugelab::pair(ub, u);
  b.omega = sandwich(ub, i * gamma5(), u);
  for (int mu = 0; mu < 4; ++mu) {
    b.J[std::size_t(mu)] = sandwich(ub, gamma(mu), u).real();
    b.Z[std::size_t(mu)] = sandwich(ub, gamma5() * gamma(mu), u).real();
    const cd xy = sandwich(ub, gamma(mu), uc);
    b.X[std::size_t(mu)] = xy.real();
    b.Y[std::size_t(mu)] = xy.imag();
  }
  return b;
}

}  // namespace gaugelab
