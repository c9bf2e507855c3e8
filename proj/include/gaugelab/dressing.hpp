#pragma once

// Gauge-invariant dressing: U -> e^{i phi} U with phi = Xi * u[U].  A gauge
// rotation U -> e^{-i theta} U shifts u by grad theta, and since the kernel
// obeys d.Xi = delta the phase shifts by +theta, cancelling the rotation
// (up to the discretization error of the kernel).

#include <cmath>
#include <complex>
#include <cstddef>

#include "gaugelab/connection.hpp"
#include "gaugelab/fft.hpp"
#include "gaugelab/fields.hpp"
#include "gaugelab/xi.hpp"

namespace gaugelab {

struct DressedField {
  SpinorField field;
  RealScalarField phase;   // phi = Xi * u
  XiDiagnostics diag;
};

inline SpinorField apply_phase(const SpinorField& U, const RealScalarField& phi, double sign = 1.0) {
  SpinorField out = U;
  out.terms.clear();  // no longer the sampled ansatz; force the numeric connection path
  parallel_for(U.lat.sites(), [&](std::size_t b, std::size_t e) {
    for (std::size_t s = b; s < e; ++s) {
      const cd ph = std::polar(1.0, sign * phi.data[s]);
      for (int c = 0; c < 4; ++c) out.at(s)[c] = ph * U.at(s)[c];
    }
  });
  return out;
}

// u_scale multiplies the connection before the kernel is applied; the phase is
// linear in u, so this scales phi by the same factor (used to probe the
// small-u regime of the dressing series).
inline DressedField dress(const SpinorField& U, const XiKernel& k, const ConnectionOptions& opt = {},
                          double u_scale = 1.0) {
  DressedField d;
  const VectorGridField u = connection_u(U, opt);
  d.phase = apply_xi(k, u, &d.diag);
  if (u_scale != 1.0)
    for (double& p : d.phase.data) p *= u_scale;
  d.field = apply_phase(U, d.phase);
  return d;
}

struct ChiralDressedField {
  SpinorField field;
  RealScalarField phase_plus;
  RealScalarField phase_minus;
};

// Independent rotation of the two chiral halves: e^{i phi+} P+ U + e^{i phi-} P- U.
inline ChiralDressedField dress_chiral(const SpinorField& U, const XiKernel& k) {
  const ChiralConnections cc = chiral_connections(U);
  ChiralDressedField d;
  d.phase_plus = apply_xi(k, cc.plus);
  d.phase_minus = apply_xi(k, cc.minus);
  d.field = U;
  d.field.terms.clear();
  const Mat4 pp = chiral_proj(+1);
  const Mat4 pm = chiral_proj(-1);
  parallel_for(U.lat.sites(), [&](std::size_t b, std::size_t e) {
    for (std::size_t s = b; s < e; ++s) {
      Spinor v;
      for (int c = 0; c < 4; ++c) v[std::size_t(c)] = U.at(s)[c];
      const Spinor vp = gaugelab::apply(pp, v);
      const Spinor vm = gaugelab::apply(pm, v);
      const cd ep = std::polar(1.0, d.phase_plus.data[s]);
      const cd em = std::polar(1.0, d.phase_minus.data[s]);
      for (int c = 0; c < 4; ++c) d.field.at(s)[c] = ep * vp[std::size_t(c)] + em * vm[std::size_t(c)];
    }
  });
  return d;
}

// Momentum-space partial sum of the dressing exponential: the transform of
// U * sum_{j<=order} (i phi)^j / j!, evaluated term by term in position space
// and transformed once (each term is a j-fold convolution in k).
inline SpinorField dress_series(const SpinorField& U, const XiKernel& k, int order,
                                const ConnectionOptions& opt = {}, double u_scale = 1.0) {
  const VectorGridField u = connection_u(U, opt);
  RealScalarField phi = apply_xi(k, u);
  if (u_scale != 1.0)
    for (double& p : phi.data) p *= u_scale;
  SpinorField out = U;
  out.terms.clear();
  parallel_for(U.lat.sites(), [&](std::size_t b, std::size_t e) {
    for (std::size_t s = b; s < e; ++s) {
      cd sum = 1.0, term = 1.0;
      const cd iphi(0.0, phi.data[s]);
      for (int j = 1; j <= order; ++j) {
        term *= iphi / double(j);
        sum += term;
      }
      for (int c = 0; c < 4; ++c) out.at(s)[c] = sum * U.at(s)[c];
    }
  });
  fourier_forward(out.lat, out.data, 4);
  return out;
}

}  // namespace gaugelab
