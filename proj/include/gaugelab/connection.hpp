#pragma once

// U(1)-gauge connections built as local functionals of a spinor test function:
// the principal connection (evaluated through its Fierz-rewritten sigma/omega
// form), the generalized weighted connection, the chiral U(1)xU(1) pair, and
// the derived curvature / divergence fields.
//
// Index bookkeeping: VectorGridField stores covariant components u_alpha, so
// under U -> e^{-i theta} U the connection shifts by the coordinate gradient
// d theta / dx^alpha.

#include <cmath>
#include <cstddef>
#include <atomic>
#include <stdexcept>
#include <string>
#include <vector>

#include "gaugelab/algebra.hpp"
#include "gaugelab/deriv.hpp"
#include "gaugelab/fields.hpp"

namespace gaugelab {

struct DenominatorUnderflow : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

// The stencils act on a pointwise-normalized copy of the field (see
// normalized_copy below), so the connection ratio stays well-conditioned at
// any amplitude the ansatz contracts allow; no support cut is applied beyond
// protecting literal zeros (kSupportFloorRel is far below the sampled-field
// amplitude floor).  Attenuating or truncating the connection in the
// low-amplitude tail is not an option: the connection does not decay with the
// envelope, and any cut keyed to the (steep) envelope injects a sharp
// divergence shell that the retarded kernel radiates into the bulk, breaking
// the idempotence of the dressing.  Sites with support whose denominator
// falls below kNullCollapseRel times its natural local scale are
// inadmissible.
inline constexpr double kSupportFloorRel = 1e-240;
inline constexpr double kNullCollapseRel = 1e-20;

inline std::string site_string(const Lattice& lat, std::size_t s) {
  const auto i = lat.unindex(s);
  return "(" + std::to_string(i[0]) + "," + std::to_string(i[1]) + "," + std::to_string(i[2]) + "," +
         std::to_string(i[3]) + ")";
}

// the four derivative fields d U / dx^alpha
inline std::array<std::vector<cd>, 4> spinor_gradient(const SpinorField& f) {
  std::array<std::vector<cd>, 4> d;
  for (int axis = 0; axis < 4; ++axis) d[std::size_t(axis)] = partial_axis(f.lat, f.data, 4, axis);
  return d;
}

// The connections are exactly invariant under U -> rho(x) U for real positive
// rho: the d rho contributions enter as Im of a real bilinear and drop out.
// Running the stencils on a pointwise-normalized copy exploits this to keep
// the differentiated field's derivatives O(k) everywhere, instead of letting
// the envelope's growing log-derivative wreck the truncation error (and hence
// the connection, at O(1) absolute size) in the low-amplitude tail.  The
// floor only protects against a literal 0/0 at underflow-level amplitudes,
// far below the support cut; anything larger re-introduces the raw envelope
// into the stencils inside the support region.
inline constexpr double kNormFloorRel = 1e-62;

inline SpinorField normalized_copy(const SpinorField& f, double peak) {
  SpinorField v = f;
  v.terms.clear();
  const double e2 = kNormFloorRel * kNormFloorRel * peak * peak;
  parallel_for(f.lat.sites(), [&](std::size_t b, std::size_t e) {
    for (std::size_t s = b; s < e; ++s) {
      double q = 0.0;
      for (int c = 0; c < 4; ++c) q += std::norm(f.at(s)[c]);
      const double inv = 1.0 / std::sqrt(q + e2);
      for (int c = 0; c < 4; ++c) v.at(s)[c] = f.at(s)[c] * inv;
    }
  });
  return v;
}

}  // namespace detail

struct ConnectionOptions {
  bool force_numeric = false;  // disable the single-term analytic fast path
};

// analytic connection of a single ansatz term: u_alpha = d/dx^alpha [<k,x> Phi(x)]
inline VectorGridField analytic_connection(const AnsatzTerm& term, const Lattice& lat) {
  VectorGridField u;
  u.lat = lat;
  u.data.resize(4 * lat.sites());
  const auto& k = term.wavevector;
  const auto& reg = term.regulator;
  parallel_for(lat.sites(), [&](std::size_t b, std::size_t e) {
    for (std::size_t s = b; s < e; ++s) {
      const auto x = lat.coord(lat.unindex(s));
      const double phi = reg(x);
      const double kx = mdot(k, x);
      double* v = u.at(s);
      for (int al = 0; al < 4; ++al) {
        const double k_cov = metric_diag(al) * k[std::size_t(al)];
        const double dphi = -phi * (x[std::size_t(al)] - reg.center[std::size_t(al)]) / (reg.width * reg.width);
        v[al] = k_cov * phi + kx * dphi;
      }
    }
  });
  return u;
}

// principal connection via the Fierz-rewritten form:
//   u_alpha = -Im[ sigma Ubar dU + omega Ubar i g5 dU ] / (sigma^2 + omega^2)
inline VectorGridField connection_u(const SpinorField& f, const ConnectionOptions& opt = {}) {
  if (f.terms.size() == 1 && !opt.force_numeric) return analytic_connection(f.terms.front(), f.lat);

  const double peak = f.max_site_abs();
  // Outside the support of U (below the boundary-decay scale) the connection is
  // set to zero; within the support a collapsing sigma^2+omega^2 against the
  // local |U|^4 marks a (near-)null spinor direction and is rejected loudly.
  const double floor2 = detail::kSupportFloorRel * peak * peak;
  const SpinorField vf = detail::normalized_copy(f, peak);

  VectorGridField u;
  u.lat = f.lat;
  u.data.resize(4 * f.lat.sites());
  const cd i5(0.0, 1.0);
  const Mat4 ig5 = i5 * gamma5();
  std::atomic<std::size_t> bad_site{std::size_t(-1)};
  // one axis at a time: the full four-axis gradient would dominate the memory
  // footprint on large lattices (16 cd per site)
  for (int axis = 0; axis < 4 && bad_site == std::size_t(-1); ++axis) {
    const std::vector<cd> grad = partial_axis(f.lat, vf.data, 4, axis);
    parallel_for(f.lat.sites(), [&](std::size_t b, std::size_t e) {
      for (std::size_t s = b; s < e; ++s) {
        double qo = 0.0;
        for (int c = 0; c < 4; ++c) qo += std::norm(f.at(s)[c]);
        Spinor us;
        double q = 0.0;
        for (int c = 0; c < 4; ++c) {
          us[std::size_t(c)] = vf.at(s)[c];
          q += std::norm(us[std::size_t(c)]);
        }
        double* v = u.at(s);
        if (qo < floor2) {
          v[axis] = 0.0;
          continue;
        }
        const CoSpinor ub = dirac_conjugate(us);
        const double sigma = gaugelab::pair(ub, us).real();
        const double omega = sandwich(ub, ig5, us).real();
        const double den = sigma * sigma + omega * omega;
        if (den < detail::kNullCollapseRel * q * q) {
          bad_site = s;
          return;
        }
        Spinor du;
        for (int c = 0; c < 4; ++c) du[std::size_t(c)] = grad[4 * s + std::size_t(c)];
        const cd aa = gaugelab::pair(ub, du);  // Ubar dU
        const cd bb = sandwich(ub, ig5, du);   // Ubar i g5 dU
        v[axis] = -std::imag(sigma * aa + omega * bb) / den;
      }
    });
  }
  if (bad_site != std::size_t(-1))
    throw DenominatorUnderflow("connection_u: (sigma^2+omega^2) underflow at site " +
                               detail::site_string(f.lat, bad_site) + "; inadmissible test function");
  return u;
}

// generalized connection with constant weights, Re[M1+M2] = 1:
//   u_alpha = (i/2)[ M1 Ubar dU / (Ubar U) + M2 Ubar i g5 dU / (Ubar i g5 U) - c.c. ]
inline VectorGridField connection_general(const SpinorField& f, cd m1, cd m2) {
  if (std::abs((m1 + m2).real() - 1.0) > 1e-12)
    throw std::invalid_argument("connection_general: Re[M1+M2] must equal 1");
  const double peak = f.max_site_abs();
  const double floor2 = detail::kSupportFloorRel * peak * peak;
  const SpinorField vf = detail::normalized_copy(f, peak);
  const auto grad = detail::spinor_gradient(vf);

  VectorGridField u;
  u.lat = f.lat;
  u.data.resize(4 * f.lat.sites());
  const cd i5(0.0, 1.0);
  const Mat4 ig5 = i5 * gamma5();
  const bool use1 = std::abs(m1) > 0.0, use2 = std::abs(m2) > 0.0;
  std::atomic<std::size_t> bad_site{std::size_t(-1)};
  parallel_for(f.lat.sites(), [&](std::size_t b, std::size_t e) {
    for (std::size_t s = b; s < e; ++s) {
      double qo = 0.0;
      for (int c = 0; c < 4; ++c) qo += std::norm(f.at(s)[c]);
      Spinor us;
      double q = 0.0;
      for (int c = 0; c < 4; ++c) {
        us[std::size_t(c)] = vf.at(s)[c];
        q += std::norm(us[std::size_t(c)]);
      }
      double* v = u.at(s);
      if (qo < floor2) {
        for (int al = 0; al < 4; ++al) v[al] = 0.0;
        continue;
      }
      const CoSpinor ub = dirac_conjugate(us);
      const double sigma = gaugelab::pair(ub, us).real();
      const double omega = sandwich(ub, ig5, us).real();
      // each weighted channel divides by sigma or omega alone, so both need a
      // linear-scale guard against the local |U|^2
      const double eps_lin = 1e-10 * q;
      if ((use1 && std::abs(sigma) < eps_lin) || (use2 && std::abs(omega) < eps_lin)) {
        bad_site = s;
        return;
      }
      for (int al = 0; al < 4; ++al) {
        Spinor du;
        for (int c = 0; c < 4; ++c) du[std::size_t(c)] = grad[std::size_t(al)][4 * s + std::size_t(c)];
        cd w = 0.0;
        if (use1) w += m1 * gaugelab::pair(ub, du) / sigma;
        if (use2) w += m2 * sandwich(ub, ig5, du) / omega;
        v[al] = -std::imag(w);  // (i/2)(w - conj(w))
      }
    }
  });
  if (bad_site != std::size_t(-1))
    throw DenominatorUnderflow("connection_general: sigma or omega underflow at weighted site " +
                               detail::site_string(f.lat, bad_site));
  return u;
}

// the sigma/omega-weighted pointwise special case of the generalized
// connection; Fierz-equivalent to connection_u
inline VectorGridField connection_sigma_omega_weighted(const SpinorField& f) {
  const double peak = f.max_site_abs();
  const double floor2 = detail::kSupportFloorRel * peak * peak;
  const SpinorField vf = detail::normalized_copy(f, peak);
  const auto grad = detail::spinor_gradient(vf);
  VectorGridField u;
  u.lat = f.lat;
  u.data.resize(4 * f.lat.sites());
  const cd i5(0.0, 1.0);
  const Mat4 ig5 = i5 * gamma5();
  std::atomic<std::size_t> bad_site{std::size_t(-1)};
  parallel_for(f.lat.sites(), [&](std::size_t b, std::size_t e) {
    for (std::size_t s = b; s < e; ++s) {
      double qo = 0.0;
      for (int c = 0; c < 4; ++c) qo += std::norm(f.at(s)[c]);
      Spinor us;
      double q = 0.0;
      for (int c = 0; c < 4; ++c) {
        us[std::size_t(c)] = vf.at(s)[c];
        q += std::norm(us[std::size_t(c)]);
      }
      double* v = u.at(s);
      if (qo < floor2) {
        for (int al = 0; al < 4; ++al) v[al] = 0.0;
        continue;
      }
      const CoSpinor ub = dirac_conjugate(us);
      const double sigma = gaugelab::pair(ub, us).real();
      const double omega = sandwich(ub, ig5, us).real();
      const double den = sigma * sigma + omega * omega;
      if (den < detail::kNullCollapseRel * q * q) {
        bad_site = s;
        return;
      }
      for (int al = 0; al < 4; ++al) {
        Spinor du;
        for (int c = 0; c < 4; ++c) du[std::size_t(c)] = grad[std::size_t(al)][4 * s + std::size_t(c)];
        // weights M1 = sigma^2/den, M2 = omega^2/den applied pointwise
        cd w = 0.0;
        if (sigma != 0.0) w += (sigma * sigma / den) * gaugelab::pair(ub, du) / sigma;
        if (omega != 0.0) w += (omega * omega / den) * sandwich(ub, ig5, du) / omega;
        v[al] = -std::imag(w);
      }
    }
  });
  if (bad_site != std::size_t(-1))
    throw DenominatorUnderflow("connection_sigma_omega_weighted: denominator underflow at site " +
                               detail::site_string(f.lat, bad_site));
  return u;
}

struct ChiralConnections {
  VectorGridField plus;
  VectorGridField minus;
};

// u_{+-}: under U -> e^{-i(theta1 + g5 theta2)} U they shift by
// d theta1 +- d theta2
inline ChiralConnections chiral_connections(const SpinorField& f) {
  const double peak = f.max_site_abs();
  const double floor2 = detail::kSupportFloorRel * peak * peak;
  const SpinorField vf = detail::normalized_copy(f, peak);
  const auto grad = detail::spinor_gradient(vf);

  std::array<Mat4, 4> gp, gm;
  for (int mu = 0; mu < 4; ++mu) {
    gp[std::size_t(mu)] = gamma(mu) * chiral_proj(+1);
    gm[std::size_t(mu)] = gamma(mu) * chiral_proj(-1);
  }

  ChiralConnections out;
  out.plus.lat = f.lat;
  out.plus.data.resize(4 * f.lat.sites());
  out.minus.lat = f.lat;
  out.minus.data.resize(4 * f.lat.sites());

  std::atomic<std::size_t> bad_site{std::size_t(-1)};
  parallel_for(f.lat.sites(), [&](std::size_t b, std::size_t e) {
    for (std::size_t s = b; s < e; ++s) {
      double qo = 0.0;
      for (int c = 0; c < 4; ++c) qo += std::norm(f.at(s)[c]);
      Spinor us;
      double q = 0.0;
      for (int c = 0; c < 4; ++c) {
        us[std::size_t(c)] = vf.at(s)[c];
        q += std::norm(us[std::size_t(c)]);
      }
      if (qo < floor2) {
        for (int al = 0; al < 4; ++al) out.plus.at(s)[al] = out.minus.at(s)[al] = 0.0;
        continue;
      }
      const CoSpinor ub = dirac_conjugate(us);
      // A^mu_{+-} = Ubar gamma^mu P_{+-} U (real)
      std::array<double, 4> ap{}, am{};
      for (int mu = 0; mu < 4; ++mu) {
        ap[std::size_t(mu)] = sandwich(ub, gp[std::size_t(mu)], us).real();
        am[std::size_t(mu)] = sandwich(ub, gm[std::size_t(mu)], us).real();
      }
      double den = 0.0;
      for (int mu = 0; mu < 4; ++mu) den += metric_diag(mu) * ap[std::size_t(mu)] * am[std::size_t(mu)];
      if (std::abs(den) < detail::kNullCollapseRel * q * q) {
        bad_site = s;
        return;
      }
      for (int al = 0; al < 4; ++al) {
        Spinor du;
        for (int c = 0; c < 4; ++c) du[std::size_t(c)] = grad[std::size_t(al)][4 * s + std::size_t(c)];
        cd np = 0.0, nm = 0.0;
        for (int mu = 0; mu < 4; ++mu) {
          const double g = metric_diag(mu);
          np += g * am[std::size_t(mu)] * sandwich(ub, gp[std::size_t(mu)], du);
          nm += g * ap[std::size_t(mu)] * sandwich(ub, gm[std::size_t(mu)], du);
        }
        out.plus.at(s)[al] = -std::imag(np / den);
        out.minus.at(s)[al] = -std::imag(nm / den);
      }
    }
  });
  if (bad_site != std::size_t(-1))
    throw DenominatorUnderflow("chiral_connections: denominator underflow at site " +
                               detail::site_string(f.lat, bad_site));
  return out;
}

// discrete gradient of a scalar field, same stencil as the connections use
inline VectorGridField gradient(const RealScalarField& theta) {
  VectorGridField g;
  g.lat = theta.lat;
  g.data.resize(4 * theta.lat.sites());
  for (int al = 0; al < 4; ++al) {
    const auto d = partial_axis(theta.lat, theta.data, 1, al);
    for (std::size_t s = 0; s < theta.lat.sites(); ++s) g.at(s)[al] = d[s];
  }
  return g;
}

// du_{mu alpha} = d_mu u_alpha - d_alpha u_mu   (bracket weight 1, no 1/2)
inline BivectorGridField curvature(const VectorGridField& u) {
  std::array<std::vector<double>, 4> d;
  for (int axis = 0; axis < 4; ++axis) d[std::size_t(axis)] = partial_axis(u.lat, u.data, 4, axis);
  BivectorGridField f;
  f.lat = u.lat;
  f.data.resize(6 * u.lat.sites());
  static constexpr int pairs[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
  parallel_for(u.lat.sites(), [&](std::size_t b, std::size_t e) {
    for (std::size_t s = b; s < e; ++s) {
      double* v = f.at(s);
      for (int p = 0; p < 6; ++p) {
        const int mu = pairs[p][0], al = pairs[p][1];
        v[p] = d[std::size_t(mu)][4 * s + std::size_t(al)] - d[std::size_t(al)][4 * s + std::size_t(mu)];
      }
    }
  });
  return f;
}

// d^mu u_mu with the index raised by the metric
inline RealScalarField divergence(const VectorGridField& u) {
  RealScalarField out;
  out.lat = u.lat;
  out.data.assign(u.lat.sites(), 0.0);
  for (int mu = 0; mu < 4; ++mu) {
    const auto d = partial_axis(u.lat, u.data, 4, mu);
    const double g = metric_diag(mu);
    for (std::size_t s = 0; s < u.lat.sites(); ++s) out.data[s] += g * d[4 * s + std::size_t(mu)];
  }
  return out;
}

// (delta du)_alpha = d^mu du_{mu alpha}
inline VectorGridField divergence(const BivectorGridField& f) {
  VectorGridField out;
  out.lat = f.lat;
  out.data.assign(4 * f.lat.sites(), 0.0);
  for (int mu = 0; mu < 4; ++mu) {
    const auto d = partial_axis(f.lat, f.data, 6, mu);
    const double g = metric_diag(mu);
    for (std::size_t s = 0; s < f.lat.sites(); ++s) {
      for (int al = 0; al < 4; ++al) {
        if (al == mu) continue;
        const int p = BivectorGridField::pair_index(mu, al);
        const double sign = mu < al ? 1.0 : -1.0;
        out.at(s)[al] += g * sign * d[6 * s + std::size_t(p)];
      }
    }
  }
  return out;
}

}  // namespace gaugelab
