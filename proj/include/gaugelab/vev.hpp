#pragma once

// Closed-form deformed VEVs and transition probabilities. Every quantity is
// assembled from two ingredients per spinor argument: the dressed field U_u
// (mass-shell pairings) and the curvature du[U] (massless-shell pairings),
// combined by the BCH exponential factors. quad_error on each result is the
// Richardson estimate from re-evaluating the whole formula on the
// every-other-site coarsening of the same dressed data.

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "gaugelab/dressing.hpp"
#include "gaugelab/shell.hpp"

namespace gaugelab {

struct ModelParams {
  double m = 1.0;       // Dirac mass (inverse length)
  double lambda = 0.0;  // real coupling of the bivector dressing exponential

  void validate() const {
    if (!(m > 0.0)) throw std::invalid_argument("ModelParams: m must be > 0");
  }
};

// dressed spinor together with its curvature bivector
struct VevLeg {
  SpinorField field;     // U_u
  BivectorGridField du;  // du[U], from the undressed connection
};

inline VevLeg make_leg(const SpinorField& U, const XiKernel& k, const ConnectionOptions& opt = {}) {
  VevLeg leg;
  const VectorGridField u = connection_u(U, opt);
  leg.du = curvature(u);
  leg.field = apply_phase(U, apply_xi(k, u));
  return leg;
}

inline VevLeg coarsen(const VevLeg& leg) { return VevLeg{coarsen(leg.field), coarsen(leg.du)}; }

namespace detail {

struct LegTransforms {
  ShellSpinor sp;    // forward-shell transform of the dressed field
  ShellBivector db;  // massless-shell transform of the curvature
};

inline LegTransforms leg_transforms(const VevLeg& leg, double m) {
  return LegTransforms{shell_transform(leg.field, m, +1), shell_bivector_transform(leg.du)};
}

inline cd det2(cd a11, cd a12, cd a21, cd a22) { return a11 * a22 - a12 * a21; }

// evaluate a formula at h and at 2h and report the Richardson pair
template <class F>
VevResult with_refinement(const Lattice& lat, const std::vector<const VevLeg*>& legs, double m, F&& formula) {
  std::vector<LegTransforms> tr;
  tr.reserve(legs.size());
  for (const VevLeg* l : legs) tr.push_back(leg_transforms(*l, m));
  VevResult r;
  r.value = formula(tr, false);
  if (coarsenable(lat)) {
    std::vector<LegTransforms> tr2;
    tr2.reserve(legs.size());
    for (const VevLeg* l : legs) tr2.push_back(leg_transforms(coarsen(*l), m));
    r.quad_error = std::abs(r.value - formula(tr2, true));
  }
  return r;
}

}  // namespace detail

// <xi_V^dag xi_U> = (V_u, U_u)_+
inline VevResult vev2_xi(const VevLeg& V, const VevLeg& U, const ModelParams& p) {
  p.validate();
  auto formula = [&](const std::vector<detail::LegTransforms>& t, bool) {
    return detail::ip_shell_from_transforms(t[0].sp, t[1].sp);
  };
  return detail::with_refinement(U.field.lat, {&V, &U}, p.m, formula);
}

// <Psi_V^dag Psi_U> = (V_u,U_u)_+ e^{-l^2/2 (dV,dV) - l^2/2 (dU,dU) + l^2 (dV,dU)}
inline VevResult vev2_psi(const VevLeg& V, const VevLeg& U, const ModelParams& p) {
  p.validate();
  const double l2 = p.lambda * p.lambda;
  auto formula = [&](const std::vector<detail::LegTransforms>& t, bool) {
    const cd base = detail::ip_shell_from_transforms(t[0].sp, t[1].sp);
    const cd vv = detail::ip_maxwell_from_transforms(t[0].db, t[0].db);
    const cd uu = detail::ip_maxwell_from_transforms(t[1].db, t[1].db);
    const cd vu = detail::ip_maxwell_from_transforms(t[0].db, t[1].db);
    return base * std::exp(-0.5 * l2 * vv - 0.5 * l2 * uu + l2 * vu);
  };
  return detail::with_refinement(U.field.lat, {&V, &U}, p.m, formula);
}

// <F_f^dag Psi'_V^dag Psi'_U> = (V_u,U_u)_+ i l [(f,dU) - (f,dV)] e^{l^2 (dV,dU)}
inline VevResult vev3(const BivectorGridField& f, const VevLeg& V, const VevLeg& U, const ModelParams& p) {
  p.validate();
  const double l2 = p.lambda * p.lambda;
  detail::ShellBivector fh = detail::shell_bivector_transform(f);
  detail::ShellBivector f2h;
  const bool refine = detail::coarsenable(f.lat);
  if (refine) f2h = detail::shell_bivector_transform(coarsen(f));
  auto formula = [&](const std::vector<detail::LegTransforms>& t, bool coarse) {
    const detail::ShellBivector& fb = coarse ? f2h : fh;
    const cd base = detail::ip_shell_from_transforms(t[0].sp, t[1].sp);
    const cd fu = detail::ip_maxwell_from_transforms(fb, t[1].db);
    const cd fv = detail::ip_maxwell_from_transforms(fb, t[0].db);
    const cd vu = detail::ip_maxwell_from_transforms(t[0].db, t[1].db);
    return base * cd(0.0, p.lambda) * (fu - fv) * std::exp(l2 * vu);
  };
  return detail::with_refinement(U.field.lat, {&V, &U}, p.m, formula);
}

// <Psi_V1^dag Psi_V2^dag Psi_U2 Psi_U1>: 2x2 determinant of shell pairings,
// the four 1-point exponentials, and the BCH cross terms
inline VevResult vev4(const VevLeg& V1, const VevLeg& V2, const VevLeg& U2, const VevLeg& U1,
                      const ModelParams& p) {
  p.validate();
  const double l2 = p.lambda * p.lambda;
  auto formula = [&](const std::vector<detail::LegTransforms>& t, bool) {
    const detail::LegTransforms& v1 = t[0];
    const detail::LegTransforms& v2 = t[1];
    const detail::LegTransforms& u2 = t[2];
    const detail::LegTransforms& u1 = t[3];
    const cd det = detail::det2(detail::ip_shell_from_transforms(v1.sp, u1.sp),
                                detail::ip_shell_from_transforms(v1.sp, u2.sp),
                                detail::ip_shell_from_transforms(v2.sp, u1.sp),
                                detail::ip_shell_from_transforms(v2.sp, u2.sp));
    if (p.lambda == 0.0) return det;  // free-field determinant, exponentials disabled
    auto ipm = [](const detail::LegTransforms& a, const detail::LegTransforms& b) {
      return detail::ip_maxwell_from_transforms(a.db, b.db);
    };
    const cd one_point = -0.5 * l2 * (ipm(v1, v1) + ipm(v2, v2) + ipm(u2, u2) + ipm(u1, u1));
    // (dV1+dV2, dU1+dU2) expanded by bilinearity
    const cd cross = -l2 * ipm(v1, v2) +
                     l2 * (ipm(v1, u1) + ipm(v1, u2) + ipm(v2, u1) + ipm(v2, u2)) -
                     l2 * ipm(u2, u1);
    return det * std::exp(one_point + cross);
  };
  return detail::with_refinement(U1.field.lat, {&V1, &V2, &U2, &U1}, p.m, formula);
}

namespace detail {

inline void require_nonzero(cd den, const char* what) {
  if (!(std::abs(den) > 0.0)) throw std::runtime_error(std::string("vanishing denominator in ") + what);
}

}  // namespace detail

// transition probability for U1,U2 -> V1,V2: the 1-point factors cancel and
// the ratio reduces to determinants times e^{-l^2 (Delta,Delta)} with
// Delta = dV1 + dV2 - dU1 - dU2
inline VevResult prob_2to2(const VevLeg& V1, const VevLeg& V2, const VevLeg& U1, const VevLeg& U2,
                           const ModelParams& p) {
  p.validate();
  const double l2 = p.lambda * p.lambda;
  auto formula = [&](const std::vector<detail::LegTransforms>& t, bool) {
    const detail::LegTransforms& v1 = t[0];
    const detail::LegTransforms& v2 = t[1];
    const detail::LegTransforms& u1 = t[2];
    const detail::LegTransforms& u2 = t[3];
    auto ips = [](const detail::LegTransforms& a, const detail::LegTransforms& b) {
      return detail::ip_shell_from_transforms(a.sp, b.sp);
    };
    const cd det_vu = detail::det2(ips(v1, u1), ips(v1, u2), ips(v2, u1), ips(v2, u2));
    const cd det_uv = detail::det2(ips(u1, v1), ips(u1, v2), ips(u2, v1), ips(u2, v2));
    const cd det_vv = detail::det2(ips(v1, v1), ips(v1, v2), ips(v2, v1), ips(v2, v2));
    const cd det_uu = detail::det2(ips(u1, u1), ips(u1, u2), ips(u2, u1), ips(u2, u2));
    detail::require_nonzero(det_vv * det_uu, "prob_2to2");
    cd dd = 0.0;
    if (p.lambda != 0.0) {
      const std::array<const detail::LegTransforms*, 4> legs{&v1, &v2, &u1, &u2};
      const std::array<double, 4> sgn{+1.0, +1.0, -1.0, -1.0};
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
          dd += sgn[std::size_t(i)] * sgn[std::size_t(j)] *
                detail::ip_maxwell_from_transforms(legs[std::size_t(i)]->db, legs[std::size_t(j)]->db);
    }
    return det_vu * det_uv / (det_vv * det_uu) * std::exp(-l2 * dd);
  };
  return detail::with_refinement(U1.field.lat, {&V1, &V2, &U1, &U2}, p.m, formula);
}

namespace detail {

// shared tail of the two radiative probabilities:
// l^2 |(f,dU)-(f,dV)|^2 / den_f * e^{-l^2 (dV-dU, dV-dU)}
inline cd radiative_factor(const ShellBivector& fb, const LegTransforms& v, const LegTransforms& u,
                           double lambda, bool include_fv_in_denominator) {
  const double l2 = lambda * lambda;
  const cd fu = ip_maxwell_from_transforms(fb, u.db);
  const cd fv = ip_maxwell_from_transforms(fb, v.db);
  const cd ff = ip_maxwell_from_transforms(fb, fb);
  const cd den = include_fv_in_denominator ? ff + l2 * std::norm(fv) : ff;
  require_nonzero(den, "radiative denominator (f,f)_0");
  const cd dvu = ip_maxwell_from_transforms(v.db, v.db) - ip_maxwell_from_transforms(v.db, u.db) -
                 ip_maxwell_from_transforms(u.db, v.db) + ip_maxwell_from_transforms(u.db, u.db);
  return l2 * std::norm(fu - fv) / den * std::exp(-l2 * dvu);
}

}  // namespace detail

// transition probability for U -> V, f
inline VevResult prob_1to2(const VevLeg& U, const VevLeg& V, const BivectorGridField& f,
                           const ModelParams& p) {
  p.validate();
  detail::ShellBivector fh = detail::shell_bivector_transform(f);
  detail::ShellBivector f2h;
  const bool refine = detail::coarsenable(f.lat);
  if (refine) f2h = detail::shell_bivector_transform(coarsen(f));
  auto formula = [&](const std::vector<detail::LegTransforms>& t, bool coarse) {
    const detail::LegTransforms& v = t[0];
    const detail::LegTransforms& u = t[1];
    const cd vu = detail::ip_shell_from_transforms(v.sp, u.sp);
    const cd vv = detail::ip_shell_from_transforms(v.sp, v.sp);
    const cd uu = detail::ip_shell_from_transforms(u.sp, u.sp);
    detail::require_nonzero(vv * uu, "prob_1to2");
    const cd rad = detail::radiative_factor(coarse ? f2h : fh, v, u, p.lambda, true);
    return std::norm(vu) / (vv * uu) * rad;
  };
  return detail::with_refinement(U.field.lat, {&V, &U}, p.m, formula);
}

// transition probability for U, anti-particle(V) -> f; the antiparticle enters
// through the dressed charge conjugate V^c_u
inline VevResult prob_annihilate(const VevLeg& U, const VevLeg& V, const VevLeg& Vc,
                                 const BivectorGridField& f, const ModelParams& p) {
  p.validate();
  detail::ShellBivector fh = detail::shell_bivector_transform(f);
  detail::ShellBivector f2h;
  if (detail::coarsenable(f.lat)) f2h = detail::shell_bivector_transform(coarsen(f));
  auto formula = [&](const std::vector<detail::LegTransforms>& t, bool coarse) {
    const detail::LegTransforms& v = t[0];
    const detail::LegTransforms& u = t[1];
    const detail::LegTransforms& vc = t[2];
    const cd vu = detail::ip_shell_from_transforms(v.sp, u.sp);
    const cd den = detail::det2(detail::ip_shell_from_transforms(u.sp, u.sp),
                                detail::ip_shell_from_transforms(u.sp, vc.sp),
                                detail::ip_shell_from_transforms(vc.sp, u.sp),
                                detail::ip_shell_from_transforms(vc.sp, vc.sp));
    detail::require_nonzero(den, "prob_annihilate");
    const cd rad = detail::radiative_factor(coarse ? f2h : fh, v, u, p.lambda, false);
    return std::norm(vu) / den * rad;
  };
  return detail::with_refinement(U.field.lat, {&V, &U, &Vc}, p.m, formula);
}

}  // namespace gaugelab
