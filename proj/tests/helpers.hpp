#pragma once

// Shared fixtures for the test suites: canonical lattices and the standard
// single-term / two-spin ansatz fields used across modules.

#include <array>
#include <cmath>

#include "gaugelab/connection.hpp"
#include "gaugelab/fields.hpp"
#include "gaugelab/lattice.hpp"

namespace testutil {

using namespace gaugelab;

inline Lattice small_lattice(int n = 16, double a = 0.5) {
  return Lattice::centered({n, n, n, n}, {a, a, a, a});
}

inline Spinor spin_up() { return Spinor{cd(1.0), cd(0.0), cd(0.0), cd(0.0)}; }
inline Spinor spin_down() { return Spinor{cd(0.0), cd(1.0), cd(0.0), cd(0.0)}; }

// E(x) e^{-i<k,x> Phi(x)} u0 with a Gaussian envelope at the origin
inline AnsatzTerm gaussian_term(const std::array<double, 4>& k, double width, const Spinor& u0,
                                double phi_width = 1e6) {
  AnsatzTerm t;
  t.envelope.kind = Envelope::Kind::gaussian;
  t.envelope.width = width;
  t.wavevector = k;
  t.regulator.width = phi_width;
  t.spinor = u0;
  return t;
}

struct TwoSpinParams {
  std::array<double, 4> k1{1.0, 0.4, 0.0, 0.0};
  std::array<double, 4> k2{1.0, 0.0, 0.4, 0.0};
  std::array<double, 4> k3{0.0, 0.3, 0.3, 0.0};
  double theta = 0.35;
  double taper_width = 0.62;  // overridden per lattice by decayed_width
  double phi_width = 1e6;     // effectively Phi = 1 over the box
};

// widest Gaussian that drops below the 1e-8 boundary-decay contract on faces
inline double decayed_width(const Lattice& lat) {
  double half = lat.box_length(0);
  for (int j = 0; j < 4; ++j) half = std::min(half, 0.5 * lat.box_length(j));
  return half / 6.2;
}

// the minimal electromagnetically nontrivial field: cos/sin envelopes on the
// doubled wave-number k3 attached to spin-up and spin-down wavevectors k1, k2
inline std::vector<AnsatzTerm> two_spin_terms(const TwoSpinParams& p = {}) {
  AnsatzTerm t1;
  t1.envelope.kind = Envelope::Kind::trig;
  t1.envelope.wavevector = p.k3;
  t1.envelope.phase = p.theta;
  t1.envelope.use_sin = false;
  t1.envelope.width = p.taper_width;
  t1.wavevector = p.k1;
  t1.regulator.width = p.phi_width;
  t1.spinor = spin_up();

  AnsatzTerm t2 = t1;
  t2.envelope.use_sin = true;
  t2.wavevector = p.k2;
  t2.spinor = spin_down();
  return {t1, t2};
}

// Wavevectors commensurate with the box keep the normalized field exactly
// periodic, so the connection stencils see no wrap seam; with L1 = L2 the
// choice also makes <k3, k2-k1> vanish, i.e. the sampled connection is
// divergence-free like its continuum counterpart.
inline TwoSpinParams two_spin_params(const Lattice& lat) {
  TwoSpinParams p;
  const double tau = 6.283185307179586;
  const double b0 = tau / lat.box_length(0);
  const double b1 = tau / lat.box_length(1);
  const double b2 = tau / lat.box_length(2);
  p.k1 = {2.0 * b0, b1, 0.0, 0.0};
  p.k2 = {2.0 * b0, 0.0, b2, 0.0};
  p.k3 = {0.0, b1, b2, 0.0};
  p.taper_width = decayed_width(lat);
  return p;
}

inline SpinorField two_spin_field(const Lattice& lat, const TwoSpinParams& p) {
  return sample_ansatz(two_spin_terms(p), lat);
}

inline SpinorField two_spin_field(const Lattice& lat) { return two_spin_field(lat, two_spin_params(lat)); }

inline SpinorField single_term_field(const Lattice& lat, const std::array<double, 4>& k = {1.0, 0.3, 0.2, 0.1}) {
  return sample_ansatz({gaussian_term(k, decayed_width(lat), spin_up())}, lat);
}

// sites at least `margin` sites away from every boundary
inline bool interior(const Lattice& lat, const std::array<int, 4>& i, int margin) {
  for (int j = 0; j < 4; ++j)
    if (i[std::size_t(j)] < margin || i[std::size_t(j)] >= lat.n[std::size_t(j)] - margin) return false;
  return true;
}

}  // namespace testutil
