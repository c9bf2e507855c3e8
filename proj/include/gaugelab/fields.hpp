#pragma once

// Spinor / vector / bivector test-function data on a 4D lattice, plus the
// closed-form ansatz grammar: sums of terms E(x) e^{-i<k,x> Phi(x)} u0 with
// Gaussian or trig-times-taper envelopes and a Gaussian long-range regulator.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "gaugelab/algebra.hpp"
#include "gaugelab/lattice.hpp"
#include "gaugelab/reduce.hpp"

namespace gaugelab {

// Euclidean distance squared in the lattice frame
inline double eucl_dist2(const std::array<double, 4>& x, const std::array<double, 4>& c) {
  double s = 0.0;
  for (int j = 0; j < 4; ++j) {
    const double d = x[std::size_t(j)] - c[std::size_t(j)];
    s += d * d;
  }
  return s;
}

struct Envelope {
  enum class Kind { gaussian, trig };
  Kind kind = Kind::gaussian;
  std::array<double, 4> center{};  // gaussian center, or taper center for trig
  double width = 1.0;              // gaussian width, or taper width for trig
  // trig only: cos/sin(<k3,x> + phase) times Gaussian taper
  std::array<double, 4> wavevector{};
  double phase = 0.0;
  bool use_sin = false;

  double operator()(const std::array<double, 4>& x) const {
    const double taper = std::exp(-eucl_dist2(x, center) / (2.0 * width * width));
    if (kind == Kind::gaussian) return taper;
    const double arg = mdot(wavevector, x) + phase;
    return (use_sin ? std::sin(arg) : std::cos(arg)) * taper;
  }
};

// long-range regularization Phi(x); Gaussian in the lattice frame, ~1 in the
// interior when the width is large
struct Regulator {
  std::array<double, 4> center{};
  double width = 8.0;
  double operator()(const std::array<double, 4>& x) const {
    return std::exp(-eucl_dist2(x, center) / (2.0 * width * width));
  }
};

struct AnsatzTerm {
  Envelope envelope;
  std::array<double, 4> wavevector{};
  Regulator regulator;
  Spinor spinor{};

  cd phase_at(const std::array<double, 4>& x) const {
    return std::polar(1.0, -mdot(wavevector, x) * regulator(x));
  }
};

struct SpinorField {
  Lattice lat;
  std::vector<cd> data;          // 4 components per site
  std::vector<AnsatzTerm> terms;  // nonempty when built from an ansatz

  std::size_t site_offset(std::size_t s) const { return 4 * s; }
  cd* at(std::size_t s) { return data.data() + 4 * s; }
  const cd* at(std::size_t s) const { return data.data() + 4 * s; }

  double max_site_abs() const {
    double m = 0.0;
    for (std::size_t s = 0; s < lat.sites(); ++s) {
      const cd* u = at(s);
      double q = 0.0;
      for (int c = 0; c < 4; ++c) q += std::norm(u[c]);
      m = std::max(m, q);
    }
    return std::sqrt(m);
  }

  double l2_norm() const {
    std::vector<double> sq(lat.sites());
    for (std::size_t s = 0; s < lat.sites(); ++s) {
      const cd* u = at(s);
      double q = 0.0;
      for (int c = 0; c < 4; ++c) q += std::norm(u[c]);
      sq[s] = q;
    }
    return std::sqrt(pairwise_sum(sq) * lat.volume_element());
  }
};

struct RealScalarField {
  Lattice lat;
  std::vector<double> data;  // 1 per site
};

struct VectorGridField {
  Lattice lat;
  std::vector<double> data;  // covariant components u_alpha, 4 per site
  double* at(std::size_t s) { return data.data() + 4 * s; }
  const double* at(std::size_t s) const { return data.data() + 4 * s; }
};

// antisymmetric rank-2 field, 6 independent components in the order
// (01, 02, 03, 12, 13, 23)
struct BivectorGridField {
  Lattice lat;
  std::vector<double> data;  // 6 per site
  double* at(std::size_t s) { return data.data() + 6 * s; }
  const double* at(std::size_t s) const { return data.data() + 6 * s; }

  static int pair_index(int mu, int nu) {
    static constexpr int tbl[4][4] = {{-1, 0, 1, 2}, {0, -1, 3, 4}, {1, 3, -1, 5}, {2, 4, 5, -1}};
    return tbl[mu][nu];
  }
  // F_{mu nu} with sign
  double component(std::size_t s, int mu, int nu) const {
    if (mu == nu) return 0.0;
    const double v = at(s)[pair_index(mu, nu)];
    return mu < nu ? v : -v;
  }
};

inline constexpr double kAmplitudeFloorRel = 1e-60;
inline constexpr double kBoundaryDecayRel = 1e-8;

namespace detail {

// max |field| over the periodic seam slabs (any index == 0)
inline double boundary_max(const SpinorField& f) {
  double m = 0.0;
  for (std::size_t s = 0; s < f.lat.sites(); ++s) {
    const auto i = f.lat.unindex(s);
    if (i[0] != 0 && i[1] != 0 && i[2] != 0 && i[3] != 0) continue;
    const cd* u = f.at(s);
    double q = 0.0;
    for (int c = 0; c < 4; ++c) q += std::norm(u[c]);
    m = std::max(m, q);
  }
  return std::sqrt(m);
}

}  // namespace detail

// Pointwise sum of the ansatz terms, then the amplitude floor: test functions
// must be nonzero everywhere for the connection to exist, so sites below
// kAmplitudeFloorRel * max get a tiny plane-wave seed at the first term's
// wavevector.
inline SpinorField sample_ansatz(const std::vector<AnsatzTerm>& terms, const Lattice& lat) {
  if (terms.empty()) throw std::invalid_argument("sample_ansatz: empty term list would be zero everywhere");
  lat.validate();
  SpinorField f;
  f.lat = lat;
  f.terms = terms;
  f.data.assign(4 * lat.sites(), cd{});
  parallel_for(lat.sites(), [&](std::size_t b, std::size_t e) {
    for (std::size_t s = b; s < e; ++s) {
      const auto x = lat.coord(lat.unindex(s));
      cd* u = f.at(s);
      for (const AnsatzTerm& t : terms) {
        const cd w = t.envelope(x) * t.phase_at(x);
        for (int c = 0; c < 4; ++c) u[c] += w * t.spinor[std::size_t(c)];
      }
    }
  });

  const double peak = f.max_site_abs();
  if (!(peak > 0.0)) throw std::runtime_error("sample_ansatz: field vanishes identically");
  if (detail::boundary_max(f) > kBoundaryDecayRel * peak)
    throw std::runtime_error("sample_ansatz: envelope has not decayed below 1e-8 of peak at the lattice boundary");

  const double floor = kAmplitudeFloorRel * peak;
  const auto& kref = terms.front().wavevector;
  for (std::size_t s = 0; s < lat.sites(); ++s) {
    cd* u = f.at(s);
    double q = 0.0;
    for (int c = 0; c < 4; ++c) q += std::norm(u[c]);
    if (std::sqrt(q) < floor) {
      const auto x = lat.coord(lat.unindex(s));
      const cd w = floor * std::polar(1.0, -mdot(kref, x));
      for (int c = 0; c < 4; ++c) u[c] += w;
    }
  }
  return f;
}

// U(x) -> e^{-i theta(x)} U(x)
inline SpinorField gauge_transform(const SpinorField& f, const RealScalarField& theta) {
  if (!(theta.lat == f.lat)) throw std::invalid_argument("gauge_transform: lattice mismatch");
  SpinorField g;
  g.lat = f.lat;
  g.data.resize(f.data.size());
  parallel_for(f.lat.sites(), [&](std::size_t b, std::size_t e) {
    for (std::size_t s = b; s < e; ++s) {
      const cd w = std::polar(1.0, -theta.data[s]);
      const cd* u = f.at(s);
      cd* v = g.at(s);
      for (int c = 0; c < 4; ++c) v[c] = w * u[c];
    }
  });
  return g;
}

inline SpinorField scale(const SpinorField& f, cd lambda) {
  SpinorField g = f;
  for (cd& v : g.data) v *= lambda;
  return g;
}

inline SpinorField charge_conjugate(const SpinorField& f) {
  SpinorField g;
  g.lat = f.lat;
  g.data.resize(f.data.size());
  for (std::size_t s = 0; s < f.lat.sites(); ++s) {
    Spinor u;
    for (int c = 0; c < 4; ++c) u[std::size_t(c)] = f.at(s)[c];
    const Spinor v = charge_conjugate(u);
    for (int c = 0; c < 4; ++c) g.at(s)[c] = v[std::size_t(c)];
  }
  return g;
}

// every-other-site restriction, for 2h error companions
template <typename FieldT>
FieldT coarsen_field(const FieldT& f, int ncomp) {
  FieldT g;
  g.lat = f.lat.coarsened();
  g.data.resize(std::size_t(ncomp) * g.lat.sites());
  for (std::size_t s = 0; s < g.lat.sites(); ++s) {
    const auto i = g.lat.unindex(s);
    const std::size_t src = f.lat.index(2 * i[0], 2 * i[1], 2 * i[2], 2 * i[3]);
    for (int c = 0; c < ncomp; ++c)
      g.data[std::size_t(ncomp) * s + std::size_t(c)] = f.data[std::size_t(ncomp) * src + std::size_t(c)];
  }
  return g;
}

inline SpinorField coarsen(const SpinorField& f) {
  SpinorField g = coarsen_field(f, 4);
  g.terms = f.terms;
  return g;
}
inline BivectorGridField coarsen(const BivectorGridField& f) { return coarsen_field(f, 6); }
inline VectorGridField coarsen(const VectorGridField& f) { return coarsen_field(f, 4); }
inline RealScalarField coarsen(const RealScalarField& f) { return coarsen_field(f, 1); }

}  // namespace gaugelab
