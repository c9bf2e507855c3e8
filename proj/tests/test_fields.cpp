#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "gaugelab/fft.hpp"
#include "gaugelab/fields.hpp"
#include "gaugelab/random.hpp"
#include "helpers.hpp"

using namespace gaugelab;
using namespace testutil;

TEST_CASE("lattice validation rejects bad extents and spacings") {
  CHECK_THROWS(Lattice::centered({6, 16, 16, 16}, {0.5, 0.5, 0.5, 0.5}).validate());
  CHECK_THROWS(Lattice::centered({15, 16, 16, 16}, {0.5, 0.5, 0.5, 0.5}).validate());
  CHECK_THROWS(Lattice::centered({16, 16, 16, 16}, {0.0, 0.5, 0.5, 0.5}).validate());
  CHECK_NOTHROW(small_lattice().validate());
}

TEST_CASE("single-term sampling equals the closed form at every site") {
  const Lattice lat = small_lattice();
  const std::array<double, 4> k{1.0, 0.3, 0.2, 0.1};
  const AnsatzTerm t = gaussian_term(k, decayed_width(lat), spin_up());
  const SpinorField f = sample_ansatz({t}, lat);
  for (std::size_t s = 0; s < lat.sites(); s += 7) {
    const auto x = lat.coord(lat.unindex(s));
    const cd expect = t.envelope(x) * t.phase_at(x);
    CHECK(std::abs(f.at(s)[0] - expect) <= 1e-12 + 1e-12 * std::abs(expect));
    // floor amplitude only, far below tolerance, on the other components
    for (int c = 1; c < 4; ++c) CHECK(std::abs(f.at(s)[c]) < 1e-20);
  }
}

TEST_CASE("two-spin field: J.J reduces to (E1^2+E2^2)^2 at interior sites") {
  const Lattice lat = small_lattice();
  const TwoSpinParams p = two_spin_params(lat);
  const SpinorField f = two_spin_field(lat, p);
  for (std::size_t s = 0; s < lat.sites(); s += 11) {
    const auto bi = lat.unindex(s);
    if (!interior(lat, bi, 3)) continue;
    const auto x = lat.coord(bi);
    Spinor u;
    for (int c = 0; c < 4; ++c) u[std::size_t(c)] = f.at(s)[c];
    const Bilinears b = bilinears(u);
    const double jj = mdot(b.J, b.J);
    const double taper = std::exp(-eucl_dist2(x, {}) / (2.0 * p.taper_width * p.taper_width));
    const double e1 = std::cos(mdot(p.k3, x) + p.theta) * taper;
    const double e2 = std::sin(mdot(p.k3, x) + p.theta) * taper;
    const double expect = (e1 * e1 + e2 * e2) * (e1 * e1 + e2 * e2);
    CHECK(std::abs(jj - expect) < 1e-10);
  }
}

TEST_CASE("empty term list is rejected") {
  CHECK_THROWS(sample_ansatz({}, small_lattice()));
}

TEST_CASE("non-decaying envelope at the boundary is rejected") {
  AnsatzTerm t = gaussian_term({1.0, 0.0, 0.0, 0.0}, 50.0, spin_up());  // wider than the box
  CHECK_THROWS(sample_ansatz({t}, small_lattice()));
}

TEST_CASE("fourier transform: plane-wave spike, round trip, Parseval") {
  const Lattice lat = small_lattice(8, 0.7);
  // constant field -> delta at the k=0 bin
  {
    std::vector<cd> d(lat.sites(), cd(1.0, 0.0));
    fourier_forward(lat, d, 1);
    const double vol = lat.box_length(0) * lat.box_length(1) * lat.box_length(2) * lat.box_length(3);
    CHECK(std::abs(d[lat.index(0, 0, 0, 0)] - vol) < 1e-9 * vol);
    double off = 0.0;
    for (std::size_t s = 1; s < lat.sites(); ++s) off = std::max(off, std::abs(d[s]));
    CHECK(off < 1e-9 * vol);
  }
  // commensurate plane wave e^{-i<k,x>} -> spike at its bin
  {
    const double tau = 6.283185307179586;
    const std::array<double, 4> k{tau / lat.box_length(0), -tau / lat.box_length(1), 0.0, 0.0};
    std::vector<cd> d(lat.sites());
    for (std::size_t s = 0; s < lat.sites(); ++s)
      d[s] = std::polar(1.0, -mdot(k, lat.coord(lat.unindex(s))));
    fourier_forward(lat, d, 1);
    // forward phase e^{+i<k',x>}: k0 = +2 pi m/L maps to time bin +1, and the
    // spatial convention k_j = -2 pi m/L maps k_1 = -tau/L to spatial bin +1
    const std::size_t peak = lat.index(1, 1, 0, 0);
    const double vol = lat.box_length(0) * lat.box_length(1) * lat.box_length(2) * lat.box_length(3);
    CHECK(std::abs(d[peak] - vol) < 1e-9 * vol);
  }
  // random field round trip and Parseval
  {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<cd> d(lat.sites() * 4);
    for (auto& z : d) z = cd(g(rng), g(rng));
    const std::vector<cd> orig = d;
    fourier_forward(lat, d, 4);
    double sum_k = 0.0;
    for (const auto& z : d) sum_k += std::norm(z);
    fourier_inverse(lat, d, 4);
    double err = 0.0, sum_x = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
      err = std::max(err, std::abs(d[i] - orig[i]));
      sum_x += std::norm(orig[i]);
    }
    CHECK(err < 1e-12 * std::sqrt(sum_x));
    // Parseval: sum |f|^2 dV = sum |f~|^2 / (V N) * N ... with our scaling:
    // sum_x * dV = sum_k / (N dV)
    const double lhs = sum_x * lat.volume_element();
    const double rhs = sum_k / (double(lat.sites()) * lat.volume_element());
    CHECK(std::abs(lhs - rhs) < 1e-12 * lhs);
  }
}

TEST_CASE("gauge transform preserves sigma, omega, J, Z and X^2+Y^2 pointwise") {
  const Lattice lat = small_lattice(8, 0.7);
  const SpinorField f = two_spin_field(lat);
  const RealScalarField theta = random_theta(lat, 99);
  const SpinorField g = gauge_transform(f, theta);
  for (std::size_t s = 0; s < lat.sites(); s += 3) {
    Spinor u, v;
    for (int c = 0; c < 4; ++c) {
      u[std::size_t(c)] = f.at(s)[c];
      v[std::size_t(c)] = g.at(s)[c];
    }
    CHECK(std::abs(v[0]) == doctest::Approx(std::abs(u[0])).epsilon(1e-13));
    const Bilinears bu = bilinears(u);
    const Bilinears bv = bilinears(v);
    CHECK(std::abs(bu.sigma - bv.sigma) < 1e-12);
    CHECK(std::abs(bu.omega - bv.omega) < 1e-12);
    for (int mu = 0; mu < 4; ++mu) {
      CHECK(std::abs(bu.J[std::size_t(mu)] - bv.J[std::size_t(mu)]) < 1e-12);
      CHECK(std::abs(bu.Z[std::size_t(mu)] - bv.Z[std::size_t(mu)]) < 1e-12);
      const double r2u = bu.X[std::size_t(mu)] * bu.X[std::size_t(mu)] + bu.Y[std::size_t(mu)] * bu.Y[std::size_t(mu)];
      const double r2v = bv.X[std::size_t(mu)] * bv.X[std::size_t(mu)] + bv.Y[std::size_t(mu)] * bv.Y[std::size_t(mu)];
      CHECK(std::abs(r2u - r2v) < 1e-12);
    }
  }
}

TEST_CASE("sampling is homogeneous in the constant spinor amplitudes") {
  const Lattice lat = small_lattice(8, 0.7);
  auto terms = two_spin_terms(two_spin_params(lat));
  const SpinorField f = sample_ansatz(terms, lat);
  for (auto& t : terms)
    for (auto& c : t.spinor) c *= 3.0;
  const SpinorField g = sample_ansatz(terms, lat);
  double err = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < f.data.size(); ++i) {
    err = std::max(err, std::abs(g.data[i] - 3.0 * f.data[i]));
    scale = std::max(scale, std::abs(f.data[i]));
  }
  CHECK(err <= 1e-15 * scale);
}
