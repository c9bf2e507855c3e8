#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gaugelab/connection.hpp"
#include "gaugelab/random.hpp"
#include "helpers.hpp"

using namespace gaugelab;
using namespace testutil;

namespace {

// max over the envelope interior (|U| above half peak; the unresolvable
// Gaussian tail is excluded) of the componentwise difference, normalized by
// the largest reference component
double support_rel_error(const VectorGridField& got, const VectorGridField& ref, const SpinorField& f,
                         double support_rel = 0.5) {
  const double peak = f.max_site_abs();
  double scale = 0.0;
  for (double v : ref.data) scale = std::max(scale, std::abs(v));
  double err = 0.0;
  for (std::size_t s = 0; s < f.lat.sites(); ++s) {
    double q = 0.0;
    for (int c = 0; c < 4; ++c) q += std::norm(f.at(s)[c]);
    if (std::sqrt(q) < support_rel * peak) continue;
    for (int al = 0; al < 4; ++al) err = std::max(err, std::abs(got.at(s)[al] - ref.at(s)[al]));
  }
  return err / scale;
}

double max_abs(const VectorGridField& u) {
  double m = 0.0;
  for (double v : u.data) m = std::max(m, std::abs(v));
  return m;
}

// gradient shift expected under U -> e^{-i theta} U, measured against the same
// stencil the connections use
double shift_residual(const VectorGridField& after, const VectorGridField& before,
                      const RealScalarField& theta, double sgn, const SpinorField& f) {
  const VectorGridField g = gradient(theta);
  VectorGridField diff = after;
  for (std::size_t i = 0; i < diff.data.size(); ++i) diff.data[i] -= before.data[i];
  VectorGridField expect = g;
  for (double& v : expect.data) v *= sgn;
  return support_rel_error(diff, expect, f);
}

SpinorField chiral_gauge_transform(const SpinorField& f, const RealScalarField& theta2) {
  SpinorField g = f;
  g.terms.clear();
  const Mat4 g5 = gamma5();
  for (std::size_t s = 0; s < f.lat.sites(); ++s) {
    const double th = theta2.data[s];
    Spinor u;
    for (int c = 0; c < 4; ++c) u[std::size_t(c)] = f.at(s)[c];
    const Spinor g5u = gaugelab::apply(g5, u);
    for (int c = 0; c < 4; ++c)
      g.at(s)[c] = std::cos(th) * u[std::size_t(c)] - cd(0.0, 1.0) * std::sin(th) * g5u[std::size_t(c)];
  }
  return g;
}

Spinor mixed_spinor() { return Spinor{cd(1.0, 0.0), cd(0.3, 0.1), cd(0.0, 0.2), cd(0.1, -0.2)}; }

// a field whose sigma and omega are both bounded away from zero on the support
SpinorField mixed_field(const Lattice& lat) {
  return sample_ansatz({gaussian_term({1.0, 0.3, 0.2, 0.1}, decayed_width(lat), mixed_spinor())}, lat);
}

}  // namespace

TEST_CASE("numeric connection matches the closed form at O(h^4)") {
  const std::array<double, 4> k{1.0, 0.3, 0.2, 0.1};
  double err[2];
  const int ns[2] = {32, 48};
  const double as[2] = {0.4, 0.8 / 3.0};  // same physical box
  for (int r = 0; r < 2; ++r) {
    const Lattice lat = small_lattice(ns[r], as[r]);
    const SpinorField f = single_term_field(lat, k);
    const VectorGridField ana = analytic_connection(f.terms.front(), lat);
    ConnectionOptions opt;
    opt.force_numeric = true;
    const VectorGridField num = connection_u(f, opt);
    err[r] = support_rel_error(num, ana, f);
  }
  const double order = std::log2(err[0] / err[1]) / std::log2(1.5);
  CHECK(order > 3.5);
  CHECK(err[1] < 5e-3);
}

TEST_CASE("fast path and numeric path agree for a single ansatz term") {
  const Lattice lat = small_lattice(32, 0.4);
  const SpinorField f = single_term_field(lat);
  const VectorGridField fast = connection_u(f);  // analytic route
  ConnectionOptions opt;
  opt.force_numeric = true;
  const VectorGridField num = connection_u(f, opt);
  CHECK(support_rel_error(num, fast, f) < 2e-2);
}

TEST_CASE("two-spin connection interpolates between the two wavevectors") {
  const Lattice lat = small_lattice(32, 0.4);
  const TwoSpinParams p = two_spin_params(lat);
  const SpinorField f = two_spin_field(lat, p);
  const VectorGridField u = connection_u(f);

  double scale = 0.0;
  for (int al = 0; al < 4; ++al)
    scale = std::max(scale, std::abs(metric_diag(al) * p.k1[std::size_t(al)]) +
                                std::abs(metric_diag(al) * p.k2[std::size_t(al)]));
  double err = 0.0;
  for (std::size_t s = 0; s < lat.sites(); ++s) {
    const auto i = lat.unindex(s);
    const auto x = lat.coord(i);
    double r2 = 0.0;
    for (double xc : x) r2 += xc * xc;
    if (r2 > p.taper_width * p.taper_width) continue;  // interior of the taper
    const double arg = mdot(p.k3, x) + p.theta;
    const double c2 = std::cos(arg) * std::cos(arg), s2 = std::sin(arg) * std::sin(arg);
    for (int al = 0; al < 4; ++al) {
      const double expect =
          metric_diag(al) * (c2 * p.k1[std::size_t(al)] + s2 * p.k2[std::size_t(al)]);
      err = std::max(err, std::abs(u.at(s)[al] - expect));
    }
  }
  CHECK(err / scale < 2e-2);
}

TEST_CASE("two-spin curvature oscillates on the doubled wave-number") {
  const Lattice lat = small_lattice(32, 0.4);
  const TwoSpinParams p = two_spin_params(lat);
  const SpinorField f = two_spin_field(lat, p);
  const BivectorGridField du = curvature(connection_u(f));

  std::array<double, 4> k3c{}, dkc{};
  for (int al = 0; al < 4; ++al) {
    k3c[std::size_t(al)] = metric_diag(al) * p.k3[std::size_t(al)];
    dkc[std::size_t(al)] = metric_diag(al) * (p.k2[std::size_t(al)] - p.k1[std::size_t(al)]);
  }
  double scale = 0.0, err = 0.0;
  for (int mu = 0; mu < 4; ++mu)
    for (int nu = mu + 1; nu < 4; ++nu)
      scale = std::max(scale, std::abs(k3c[std::size_t(mu)] * dkc[std::size_t(nu)] -
                                       k3c[std::size_t(nu)] * dkc[std::size_t(mu)]));
  for (std::size_t s = 0; s < lat.sites(); ++s) {
    const auto x = lat.coord(lat.unindex(s));
    double r2 = 0.0;
    for (double xc : x) r2 += xc * xc;
    if (r2 > p.taper_width * p.taper_width) continue;
    const double s2 = std::sin(2.0 * (mdot(p.k3, x) + p.theta));
    for (int mu = 0; mu < 4; ++mu)
      for (int nu = mu + 1; nu < 4; ++nu) {
        const double expect = s2 * (k3c[std::size_t(mu)] * dkc[std::size_t(nu)] -
                                    k3c[std::size_t(nu)] * dkc[std::size_t(mu)]);
        err = std::max(err, std::abs(du.component(s, mu, nu) - expect));
      }
  }
  CHECK(err / scale < 5e-2);
}

TEST_CASE("gauge transformation shifts the connection by the gradient") {
  // residual against the internal stencil's gradient, measured at two
  // resolutions: must be small and shrink at least quadratically in h
  double res[2];
  const int ns[2] = {32, 48};
  const double as[2] = {0.4, 0.8 / 3.0};
  for (int r = 0; r < 2; ++r) {
    const Lattice lat = small_lattice(ns[r], as[r]);
    const SpinorField f = two_spin_field(lat);
    const RealScalarField theta = random_theta(lat, 4242);
    const VectorGridField before = connection_u(f);
    const VectorGridField after = connection_u(gauge_transform(f, theta));
    res[r] = shift_residual(after, before, theta, 1.0, f);
  }
  CHECK(res[1] < 2e-2);
  CHECK(std::log2(res[0] / res[1]) / std::log2(1.5) > 1.8);
}

TEST_CASE("connection is invariant under constant rescalings of the test function") {
  const Lattice lat = small_lattice(12, 0.8);
  const SpinorField f = mixed_field(lat);
  ConnectionOptions opt;
  opt.force_numeric = true;
  const VectorGridField u = connection_u(f, opt);
  const VectorGridField v = connection_u(scale(f, cd(0.3, 1.7)), opt);
  double err = 0.0;
  for (std::size_t i = 0; i < u.data.size(); ++i) err = std::max(err, std::abs(u.data[i] - v.data[i]));
  CHECK(err < 1e-10 * max_abs(u));
}

TEST_CASE("sigma/omega-weighted evaluation reproduces the principal connection") {
  const Lattice lat = small_lattice(12, 0.8);
  const SpinorField f = mixed_field(lat);
  ConnectionOptions opt;
  opt.force_numeric = true;
  const VectorGridField a = connection_u(f, opt);
  const VectorGridField b = connection_sigma_omega_weighted(f);
  double err = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) err = std::max(err, std::abs(a.data[i] - b.data[i]));
  CHECK(err < 1e-10 * max_abs(a));
}

TEST_CASE("generalized connection: weight constraint and gauge shift") {
  const Lattice lat = small_lattice(12, 0.8);
  const SpinorField f = mixed_field(lat);
  CHECK_THROWS_AS(connection_general(f, cd(0.4, 0.0), cd(0.4, 0.0)), std::invalid_argument);

  const Lattice lat2 = small_lattice(32, 0.4);
  const SpinorField f2 = mixed_field(lat2);
  const cd m1(0.7, 0.25), m2(0.3, -0.25);
  const VectorGridField before = connection_general(f2, m1, m2);
  const RealScalarField theta = random_theta(lat2, 17);
  const VectorGridField after = connection_general(gauge_transform(f2, theta), m1, m2);
  CHECK(shift_residual(after, before, theta, 1.0, f2) < 6e-2);
}

TEST_CASE("generalized connection with a pure sigma channel matches the closed form") {
  const Lattice lat = small_lattice(32, 0.4);
  const SpinorField f = single_term_field(lat);
  const VectorGridField ana = analytic_connection(f.terms.front(), lat);
  const VectorGridField num = connection_general(f, cd(1.0, 0.0), cd(0.0, 0.0));
  CHECK(support_rel_error(num, ana, f) < 2e-2);
}

TEST_CASE("generalized connection rejects a vanishing weighted denominator") {
  const Lattice lat = small_lattice(8, 1.0);
  // spin-up only: omega vanishes identically, so any M2 weight is inadmissible
  const SpinorField f = single_term_field(lat);
  CHECK_THROWS_AS(connection_general(f, cd(0.5, 0.0), cd(0.5, 0.0)), DenominatorUnderflow);
}

TEST_CASE("null spinor directions are rejected loudly") {
  const Lattice lat = small_lattice(8, 1.0);
  const Spinor null_dir{cd(1.0), cd(0.0), cd(1.0), cd(0.0)};  // sigma = omega = 0
  const SpinorField f =
      sample_ansatz({gaussian_term({1.0, 0.2, 0.0, 0.0}, decayed_width(lat), null_dir)}, lat);
  ConnectionOptions opt;
  opt.force_numeric = true;
  CHECK_THROWS_AS(connection_u(f, opt), DenominatorUnderflow);
}

TEST_CASE("connection is invariant under a positive envelope rescale") {
  // u[E*U] = u[U] for any positive scalar envelope: the stencils act on a
  // pointwise-normalized copy, so the two inputs present identical data
  const Lattice lat = small_lattice(16, 0.6);
  const SpinorField f = single_term_field(lat);
  SpinorField g = f;
  g.terms.clear();
  for (std::size_t s = 0; s < lat.sites(); ++s) {
    const auto x = lat.coord(lat.unindex(s));
    double r2 = 0.0;
    for (double xi : x) r2 += xi * xi;
    const double env = 0.3 + std::exp(-r2 / 7.0);
    for (int c = 0; c < 4; ++c) g.at(s)[c] = env * f.at(s)[c];
  }
  ConnectionOptions opt;
  opt.force_numeric = true;
  const VectorGridField uf = connection_u(f, opt);
  const VectorGridField ug = connection_u(g, opt);
  double err = 0.0;
  for (std::size_t i = 0; i < uf.data.size(); ++i) err = std::max(err, std::abs(uf.data[i] - ug.data[i]));
  CHECK(err <= 1e-9 * max_abs(uf));
}

TEST_CASE("chiral connections shift correctly under both gauge factors") {
  const Lattice lat = small_lattice(32, 0.4);
  const SpinorField f = mixed_field(lat);
  const ChiralConnections before = chiral_connections(f);

  const RealScalarField theta1 = random_theta(lat, 7);
  const ChiralConnections g1 = chiral_connections(gauge_transform(f, theta1));
  CHECK(shift_residual(g1.plus, before.plus, theta1, 1.0, f) < 6e-2);
  CHECK(shift_residual(g1.minus, before.minus, theta1, 1.0, f) < 6e-2);

  const RealScalarField theta2 = random_theta(lat, 8);
  const ChiralConnections g2 = chiral_connections(chiral_gauge_transform(f, theta2));
  CHECK(shift_residual(g2.plus, before.plus, theta2, 1.0, f) < 6e-2);
  CHECK(shift_residual(g2.minus, before.minus, theta2, -1.0, f) < 6e-2);
}

TEST_CASE("curvature of a pure gradient vanishes to rounding") {
  const Lattice lat = small_lattice(12, 0.8);
  const RealScalarField theta = random_theta(lat, 11);
  const VectorGridField g = gradient(theta);
  const BivectorGridField du = curvature(g);
  double m = 0.0;
  for (double v : du.data) m = std::max(m, std::abs(v));
  CHECK(m < 1e-12 * std::max(1.0, max_abs(g)));
}

TEST_CASE("divergence identities") {
  const Lattice lat = small_lattice(12, 0.8);
  const SpinorField f = two_spin_field(lat);
  const VectorGridField u = connection_u(f);

  // d^mu (du)_{mu alpha} applied to an antisymmetric field built from a
  // gradient is zero because the mixed stencils commute
  const BivectorGridField dg = curvature(gradient(random_theta(lat, 23)));
  const VectorGridField dvg = divergence(dg);
  CHECK(max_abs(dvg) < 1e-12);

  // scalar divergence: linear in u
  RealScalarField d1 = divergence(u);
  VectorGridField u2 = u;
  for (double& v : u2.data) v *= -2.5;
  RealScalarField d2 = divergence(u2);
  double err = 0.0;
  for (std::size_t s = 0; s < lat.sites(); ++s) err = std::max(err, std::abs(d2.data[s] + 2.5 * d1.data[s]));
  CHECK(err < 1e-12 * std::max(1.0, max_abs(u)));
}
