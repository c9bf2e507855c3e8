#pragma once

// Band-limited Gaussian random gauge functions theta(x): a short cosine series
// at low integer frequencies with N(0,1) amplitudes, multiplied by a Gaussian
// taper so theta decays toward the lattice boundary. Everything is driven by
// an explicit seed so runs are reproducible.

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "gaugelab/fields.hpp"
#include "gaugelab/reduce.hpp"

namespace gaugelab {

struct RandomThetaParams {
  int max_mode = 2;        // |integer frequency| per axis
  double amplitude = 0.5;  // overall std-dev scale
  // taper width as a fraction of the box length; 0.12 puts the boundary value
  // at ~2e-4 of the amplitude, below the kernels' quadrature error
  double taper_rel = 0.12;
};

inline RealScalarField random_theta(const Lattice& lat, std::uint64_t seed,
                                    const RandomThetaParams& prm = {}) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> amp(0.0, 1.0);
  std::uniform_real_distribution<double> ph(0.0, 6.283185307179586);

  struct Mode {
    std::array<double, 4> k;
    double c;
    double phase;
  };
  std::vector<Mode> modes;
  for (int m0 = 0; m0 <= prm.max_mode; ++m0)
    for (int m1 = -prm.max_mode; m1 <= prm.max_mode; ++m1)
      for (int m2 = -prm.max_mode; m2 <= prm.max_mode; ++m2)
        for (int m3 = -prm.max_mode; m3 <= prm.max_mode; ++m3) {
          if (m0 == 0 && m1 == 0 && m2 == 0 && m3 == 0) continue;
          Mode m;
          const double tau = 6.283185307179586;
          m.k = {tau * m0 / lat.box_length(0), tau * m1 / lat.box_length(1),
                 tau * m2 / lat.box_length(2), tau * m3 / lat.box_length(3)};
          m.c = amp(rng);
          m.phase = ph(rng);
          modes.push_back(m);
        }
  const double norm = prm.amplitude / std::sqrt(double(modes.size()));

  std::array<double, 4> w{};
  for (int j = 0; j < 4; ++j) w[std::size_t(j)] = prm.taper_rel * lat.box_length(j);

  RealScalarField theta;
  theta.lat = lat;
  theta.data.resize(lat.sites());
  parallel_for(lat.sites(), [&](std::size_t b, std::size_t e) {
    for (std::size_t s = b; s < e; ++s) {
      const auto x = lat.coord(lat.unindex(s));
      double taper = 0.0;
      for (int j = 0; j < 4; ++j) {
        const double c = x[std::size_t(j)];
        taper += c * c / (2.0 * w[std::size_t(j)] * w[std::size_t(j)]);
      }
      const double env = std::exp(-taper);
      double acc = 0.0;
      for (const Mode& m : modes) acc += m.c * std::cos(mdot(m.k, x) + m.phase);
      theta.data[s] = norm * env * acc;
    }
  });
  return theta;
}

}  // namespace gaugelab
