#pragma once

// 4D periodic lattice in natural units (Dirac mass m = 1 scale).
// Axis 0 is time. Coordinates are x_j = origin_j + n_j * a_j.

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>

#include "gaugelab/algebra.hpp"

namespace gaugelab {

struct Lattice {
  std::array<int, 4> n{8, 8, 8, 8};          // extents N_t, N_x, N_y, N_z
  std::array<double, 4> a{1.0, 1.0, 1.0, 1.0};  // spacings
  std::array<double, 4> origin{0.0, 0.0, 0.0, 0.0};

  static Lattice centered(std::array<int, 4> extents, std::array<double, 4> spacings) {
    Lattice l;
    l.n = extents;
    l.a = spacings;
    for (int j = 0; j < 4; ++j) l.origin[std::size_t(j)] = -0.5 * extents[std::size_t(j)] * spacings[std::size_t(j)];
    l.validate();
    return l;
  }

  void validate() const {
    for (int j = 0; j < 4; ++j) {
      const auto i = std::size_t(j);
      if (n[i] < 8 || n[i] % 2 != 0)
        throw std::invalid_argument("lattice extent must be even and >= 8, got " + std::to_string(n[i]));
      if (!(a[i] > 0.0)) throw std::invalid_argument("lattice spacing must be positive");
    }
  }

  std::size_t sites() const {
    return std::size_t(n[0]) * std::size_t(n[1]) * std::size_t(n[2]) * std::size_t(n[3]);
  }

  std::size_t index(int i0, int i1, int i2, int i3) const {
    return ((std::size_t(i0) * std::size_t(n[1]) + std::size_t(i1)) * std::size_t(n[2]) + std::size_t(i2)) *
               std::size_t(n[3]) +
           std::size_t(i3);
  }

  std::array<int, 4> unindex(std::size_t s) const {
    std::array<int, 4> i{};
    i[3] = int(s % std::size_t(n[3]));
    s /= std::size_t(n[3]);
    i[2] = int(s % std::size_t(n[2]));
    s /= std::size_t(n[2]);
    i[1] = int(s % std::size_t(n[1]));
    i[0] = int(s / std::size_t(n[1]));
    return i;
  }

  std::array<double, 4> coord(const std::array<int, 4>& i) const {
    return {origin[0] + i[0] * a[0], origin[1] + i[1] * a[1], origin[2] + i[2] * a[2], origin[3] + i[3] * a[3]};
  }

  double box_length(int axis) const { return n[std::size_t(axis)] * a[std::size_t(axis)]; }
  double volume_element() const { return a[0] * a[1] * a[2] * a[3]; }

  // signed frequency index in [-N/2, N/2)
  int wrapped_bin(int axis, int m) const {
    const int N = n[std::size_t(axis)];
    return m < N / 2 ? m : m - N;
  }

  // site index of the spatial/temporal reflection x -> -x (origin must be centered)
  int reflect(int axis, int i) const {
    const int N = n[std::size_t(axis)];
    return (N - i) % N;
  }

  bool operator==(const Lattice& o) const = default;

  // every-other-site sublattice (2h companion for Richardson error estimates)
  Lattice coarsened() const {
    Lattice l;
    for (int j = 0; j < 4; ++j) {
      const auto i = std::size_t(j);
      l.n[i] = n[i] / 2;
      l.a[i] = 2.0 * a[i];
      l.origin[i] = origin[i];
    }
    l.validate();
    return l;
  }
};

}  // namespace gaugelab
