#pragma once

// 4th-order central finite differences on the periodic lattice. First
// derivatives at O(h^4) keep downstream curvatures at O(h^2) overall.

#include <cstddef>
#include <vector>

#include "gaugelab/lattice.hpp"
#include "gaugelab/reduce.hpp"

namespace gaugelab {

// d/dx_axis of an ncomp-component field: (f[-2] - 8 f[-1] + 8 f[+1] - f[+2]) / (12 h)
template <typename T>
std::vector<T> partial_axis(const Lattice& lat, const std::vector<T>& f, int ncomp, int axis) {
  std::vector<T> out(f.size());
  const double inv = 1.0 / (12.0 * lat.a[std::size_t(axis)]);
  const int N = lat.n[std::size_t(axis)];
  const std::size_t nc = std::size_t(ncomp);
  parallel_for(lat.sites(), [&](std::size_t b, std::size_t e) {
    for (std::size_t s = b; s < e; ++s) {
      auto i = lat.unindex(s);
      const int i0 = i[std::size_t(axis)];
      auto shifted = [&](int d) {
        auto j = i;
        j[std::size_t(axis)] = (i0 + d % N + N) % N;
        return lat.index(j[0], j[1], j[2], j[3]);
      };
      const std::size_t m2 = shifted(-2), m1 = shifted(-1), p1 = shifted(1), p2 = shifted(2);
      for (std::size_t c = 0; c < nc; ++c) {
        out[nc * s + c] =
            (f[nc * m2 + c] - 8.0 * f[nc * m1 + c] + 8.0 * f[nc * p1 + c] - f[nc * p2 + c]) * inv;
      }
    }
  });
  return out;
}

}  // namespace gaugelab
