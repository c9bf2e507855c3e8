#pragma once

// Fourier transforms matching the continuum pair
//   f~(k) = Int e^{+i<k,x>} f(x) d^4x,   <k,x> = k0 x0 - k.x  (metric +---)
// discretized on the periodic lattice. Forward output is indexed by bin;
// bin_wavevector maps bins to physical wavevectors (time frequencies carry a
// + sign, spatial ones a - sign relative to the raw DFT index).
//
// fourier_spatial_* transform the three spatial axes only, one time slice at
// a time; used by the mass-shell quadratures, which evaluate the remaining
// time transform at the exact shell frequency.

#include <complex>
#include <cstddef>
#include <vector>

#include <fftw3.h>

#include "gaugelab/lattice.hpp"

namespace gaugelab {

inline double bin_freq_raw(const Lattice& lat, int axis, int bin) {
  const double two_pi = 6.283185307179586476925286766559;
  return two_pi * lat.wrapped_bin(axis, bin) / lat.box_length(axis);
}

// physical wavevector of a 4D forward-transform bin
inline std::array<double, 4> bin_wavevector(const Lattice& lat, const std::array<int, 4>& bin) {
  return {bin_freq_raw(lat, 0, bin[0]), -bin_freq_raw(lat, 1, bin[1]), -bin_freq_raw(lat, 2, bin[2]),
          -bin_freq_raw(lat, 3, bin[3])};
}

namespace detail {

inline void run_fft4(const Lattice& lat, cd* data, int ncomp, int sign) {
  int n[4] = {lat.n[0], lat.n[1], lat.n[2], lat.n[3]};
  fftw_complex* p = reinterpret_cast<fftw_complex*>(data);
  fftw_plan plan = fftw_plan_many_dft(4, n, ncomp, p, nullptr, ncomp, 1, p, nullptr, ncomp, 1, sign, FFTW_ESTIMATE);
  fftw_execute(plan);
  fftw_destroy_plan(plan);
}

inline void apply_origin_phase(const Lattice& lat, cd* data, int ncomp, double scale, int conj) {
  const std::size_t sites = lat.sites();
  for (std::size_t s = 0; s < sites; ++s) {
    const auto bi = lat.unindex(s);
    const auto k = bin_wavevector(lat, bi);
    const double ph = mdot(k, lat.origin) * conj;
    const cd f = scale * std::polar(1.0, ph);
    for (int c = 0; c < ncomp; ++c) data[s * std::size_t(ncomp) + std::size_t(c)] *= f;
  }
}

}  // namespace detail

// in-place; afterwards data[bin] = f~(k(bin))
inline void fourier_forward(const Lattice& lat, std::vector<cd>& data, int ncomp) {
  // e^{+i k0 x0} and e^{-i k.x} both reduce to e^{+2 pi i m n / N} under the
  // bin mapping above, so a single FFTW_BACKWARD covers all four axes.
  detail::run_fft4(lat, data.data(), ncomp, FFTW_BACKWARD);
  detail::apply_origin_phase(lat, data.data(), ncomp, lat.volume_element(), +1);
}

inline void fourier_inverse(const Lattice& lat, std::vector<cd>& data, int ncomp) {
  const double norm = 1.0 / (lat.volume_element() * double(lat.sites()));
  detail::apply_origin_phase(lat, data.data(), ncomp, norm, -1);
  detail::run_fft4(lat, data.data(), ncomp, FFTW_FORWARD);
}

// --- spatial-only transforms -------------------------------------------------

inline double spatial_bin_freq(const Lattice& lat, int axis, int bin) {
  return bin_freq_raw(lat, axis, bin);  // axis in {1,2,3}; convention e^{-i k.x}
}

// in-place over each time slice: data[(t, bin)] = Int e^{-i k.x} f(t,x) d^3x
inline void fourier_spatial_forward(const Lattice& lat, std::vector<cd>& data, int ncomp) {
  int n[3] = {lat.n[1], lat.n[2], lat.n[3]};
  const std::size_t slice = std::size_t(lat.n[1]) * std::size_t(lat.n[2]) * std::size_t(lat.n[3]);
  const int howmany = ncomp;
  const double dv3 = lat.a[1] * lat.a[2] * lat.a[3];
  for (int t = 0; t < lat.n[0]; ++t) {
    cd* base = data.data() + std::size_t(t) * slice * std::size_t(ncomp);
    fftw_complex* p = reinterpret_cast<fftw_complex*>(base);
    fftw_plan plan =
        fftw_plan_many_dft(3, n, howmany, p, nullptr, ncomp, 1, p, nullptr, ncomp, 1, FFTW_FORWARD, FFTW_ESTIMATE);
    fftw_execute(plan);
    fftw_destroy_plan(plan);
  }
  // origin phase e^{+i k.o_spatial} (from e^{-i k.(o + n a)}) and volume element
  for (std::size_t s = 0; s < slice; ++s) {
    std::array<int, 4> bi{0, 0, 0, 0};
    std::size_t r = s;
    bi[3] = int(r % std::size_t(lat.n[3]));
    r /= std::size_t(lat.n[3]);
    bi[2] = int(r % std::size_t(lat.n[2]));
    bi[1] = int(r / std::size_t(lat.n[2]));
    double dot = 0.0;
    for (int j = 1; j < 4; ++j) dot += spatial_bin_freq(lat, j, bi[std::size_t(j)]) * lat.origin[std::size_t(j)];
    const cd f = dv3 * std::polar(1.0, -dot);
    for (int t = 0; t < lat.n[0]; ++t) {
      cd* base = data.data() + std::size_t(t) * slice * std::size_t(ncomp);
      for (int c = 0; c < ncomp; ++c) base[s * std::size_t(ncomp) + std::size_t(c)] *= f;
    }
  }
}

inline void fourier_spatial_inverse(const Lattice& lat, std::vector<cd>& data, int ncomp) {
  int n[3] = {lat.n[1], lat.n[2], lat.n[3]};
  const std::size_t slice = std::size_t(lat.n[1]) * std::size_t(lat.n[2]) * std::size_t(lat.n[3]);
  const double dv3 = lat.a[1] * lat.a[2] * lat.a[3];
  const double norm = 1.0 / (dv3 * double(slice));
  for (std::size_t s = 0; s < slice; ++s) {
    std::array<int, 4> bi{0, 0, 0, 0};
    std::size_t r = s;
    bi[3] = int(r % std::size_t(lat.n[3]));
    r /= std::size_t(lat.n[3]);
    bi[2] = int(r % std::size_t(lat.n[2]));
    bi[1] = int(r / std::size_t(lat.n[2]));
    double dot = 0.0;
    for (int j = 1; j < 4; ++j) dot += spatial_bin_freq(lat, j, bi[std::size_t(j)]) * lat.origin[std::size_t(j)];
    const cd f = norm * std::polar(1.0, dot);
    for (int t = 0; t < lat.n[0]; ++t) {
      cd* base = data.data() + std::size_t(t) * slice * std::size_t(ncomp);
      for (int c = 0; c < ncomp; ++c) base[s * std::size_t(ncomp) + std::size_t(c)] *= f;
    }
  }
  for (int t = 0; t < lat.n[0]; ++t) {
    cd* base = data.data() + std::size_t(t) * slice * std::size_t(ncomp);
    fftw_complex* p = reinterpret_cast<fftw_complex*>(base);
    fftw_plan plan =
        fftw_plan_many_dft(3, n, ncomp, p, nullptr, ncomp, 1, p, nullptr, ncomp, 1, FFTW_BACKWARD, FFTW_ESTIMATE);
    fftw_execute(plan);
    fftw_destroy_plan(plan);
  }
}

}  // namespace gaugelab
