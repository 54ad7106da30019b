// Sampled complex optical fields on square centered grids: geometry, inner products,
// unimodular phase masks, and paraxial angular-spectrum propagation.
#pragma once

#include <complex>
#include <vector>

namespace oamturb {

struct PhaseScreen;

struct GridSpec {
  int n_samples = 256;
  double pitch_m = 0.0;  // sample spacing, meters

  double window_m() const { return n_samples * pitch_m; }
  // Physical coordinate of sample index along either axis; beam axis at n/2.
  double coordinate(int index) const { return (index - n_samples / 2) * pitch_m; }
  // Angular spatial frequency (rad/m) of FFT bin `index` in transform layout.
  double frequency(int index) const;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

// Validates: n a power of two >= 64, window > 0.
GridSpec make_grid(int n_samples, double window_m);

struct SampledField {
  GridSpec grid;
  double wavelength_m = 0.0;
  double z_m = 0.0;  // plane location
  std::vector<std::complex<double>> values;  // row-major, values[iy*n + ix]

  std::complex<double>& at(int ix, int iy) {
    return values[static_cast<size_t>(iy) * grid.n_samples + ix];
  }
  const std::complex<double>& at(int ix, int iy) const {
    return values[static_cast<size_t>(iy) * grid.n_samples + ix];
  }
};

// Zero-valued field on a grid.
SampledField make_field(const GridSpec& grid, double wavelength_m, double z_m = 0.0);

// sum conj(a).b pitch^2; requires equal grids and wavelengths.
std::complex<double> inner_product(const SampledField& a, const SampledField& b);

// sum |g|^2 pitch^2
double total_power(const SampledField& f);

// Rescale so total_power == 1; zero fields are rejected.
void scale_to_unit_power(SampledField& f);

// values' = values * exp(i theta); power preserved exactly per sample.
SampledField apply_phase(const SampledField& f, const PhaseScreen& screen);

// Paraxial angular-spectrum propagation by dz >= 0. The transfer function
// exp(i (kx^2+ky^2) dz / (2 k0)) is paired with the forward exp(-ik.x) transform so a
// numerically propagated mode matches the analytic beam evolution at t = dz/z_R.
// Rejects dz that would walk significant power outside the window (99%-power radii in
// real and spectral space must satisfy r99 + dz k99/k0 <= 0.45 window).
SampledField propagate_free_space(const SampledField& f, double dz_m);

}  // namespace oamturb
