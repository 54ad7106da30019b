#include "oamturb/grid_field.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "oamturb/fft.hpp"
#include "oamturb/turbulence.hpp"

namespace oamturb {

double GridSpec::frequency(int index) const {
  const int m = index <= n_samples / 2 - 1 ? index : index - n_samples;
  return 2.0 * std::numbers::pi * m / window_m();
}

GridSpec make_grid(int n_samples, double window_m) {
  if (n_samples < 64 || (n_samples & (n_samples - 1)) != 0)
    throw std::invalid_argument("grid: n_samples must be a power of two >= 64, got " +
                                std::to_string(n_samples));
  if (!(window_m > 0.0) || !std::isfinite(window_m))
    throw std::invalid_argument("grid: window must be positive and finite");
  return GridSpec{n_samples, window_m / n_samples};
}

SampledField make_field(const GridSpec& grid, double wavelength_m, double z_m) {
  if (!(wavelength_m > 0.0))
    throw std::domain_error("field: wavelength must be positive");
  SampledField f;
  f.grid = grid;
  f.wavelength_m = wavelength_m;
  f.z_m = z_m;
  f.values.assign(static_cast<size_t>(grid.n_samples) * grid.n_samples, {0.0, 0.0});
  return f;
}

std::complex<double> inner_product(const SampledField& a, const SampledField& b) {
  if (!(a.grid == b.grid))
    throw std::invalid_argument("inner_product: grid mismatch");
  if (a.wavelength_m != b.wavelength_m)
    throw std::invalid_argument("inner_product: wavelength mismatch");
  std::complex<double> sum{0.0, 0.0};
  const size_t count = a.values.size();
  for (size_t i = 0; i < count; ++i) sum += std::conj(a.values[i]) * b.values[i];
  const double w = a.grid.pitch_m * a.grid.pitch_m;
  return sum * w;
}

double total_power(const SampledField& f) {
  double sum = 0.0;
  for (const auto& v : f.values) sum += std::norm(v);
  return sum * f.grid.pitch_m * f.grid.pitch_m;
}

void scale_to_unit_power(SampledField& f) {
  const double power = total_power(f);
  if (!(power > 0.0))
    throw std::domain_error("field: cannot normalize a zero-power field");
  const double s = 1.0 / std::sqrt(power);
  for (auto& v : f.values) v *= s;
}

SampledField apply_phase(const SampledField& f, const PhaseScreen& screen) {
  if (!(f.grid == screen.grid))
    throw std::invalid_argument("apply_phase: field and screen grids differ");
  SampledField out = f;
  const size_t count = out.values.size();
  for (size_t i = 0; i < count; ++i)
    out.values[i] *= std::polar(1.0, screen.theta[i]);
  return out;
}

namespace {

// Radius enclosing 99% of `power` when binned in shells of width `bin`.
double radius_99(const std::vector<double>& shell_power, double total, double bin) {
  double cum = 0.0;
  for (size_t s = 0; s < shell_power.size(); ++s) {
    cum += shell_power[s];
    if (cum >= 0.99 * total) return (double(s) + 1.0) * bin;
  }
  return double(shell_power.size()) * bin;
}

}  // namespace

SampledField propagate_free_space(const SampledField& f, double dz_m) {
  if (dz_m < 0.0) throw std::domain_error("propagate: dz must be >= 0");
  if (!(f.wavelength_m > 0.0))
    throw std::domain_error("propagate: field wavelength must be positive");
  if (dz_m == 0.0) return f;

  const int n = f.grid.n_samples;
  const double window = f.grid.window_m();
  const double k0 = 2.0 * std::numbers::pi / f.wavelength_m;

  SampledField out = f;
  out.z_m += dz_m;

  double total = 0.0;
  std::vector<double> real_shells(n, 0.0);
  for (int iy = 0; iy < n; ++iy) {
    const double y = f.grid.coordinate(iy);
    for (int ix = 0; ix < n; ++ix) {
      const double p = std::norm(f.at(ix, iy));
      const double r = std::hypot(f.grid.coordinate(ix), y);
      const size_t shell = static_cast<size_t>(r / f.grid.pitch_m);
      if (shell < real_shells.size()) real_shells[shell] += p;
      total += p;
    }
  }
  if (total == 0.0) return out;

  fft2_forward(n, out.values.data());

  const double dk = 2.0 * std::numbers::pi / window;
  std::vector<double> spec_shells(n, 0.0);
  for (int iy = 0; iy < n; ++iy) {
    const double ky = f.grid.frequency(iy);
    for (int ix = 0; ix < n; ++ix) {
      const double k = std::hypot(f.grid.frequency(ix), ky);
      const size_t shell = static_cast<size_t>(k / dk);
      if (shell < spec_shells.size()) spec_shells[shell] += std::norm(out.at(ix, iy));
    }
  }
  double spec_total = 0.0;
  for (double p : spec_shells) spec_total += p;

  const double r99 = radius_99(real_shells, total, f.grid.pitch_m);
  const double k99 = radius_99(spec_shells, spec_total, dk);
  const double reach = r99 + dz_m * k99 / k0;
  if (reach > 0.45 * window)
    throw std::invalid_argument(
        "propagate: field would outgrow the window: 99%-power reach " +
        std::to_string(reach) + " m exceeds 0.45 * window = " +
        std::to_string(0.45 * window) + " m");

  const double phase_scale = dz_m / (2.0 * k0);
  for (int iy = 0; iy < n; ++iy) {
    const double ky = f.grid.frequency(iy);
    for (int ix = 0; ix < n; ++ix) {
      const double kx = f.grid.frequency(ix);
      out.at(ix, iy) *= std::polar(1.0, phase_scale * (kx * kx + ky * ky));
    }
  }
  fft2_backward(n, out.values.data());
  const double inv = 1.0 / (static_cast<double>(n) * n);
  for (auto& v : out.values) v *= inv;
  return out;
}

}  // namespace oamturb
