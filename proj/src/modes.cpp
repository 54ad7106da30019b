#include "oamturb/modes.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace oamturb {

double LGModeSpec::rayleigh_range_m() const {
  return std::numbers::pi * waist_m * waist_m / wavelength_m;
}

double laguerre(int p, int alpha, double x) {
  if (p < 0) throw std::invalid_argument("laguerre: p must be >= 0");
  if (p == 0) return 1.0;
  double prev = 1.0;
  double cur = 1.0 + alpha - x;
  for (int k = 2; k <= p; ++k) {
    const double next = ((2.0 * k - 1.0 + alpha - x) * cur - (k - 1.0 + alpha) * prev) / k;
    prev = cur;
    cur = next;
  }
  return cur;
}

namespace {

void check_mode(const LGModeSpec& mode) {
  if (mode.p < 0) throw std::invalid_argument("lg: radial index p must be >= 0");
  if (!(mode.waist_m > 0.0)) throw std::invalid_argument("lg: waist must be positive");
  if (!(mode.wavelength_m > 0.0))
    throw std::invalid_argument("lg: wavelength must be positive");
}

double norm_constant(int l, int p) {
  const int al = std::abs(l);
  // sqrt(p! 2^(|l|+1) / (pi (p+|l|)!))
  const double log_n2 = std::lgamma(p + 1.0) + (al + 1.0) * std::numbers::ln2 -
                        std::log(std::numbers::pi) - std::lgamma(p + al + 1.0);
  return std::exp(0.5 * log_n2);
}

}  // namespace

std::complex<double> lg_amplitude(const LGModeSpec& mode, double x_m, double y_m) {
  check_mode(mode);
  const int al = std::abs(mode.l);
  const double w0 = mode.waist_m;
  const double r = std::hypot(x_m, y_m) / w0;
  const double phi = std::atan2(y_m, x_m);
  const double t = mode.t;
  const double t2p1 = 1.0 + t * t;

  const std::complex<double> one_plus_it{1.0, t};
  const std::complex<double> one_minus_it{1.0, -t};
  std::complex<double> value = norm_constant(mode.l, mode.p) / w0;
  value *= std::pow(r, al) * std::polar(1.0, mode.l * phi);
  value *= std::pow(one_plus_it, mode.p) / std::pow(one_minus_it, mode.p + al + 1);
  value *= laguerre(mode.p, al, 2.0 * r * r / t2p1);
  // exp(-r^2 / (1 - it)) = exp(-r^2 (1 + it) / (1 + t^2))
  value *= std::exp(std::complex<double>{-r * r / t2p1, -r * r * t / t2p1});
  return value;
}

double clipped_power_fraction(const LGModeSpec& mode, const GridSpec& grid) {
  check_mode(mode);
  // Radial power outside radius R for an LG mode is a Poisson lower tail:
  // P(X <= |l| + 2p) for X ~ Poisson(2 R^2 / w(t)^2).
  const double radius = 0.5 * grid.window_m();
  const double u = 2.0 * radius * radius / (mode.waist_m * mode.waist_m * (1.0 + mode.t * mode.t));
  const int n_eff = std::abs(mode.l) + 2 * mode.p;
  double tail = 0.0;
  for (int k = 0; k <= n_eff; ++k)
    tail += std::exp(k * std::log(u) - u - std::lgamma(k + 1.0));
  return tail;
}

SampledField evaluate_lg(const LGModeSpec& mode, const GridSpec& grid) {
  check_mode(mode);
  const double waist_samples = mode.waist_m / grid.pitch_m;
  if (waist_samples < 16.0)
    throw std::invalid_argument("lg: waist spans " + std::to_string(waist_samples) +
                                " samples, need >= 16");
  if (grid.window_m() < 6.0 * mode.waist_m)
    throw std::invalid_argument("lg: window must span >= 6 waists, got " +
                                std::to_string(grid.window_m() / mode.waist_m));
  const double clipped = clipped_power_fraction(mode, grid);
  if (clipped > 1e-4)
    throw std::invalid_argument("lg: window clips " + std::to_string(clipped) +
                                " of mode power (limit 1e-4) for l=" +
                                std::to_string(mode.l) + " p=" + std::to_string(mode.p));

  SampledField field = make_field(grid, mode.wavelength_m, mode.t * mode.rayleigh_range_m());
  const int n = grid.n_samples;
  for (int iy = 0; iy < n; ++iy) {
    const double y = grid.coordinate(iy);
    for (int ix = 0; ix < n; ++ix)
      field.at(ix, iy) = lg_amplitude(mode, grid.coordinate(ix), y);
  }
  return field;
}

std::pair<SampledField, SampledField> lg_basis(int q, const GridSpec& grid,
                                               double waist_m, double wavelength_m) {
  if (q < 1) throw std::invalid_argument("lg_basis: q must be >= 1");
  LGModeSpec plus{q, 0, waist_m, wavelength_m, 0.0};
  LGModeSpec minus{-q, 0, waist_m, wavelength_m, 0.0};
  auto pair = std::make_pair(evaluate_lg(plus, grid), evaluate_lg(minus, grid));
  scale_to_unit_power(pair.first);
  scale_to_unit_power(pair.second);
  return pair;
}

}  // namespace oamturb
