#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "oamturb/grid_field.hpp"
#include "oamturb/modes.hpp"

using namespace oamturb;

namespace {
constexpr double waist = 0.1;
constexpr double wavelength = 1.55e-6;
const GridSpec grid = make_grid(256, 8.0 * waist);

LGModeSpec spec(int l, int p = 0, double t = 0.0) {
  return LGModeSpec{l, p, waist, wavelength, t};
}
}  // namespace

TEST_CASE("laguerre recurrence reproduces closed forms") {
  CHECK(laguerre(0, 3, 2.5) == doctest::Approx(1.0));
  CHECK(laguerre(1, 2, 0.5) == doctest::Approx(1.0 + 2.0 - 0.5));
  CHECK(laguerre(2, 0, 2.0) == doctest::Approx((4.0 - 8.0 + 2.0) / 2.0));
  // L_3^1(x) = 4 - 6x + 2x^2 - x^3/6
  CHECK(laguerre(3, 1, 1.0) == doctest::Approx(4.0 - 6.0 + 2.0 - 1.0 / 6.0));
  CHECK_THROWS_AS(laguerre(-1, 0, 1.0), std::invalid_argument);
}

TEST_CASE("fundamental mode peaks at sqrt(2/pi)/w0 and carries unit power") {
  const std::complex<double> origin = lg_amplitude(spec(0), 0.0, 0.0);
  CHECK(origin.real() == doctest::Approx(std::sqrt(2.0 / std::numbers::pi) / waist));
  CHECK(origin.imag() == doctest::Approx(0.0));

  const SampledField f = evaluate_lg(spec(0), grid);
  CHECK(total_power(f) == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("azimuthal phase winds l times around the axis") {
  const LGModeSpec mode = spec(3);
  const double r = waist;
  const std::complex<double> east = lg_amplitude(mode, r, 0.0);
  const std::complex<double> north = lg_amplitude(mode, 0.0, r);
  // Quarter turn advances the phase by l * pi / 2.
  const double delta = std::arg(north / east);
  CHECK(std::remainder(delta - 3.0 * std::numbers::pi / 2.0, 2.0 * std::numbers::pi) ==
        doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("p = 0 modes are orthonormal over l in [-7, 7]") {
  std::vector<SampledField> modes;
  for (int l = -7; l <= 7; ++l) modes.push_back(evaluate_lg(spec(l), grid));
  double worst = 0.0;
  for (size_t i = 0; i < modes.size(); ++i)
    for (size_t j = 0; j < modes.size(); ++j) {
      const double target = i == j ? 1.0 : 0.0;
      worst = std::max(worst, std::abs(inner_product(modes[i], modes[j]) - target));
    }
  CHECK(worst < 1e-3);
}

TEST_CASE("radial orders are orthogonal too") {
  const SampledField p0 = evaluate_lg(spec(1, 0), grid);
  const SampledField p1 = evaluate_lg(spec(1, 1), grid);
  CHECK(total_power(p1) == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(std::abs(inner_product(p0, p1)) < 1e-3);
}

TEST_CASE("numeric propagation tracks the analytic beam") {
  const LGModeSpec at_origin = spec(1);
  SampledField numeric = evaluate_lg(at_origin, grid);
  scale_to_unit_power(numeric);
  const double dz = 0.5 * at_origin.rayleigh_range_m();
  numeric = propagate_free_space(numeric, dz);

  SampledField analytic = evaluate_lg(spec(1, 0, 0.5), grid);
  scale_to_unit_power(analytic);
  CHECK(std::abs(inner_product(analytic, numeric)) >= 0.999);
}

TEST_CASE("sampling guards reject unresolvable or clipped modes") {
  // Waist thinner than 16 samples.
  CHECK_THROWS_AS((void)evaluate_lg(spec(0), make_grid(64, 8.0 * waist)),
                  std::invalid_argument);
  // Window narrower than 6 waists.
  CHECK_THROWS_AS((void)evaluate_lg(spec(0), make_grid(256, 4.0 * waist)),
                  std::invalid_argument);
  // High-l ring pushed into the window edge.
  const GridSpec tight = make_grid(256, 6.0 * waist);
  const LGModeSpec wide = spec(25);
  if (clipped_power_fraction(wide, tight) > 1e-4)
    CHECK_THROWS_AS((void)evaluate_lg(wide, tight), std::invalid_argument);
  // The clipping estimate grows with l.
  CHECK(clipped_power_fraction(spec(7), grid) > clipped_power_fraction(spec(1), grid));
}

TEST_CASE("lg_basis returns an exactly unit-power +/-q pair") {
  const auto [plus, minus] = lg_basis(3, grid, waist, wavelength);
  CHECK(total_power(plus) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(total_power(minus) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(inner_product(plus, minus)) < 1e-3);
  // Opposite winding: the -q member is the conjugate mode.
  double mirror = 0.0;
  for (size_t i = 0; i < plus.values.size(); ++i)
    mirror = std::max(mirror, std::abs(std::conj(plus.values[i]) - minus.values[i]));
  CHECK(mirror < 1e-12);
  CHECK_THROWS_AS((void)lg_basis(0, grid, waist, wavelength), std::invalid_argument);
}
