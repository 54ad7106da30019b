#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <vector>

#include "oamturb/fft.hpp"
#include "oamturb/grid_field.hpp"
#include "oamturb/rng.hpp"
#include "oamturb/turbulence.hpp"

using namespace oamturb;

namespace {

SampledField random_field(const GridSpec& grid, std::uint64_t seed) {
  SampledField f = make_field(grid, 1.55e-6);
  RandomStream stream(seed);
  for (auto& v : f.values) v = stream.next_complex_gaussian();
  return f;
}

}  // namespace

TEST_CASE("make_grid validates shape and window") {
  CHECK_THROWS_AS(make_grid(100, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(make_grid(32, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(make_grid(256, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(make_grid(256, -1.0), std::invalid_argument);

  const GridSpec grid = make_grid(128, 0.64);
  CHECK(grid.n_samples == 128);
  CHECK(grid.pitch_m == doctest::Approx(0.005));
  CHECK(grid.window_m() == doctest::Approx(0.64));
  CHECK(grid.coordinate(64) == 0.0);
  CHECK(grid.coordinate(0) == doctest::Approx(-0.32));
}

TEST_CASE("frequency follows the transform layout") {
  const GridSpec grid = make_grid(64, 1.0);
  const double dk = 2.0 * std::numbers::pi / grid.window_m();
  CHECK(grid.frequency(0) == 0.0);
  CHECK(grid.frequency(1) == doctest::Approx(dk));
  CHECK(grid.frequency(63) == doctest::Approx(-dk));
  CHECK(grid.frequency(31) == doctest::Approx(31 * dk));
}

TEST_CASE("fft round trip scales by n*n") {
  const int n = 64;
  const GridSpec grid = make_grid(n, 1.0);
  const SampledField original = random_field(grid, 11);
  std::vector<std::complex<double>> data = original.values;
  fft2_forward(n, data.data());
  fft2_backward(n, data.data());
  double worst = 0.0;
  for (size_t i = 0; i < data.size(); ++i)
    worst = std::max(worst, std::abs(data[i] / double(n * n) - original.values[i]));
  CHECK(worst < 1e-12);
}

TEST_CASE("inner products are conjugate symmetric and power is consistent") {
  const GridSpec grid = make_grid(64, 1.0);
  const SampledField a = random_field(grid, 1);
  const SampledField b = random_field(grid, 2);

  const std::complex<double> ab = inner_product(a, b);
  const std::complex<double> ba = inner_product(b, a);
  CHECK(std::abs(ab - std::conj(ba)) < 1e-12);
  CHECK(inner_product(a, a).real() == doctest::Approx(total_power(a)));
  CHECK(std::abs(inner_product(a, a).imag()) < 1e-12);

  SampledField other_grid = random_field(make_grid(128, 1.0), 3);
  CHECK_THROWS_AS((void)inner_product(a, other_grid), std::invalid_argument);
  SampledField other_lambda = a;
  other_lambda.wavelength_m = 2.0e-6;
  CHECK_THROWS_AS((void)inner_product(a, other_lambda), std::invalid_argument);
}

TEST_CASE("scale_to_unit_power normalizes and rejects zero fields") {
  const GridSpec grid = make_grid(64, 1.0);
  SampledField f = random_field(grid, 4);
  scale_to_unit_power(f);
  CHECK(total_power(f) == doctest::Approx(1.0).epsilon(1e-12));

  SampledField zero = make_field(grid, 1.55e-6);
  CHECK_THROWS_AS(scale_to_unit_power(zero), std::domain_error);
}

TEST_CASE("phase masks preserve power sample by sample") {
  const GridSpec grid = make_grid(64, 1.0);
  SampledField f = random_field(grid, 5);

  auto screens = generate_screen_pair(grid, 0.2, 77);
  const SampledField distorted = apply_phase(f, screens.first);
  CHECK(total_power(distorted) == doctest::Approx(total_power(f)).epsilon(1e-12));
  bool changed = false;
  for (size_t i = 0; i < f.values.size(); ++i) {
    CHECK(std::abs(std::abs(distorted.values[i]) - std::abs(f.values[i])) < 1e-12);
    changed = changed || std::abs(distorted.values[i] - f.values[i]) > 1e-12;
  }
  CHECK(changed);

  auto zero = generate_screen_pair(grid, std::numeric_limits<double>::infinity(), 1);
  const SampledField same = apply_phase(f, zero.first);
  for (size_t i = 0; i < f.values.size(); ++i) CHECK(same.values[i] == f.values[i]);
}

TEST_CASE("free-space propagation is unitary and guards the window") {
  const GridSpec grid = make_grid(128, 0.8);
  // Gaussian envelope well inside the window.
  SampledField f = make_field(grid, 1.55e-6);
  const double w0 = 0.1;
  for (int iy = 0; iy < grid.n_samples; ++iy)
    for (int ix = 0; ix < grid.n_samples; ++ix) {
      const double x = grid.coordinate(ix), y = grid.coordinate(iy);
      f.at(ix, iy) = std::exp(-(x * x + y * y) / (w0 * w0));
    }
  scale_to_unit_power(f);

  const double z_r = std::numbers::pi * w0 * w0 / f.wavelength_m;
  const SampledField g = propagate_free_space(f, 0.3 * z_r);
  CHECK(total_power(g) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(g.z_m == doctest::Approx(0.3 * z_r));

  const SampledField still = propagate_free_space(f, 0.0);
  double diff = 0.0;
  for (size_t i = 0; i < f.values.size(); ++i)
    diff = std::max(diff, std::abs(still.values[i] - f.values[i]));
  CHECK(diff < 1e-12);

  CHECK_THROWS_AS((void)propagate_free_space(f, -1.0), std::domain_error);
  CHECK_THROWS_AS((void)propagate_free_space(f, 1e9), std::invalid_argument);
}
