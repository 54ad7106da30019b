// Kolmogorov turbulence: Fried-parameter calibration, random phase-screen synthesis
// (FFT spectral method with subharmonic low-frequency bins), and the statistical
// estimators used to validate the screens.
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "oamturb/grid_field.hpp"

namespace oamturb {

// The requested coherence scale cannot be represented on the grid (r0 < 2 pitch).
struct ResolutionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TurbulenceParams {
  double cn2 = 0.0;          // refractive-index structure constant, m^(-2/3)
  double thickness_m = 0.0;  // medium thickness collapsed onto the screen
  double wavelength_m = 0.0;

  double wavenumber() const;  // 2 pi / wavelength
};

// 0.185 (lambda^2 / (Cn2 z))^(3/5); positive inputs required.
double fried_parameter(const TurbulenceParams& params, double path_m);

// w0 / r0 for a path of length path_m.
double scintillation_strength(double waist_m, const TurbulenceParams& params, double path_m);

// Invert strength = w0/r0; strength 0 maps to an infinite Fried parameter.
double fried_from_strength(double waist_m, double strength);

// Reference phase structure function 6.88 (r/r0)^(5/3).
inline constexpr double structure_coefficient = 6.88;
double kolmogorov_structure(double separation_m, double fried_m);

struct PhaseScreen {
  GridSpec grid;
  double fried_m = 0.0;        // +infinity encodes a zero screen
  std::uint64_t seed = 0;      // stream key that produced the pair
  int pair_index = 0;          // 0: real part, 1: imaginary part of the complex draw
  std::vector<double> theta;   // radians, row-major like SampledField

  double& at(int ix, int iy) {
    return theta[static_cast<size_t>(iy) * grid.n_samples + ix];
  }
  double at(int ix, int iy) const {
    return theta[static_cast<size_t>(iy) * grid.n_samples + ix];
  }
};

// Draw one complex Gaussian spectral realization weighted by the Kolmogorov phase
// spectrum and return its real and imaginary parts as two independent screens.
// subharmonic_levels adds recursively refined low-frequency bins below the FFT grid
// (3x3 tiling per level); 0 disables them. Deterministic in (grid, fried_m, seed).
std::pair<PhaseScreen, PhaseScreen> generate_screen_pair(const GridSpec& grid,
                                                         double fried_m,
                                                         std::uint64_t seed,
                                                         int subharmonic_levels = 3);
// Same, with the strength derived from physical parameters (r0 over the screen
// thickness); cn2 == 0 produces zero screens.
std::pair<PhaseScreen, PhaseScreen> generate_screen_pair(const GridSpec& grid,
                                                         const TurbulenceParams& params,
                                                         std::uint64_t seed,
                                                         int subharmonic_levels = 3);

struct StructureFunctionProfile {
  std::vector<double> separation_m;
  std::vector<double> value;
};

// Ensemble + spatial average of [theta(X+d) - theta(X)]^2 over non-wrapping axis and
// diagonal displacements, binned by |d|. max_lag defaults to n/8 samples.
StructureFunctionProfile estimate_structure_function(const std::vector<PhaseScreen>& screens,
                                                     int max_lag = 0);

// Autocorrelation helper <theta(X+d) theta(X)> along the axes (first entry is d=0).
// Pairs are restricted to the window, so B(0) is the plain sample variance; the
// stationary identity D(r) = 2 [B(0) - B(r)] holds for the periodic FFT synthesis
// but picks up window-coverage bias once subharmonics add window-scale power.
StructureFunctionProfile estimate_phase_autocorrelation(const std::vector<PhaseScreen>& screens,
                                                        int max_lag = 0);

// Least-squares slope of log(value) vs log(separation) between the given separations.
double structure_log_slope(const StructureFunctionProfile& profile,
                           double min_separation_m, double max_separation_m);

// Binary interchange: fixed header (grid, Fried parameter) then float32 samples with
// per-screen (seed, pair_index) records. Host byte order.
void write_screens(const std::string& path, const std::vector<PhaseScreen>& screens);
std::vector<PhaseScreen> read_screens(const std::string& path);

}  // namespace oamturb
