// Analytic Laguerre-Gaussian modes: pointwise evaluation, grid sampling, and the
// +/-q basis pairs used for qubit projections.
#pragma once

#include <complex>
#include <utility>

#include "oamturb/grid_field.hpp"

namespace oamturb {

struct LGModeSpec {
  int l = 0;                 // azimuthal index, signed
  int p = 0;                 // radial index, >= 0
  double waist_m = 0.0;      // w0
  double wavelength_m = 0.0;
  double t = 0.0;            // z / z_R

  double rayleigh_range_m() const;
};

// Generalized Laguerre polynomial L_p^alpha(x) by the three-term recurrence.
double laguerre(int p, int alpha, double x);

// Mode amplitude at a physical point, normalized to unit continuum L2 norm
// (value at the origin for l=p=0, t=0 is sqrt(2/pi)/w0).
std::complex<double> lg_amplitude(const LGModeSpec& mode, double x_m, double y_m);

// Fraction of mode power falling outside the grid window (radial tail bound);
// evaluate_lg requires this to be <= 1e-4.
double clipped_power_fraction(const LGModeSpec& mode, const GridSpec& grid);

// Sample the mode on a grid. Discrete norm^2 lands within 1e-3 of 1 on compliant
// grids; no renormalization is applied here. Sampling guards: waist >= 16 samples,
// window >= 6 w0, clipped power <= 1e-4.
SampledField evaluate_lg(const LGModeSpec& mode, const GridSpec& grid);

// Exactly unit-power fields for l = +q and l = -q (p = 0, t = 0), q >= 1.
std::pair<SampledField, SampledField> lg_basis(int q, const GridSpec& grid,
                                               double waist_m, double wavelength_m);

}  // namespace oamturb
