// In-place unnormalized 2D FFTs over square complex grids (FFTW backend, cached plans).
// Forward uses the exp(-ik.x) kernel; backward is its unnormalized inverse, so a
// forward/backward round trip scales by n*n.
#pragma once

#include <complex>

namespace oamturb {

void fft2_forward(int n, std::complex<double>* data);
void fft2_backward(int n, std::complex<double>* data);

}  // namespace oamturb
