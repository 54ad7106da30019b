// Qubit-subspace reduction of distorted photon fields and two-qubit density-matrix
// tools: modal transfer coefficients, pure-state projection of the Bell input,
// ensemble density accumulation, Wootters concurrence.
#pragma once

#include <complex>
#include <cstddef>

#include <Eigen/Core>

#include "oamturb/grid_field.hpp"

namespace oamturb {

// One arm's transfer coefficients on the {l=+q, l=-q} qubit subspace: *_q is the
// overlap with the +q basis mode, *_qbar with -q; a_* come from the distorted +q
// input, b_* from the distorted -q input.
struct ModalCoefficients {
  std::complex<double> a_q;
  std::complex<double> a_qbar;
  std::complex<double> b_q;
  std::complex<double> b_qbar;
};

// Project both distorted fields of one arm onto the +/-q basis pair. All four fields
// must share grid, wavelength, and plane.
ModalCoefficients modal_coefficients(const SampledField& distorted_plus,
                                     const SampledField& distorted_minus,
                                     const SampledField& basis_plus,
                                     const SampledField& basis_minus);

// Identity channel: a_q = b_qbar = 1, crosstalk terms 0.
ModalCoefficients ideal_arm();

// Unnormalized projection of the evolved Bell pair onto the two-qubit basis
// {|q,q>, |q,qbar>, |qbar,q>, |qbar,qbar>}; the norm shortfall is the light lost
// outside the subspace.
struct ProjectedPureState {
  std::complex<double> c1;
  std::complex<double> c2;
  std::complex<double> c3;
  std::complex<double> c4;

  Eigen::Vector4cd vector() const;
};

// Both photons traverse turbulence.
ProjectedPureState project_two_photon(const ModalCoefficients& arm_a,
                                      const ModalCoefficients& arm_b);
// Only photon A traverses turbulence; photon B is detected unperturbed. Identical to
// project_two_photon(arm, ideal_arm()).
ProjectedPureState project_single_photon(const ModalCoefficients& arm);

// Sum of |v><v| over ensemble members. Addition order is fixed by the caller, so
// merge() of per-worker partials must itself happen in a fixed order for bitwise
// reproducibility.
class DensityAccumulator {
 public:
  void add(const ProjectedPureState& state);
  void merge(const DensityAccumulator& other);
  std::size_t count() const { return count_; }

  // Trace-normalized density matrix; rejects an empty or fully projected-out ensemble.
  Eigen::Matrix4cd density() const;

 private:
  Eigen::Matrix4cd sum_ = Eigen::Matrix4cd::Zero();
  std::size_t count_ = 0;
};

// Wootters concurrence of a two-qubit density matrix. Requires a Hermitian, unit-trace,
// positive-semidefinite input (1e-8 tolerance; eigenvalues above -1e-10 are clipped).
double concurrence(const Eigen::Matrix4cd& density);

// Nearest physical state: clip negative eigenvalues, renormalize the trace. Input must
// be Hermitian within 1e-9.
Eigen::Matrix4cd project_to_physical(const Eigen::Matrix4cd& density);

}  // namespace oamturb
