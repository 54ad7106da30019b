#include "oamturb/quantum.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

namespace oamturb {
namespace {

constexpr double inv_sqrt2 = 0.70710678118654752440;

void check_same_plane(const SampledField& a, const SampledField& b, const char* label) {
  const double tol = 1e-9 * (1.0 + std::max(std::abs(a.z_m), std::abs(b.z_m)));
  if (std::abs(a.z_m - b.z_m) > tol)
    throw std::invalid_argument(std::string("modal_coefficients: ") + label +
                                " is not at the projection plane");
}

// Clip tiny negative eigenvalues from rounding; anything genuinely negative is an error.
void clip_spectrum(Eigen::Vector4d& eigenvalues, const char* label) {
  for (int i = 0; i < 4; ++i) {
    if (eigenvalues[i] < -1e-10)
      throw std::invalid_argument(std::string(label) + ": matrix is not positive semidefinite");
    if (eigenvalues[i] < 0.0) eigenvalues[i] = 0.0;
  }
}

}  // namespace

ModalCoefficients modal_coefficients(const SampledField& distorted_plus,
                                     const SampledField& distorted_minus,
                                     const SampledField& basis_plus,
                                     const SampledField& basis_minus) {
  check_same_plane(distorted_plus, distorted_minus, "distorted -q field");
  check_same_plane(distorted_plus, basis_plus, "+q basis mode");
  check_same_plane(distorted_plus, basis_minus, "-q basis mode");
  ModalCoefficients c;
  c.a_q = inner_product(basis_plus, distorted_plus);
  c.a_qbar = inner_product(basis_minus, distorted_plus);
  c.b_q = inner_product(basis_plus, distorted_minus);
  c.b_qbar = inner_product(basis_minus, distorted_minus);
  return c;
}

ModalCoefficients ideal_arm() { return {1.0, 0.0, 0.0, 1.0}; }

Eigen::Vector4cd ProjectedPureState::vector() const {
  Eigen::Vector4cd v;
  v << c1, c2, c3, c4;
  return v;
}

ProjectedPureState project_two_photon(const ModalCoefficients& arm_a,
                                      const ModalCoefficients& arm_b) {
  // Arm B plays the (c, d) role: its a_* fields are the +q-input coefficients, its
  // b_* fields the -q-input ones, exactly like arm A.
  ProjectedPureState s;
  s.c1 = (arm_a.a_q * arm_b.b_q + arm_a.b_q * arm_b.a_q) * inv_sqrt2;
  s.c2 = (arm_a.a_q * arm_b.b_qbar + arm_a.b_q * arm_b.a_qbar) * inv_sqrt2;
  s.c3 = (arm_a.a_qbar * arm_b.b_q + arm_a.b_qbar * arm_b.a_q) * inv_sqrt2;
  s.c4 = (arm_a.a_qbar * arm_b.b_qbar + arm_a.b_qbar * arm_b.a_qbar) * inv_sqrt2;
  return s;
}

ProjectedPureState project_single_photon(const ModalCoefficients& arm) {
  ProjectedPureState s;
  s.c1 = arm.b_q * inv_sqrt2;
  s.c2 = arm.a_q * inv_sqrt2;
  s.c3 = arm.b_qbar * inv_sqrt2;
  s.c4 = arm.a_qbar * inv_sqrt2;
  return s;
}

void DensityAccumulator::add(const ProjectedPureState& state) {
  const Eigen::Vector4cd v = state.vector();
  sum_.noalias() += v * v.adjoint();
  ++count_;
}

void DensityAccumulator::merge(const DensityAccumulator& other) {
  sum_ += other.sum_;
  count_ += other.count_;
}

Eigen::Matrix4cd DensityAccumulator::density() const {
  if (count_ == 0) throw std::invalid_argument("DensityAccumulator: no states accumulated");
  const double trace = sum_.trace().real();
  if (!(trace > 0.0))
    throw std::domain_error(
        "DensityAccumulator: every member projected out of the qubit subspace");
  return sum_ / trace;
}

double concurrence(const Eigen::Matrix4cd& density) {
  if ((density - density.adjoint()).cwiseAbs().maxCoeff() > 1e-8)
    throw std::invalid_argument("concurrence: matrix is not Hermitian");
  if (std::abs(density.trace() - std::complex<double>(1.0)) > 1e-8)
    throw std::invalid_argument("concurrence: trace must be 1");

  const Eigen::Matrix4cd rho = 0.5 * (density + density.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> rho_solver(rho);
  Eigen::Vector4d rho_eigs = rho_solver.eigenvalues();
  clip_spectrum(rho_eigs, "concurrence");
  const Eigen::Matrix4cd sqrt_rho = rho_solver.eigenvectors() *
                                    rho_eigs.cwiseSqrt().asDiagonal() *
                                    rho_solver.eigenvectors().adjoint();

  Eigen::Matrix4cd yy = Eigen::Matrix4cd::Zero();
  yy(0, 3) = -1.0;
  yy(1, 2) = 1.0;
  yy(2, 1) = 1.0;
  yy(3, 0) = -1.0;
  const Eigen::Matrix4cd rho_tilde = yy * rho.conjugate() * yy;

  Eigen::Matrix4cd product = sqrt_rho * rho_tilde * sqrt_rho;
  product = 0.5 * (product + product.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> product_solver(product);
  Eigen::Vector4d lambdas = product_solver.eigenvalues();
  clip_spectrum(lambdas, "concurrence");

  const double c = std::sqrt(lambdas[3]) - std::sqrt(lambdas[2]) - std::sqrt(lambdas[1]) -
                   std::sqrt(lambdas[0]);
  return std::clamp(c, 0.0, 1.0);
}

Eigen::Matrix4cd project_to_physical(const Eigen::Matrix4cd& density) {
  if ((density - density.adjoint()).cwiseAbs().maxCoeff() > 1e-9)
    throw std::invalid_argument("project_to_physical: matrix is not Hermitian");
  const Eigen::Matrix4cd sym = 0.5 * (density + density.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> solver(sym);
  const Eigen::Vector4d eigs = solver.eigenvalues().cwiseMax(0.0);
  const double trace = eigs.sum();
  if (!(trace > 0.0))
    throw std::domain_error("project_to_physical: no positive spectral weight to keep");
  return solver.eigenvectors() * (eigs / trace).asDiagonal() * solver.eigenvectors().adjoint();
}

}  // namespace oamturb
