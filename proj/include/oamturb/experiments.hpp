// Monte Carlo experiment drivers: concurrence-vs-strength sweeps for single- and
// two-photon turbulence scenarios, coincidence crosstalk matrices, decay-scale fits,
// and the closed-form decay-distance estimate.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace oamturb {

enum class Scenario { single_photon, two_photon };

std::string to_string(Scenario scenario);
Scenario parse_scenario(const std::string& name);

// 0 to 4 in steps of 0.2.
std::vector<double> default_strengths();

struct SweepConfig {
  Scenario scenario = Scenario::two_photon;
  std::vector<int> q_values{1, 3, 5, 7};          // qubit mode index per curve
  std::vector<double> strengths = default_strengths();  // w0/r0, ascending from 0
  int ensemble = 200;                             // members per (q, strength)
  int grid_samples = 256;
  double window_over_waist = 8.0;                 // window = factor * w0
  double waist_m = 0.1;
  double wavelength_m = 1.55e-6;
  double propagation_m = 0.0;                     // free-space distance after the screen
  int subharmonic_levels = 3;
  std::uint64_t seed = 1;
  int bootstrap = 200;                            // resamples for the concurrence SE
};

struct SweepPoint {
  Scenario scenario = Scenario::two_photon;
  int q = 0;
  double strength = 0.0;
  Eigen::Matrix4cd density = Eigen::Matrix4cd::Zero();
  double concurrence = 0.0;
  double concurrence_se = 0.0;
  // Ensemble-mean coincidence probabilities over l_A (rows), l_B (cols) in [-q, q],
  // normalized by the total detected mass.
  Eigen::MatrixXd crosstalk;
  int n_effective = 0;  // members with nonzero qubit-subspace weight
};

struct SweepResult {
  SweepConfig config;
  std::vector<SweepPoint> points;  // q-major, strength-minor

  const SweepPoint& point(int q_index, int strength_index) const {
    return points.at(static_cast<size_t>(q_index) * config.strengths.size() + strength_index);
  }
};

// Ensemble sweep over (q, strength). Deterministic for a fixed config: member screens
// are keyed by (seed, strength index, draw index), results are reduced in member
// order, so the output is independent of `workers` (0 = hardware concurrency).
SweepResult run_sweep(const SweepConfig& config, int workers = 0);

struct CrosstalkConfig {
  int q_max = 3;
  std::vector<double> strengths{0.0, 2.0, 4.0};
  int ensemble = 200;
  int grid_samples = 256;
  double window_over_waist = 8.0;
  double waist_m = 0.1;
  double wavelength_m = 1.55e-6;
  int subharmonic_levels = 3;
  std::uint64_t seed = 1;
  bool arm_b_ideal = false;  // leave photon B undistorted (single-photon geometry)
};

struct CrosstalkMatrix {
  int q_max = 0;
  double strength = 0.0;
  // Coincidence probabilities over l_A (rows), l_B (cols) in [-q_max, q_max] for the
  // flat anti-correlated superposition input, normalized by total detected mass.
  Eigen::MatrixXd probability;
};

std::vector<CrosstalkMatrix> crosstalk_matrices(const CrosstalkConfig& config, int workers = 0);
CrosstalkMatrix crosstalk_matrix(int q_max, double strength, int ensemble, std::uint64_t seed);

struct DecayFit {
  Scenario scenario = Scenario::two_photon;
  std::vector<int> q_values;
  std::vector<double> omega_half;  // strength where each q curve first crosses 0.5
  double slope = 0.0;              // of log10(omega_half) vs log10(q)
  double intercept = 0.0;
  double prefactor = 0.0;          // 10^intercept
};

// Piecewise-linear 0.5 crossings per q, then a log10-log10 least-squares line.
// A curve that never crosses 0.5 raises std::range_error naming (scenario, q).
DecayFit fit_decay_scale(const SweepResult& result);

// 0.06 lambda^2 l^(5/6) / (w0^(5/3) Cn2), meters.
double decay_distance(int l, double waist_m, double wavelength_m, double cn2);

}  // namespace oamturb
