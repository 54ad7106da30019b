#include "oamturb/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <utility>

#include "oamturb/grid_field.hpp"
#include "oamturb/modes.hpp"
#include "oamturb/quantum.hpp"
#include "oamturb/rng.hpp"
#include "oamturb/turbulence.hpp"

namespace oamturb {
namespace {

constexpr double inv_sqrt2 = 0.70710678118654752440;
constexpr std::uint64_t bootstrap_tag = 0x626f6f74;  // namespaces the resampling stream

void parallel_for(std::size_t items, int workers, const std::function<void(std::size_t)>& body) {
  std::size_t pool_size = workers > 0 ? static_cast<std::size_t>(workers)
                                      : std::max(1u, std::thread::hardware_concurrency());
  pool_size = std::min(pool_size, items);
  if (pool_size <= 1) {
    for (std::size_t i = 0; i < items; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(pool_size);
  for (std::size_t t = 0; t < pool_size; ++t) {
    pool.emplace_back([&] {
      try {
        for (std::size_t i = next.fetch_add(1); i < items; i = next.fetch_add(1)) body(i);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(items);
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

// Unit-power p=0 modes indexed by azimuthal number.
struct ModeBank {
  int max_l = 0;
  std::vector<SampledField> modes;

  const SampledField& mode(int l) const { return modes[static_cast<size_t>(l + max_l)]; }
};

ModeBank build_bank(const GridSpec& grid, int max_l, double waist_m, double wavelength_m,
                    double t) {
  ModeBank bank;
  bank.max_l = max_l;
  bank.modes.reserve(2 * static_cast<size_t>(max_l) + 1);
  for (int l = -max_l; l <= max_l; ++l) {
    SampledField f = evaluate_lg({l, 0, waist_m, wavelength_m, t}, grid);
    scale_to_unit_power(f);
    bank.modes.push_back(std::move(f));
  }
  return bank;
}

std::vector<std::complex<double>> unimodular_mask(const PhaseScreen& screen) {
  std::vector<std::complex<double>> mask(screen.theta.size());
  for (size_t k = 0; k < mask.size(); ++k) mask[k] = std::polar(1.0, screen.theta[k]);
  return mask;
}

SampledField distort(const SampledField& mode, const std::vector<std::complex<double>>& mask,
                     double propagation_m) {
  SampledField f = mode;
  for (size_t k = 0; k < f.values.size(); ++k) f.values[k] *= mask[k];
  if (propagation_m > 0.0) f = propagate_free_space(f, propagation_m);
  return f;
}

// Overlaps <mode(l) | field> for l in [-q, q].
Eigen::VectorXcd mode_overlaps(const ModeBank& bank, int q, const SampledField& field) {
  Eigen::VectorXcd m(2 * q + 1);
  for (int l = -q; l <= q; ++l) m[l + q] = inner_product(bank.mode(l), field);
  return m;
}

// Coincidence amplitudes of the evolved q-Bell pair over (l_A, l_B) in [-q, q]^2 and
// its qubit-subspace projection (the four corner amplitudes).
void bell_projection(const Eigen::VectorXcd& a_plus, const Eigen::VectorXcd& a_minus,
                     const Eigen::VectorXcd& b_plus, const Eigen::VectorXcd& b_minus,
                     Eigen::Vector4cd& state, Eigen::MatrixXd& coincidence) {
  const int dim = static_cast<int>(a_plus.size());
  Eigen::MatrixXcd amp(dim, dim);
  for (int ia = 0; ia < dim; ++ia)
    for (int ib = 0; ib < dim; ++ib)
      amp(ia, ib) = (a_plus[ia] * b_minus[ib] + a_minus[ia] * b_plus[ib]) * inv_sqrt2;
  coincidence = amp.cwiseAbs2();
  const int top = dim - 1;
  state << amp(top, top), amp(top, 0), amp(0, top), amp(0, 0);
}

Eigen::VectorXcd unit_overlap_vector(int q, int l) {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(2 * q + 1);
  v[l + q] = 1.0;
  return v;
}

void check_common_fields(const char* who, int grid_samples, double window_over_waist,
                         double waist_m, double wavelength_m, int subharmonic_levels,
                         int ensemble, int min_ensemble) {
  std::ostringstream msg;
  if (waist_m <= 0.0 || wavelength_m <= 0.0) {
    msg << who << ": waist and wavelength must be positive";
    throw std::invalid_argument(msg.str());
  }
  if (window_over_waist <= 0.0) {
    msg << who << ": window_over_waist must be positive";
    throw std::invalid_argument(msg.str());
  }
  if (subharmonic_levels < 0 || subharmonic_levels > 12) {
    msg << who << ": subharmonic_levels outside [0, 12]";
    throw std::invalid_argument(msg.str());
  }
  if (ensemble < min_ensemble) {
    msg << who << ": ensemble must be at least " << min_ensemble;
    throw std::invalid_argument(msg.str());
  }
  (void)grid_samples;  // validated by make_grid
}

void check_strengths_resolution(const char* who, const std::vector<double>& strengths,
                                double waist_m, const GridSpec& grid) {
  for (double s : strengths) {
    if (s == 0.0) continue;
    const double fried = fried_from_strength(waist_m, s);
    if (fried < 2.0 * grid.pitch_m) {
      std::ostringstream msg;
      msg << who << ": strength " << s << " needs a Fried parameter of " << fried
          << " m, below the 2-sample resolution floor " << 2.0 * grid.pitch_m << " m";
      throw ResolutionError(msg.str());
    }
  }
}

double bootstrap_se(const std::vector<Eigen::Vector4cd>& members, int resamples,
                    std::uint64_t key) {
  if (resamples < 2 || members.size() < 2) return 0.0;
  RandomStream stream(key);
  std::vector<double> values;
  values.reserve(resamples);
  for (int b = 0; b < resamples; ++b) {
    Eigen::Matrix4cd sum = Eigen::Matrix4cd::Zero();
    for (size_t i = 0; i < members.size(); ++i) {
      const Eigen::Vector4cd& v = members[stream.next_u64() % members.size()];
      sum.noalias() += v * v.adjoint();
    }
    const double trace = sum.trace().real();
    if (!(trace > 0.0)) continue;
    values.push_back(concurrence(sum / trace));
  }
  if (values.size() < 2) return 0.0;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= double(values.size());
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  return std::sqrt(var / double(values.size() - 1));
}

}  // namespace

std::string to_string(Scenario scenario) {
  switch (scenario) {
    case Scenario::single_photon: return "single_photon";
    case Scenario::two_photon: return "two_photon";
  }
  throw std::invalid_argument("to_string: unknown scenario");
}

Scenario parse_scenario(const std::string& name) {
  if (name == "single_photon") return Scenario::single_photon;
  if (name == "two_photon") return Scenario::two_photon;
  throw std::invalid_argument("parse_scenario: expected single_photon or two_photon, got \"" +
                              name + "\"");
}

std::vector<double> default_strengths() {
  std::vector<double> s;
  s.reserve(21);
  for (int i = 0; i <= 20; ++i) s.push_back(0.2 * i);
  return s;
}

SweepResult run_sweep(const SweepConfig& config, int workers) {
  if (config.q_values.empty()) throw std::invalid_argument("run_sweep: q_values must not be empty");
  for (int q : config.q_values)
    if (q < 1) throw std::invalid_argument("run_sweep: q values must be >= 1");
  if (config.strengths.empty() || config.strengths.front() != 0.0)
    throw std::invalid_argument("run_sweep: strengths must start at 0");
  for (size_t i = 0; i + 1 < config.strengths.size(); ++i)
    if (!(config.strengths[i] < config.strengths[i + 1]))
      throw std::invalid_argument("run_sweep: strengths must be strictly ascending");
  if (!std::isfinite(config.strengths.back()))
    throw std::invalid_argument("run_sweep: strengths must be finite");
  if (config.propagation_m < 0.0)
    throw std::invalid_argument("run_sweep: propagation distance must be non-negative");
  if (config.bootstrap < 0)
    throw std::invalid_argument("run_sweep: bootstrap resamples must be non-negative");
  check_common_fields("run_sweep", config.grid_samples, config.window_over_waist,
                      config.waist_m, config.wavelength_m, config.subharmonic_levels,
                      config.ensemble, 30);

  const GridSpec grid =
      make_grid(config.grid_samples, config.window_over_waist * config.waist_m);
  check_strengths_resolution("run_sweep", config.strengths, config.waist_m, grid);

  const int max_q = *std::max_element(config.q_values.begin(), config.q_values.end());
  const ModeBank input_bank =
      build_bank(grid, max_q, config.waist_m, config.wavelength_m, 0.0);
  const ModeBank* output_bank = &input_bank;
  ModeBank propagated_bank;
  if (config.propagation_m > 0.0) {
    const double rayleigh =
        LGModeSpec{0, 0, config.waist_m, config.wavelength_m, 0.0}.rayleigh_range_m();
    propagated_bank = build_bank(grid, max_q, config.waist_m, config.wavelength_m,
                                 config.propagation_m / rayleigh);
    output_bank = &propagated_bank;
  }

  const int n_q = static_cast<int>(config.q_values.size());
  const int n_s = static_cast<int>(config.strengths.size());
  const int n_members = config.ensemble;
  const bool single = config.scenario == Scenario::single_photon;

  SweepResult result;
  result.config = config;
  result.points.resize(static_cast<size_t>(n_q) * n_s);

  for (int s_idx = 0; s_idx < n_s; ++s_idx) {
    const double strength = config.strengths[s_idx];
    const double fried = fried_from_strength(config.waist_m, strength);

    std::vector<std::vector<Eigen::Vector4cd>> states(n_q);
    std::vector<std::vector<Eigen::MatrixXd>> coincidences(n_q);
    for (int qi = 0; qi < n_q; ++qi) {
      states[qi].assign(n_members, Eigen::Vector4cd::Zero());
      coincidences[qi].resize(n_members);
    }

    const auto process_member = [&](int member, const std::vector<std::complex<double>>& mask_a,
                                    const std::vector<std::complex<double>>* mask_b) {
      for (int qi = 0; qi < n_q; ++qi) {
        const int q = config.q_values[qi];
        const SampledField a_plus_f = distort(input_bank.mode(q), mask_a, config.propagation_m);
        const SampledField a_minus_f = distort(input_bank.mode(-q), mask_a, config.propagation_m);
        const Eigen::VectorXcd a_plus = mode_overlaps(*output_bank, q, a_plus_f);
        const Eigen::VectorXcd a_minus = mode_overlaps(*output_bank, q, a_minus_f);
        Eigen::VectorXcd b_plus, b_minus;
        if (mask_b) {
          const SampledField b_plus_f =
              distort(input_bank.mode(q), *mask_b, config.propagation_m);
          const SampledField b_minus_f =
              distort(input_bank.mode(-q), *mask_b, config.propagation_m);
          b_plus = mode_overlaps(*output_bank, q, b_plus_f);
          b_minus = mode_overlaps(*output_bank, q, b_minus_f);
        } else {
          b_plus = unit_overlap_vector(q, q);
          b_minus = unit_overlap_vector(q, -q);
        }
        bell_projection(a_plus, a_minus, b_plus, b_minus, states[qi][member],
                        coincidences[qi][member]);
      }
    };

    // One screen pair per draw: the two-photon scenario spends it on the two arms of
    // one member, the single-photon scenario on two consecutive members.
    const std::size_t draws = single ? static_cast<std::size_t>((n_members + 1) / 2)
                                     : static_cast<std::size_t>(n_members);
    parallel_for(draws, workers, [&](std::size_t draw) {
      const std::uint64_t key =
          derive_key(config.seed, static_cast<std::uint64_t>(s_idx), draw);
      const auto screens = generate_screen_pair(grid, fried, key, config.subharmonic_levels);
      if (single) {
        process_member(static_cast<int>(2 * draw), unimodular_mask(screens.first), nullptr);
        if (2 * draw + 1 < static_cast<std::size_t>(n_members))
          process_member(static_cast<int>(2 * draw + 1), unimodular_mask(screens.second),
                         nullptr);
      } else {
        const auto mask_a = unimodular_mask(screens.first);
        const auto mask_b = unimodular_mask(screens.second);
        process_member(static_cast<int>(draw), mask_a, &mask_b);
      }
    });

    for (int qi = 0; qi < n_q; ++qi) {
      DensityAccumulator accumulator;
      Eigen::MatrixXd mass = Eigen::MatrixXd::Zero(2 * config.q_values[qi] + 1,
                                                   2 * config.q_values[qi] + 1);
      int effective = 0;
      for (int m = 0; m < n_members; ++m) {
        const Eigen::Vector4cd& v = states[qi][m];
        accumulator.add({v[0], v[1], v[2], v[3]});
        mass += coincidences[qi][m];
        if (v.squaredNorm() > 0.0) ++effective;
      }
      SweepPoint point;
      point.scenario = config.scenario;
      point.q = config.q_values[qi];
      point.strength = strength;
      point.density = accumulator.density();
      point.concurrence = concurrence(point.density);
      point.concurrence_se =
          bootstrap_se(states[qi], config.bootstrap,
                       derive_key(config.seed, bootstrap_tag, static_cast<std::uint64_t>(qi),
                                  static_cast<std::uint64_t>(s_idx)));
      const double total = mass.sum();
      if (!(total > 0.0))
        throw std::domain_error("run_sweep: no coincidence mass detected at strength " +
                                std::to_string(strength));
      point.crosstalk = mass / total;
      point.n_effective = effective;
      result.points[static_cast<size_t>(qi) * n_s + s_idx] = std::move(point);
    }
  }
  return result;
}

std::vector<CrosstalkMatrix> crosstalk_matrices(const CrosstalkConfig& config, int workers) {
  if (config.q_max < 1) throw std::invalid_argument("crosstalk_matrices: q_max must be >= 1");
  if (config.strengths.empty())
    throw std::invalid_argument("crosstalk_matrices: strengths must not be empty");
  for (double s : config.strengths)
    if (!(s >= 0.0) || !std::isfinite(s))
      throw std::invalid_argument("crosstalk_matrices: strengths must be finite and >= 0");
  check_common_fields("crosstalk_matrices", config.grid_samples, config.window_over_waist,
                      config.waist_m, config.wavelength_m, config.subharmonic_levels,
                      config.ensemble, 1);

  const GridSpec grid =
      make_grid(config.grid_samples, config.window_over_waist * config.waist_m);
  check_strengths_resolution("crosstalk_matrices", config.strengths, config.waist_m, grid);

  const int dim = 2 * config.q_max + 1;
  const ModeBank bank = build_bank(grid, config.q_max, config.waist_m, config.wavelength_m, 0.0);
  const double input_norm = 1.0 / std::sqrt(double(dim));

  std::vector<CrosstalkMatrix> matrices;
  matrices.reserve(config.strengths.size());
  for (size_t s_idx = 0; s_idx < config.strengths.size(); ++s_idx) {
    const double strength = config.strengths[s_idx];
    const double fried = fried_from_strength(config.waist_m, strength);

    std::vector<Eigen::MatrixXd> members(config.ensemble);
    parallel_for(static_cast<std::size_t>(config.ensemble), workers, [&](std::size_t m) {
      const std::uint64_t key =
          derive_key(config.seed, static_cast<std::uint64_t>(s_idx), m);
      const auto screens = generate_screen_pair(grid, fried, key, config.subharmonic_levels);
      const auto mask_a = unimodular_mask(screens.first);

      // Columns are input modes, rows the detected mode: M(out, in) = <out|U|in>.
      Eigen::MatrixXcd transfer_a(dim, dim);
      for (int l_in = -config.q_max; l_in <= config.q_max; ++l_in) {
        const SampledField distorted = distort(bank.mode(l_in), mask_a, 0.0);
        transfer_a.col(l_in + config.q_max) = mode_overlaps(bank, config.q_max, distorted);
      }
      Eigen::MatrixXcd transfer_b;
      if (config.arm_b_ideal) {
        transfer_b = Eigen::MatrixXcd::Identity(dim, dim);
      } else {
        const auto mask_b = unimodular_mask(screens.second);
        transfer_b.resize(dim, dim);
        for (int l_in = -config.q_max; l_in <= config.q_max; ++l_in) {
          const SampledField distorted = distort(bank.mode(l_in), mask_b, 0.0);
          transfer_b.col(l_in + config.q_max) = mode_overlaps(bank, config.q_max, distorted);
        }
      }

      // Flat anti-correlated input sum_l |l, -l> / sqrt(dim): the coincidence
      // amplitude couples column l of arm A with column -l of arm B.
      const Eigen::MatrixXcd amplitude =
          transfer_a.rowwise().reverse() * transfer_b.transpose() * input_norm;
      members[m] = amplitude.cwiseAbs2();
    });

    Eigen::MatrixXd mass = Eigen::MatrixXd::Zero(dim, dim);
    for (const Eigen::MatrixXd& member : members) mass += member;
    const double total = mass.sum();
    if (!(total > 0.0))
      throw std::domain_error("crosstalk_matrices: no coincidence mass detected at strength " +
                              std::to_string(strength));
    matrices.push_back({config.q_max, strength, mass / total});
  }
  return matrices;
}

CrosstalkMatrix crosstalk_matrix(int q_max, double strength, int ensemble, std::uint64_t seed) {
  CrosstalkConfig config;
  config.q_max = q_max;
  config.strengths = {strength};
  config.ensemble = ensemble;
  config.seed = seed;
  return crosstalk_matrices(config).front();
}

DecayFit fit_decay_scale(const SweepResult& result) {
  const std::vector<int>& q_values = result.config.q_values;
  const int n_s = static_cast<int>(result.config.strengths.size());
  if (q_values.size() < 2)
    throw std::invalid_argument("fit_decay_scale: need at least two q values");
  if (result.points.size() != q_values.size() * static_cast<size_t>(n_s))
    throw std::invalid_argument("fit_decay_scale: result does not match its config");

  DecayFit fit;
  fit.scenario = result.config.scenario;
  fit.q_values = q_values;
  for (size_t qi = 0; qi < q_values.size(); ++qi) {
    double omega = std::numeric_limits<double>::quiet_NaN();
    for (int si = 0; si + 1 < n_s; ++si) {
      const SweepPoint& lo = result.point(static_cast<int>(qi), si);
      const SweepPoint& hi = result.point(static_cast<int>(qi), si + 1);
      if (lo.concurrence >= 0.5 && hi.concurrence < 0.5) {
        omega = lo.strength + (lo.concurrence - 0.5) * (hi.strength - lo.strength) /
                                  (lo.concurrence - hi.concurrence);
        break;
      }
    }
    if (std::isnan(omega)) {
      std::ostringstream msg;
      msg << "fit_decay_scale: concurrence for " << to_string(result.config.scenario) << " q="
          << q_values[qi] << " never crosses 0.5 in the sweep range";
      throw std::range_error(msg.str());
    }
    fit.omega_half.push_back(omega);
  }

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = double(q_values.size());
  for (size_t qi = 0; qi < q_values.size(); ++qi) {
    const double x = std::log10(double(q_values[qi]));
    const double y = std::log10(fit.omega_half[qi]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0)
    throw std::invalid_argument("fit_decay_scale: q values must not all coincide");
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  fit.prefactor = std::pow(10.0, fit.intercept);
  return fit;
}

double decay_distance(int l, double waist_m, double wavelength_m, double cn2) {
  if (l < 1) throw std::domain_error("decay_distance: mode index must be a positive integer");
  if (waist_m <= 0.0 || wavelength_m <= 0.0 || cn2 <= 0.0)
    throw std::domain_error("decay_distance: waist, wavelength, and cn2 must be positive");
  return 0.06 * wavelength_m * wavelength_m * std::pow(double(l), 5.0 / 6.0) /
         (std::pow(waist_m, 5.0 / 3.0) * cn2);
}

}  // namespace oamturb
