// pybind11 bindings for the oamturb core library.
#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <Eigen/Dense>
#include <limits>
#include <stdexcept>
#include <vector>

#include "oamturb/experiments.hpp"
#include "oamturb/grid_field.hpp"
#include "oamturb/modes.hpp"
#include "oamturb/quantum.hpp"
#include "oamturb/turbulence.hpp"
#include "oamturb/version.hpp"

namespace py = pybind11;
using namespace oamturb;

namespace {

Eigen::MatrixXcd field_matrix(const SampledField& field) {
  const int n = field.grid.n_samples;
  return Eigen::Map<const Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic,
                                        Eigen::RowMajor>>(field.values.data(), n, n);
}

Eigen::MatrixXd screen_matrix(const PhaseScreen& screen) {
  const int n = screen.grid.n_samples;
  return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      screen.theta.data(), n, n);
}

py::dict point_dict(const SweepPoint& point) {
  py::dict d;
  d["q"] = point.q;
  d["strength"] = point.strength;
  d["concurrence"] = point.concurrence;
  d["concurrence_se"] = point.concurrence_se;
  d["n_effective"] = point.n_effective;
  d["density"] = Eigen::MatrixXcd(point.density);
  d["crosstalk"] = point.crosstalk;
  return d;
}

py::dict fit_dict(const DecayFit& fit) {
  py::dict d;
  d["scenario"] = to_string(fit.scenario);
  d["q_values"] = fit.q_values;
  d["omega_half"] = fit.omega_half;
  d["slope"] = fit.slope;
  d["intercept"] = fit.intercept;
  d["prefactor"] = fit.prefactor;
  return d;
}

}  // namespace

PYBIND11_MODULE(_oamturb, m) {
  m.doc() = "Orbital-angular-momentum entanglement decay in Kolmogorov turbulence";
  m.attr("__version__") = version;

  py::register_exception<ResolutionError>(m, "ResolutionError", PyExc_ValueError);

  m.def(
      "fried_parameter",
      [](double cn2, double wavelength_m, double path_m) {
        return fried_parameter(TurbulenceParams{cn2, path_m, wavelength_m}, path_m);
      },
      py::arg("cn2"), py::arg("wavelength_m"), py::arg("path_m"),
      "Fried parameter r0 in meters for a uniform path.");

  m.def(
      "scintillation_strength",
      [](double waist_m, double cn2, double wavelength_m, double path_m) {
        return scintillation_strength(waist_m, TurbulenceParams{cn2, path_m, wavelength_m},
                                      path_m);
      },
      py::arg("waist_m"), py::arg("cn2"), py::arg("wavelength_m"), py::arg("path_m"),
      "Turbulence strength w0 / r0.");

  m.def("fried_from_strength", &fried_from_strength, py::arg("waist_m"), py::arg("strength"),
        "Fried parameter that realizes a given w0 / r0.");

  m.def("decay_distance", &decay_distance, py::arg("l"), py::arg("waist_m"),
        py::arg("wavelength_m"), py::arg("cn2"),
        "Distance in meters at which entanglement of the l-pair has decayed.");

  m.def("kolmogorov_structure", &kolmogorov_structure, py::arg("separation_m"),
        py::arg("fried_m"), "Phase structure function 6.88 (r / r0)^(5/3).");

  m.def(
      "lg_mode",
      [](int l, int p, double waist_m, double wavelength_m, double t, int grid_samples,
         double window_m) {
        const GridSpec grid = make_grid(grid_samples, window_m);
        SampledField field = evaluate_lg(LGModeSpec{l, p, waist_m, wavelength_m, t}, grid);
        scale_to_unit_power(field);
        return field_matrix(field);
      },
      py::arg("l"), py::arg("p"), py::arg("waist_m"), py::arg("wavelength_m"), py::arg("t") = 0.0,
      py::arg("grid_samples") = 256, py::arg("window_m") = 0.8,
      "Unit-power Laguerre-Gaussian mode sampled on the grid, indexed [iy, ix].");

  m.def(
      "phase_screen_pair",
      [](int grid_samples, double window_m, double fried_m, std::uint64_t seed,
         int subharmonic_levels) {
        const GridSpec grid = make_grid(grid_samples, window_m);
        std::pair<PhaseScreen, PhaseScreen> pair;
        {
          py::gil_scoped_release release;
          pair = generate_screen_pair(grid, fried_m, seed, subharmonic_levels);
        }
        return py::make_tuple(screen_matrix(pair.first), screen_matrix(pair.second));
      },
      py::arg("grid_samples"), py::arg("window_m"), py::arg("fried_m"), py::arg("seed"),
      py::arg("subharmonic_levels") = 3,
      "Two independent Kolmogorov phase screens in radians, each indexed [iy, ix].");

  m.def(
      "structure_function",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& screens,
         double pitch_m, int max_lag) {
        if (screens.ndim() != 3) throw std::invalid_argument("screens must have shape (count, n, n)");
        const int count = static_cast<int>(screens.shape(0));
        const int n = static_cast<int>(screens.shape(1));
        if (static_cast<int>(screens.shape(2)) != n)
          throw std::invalid_argument("screens must be square");
        const GridSpec grid{n, pitch_m};
        std::vector<PhaseScreen> list(count);
        const double* data = screens.data();
        for (int s = 0; s < count; ++s) {
          list[s].grid = grid;
          list[s].fried_m = std::numeric_limits<double>::infinity();
          list[s].theta.assign(data + static_cast<std::size_t>(s) * n * n,
                               data + static_cast<std::size_t>(s + 1) * n * n);
        }
        StructureFunctionProfile profile;
        {
          py::gil_scoped_release release;
          profile = estimate_structure_function(list, max_lag);
        }
        return py::make_tuple(profile.separation_m, profile.value);
      },
      py::arg("screens"), py::arg("pitch_m"), py::arg("max_lag") = 0,
      "Ensemble-averaged phase structure function; returns (separations_m, values).");

  m.def("concurrence", &concurrence, py::arg("density"),
        "Wootters concurrence of a two-qubit density matrix.");

  m.def("project_to_physical", &project_to_physical, py::arg("density"),
        "Clip negative eigenvalues and renormalize to unit trace.");

  m.def(
      "crosstalk_matrix",
      [](int q_max, double strength, int ensemble, std::uint64_t seed) {
        Eigen::MatrixXd probability;
        {
          py::gil_scoped_release release;
          probability = crosstalk_matrix(q_max, strength, ensemble, seed).probability;
        }
        return probability;
      },
      py::arg("q_max"), py::arg("strength"), py::arg("ensemble") = 200, py::arg("seed") = 1,
      "Coincidence probabilities P(l_A, l_B) for the flat anti-correlated input state.");

  m.def(
      "run_sweep",
      [](const std::string& scenario, const std::vector<int>& q_values,
         const std::vector<double>& strengths, int ensemble, int grid_samples,
         double window_over_waist, double waist_m, double wavelength_m, double propagation_m,
         int subharmonic_levels, std::uint64_t seed, int bootstrap, int workers, bool fit) {
        SweepConfig config;
        config.scenario = parse_scenario(scenario);
        config.q_values = q_values;
        if (!strengths.empty()) config.strengths = strengths;
        config.ensemble = ensemble;
        config.grid_samples = grid_samples;
        config.window_over_waist = window_over_waist;
        config.waist_m = waist_m;
        config.wavelength_m = wavelength_m;
        config.propagation_m = propagation_m;
        config.subharmonic_levels = subharmonic_levels;
        config.seed = seed;
        config.bootstrap = bootstrap;
        SweepResult result;
        {
          py::gil_scoped_release release;
          result = run_sweep(config, workers);
        }
        py::dict out;
        out["scenario"] = to_string(result.config.scenario);
        out["q_values"] = result.config.q_values;
        out["strengths"] = result.config.strengths;
        py::list points;
        for (const SweepPoint& point : result.points) points.append(point_dict(point));
        out["points"] = points;
        out["fit"] = py::none();
        if (fit && result.config.q_values.size() >= 2) {
          try {
            out["fit"] = fit_dict(fit_decay_scale(result));
          } catch (const std::range_error&) {
          }
        }
        return out;
      },
      py::arg("scenario") = "two_photon", py::arg("q_values") = std::vector<int>{1, 3, 5, 7},
      py::arg("strengths") = std::vector<double>{}, py::arg("ensemble") = 200,
      py::arg("grid_samples") = 256, py::arg("window_over_waist") = 8.0, py::arg("waist_m") = 0.1,
      py::arg("wavelength_m") = 1.55e-6, py::arg("propagation_m") = 0.0,
      py::arg("subharmonic_levels") = 3, py::arg("seed") = 1, py::arg("bootstrap") = 200,
      py::arg("workers") = 0, py::arg("fit") = true,
      "Monte Carlo concurrence sweep; empty strengths selects 0.0 .. 4.0 in steps of 0.2.");
}
