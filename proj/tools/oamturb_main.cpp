// Command-line front end: sweep, screens, decay-table, crosstalk.
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "oamturb/experiments.hpp"
#include "oamturb/grid_field.hpp"
#include "oamturb/io.hpp"
#include "oamturb/rng.hpp"
#include "oamturb/turbulence.hpp"
#include "oamturb/version.hpp"

namespace {

using namespace oamturb;

struct CommonFlags {
  std::string config_path;
  std::string out;
  std::uint64_t seed = 0;
  int workers = 0;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* out_opt = nullptr;
  CLI::Option* workers_opt = nullptr;
};

void add_common(CLI::App* cmd, CommonFlags& flags, bool with_workers) {
  cmd->add_option("--config", flags.config_path, "JSON configuration file");
  flags.seed_opt = cmd->add_option("--seed", flags.seed, "Override the master seed");
  if (with_workers)
    flags.workers_opt =
        cmd->add_option("--workers", flags.workers, "Worker threads (0 = all cores)");
  flags.out_opt = cmd->add_option("--out", flags.out, "Output directory");
}

std::string resolve_out_dir(const CommonFlags& flags, const std::string& config_out) {
  if (flags.out_opt != nullptr && flags.out_opt->count() > 0) return flags.out;
  if (!config_out.empty()) return config_out;
  if (const char* env = std::getenv("OAMTURB_OUT"); env != nullptr && *env != '\0') return env;
  return ".";
}

std::string joined(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

double seconds_since(const std::chrono::steady_clock::time_point& start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

int cmd_sweep(const CommonFlags& flags) {
  SweepCommand cmd;
  if (!flags.config_path.empty()) cmd = load_sweep_command(flags.config_path);
  if (cmd.scenarios.empty())
    cmd.scenarios = {Scenario::single_photon, Scenario::two_photon};
  if (flags.seed_opt->count() > 0) cmd.sweep.seed = flags.seed;
  if (flags.workers_opt->count() > 0) cmd.workers = flags.workers;
  const std::string out_dir = resolve_out_dir(flags, cmd.out_dir);
  std::filesystem::create_directories(out_dir);

  const auto start = std::chrono::steady_clock::now();
  std::vector<SweepResult> results;
  for (const Scenario scenario : cmd.scenarios) {
    SweepConfig config = cmd.sweep;
    config.scenario = scenario;
    results.push_back(run_sweep(config, cmd.workers));
  }
  std::vector<DecayFit> fits;
  for (const SweepResult& result : results) {
    if (result.config.q_values.size() < 2) continue;
    try {
      fits.push_back(fit_decay_scale(result));
    } catch (const std::range_error& e) {
      std::cerr << "note: " << e.what() << " (fit skipped)\n";
    }
  }
  const double wall = seconds_since(start);

  const std::string document = sweep_command_document(cmd);
  const std::string hash = config_hash(document);
  const std::string csv_name = "sweep-" + hash + ".csv";
  const std::string json_name = "sweep-" + hash + ".json";
  const std::string manifest_name = "sweep-" + hash + ".manifest.json";
  write_text_file(joined(out_dir, csv_name), sweep_csv(results, cmd.float_digits));
  write_text_file(joined(out_dir, json_name), sweep_bundle_json(results, fits));
  write_text_file(joined(out_dir, manifest_name),
                  manifest_json("sweep", version, hash, cmd.sweep.seed, cmd.workers, out_dir,
                                wall, document, {csv_name, json_name}));

  for (const DecayFit& fit : fits)
    std::cout << to_string(fit.scenario) << " fit: slope " << format_sig(fit.slope, 4)
              << ", prefactor " << format_sig(fit.prefactor, 4) << "\n";
  std::cout << "wrote: " << joined(out_dir, csv_name) << "\n";
  std::cout << "wrote: " << joined(out_dir, json_name) << "\n";
  std::cout << "wrote: " << joined(out_dir, manifest_name) << "\n";
  return 0;
}

int cmd_screens(const CommonFlags& flags) {
  ScreensCommand cmd;
  if (!flags.config_path.empty()) cmd = load_screens_command(flags.config_path);
  if (flags.seed_opt->count() > 0) cmd.seed = flags.seed;
  const std::string out_dir = resolve_out_dir(flags, cmd.out_dir);
  std::filesystem::create_directories(out_dir);

  const auto start = std::chrono::steady_clock::now();
  const GridSpec grid = make_grid(cmd.grid_samples, cmd.window_m);
  const double fried =
      cmd.physical ? (cmd.params.cn2 == 0.0 ? std::numeric_limits<double>::infinity()
                                            : fried_parameter(cmd.params, cmd.params.thickness_m))
                   : cmd.fried_m;

  std::vector<PhaseScreen> screens;
  screens.reserve(cmd.count);
  const int pairs = (cmd.count + 1) / 2;
  for (int p = 0; p < pairs; ++p) {
    auto pair = generate_screen_pair(grid, fried, derive_key(cmd.seed, std::uint64_t(p)),
                                     cmd.subharmonic_levels);
    screens.push_back(std::move(pair.first));
    if (static_cast<int>(screens.size()) < cmd.count) screens.push_back(std::move(pair.second));
  }
  const StructureFunctionProfile profile = estimate_structure_function(screens, cmd.max_lag);
  const double wall = seconds_since(start);

  const std::string document = screens_command_document(cmd);
  const std::string hash = config_hash(document);
  const std::string bin_name = "screens-" + hash + ".bin";
  const std::string csv_name = "screens-" + hash + ".csv";
  const std::string manifest_name = "screens-" + hash + ".manifest.json";
  write_screens(joined(out_dir, bin_name), screens);
  write_text_file(joined(out_dir, csv_name), structure_csv(profile, fried, cmd.float_digits));
  write_text_file(joined(out_dir, manifest_name),
                  manifest_json("screens", version, hash, cmd.seed, 0, out_dir, wall, document,
                                {bin_name, csv_name}));

  if (std::isfinite(fried)) {
    try {
      const double slope =
          structure_log_slope(profile, 4.0 * grid.pitch_m, grid.window_m() / 8.0);
      std::cout << "inertial-range slope: " << format_sig(slope, 4) << " (target "
                << format_sig(5.0 / 3.0, 4) << ")\n";
    } catch (const std::invalid_argument& e) {
      std::cerr << "note: " << e.what() << " (slope skipped)\n";
    }
  } else {
    std::cout << "zero-turbulence screens: structure function is identically 0\n";
  }
  std::cout << "wrote: " << joined(out_dir, bin_name) << "\n";
  std::cout << "wrote: " << joined(out_dir, csv_name) << "\n";
  std::cout << "wrote: " << joined(out_dir, manifest_name) << "\n";
  return 0;
}

int cmd_crosstalk(const CommonFlags& flags) {
  CrosstalkCommand cmd;
  if (!flags.config_path.empty()) cmd = load_crosstalk_command(flags.config_path);
  if (flags.seed_opt->count() > 0) cmd.crosstalk.seed = flags.seed;
  if (flags.workers_opt->count() > 0) cmd.workers = flags.workers;
  const std::string out_dir = resolve_out_dir(flags, cmd.out_dir);
  std::filesystem::create_directories(out_dir);

  const auto start = std::chrono::steady_clock::now();
  const std::vector<CrosstalkMatrix> matrices = crosstalk_matrices(cmd.crosstalk, cmd.workers);
  const double wall = seconds_since(start);

  const std::string document = crosstalk_command_document(cmd);
  const std::string hash = config_hash(document);
  const std::string json_name = "crosstalk-" + hash + ".json";
  const std::string manifest_name = "crosstalk-" + hash + ".manifest.json";
  write_text_file(joined(out_dir, json_name), crosstalk_bundle_json(cmd.crosstalk, matrices));
  write_text_file(joined(out_dir, manifest_name),
                  manifest_json("crosstalk", version, hash, cmd.crosstalk.seed, cmd.workers,
                                out_dir, wall, document, {json_name}));

  for (const CrosstalkMatrix& m : matrices) {
    const int dim = static_cast<int>(m.probability.rows());
    double anti = 0.0;
    for (int i = 0; i < dim; ++i) anti += m.probability(i, dim - 1 - i);
    std::cout << "strength " << format_sig(m.strength, 4) << ": off-anti-diagonal mass "
              << format_sig(1.0 - anti, 4) << "\n";
  }
  std::cout << "wrote: " << joined(out_dir, json_name) << "\n";
  std::cout << "wrote: " << joined(out_dir, manifest_name) << "\n";
  return 0;
}

int cmd_decay_table(double waist_m, double wavelength_m, double cn2,
                    const std::vector<int>& l_values) {
  std::printf("%4s  %14s\n", "l", "L_dec [km]");
  for (const int l : l_values) {
    const double km = decay_distance(l, waist_m, wavelength_m, cn2) / 1000.0;
    std::printf("%4d  %14.1f\n", l, km);
  }
  return 0;
}

int guarded(const std::function<int()>& body) {
  try {
    return body();
  } catch (const ResolutionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Orbital-angular-momentum entanglement decay in Kolmogorov turbulence"};
  app.set_version_flag("--version", std::string(version));
  app.require_subcommand(1);

  CommonFlags sweep_flags, screens_flags, crosstalk_flags;
  CLI::App* sweep =
      app.add_subcommand("sweep", "Concurrence-vs-strength Monte Carlo sweeps and decay fits");
  add_common(sweep, sweep_flags, true);

  CLI::App* screens =
      app.add_subcommand("screens", "Generate phase screens and a structure-function report");
  add_common(screens, screens_flags, false);

  CLI::App* crosstalk =
      app.add_subcommand("crosstalk", "Coincidence crosstalk matrices per strength");
  add_common(crosstalk, crosstalk_flags, true);

  double waist_m = 0.1, wavelength_m = 1.55e-6, cn2 = 1e-15;
  std::vector<int> l_values{1, 3, 5, 7};
  CLI::App* decay = app.add_subcommand("decay-table", "Closed-form decay distances in km");
  decay->add_option("--waist", waist_m, "Beam waist in meters");
  decay->add_option("--wavelength", wavelength_m, "Wavelength in meters");
  decay->add_option("--cn2", cn2, "Refractive-index structure constant in m^-2/3");
  decay->add_option("--l", l_values, "Azimuthal mode indices")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (sweep->parsed()) return guarded([&] { return cmd_sweep(sweep_flags); });
  if (screens->parsed()) return guarded([&] { return cmd_screens(screens_flags); });
  if (crosstalk->parsed()) return guarded([&] { return cmd_crosstalk(crosstalk_flags); });
  if (decay->parsed())
    return guarded([&] { return cmd_decay_table(waist_m, wavelength_m, cn2, l_values); });
  return 2;
}
