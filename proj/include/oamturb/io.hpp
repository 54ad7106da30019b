// Configuration documents (strict-schema JSON with unit-suffixed keys), CSV and JSON
// artifact emission, config hashing for artifact names, and run manifests.
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "oamturb/experiments.hpp"
#include "oamturb/turbulence.hpp"

namespace oamturb {

// A configuration document problem: unreadable file, bad syntax, unknown key,
// wrong type, or an inconsistent key combination.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SweepCommand {
  std::vector<Scenario> scenarios;  // "scenario": "both" expands to the two entries
  SweepConfig sweep;                // scenario field is overwritten per run
  std::string out_dir;              // "" = resolve via --out / OAMTURB_OUT / cwd
  int workers = 0;
  int float_digits = 9;
};

struct ScreensCommand {
  int count = 100;        // screens written (pairs are split)
  int grid_samples = 256;
  double window_m = 1.0;
  bool physical = false;  // true: strength given as (cn2, thickness, wavelength)
  double fried_m = 0.1;
  TurbulenceParams params;
  int subharmonic_levels = 3;
  std::uint64_t seed = 1;
  int max_lag = 0;  // 0 = grid/8
  std::string out_dir;
  int float_digits = 9;
};

struct CrosstalkCommand {
  CrosstalkConfig crosstalk;
  std::string out_dir;
  int workers = 0;
  int float_digits = 9;
};

// Strict loaders: unknown keys, wrong types, and bad syntax raise ConfigError with
// file:line positions. Every key has a default, so {} is a valid document.
SweepCommand load_sweep_command(const std::string& path);
ScreensCommand load_screens_command(const std::string& path);
CrosstalkCommand load_crosstalk_command(const std::string& path);

// Canonical resolved documents holding the result-determining fields (reloadable as
// config files; out_dir and workers are excluded because they do not change results).
std::string sweep_command_document(const SweepCommand& cmd);
std::string screens_command_document(const ScreensCommand& cmd);
std::string crosstalk_command_document(const CrosstalkCommand& cmd);

// FNV-1a 64-bit hash of a canonical document, as 16 hex digits; names artifacts.
std::string config_hash(const std::string& canonical_document);

// %.Ng, C locale ('.' decimal).
std::string format_sig(double value, int digits);

// CSV artifacts: '.' decimal, LF line endings, header row.
std::string sweep_csv(const std::vector<SweepResult>& results, int digits);
std::string structure_csv(const StructureFunctionProfile& profile, double fried_m, int digits);

// Full-precision JSON bundle (density and crosstalk matrices, optional fits);
// sweep_results_from_bundle restores the emitted values exactly.
std::string sweep_bundle_json(const std::vector<SweepResult>& results,
                              const std::vector<DecayFit>& fits);
std::vector<SweepResult> sweep_results_from_bundle(const std::string& text);

std::string crosstalk_bundle_json(const CrosstalkConfig& config,
                                  const std::vector<CrosstalkMatrix>& matrices);

// Run record: enough to re-run bit-identically (resolved config document + seed).
std::string manifest_json(const std::string& command, const std::string& version,
                          const std::string& hash, std::uint64_t seed, int workers,
                          const std::string& out_dir, double wall_time_s,
                          const std::string& resolved_document,
                          const std::vector<std::string>& artifacts);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace oamturb
