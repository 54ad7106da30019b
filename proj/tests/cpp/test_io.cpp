#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

#include "oamturb/experiments.hpp"
#include "oamturb/io.hpp"
#include "oamturb/quantum.hpp"

using namespace oamturb;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name, const std::string& content) : path(name) {
    write_text_file(path, content);
  }
  ~TempFile() { std::remove(path.c_str()); }
};

std::string error_message(const std::function<void()>& call) {
  try {
    call();
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

SweepResult tiny_result() {
  SweepResult result;
  result.config.scenario = Scenario::two_photon;
  result.config.q_values = {1};
  result.config.strengths = {0.0, 0.2};
  result.config.ensemble = 30;

  DensityAccumulator acc;
  acc.add(project_two_photon(ideal_arm(), ideal_arm()));

  for (const double s : result.config.strengths) {
    SweepPoint point;
    point.scenario = Scenario::two_photon;
    point.q = 1;
    point.strength = s;
    point.density = acc.density();
    point.concurrence = 1.0 - s;
    point.concurrence_se = 0.25 * s;
    point.n_effective = 30;
    point.crosstalk = Eigen::MatrixXd::Zero(3, 3);
    point.crosstalk(0, 2) = point.crosstalk(2, 0) = 0.5;
    result.points.push_back(point);
  }
  return result;
}

}  // namespace

TEST_CASE("significant-digit formatting") {
  CHECK(format_sig(1.0 / 3.0, 9) == "0.333333333");
  CHECK(format_sig(0.2, 9) == "0.2");
  CHECK(format_sig(6690.85, 9) == "6690.85");
  CHECK(format_sig(12345678900.0, 9) == "1.23456789e+10");
  CHECK(format_sig(0.0, 9) == "0");
  CHECK(format_sig(-1.5, 6) == "-1.5");
}

TEST_CASE("config hashing is the 64-bit FNV-1a") {
  CHECK(config_hash("") == "cbf29ce484222325");
  CHECK(config_hash("a") == "af63dc4c8601ec8c");
  CHECK(config_hash("{\"seed\": 1}") != config_hash("{\"seed\": 2}"));
}

TEST_CASE("an empty sweep document yields the defaults for both scenarios") {
  TempFile file("io_sweep_empty.json", "{}\n");
  const SweepCommand cmd = load_sweep_command(file.path);
  REQUIRE(cmd.scenarios.size() == 2);
  CHECK(cmd.scenarios[0] == Scenario::single_photon);
  CHECK(cmd.scenarios[1] == Scenario::two_photon);
  CHECK(cmd.sweep.q_values == std::vector<int>{1, 3, 5, 7});
  CHECK(cmd.sweep.strengths.size() == 21);
  CHECK(cmd.sweep.ensemble == 200);
  CHECK(cmd.sweep.grid_samples == 256);
  CHECK(cmd.sweep.seed == 1);
  CHECK(cmd.workers == 0);
  CHECK(cmd.float_digits == 9);
  CHECK(cmd.out_dir.empty());
}

TEST_CASE("sweep documents are canonical fixpoints") {
  TempFile file("io_sweep_full.json", R"({
    "scenario": "two_photon",
    "q_values": [1, 3],
    "strengths": [0.0, 0.5, 1.0],
    "ensemble": 64,
    "grid_samples": 128,
    "window_over_waist": 8.0,
    "waist_m": 0.05,
    "wavelength_m": 8e-7,
    "propagation_m": 10.0,
    "subharmonic_levels": 2,
    "seed": 99,
    "bootstrap": 50,
    "workers": 2,
    "float_digits": 12,
    "out_dir": "results"
  })");
  const SweepCommand cmd = load_sweep_command(file.path);
  REQUIRE(cmd.scenarios.size() == 1);
  CHECK(cmd.scenarios[0] == Scenario::two_photon);
  CHECK(cmd.sweep.waist_m == 0.05);
  CHECK(cmd.sweep.seed == 99);
  CHECK(cmd.workers == 2);
  CHECK(cmd.out_dir == "results");

  const std::string document = sweep_command_document(cmd);
  TempFile round("io_sweep_round.json", document);
  const SweepCommand again = load_sweep_command(round.path);
  CHECK(sweep_command_document(again) == document);
  // Execution-only fields stay out of the canonical document and the hash.
  CHECK(document.find("out_dir") == std::string::npos);
  CHECK(document.find("workers") == std::string::npos);
}

TEST_CASE("unknown keys are rejected with their line number") {
  TempFile file("io_sweep_unknown.json", "{\n  \"seed\": 3,\n  \"ensembel\": 100\n}\n");
  CHECK_THROWS_AS((void)load_sweep_command(file.path), ConfigError);
  const std::string msg =
      error_message([&] { (void)load_sweep_command(file.path); });
  CHECK(msg.find("ensembel") != std::string::npos);
  CHECK(msg.find(":3") != std::string::npos);
  CHECK(msg.find(file.path) != std::string::npos);
}

TEST_CASE("type errors and syntax errors carry positions") {
  TempFile bad_type("io_sweep_badtype.json", "{\n  \"ensemble\": \"many\"\n}\n");
  const std::string type_msg =
      error_message([&] { (void)load_sweep_command(bad_type.path); });
  CHECK(type_msg.find("ensemble") != std::string::npos);
  CHECK(type_msg.find(":2") != std::string::npos);

  TempFile bad_syntax("io_sweep_badsyntax.json", "{\n  \"seed\": 1,\n}\n");
  const std::string syntax_msg =
      error_message([&] { (void)load_sweep_command(bad_syntax.path); });
  CHECK(!syntax_msg.empty());
  CHECK(syntax_msg.find(":3") != std::string::npos);

  CHECK_THROWS_AS((void)load_sweep_command("no_such_config.json"), ConfigError);
}

TEST_CASE("screens documents resolve strength from one source only") {
  TempFile plain("io_screens_plain.json", R"({"count": 4, "fried_m": 0.05})");
  const ScreensCommand direct = load_screens_command(plain.path);
  CHECK(direct.count == 4);
  CHECK(direct.physical == false);
  CHECK(direct.fried_m == 0.05);

  TempFile physical("io_screens_physical.json",
                    R"({"cn2_m_neg_2_3": 1e-15, "thickness_m": 6700.0})");
  const ScreensCommand derived = load_screens_command(physical.path);
  CHECK(derived.physical == true);
  CHECK(derived.params.cn2 == 1e-15);
  CHECK(derived.params.thickness_m == 6700.0);
  CHECK(derived.params.wavelength_m == 1.55e-6);

  TempFile conflict("io_screens_conflict.json",
                    R"({"fried_m": 0.05, "cn2_m_neg_2_3": 1e-15, "thickness_m": 1.0})");
  CHECK_THROWS_AS((void)load_screens_command(conflict.path), ConfigError);

  TempFile orphan("io_screens_orphan.json", R"({"cn2_m_neg_2_3": 1e-15})");
  CHECK_THROWS_AS((void)load_screens_command(orphan.path), ConfigError);

  TempFile stray("io_screens_stray.json", R"({"thickness_m": 10.0})");
  CHECK_THROWS_AS((void)load_screens_command(stray.path), ConfigError);

  const std::string document = screens_command_document(derived);
  TempFile round("io_screens_round.json", document);
  CHECK(screens_command_document(load_screens_command(round.path)) == document);
}

TEST_CASE("crosstalk documents load and canonicalize") {
  TempFile file("io_crosstalk.json",
                R"({"q_max": 2, "strengths": [0.0, 1.0], "ensemble": 40, "arm_b_ideal": true})");
  const CrosstalkCommand cmd = load_crosstalk_command(file.path);
  CHECK(cmd.crosstalk.q_max == 2);
  CHECK(cmd.crosstalk.ensemble == 40);
  CHECK(cmd.crosstalk.arm_b_ideal == true);

  const std::string document = crosstalk_command_document(cmd);
  TempFile round("io_crosstalk_round.json", document);
  CHECK(crosstalk_command_document(load_crosstalk_command(round.path)) == document);
}

TEST_CASE("sweep CSV layout") {
  const std::vector<SweepResult> results{tiny_result()};
  const std::string csv = sweep_csv(results, 9);
  CHECK(csv ==
        "scenario,q,strength,concurrence,stderr,N\n"
        "two_photon,1,0,1,0,30\n"
        "two_photon,1,0.2,0.8,0.05,30\n");
}

TEST_CASE("structure CSV carries the Kolmogorov reference column") {
  StructureFunctionProfile profile;
  profile.separation_m = {0.05, 0.1};
  profile.value = {6.5, 21.0};
  const std::string csv = structure_csv(profile, 0.05, 9);
  const std::string expected_ref = format_sig(6.88 * std::pow(2.0, 5.0 / 3.0), 9);
  CHECK(csv == "separation_m,measured,reference\n"
               "0.05,6.5,6.88\n"
               "0.1,21," + expected_ref + "\n");
}

TEST_CASE("sweep bundles restore results exactly") {
  const std::vector<SweepResult> results{tiny_result()};
  DecayFit fit;
  fit.scenario = Scenario::two_photon;
  fit.q_values = {1, 3};
  fit.omega_half = {0.61, 1.07};
  fit.slope = 0.51;
  fit.intercept = -0.21;
  fit.prefactor = std::pow(10.0, -0.21);

  const std::string text = sweep_bundle_json(results, {fit});
  const std::vector<SweepResult> loaded = sweep_results_from_bundle(text);
  REQUIRE(loaded.size() == 1);
  REQUIRE(loaded[0].points.size() == 2);
  CHECK(loaded[0].config.scenario == Scenario::two_photon);
  CHECK(loaded[0].config.strengths == results[0].config.strengths);
  for (size_t i = 0; i < 2; ++i) {
    const SweepPoint& a = results[0].points[i];
    const SweepPoint& b = loaded[0].points[i];
    CHECK(a.concurrence == b.concurrence);
    CHECK(a.concurrence_se == b.concurrence_se);
    CHECK(a.n_effective == b.n_effective);
    CHECK((a.density - b.density).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.crosstalk - b.crosstalk).cwiseAbs().maxCoeff() == 0.0);
  }

  const auto parsed = nlohmann::json::parse(text);
  REQUIRE(parsed.contains("fits"));
  CHECK(parsed["fits"][0]["slope"].get<double>() == 0.51);
}

TEST_CASE("manifests embed a reloadable config document") {
  SweepCommand cmd;
  cmd.scenarios = {Scenario::two_photon};
  cmd.sweep.q_values = {1};
  cmd.sweep.strengths = {0.0};
  const std::string document = sweep_command_document(cmd);
  const std::string manifest = manifest_json("sweep", "1.0.0", config_hash(document), 7, 2,
                                             "out", 1.25, document, {"a.csv", "b.json"});

  const auto parsed = nlohmann::json::parse(manifest);
  CHECK(parsed["command"] == "sweep");
  CHECK(parsed["version"] == "1.0.0");
  CHECK(parsed["config_hash"] == config_hash(document));
  CHECK(parsed["seed"] == 7);
  CHECK(parsed["workers"] == 2);
  CHECK(parsed["wall_time_s"] == 1.25);
  CHECK(parsed["artifacts"] == nlohmann::json({"a.csv", "b.json"}));

  // The embedded config reloads to the same canonical document.
  TempFile round("io_manifest_config.json", parsed["config"].dump());
  CHECK(sweep_command_document(load_sweep_command(round.path)) == document);
}

TEST_CASE("text file round trip") {
  const std::string path = "io_text_roundtrip.txt";
  write_text_file(path, "line\n");
  CHECK(read_text_file(path) == "line\n");
  std::remove(path.c_str());
  CHECK_THROWS_AS((void)read_text_file(path), ConfigError);
}
