#include "oamturb/io.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "json.hpp"

namespace oamturb {
namespace {

using nlohmann::json;

int line_of_offset(const std::string& text, size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + offset, '\n'));
}

int line_of_key(const std::string& text, const std::string& key) {
  const size_t pos = text.find("\"" + key + "\"");
  if (pos == std::string::npos) return 0;
  return line_of_offset(text, pos);
}

[[noreturn]] void fail_key(const std::string& path, const std::string& text,
                           const std::string& key, const std::string& what) {
  std::ostringstream msg;
  msg << path << ":";
  if (const int line = line_of_key(text, key); line > 0) msg << line << ":";
  msg << " key \"" << key << "\" " << what;
  throw ConfigError(msg.str());
}

json parse_document(const std::string& text, const std::string& path) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::ostringstream msg;
    msg << path << ":" << line_of_offset(text, e.byte > 0 ? e.byte - 1 : 0) << ": "
        << e.what();
    throw ConfigError(msg.str());
  }
}

void check_keys(const json& doc, std::initializer_list<const char*> allowed,
                const std::string& text, const std::string& path) {
  if (!doc.is_object()) throw ConfigError(path + ":1: config must be a JSON object");
  for (const auto& item : doc.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(),
                                   [&](const char* k) { return item.key() == k; });
    if (!known) fail_key(path, text, item.key(), "is not a recognized key");
  }
}

struct FieldReader {
  const json& doc;
  const std::string& text;
  const std::string& path;

  bool has(const char* key) const { return doc.contains(key); }

  int integer(const char* key, int fallback) const {
    if (!doc.contains(key)) return fallback;
    const json& v = doc.at(key);
    if (!v.is_number_integer() && !v.is_number_unsigned())
      fail_key(path, text, key, "must be an integer");
    return v.get<int>();
  }

  double number(const char* key, double fallback) const {
    if (!doc.contains(key)) return fallback;
    const json& v = doc.at(key);
    if (!v.is_number()) fail_key(path, text, key, "must be a number");
    return v.get<double>();
  }

  std::uint64_t uinteger(const char* key, std::uint64_t fallback) const {
    if (!doc.contains(key)) return fallback;
    const json& v = doc.at(key);
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0)
      return static_cast<std::uint64_t>(v.get<std::int64_t>());
    fail_key(path, text, key, "must be a non-negative integer");
  }

  bool boolean(const char* key, bool fallback) const {
    if (!doc.contains(key)) return fallback;
    const json& v = doc.at(key);
    if (!v.is_boolean()) fail_key(path, text, key, "must be true or false");
    return v.get<bool>();
  }

  std::string string(const char* key, const std::string& fallback) const {
    if (!doc.contains(key)) return fallback;
    const json& v = doc.at(key);
    if (!v.is_string()) fail_key(path, text, key, "must be a string");
    return v.get<std::string>();
  }

  std::vector<int> integers(const char* key, std::vector<int> fallback) const {
    if (!doc.contains(key)) return fallback;
    const json& v = doc.at(key);
    if (!v.is_array()) fail_key(path, text, key, "must be an array of integers");
    std::vector<int> out;
    for (const json& e : v) {
      if (!e.is_number_integer() && !e.is_number_unsigned())
        fail_key(path, text, key, "must be an array of integers");
      out.push_back(e.get<int>());
    }
    return out;
  }

  std::vector<double> numbers(const char* key, std::vector<double> fallback) const {
    if (!doc.contains(key)) return fallback;
    const json& v = doc.at(key);
    if (!v.is_array()) fail_key(path, text, key, "must be an array of numbers");
    std::vector<double> out;
    for (const json& e : v) {
      if (!e.is_number()) fail_key(path, text, key, "must be an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }
};

int checked_digits(const FieldReader& r) {
  const int digits = r.integer("float_digits", 9);
  if (digits < 6 || digits > 17)
    fail_key(r.path, r.text, "float_digits", "must be between 6 and 17");
  return digits;
}

json sweep_config_to_json(const SweepConfig& c) {
  json j;
  j["scenario"] = to_string(c.scenario);
  j["q_values"] = c.q_values;
  j["strengths"] = c.strengths;
  j["ensemble"] = c.ensemble;
  j["grid_samples"] = c.grid_samples;
  j["window_over_waist"] = c.window_over_waist;
  j["waist_m"] = c.waist_m;
  j["wavelength_m"] = c.wavelength_m;
  j["propagation_m"] = c.propagation_m;
  j["subharmonic_levels"] = c.subharmonic_levels;
  j["seed"] = c.seed;
  j["bootstrap"] = c.bootstrap;
  return j;
}

SweepConfig sweep_config_from_json(const json& j, const std::string& text,
                                   const std::string& path) {
  const FieldReader r{j, text, path};
  SweepConfig c;
  const std::string name = r.string("scenario", to_string(c.scenario));
  try {
    c.scenario = parse_scenario(name);
  } catch (const std::invalid_argument&) {
    fail_key(path, text, "scenario", "must be single_photon or two_photon");
  }
  c.q_values = r.integers("q_values", c.q_values);
  c.strengths = r.numbers("strengths", c.strengths);
  c.ensemble = r.integer("ensemble", c.ensemble);
  c.grid_samples = r.integer("grid_samples", c.grid_samples);
  c.window_over_waist = r.number("window_over_waist", c.window_over_waist);
  c.waist_m = r.number("waist_m", c.waist_m);
  c.wavelength_m = r.number("wavelength_m", c.wavelength_m);
  c.propagation_m = r.number("propagation_m", c.propagation_m);
  c.subharmonic_levels = r.integer("subharmonic_levels", c.subharmonic_levels);
  c.seed = r.uinteger("seed", c.seed);
  c.bootstrap = r.integer("bootstrap", c.bootstrap);
  return c;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& rows) {
  if (!rows.is_array() || rows.empty())
    throw ConfigError("bundle: matrix must be a non-empty array of rows");
  const size_t n_rows = rows.size();
  const size_t n_cols = rows.front().size();
  Eigen::MatrixXd m(n_rows, n_cols);
  for (size_t r = 0; r < n_rows; ++r) {
    const json& row = rows.at(r);
    if (!row.is_array() || row.size() != n_cols)
      throw ConfigError("bundle: matrix rows have inconsistent lengths");
    for (size_t c = 0; c < n_cols; ++c) m(r, c) = row.at(c).get<double>();
  }
  return m;
}

json point_to_json(const SweepPoint& p) {
  json j;
  j["q"] = p.q;
  j["strength"] = p.strength;
  j["concurrence"] = p.concurrence;
  j["concurrence_se"] = p.concurrence_se;
  j["n_effective"] = p.n_effective;
  json re = json::array(), im = json::array();
  for (int r = 0; r < 4; ++r) {
    json row_re = json::array(), row_im = json::array();
    for (int c = 0; c < 4; ++c) {
      row_re.push_back(p.density(r, c).real());
      row_im.push_back(p.density(r, c).imag());
    }
    re.push_back(std::move(row_re));
    im.push_back(std::move(row_im));
  }
  j["density_re"] = re;
  j["density_im"] = im;
  j["crosstalk"] = matrix_to_json(p.crosstalk);
  return j;
}

SweepPoint point_from_json(const json& j, Scenario scenario) {
  SweepPoint p;
  p.scenario = scenario;
  p.q = j.at("q").get<int>();
  p.strength = j.at("strength").get<double>();
  p.concurrence = j.at("concurrence").get<double>();
  p.concurrence_se = j.at("concurrence_se").get<double>();
  p.n_effective = j.at("n_effective").get<int>();
  const json& re = j.at("density_re");
  const json& im = j.at("density_im");
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c)
      p.density(r, c) = {re.at(r).at(c).get<double>(), im.at(r).at(c).get<double>()};
  p.crosstalk = matrix_from_json(j.at("crosstalk"));
  return p;
}

json fit_to_json(const DecayFit& f) {
  json j;
  j["scenario"] = to_string(f.scenario);
  j["q_values"] = f.q_values;
  j["omega_half"] = f.omega_half;
  j["slope"] = f.slope;
  j["intercept"] = f.intercept;
  j["prefactor"] = f.prefactor;
  return j;
}

json crosstalk_config_to_json(const CrosstalkConfig& c) {
  json j;
  j["q_max"] = c.q_max;
  j["strengths"] = c.strengths;
  j["ensemble"] = c.ensemble;
  j["grid_samples"] = c.grid_samples;
  j["window_over_waist"] = c.window_over_waist;
  j["waist_m"] = c.waist_m;
  j["wavelength_m"] = c.wavelength_m;
  j["subharmonic_levels"] = c.subharmonic_levels;
  j["seed"] = c.seed;
  j["arm_b_ideal"] = c.arm_b_ideal;
  return j;
}

}  // namespace

SweepCommand load_sweep_command(const std::string& path) {
  const std::string text = read_text_file(path);
  const json doc = parse_document(text, path);
  check_keys(doc,
             {"scenario", "q_values", "strengths", "ensemble", "grid_samples",
              "window_over_waist", "waist_m", "wavelength_m", "propagation_m",
              "subharmonic_levels", "seed", "bootstrap", "out_dir", "workers",
              "float_digits"},
             text, path);
  const FieldReader r{doc, text, path};
  SweepCommand cmd;
  const std::string scenario = r.string("scenario", "both");
  if (scenario == "both") {
    cmd.scenarios = {Scenario::single_photon, Scenario::two_photon};
  } else {
    try {
      cmd.scenarios = {parse_scenario(scenario)};
    } catch (const std::invalid_argument&) {
      fail_key(path, text, "scenario", "must be single_photon, two_photon, or both");
    }
  }
  cmd.sweep = sweep_config_from_json(doc, text, path);
  cmd.sweep.scenario = cmd.scenarios.front();
  cmd.out_dir = r.string("out_dir", "");
  cmd.workers = r.integer("workers", 0);
  cmd.float_digits = checked_digits(r);
  return cmd;
}

ScreensCommand load_screens_command(const std::string& path) {
  const std::string text = read_text_file(path);
  const json doc = parse_document(text, path);
  check_keys(doc,
             {"count", "grid_samples", "window_m", "fried_m", "cn2_m_neg_2_3",
              "thickness_m", "wavelength_m", "subharmonic_levels", "seed", "max_lag",
              "out_dir", "float_digits"},
             text, path);
  const FieldReader r{doc, text, path};
  ScreensCommand cmd;
  cmd.count = r.integer("count", cmd.count);
  if (cmd.count < 1) fail_key(path, text, "count", "must be at least 1");
  cmd.grid_samples = r.integer("grid_samples", cmd.grid_samples);
  cmd.window_m = r.number("window_m", cmd.window_m);
  if (r.has("fried_m") && r.has("cn2_m_neg_2_3"))
    fail_key(path, text, "fried_m", "conflicts with cn2_m_neg_2_3; give one strength");
  if (r.has("cn2_m_neg_2_3")) {
    cmd.physical = true;
    cmd.params.cn2 = r.number("cn2_m_neg_2_3", 0.0);
    if (!r.has("thickness_m"))
      fail_key(path, text, "cn2_m_neg_2_3", "requires thickness_m");
    cmd.params.thickness_m = r.number("thickness_m", 0.0);
    cmd.params.wavelength_m = r.number("wavelength_m", 1.55e-6);
  } else {
    if (r.has("thickness_m"))
      fail_key(path, text, "thickness_m", "is only meaningful with cn2_m_neg_2_3");
    if (r.has("wavelength_m"))
      fail_key(path, text, "wavelength_m", "is only meaningful with cn2_m_neg_2_3");
    cmd.fried_m = r.number("fried_m", cmd.fried_m);
  }
  cmd.subharmonic_levels = r.integer("subharmonic_levels", cmd.subharmonic_levels);
  cmd.seed = r.uinteger("seed", cmd.seed);
  cmd.max_lag = r.integer("max_lag", cmd.max_lag);
  cmd.out_dir = r.string("out_dir", "");
  cmd.float_digits = checked_digits(r);
  return cmd;
}

CrosstalkCommand load_crosstalk_command(const std::string& path) {
  const std::string text = read_text_file(path);
  const json doc = parse_document(text, path);
  check_keys(doc,
             {"q_max", "strengths", "ensemble", "grid_samples", "window_over_waist",
              "waist_m", "wavelength_m", "subharmonic_levels", "seed", "arm_b_ideal",
              "out_dir", "workers", "float_digits"},
             text, path);
  const FieldReader r{doc, text, path};
  CrosstalkCommand cmd;
  CrosstalkConfig& c = cmd.crosstalk;
  c.q_max = r.integer("q_max", c.q_max);
  c.strengths = r.numbers("strengths", c.strengths);
  c.ensemble = r.integer("ensemble", c.ensemble);
  c.grid_samples = r.integer("grid_samples", c.grid_samples);
  c.window_over_waist = r.number("window_over_waist", c.window_over_waist);
  c.waist_m = r.number("waist_m", c.waist_m);
  c.wavelength_m = r.number("wavelength_m", c.wavelength_m);
  c.subharmonic_levels = r.integer("subharmonic_levels", c.subharmonic_levels);
  c.seed = r.uinteger("seed", c.seed);
  c.arm_b_ideal = r.boolean("arm_b_ideal", c.arm_b_ideal);
  cmd.out_dir = r.string("out_dir", "");
  cmd.workers = r.integer("workers", 0);
  cmd.float_digits = checked_digits(r);
  return cmd;
}

std::string sweep_command_document(const SweepCommand& cmd) {
  json j = sweep_config_to_json(cmd.sweep);
  j["scenario"] = cmd.scenarios.size() == 2 ? "both" : to_string(cmd.scenarios.front());
  j["float_digits"] = cmd.float_digits;
  return j.dump(2) + "\n";
}

std::string screens_command_document(const ScreensCommand& cmd) {
  json j;
  j["count"] = cmd.count;
  j["grid_samples"] = cmd.grid_samples;
  j["window_m"] = cmd.window_m;
  if (cmd.physical) {
    j["cn2_m_neg_2_3"] = cmd.params.cn2;
    j["thickness_m"] = cmd.params.thickness_m;
    j["wavelength_m"] = cmd.params.wavelength_m;
  } else {
    j["fried_m"] = cmd.fried_m;
  }
  j["subharmonic_levels"] = cmd.subharmonic_levels;
  j["seed"] = cmd.seed;
  j["max_lag"] = cmd.max_lag;
  j["float_digits"] = cmd.float_digits;
  return j.dump(2) + "\n";
}

std::string crosstalk_command_document(const CrosstalkCommand& cmd) {
  json j = crosstalk_config_to_json(cmd.crosstalk);
  j["float_digits"] = cmd.float_digits;
  return j.dump(2) + "\n";
}

std::string config_hash(const std::string& canonical_document) {
  std::uint64_t h = 14695981039346656037ull;
  for (const unsigned char ch : canonical_document) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buffer[17];
  std::snprintf(buffer, sizeof(buffer), "%016llx", static_cast<unsigned long long>(h));
  return buffer;
}

std::string format_sig(double value, int digits) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.*g", digits, value);
  return buffer;
}

std::string sweep_csv(const std::vector<SweepResult>& results, int digits) {
  std::string out = "scenario,q,strength,concurrence,stderr,N\n";
  for (const SweepResult& result : results) {
    for (const SweepPoint& p : result.points) {
      out += to_string(p.scenario);
      out += ',';
      out += std::to_string(p.q);
      out += ',';
      out += format_sig(p.strength, digits);
      out += ',';
      out += format_sig(p.concurrence, digits);
      out += ',';
      out += format_sig(p.concurrence_se, digits);
      out += ',';
      out += std::to_string(p.n_effective);
      out += '\n';
    }
  }
  return out;
}

std::string structure_csv(const StructureFunctionProfile& profile, double fried_m,
                          int digits) {
  if (profile.separation_m.size() != profile.value.size())
    throw std::invalid_argument("structure_csv: malformed profile");
  std::string out = "separation_m,measured,reference\n";
  for (size_t i = 0; i < profile.separation_m.size(); ++i) {
    out += format_sig(profile.separation_m[i], digits);
    out += ',';
    out += format_sig(profile.value[i], digits);
    out += ',';
    out += format_sig(kolmogorov_structure(profile.separation_m[i], fried_m), digits);
    out += '\n';
  }
  return out;
}

std::string sweep_bundle_json(const std::vector<SweepResult>& results,
                              const std::vector<DecayFit>& fits) {
  json doc;
  json result_list = json::array();
  for (const SweepResult& result : results) {
    json jr;
    jr["config"] = sweep_config_to_json(result.config);
    json points = json::array();
    for (const SweepPoint& p : result.points) points.push_back(point_to_json(p));
    jr["points"] = std::move(points);
    result_list.push_back(std::move(jr));
  }
  doc["results"] = std::move(result_list);
  json fit_list = json::array();
  for (const DecayFit& fit : fits) fit_list.push_back(fit_to_json(fit));
  doc["fits"] = std::move(fit_list);
  return doc.dump(2) + "\n";
}

std::vector<SweepResult> sweep_results_from_bundle(const std::string& text) {
  const json doc = parse_document(text, "bundle");
  std::vector<SweepResult> results;
  for (const json& jr : doc.at("results")) {
    SweepResult result;
    result.config = sweep_config_from_json(jr.at("config"), text, "bundle");
    for (const json& jp : jr.at("points"))
      result.points.push_back(point_from_json(jp, result.config.scenario));
    results.push_back(std::move(result));
  }
  return results;
}

std::string crosstalk_bundle_json(const CrosstalkConfig& config,
                                  const std::vector<CrosstalkMatrix>& matrices) {
  json doc;
  doc["config"] = crosstalk_config_to_json(config);
  json list = json::array();
  for (const CrosstalkMatrix& m : matrices) {
    json jm;
    jm["q_max"] = m.q_max;
    jm["strength"] = m.strength;
    jm["probability"] = matrix_to_json(m.probability);
    list.push_back(std::move(jm));
  }
  doc["matrices"] = std::move(list);
  return doc.dump(2) + "\n";
}

std::string manifest_json(const std::string& command, const std::string& version,
                          const std::string& hash, std::uint64_t seed, int workers,
                          const std::string& out_dir, double wall_time_s,
                          const std::string& resolved_document,
                          const std::vector<std::string>& artifacts) {
  json m;
  m["command"] = command;
  m["version"] = version;
  m["config_hash"] = hash;
  m["seed"] = seed;
  m["workers"] = workers;
  m["out_dir"] = out_dir;
  m["wall_time_s"] = wall_time_s;
  m["config"] = json::parse(resolved_document);
  m["artifacts"] = artifacts;
  return m.dump(2) + "\n";
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << content;
  if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace oamturb
