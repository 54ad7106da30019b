#include "oamturb/turbulence.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <sstream>

#include "oamturb/fft.hpp"
#include "oamturb/rng.hpp"

namespace oamturb {
namespace {

constexpr double pi = std::numbers::pi;

// 2D phase spectral density W(K) = beta r0^(-5/3) K^(-11/3); beta follows from the
// 0.185 Fried coefficient so that synthesized screens reproduce 6.88 (r/r0)^(5/3).
const double spectral_beta = std::pow(2.0 * pi, 5) * 0.033 * std::pow(0.185, 5.0 / 3.0);

int freq_index(int i, int n) { return i <= n / 2 - 1 ? i : i - n; }

// Mean of |f|^(-11/3) over a square cell of side `cell` centered at (cx, cy),
// midpoint rule on a 33x33 lattice; f in units of the main-grid frequency step.
double cell_mean_spectrum(double cx, double cy, double cell) {
  constexpr int nsub = 33;
  double sum = 0.0;
  for (int a = 0; a < nsub; ++a) {
    const double fx = cx + cell * ((a + 0.5) / nsub - 0.5);
    for (int b = 0; b < nsub; ++b) {
      const double fy = cy + cell * ((b + 0.5) / nsub - 0.5);
      sum += std::pow(fx * fx + fy * fy, -11.0 / 6.0);
    }
  }
  return sum / (nsub * nsub);
}

struct SubharmonicBin {
  int mx = 0;
  int my = 0;
  int level = 0;   // bin frequency is (mx, my) dk / 3^level
  double amp = 0;  // dimensionless, scales like the main-grid amplitudes
};

// Per-bin spectral amplitudes for unit L/(2 pi r0). Cell averaging (instead of the
// midpoint value) matters only near the origin where K^(-11/3) is steep: it is applied
// on the low-frequency square max(|mx|,|my|) <= 6 and on every subharmonic bin.
struct SpectralTable {
  std::vector<double> main_amp;     // n*n, FFT layout, [my_index*n + mx_index]
  std::vector<SubharmonicBin> sub;  // fixed draw order: level, then row-major bins
};

std::shared_ptr<const SpectralTable> spectral_table(int n, int levels) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::shared_ptr<const SpectralTable>> cache;
  const std::lock_guard<std::mutex> lock(mutex);
  const auto key = std::make_pair(n, levels);
  if (const auto it = cache.find(key); it != cache.end()) return it->second;

  auto table = std::make_shared<SpectralTable>();
  table->main_amp.resize(static_cast<size_t>(n) * n);
  constexpr int averaged_rings = 6;
  for (int iy = 0; iy < n; ++iy) {
    const int my = freq_index(iy, n);
    for (int ix = 0; ix < n; ++ix) {
      const int mx = freq_index(ix, n);
      double amp = 0.0;
      if (mx != 0 || my != 0) {
        const double mean =
            std::max(std::abs(mx), std::abs(my)) <= averaged_rings
                ? cell_mean_spectrum(mx, my, 1.0)
                : std::pow(double(mx) * mx + double(my) * my, -11.0 / 6.0);
        amp = std::sqrt(2.0 * spectral_beta * mean) / (2.0 * pi);
      }
      table->main_amp[static_cast<size_t>(iy) * n + ix] = amp;
    }
  }
  double cell = 1.0;
  for (int level = 1; level <= levels; ++level) {
    cell /= 3.0;
    for (int my = -1; my <= 1; ++my) {
      for (int mx = -1; mx <= 1; ++mx) {
        if (mx == 0 && my == 0) continue;
        const double mean = cell_mean_spectrum(mx * cell, my * cell, cell);
        const double amp = cell * std::sqrt(2.0 * spectral_beta * mean) / (2.0 * pi);
        table->sub.push_back({mx, my, level, amp});
      }
    }
  }
  cache.emplace(key, table);
  return table;
}

}  // namespace

double TurbulenceParams::wavenumber() const {
  if (wavelength_m <= 0.0)
    throw std::domain_error("TurbulenceParams: wavelength must be positive");
  return 2.0 * pi / wavelength_m;
}

double fried_parameter(const TurbulenceParams& params, double path_m) {
  if (params.wavelength_m <= 0.0)
    throw std::domain_error("fried_parameter: wavelength must be positive");
  if (params.cn2 <= 0.0) throw std::domain_error("fried_parameter: cn2 must be positive");
  if (path_m <= 0.0) throw std::domain_error("fried_parameter: path must be positive");
  const double lambda2 = params.wavelength_m * params.wavelength_m;
  return 0.185 * std::pow(lambda2 / (params.cn2 * path_m), 3.0 / 5.0);
}

double scintillation_strength(double waist_m, const TurbulenceParams& params, double path_m) {
  if (waist_m <= 0.0)
    throw std::domain_error("scintillation_strength: waist must be positive");
  return waist_m / fried_parameter(params, path_m);
}

double fried_from_strength(double waist_m, double strength) {
  if (waist_m <= 0.0)
    throw std::domain_error("fried_from_strength: waist must be positive");
  if (strength < 0.0)
    throw std::domain_error("fried_from_strength: strength must be non-negative");
  if (strength == 0.0) return std::numeric_limits<double>::infinity();
  return waist_m / strength;
}

double kolmogorov_structure(double separation_m, double fried_m) {
  if (separation_m < 0.0)
    throw std::domain_error("kolmogorov_structure: separation must be non-negative");
  if (!(fried_m > 0.0))
    throw std::domain_error("kolmogorov_structure: fried parameter must be positive");
  if (std::isinf(fried_m)) return 0.0;
  return structure_coefficient * std::pow(separation_m / fried_m, 5.0 / 3.0);
}

std::pair<PhaseScreen, PhaseScreen> generate_screen_pair(const GridSpec& grid, double fried_m,
                                                         std::uint64_t seed,
                                                         int subharmonic_levels) {
  if (grid.n_samples < 2 || grid.pitch_m <= 0.0)
    throw std::invalid_argument("generate_screen_pair: invalid grid");
  if (subharmonic_levels < 0 || subharmonic_levels > 12)
    throw std::invalid_argument("generate_screen_pair: subharmonic_levels outside [0, 12]");
  if (!(fried_m > 0.0))
    throw std::domain_error("generate_screen_pair: fried parameter must be positive");

  const int n = grid.n_samples;
  const size_t count = static_cast<size_t>(n) * n;
  PhaseScreen first{grid, fried_m, seed, 0, std::vector<double>(count, 0.0)};
  PhaseScreen second{grid, fried_m, seed, 1, std::vector<double>(count, 0.0)};
  if (std::isinf(fried_m)) return {std::move(first), std::move(second)};

  if (fried_m < 2.0 * grid.pitch_m) {
    std::ostringstream msg;
    msg << "phase screen under-resolved: fried parameter " << fried_m
        << " m spans fewer than 2 samples at pitch " << grid.pitch_m << " m";
    throw ResolutionError(msg.str());
  }

  const auto table = spectral_table(n, subharmonic_levels);
  const double scale = std::pow(grid.window_m() / (2.0 * pi * fried_m), 5.0 / 6.0);

  // One complex circular Gaussian per spectral bin, in fixed order: the n*n FFT bins
  // row-major, then the subharmonic bins. Both output screens come from one draw.
  RandomStream stream(seed);
  std::vector<std::complex<double>> field(count);
  for (size_t k = 0; k < count; ++k)
    field[k] = stream.next_complex_gaussian() * (table->main_amp[k] * scale);
  fft2_backward(n, field.data());

  std::vector<std::complex<double>> phase_x(n), phase_y(n);
  for (const SubharmonicBin& bin : table->sub) {
    const std::complex<double> coeff = stream.next_complex_gaussian() * (bin.amp * scale);
    const double step = 2.0 * pi / (n * std::pow(3.0, bin.level));
    for (int i = 0; i < n; ++i) {
      const double centered = double(i) - n / 2;
      phase_x[i] = std::polar(1.0, step * bin.mx * centered);
      phase_y[i] = std::polar(1.0, step * bin.my * centered);
    }
    for (int iy = 0; iy < n; ++iy) {
      const std::complex<double> row = coeff * phase_y[iy];
      std::complex<double>* line = field.data() + static_cast<size_t>(iy) * n;
      for (int ix = 0; ix < n; ++ix) line[ix] += row * phase_x[ix];
    }
  }

  for (size_t k = 0; k < count; ++k) {
    first.theta[k] = field[k].real();
    second.theta[k] = field[k].imag();
  }
  return {std::move(first), std::move(second)};
}

std::pair<PhaseScreen, PhaseScreen> generate_screen_pair(const GridSpec& grid,
                                                         const TurbulenceParams& params,
                                                         std::uint64_t seed,
                                                         int subharmonic_levels) {
  const double fried = params.cn2 == 0.0 ? std::numeric_limits<double>::infinity()
                                         : fried_parameter(params, params.thickness_m);
  return generate_screen_pair(grid, fried, seed, subharmonic_levels);
}

namespace {

void check_screen_set(const std::vector<PhaseScreen>& screens) {
  if (screens.empty()) throw std::invalid_argument("screen estimator: no screens given");
  const GridSpec& g = screens.front().grid;
  for (const PhaseScreen& s : screens) {
    if (!(s.grid == g))
      throw std::invalid_argument("screen estimator: screens sampled on different grids");
    if (s.theta.size() != static_cast<size_t>(g.n_samples) * g.n_samples)
      throw std::invalid_argument("screen estimator: sample count does not match the grid");
  }
}

int resolve_max_lag(const GridSpec& g, int max_lag) {
  const int lag = max_lag > 0 ? max_lag : g.n_samples / 8;
  if (lag >= g.n_samples)
    throw std::invalid_argument("screen estimator: max_lag must be smaller than the grid");
  return lag;
}

}  // namespace

StructureFunctionProfile estimate_structure_function(const std::vector<PhaseScreen>& screens,
                                                     int max_lag) {
  check_screen_set(screens);
  const GridSpec& g = screens.front().grid;
  const int lag_max = resolve_max_lag(g, max_lag);
  const int n = g.n_samples;

  struct Bin {
    double r = 0;
    double sum = 0;
    size_t count = 0;
  };
  std::vector<Bin> bins(2 * static_cast<size_t>(lag_max));
  for (int l = 1; l <= lag_max; ++l) {
    bins[l - 1].r = l * g.pitch_m;
    bins[lag_max + l - 1].r = l * g.pitch_m * std::numbers::sqrt2;
  }

  for (const PhaseScreen& s : screens) {
    for (int l = 1; l <= lag_max; ++l) {
      double axis = 0.0;
      for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix + l < n; ++ix) {
          const double d = s.at(ix + l, iy) - s.at(ix, iy);
          axis += d * d;
        }
      for (int iy = 0; iy + l < n; ++iy)
        for (int ix = 0; ix < n; ++ix) {
          const double d = s.at(ix, iy + l) - s.at(ix, iy);
          axis += d * d;
        }
      bins[l - 1].sum += axis;
      bins[l - 1].count += 2 * static_cast<size_t>(n) * (n - l);

      double diagonal = 0.0;
      for (int iy = 0; iy + l < n; ++iy)
        for (int ix = 0; ix + l < n; ++ix) {
          const double d = s.at(ix + l, iy + l) - s.at(ix, iy);
          const double e = s.at(ix + l, iy) - s.at(ix, iy + l);
          diagonal += d * d + e * e;
        }
      bins[lag_max + l - 1].sum += diagonal;
      bins[lag_max + l - 1].count += 2 * static_cast<size_t>(n - l) * (n - l);
    }
  }

  std::sort(bins.begin(), bins.end(), [](const Bin& a, const Bin& b) { return a.r < b.r; });
  StructureFunctionProfile profile;
  profile.separation_m.reserve(bins.size());
  profile.value.reserve(bins.size());
  for (const Bin& b : bins) {
    profile.separation_m.push_back(b.r);
    profile.value.push_back(b.sum / double(b.count));
  }
  return profile;
}

StructureFunctionProfile estimate_phase_autocorrelation(const std::vector<PhaseScreen>& screens,
                                                        int max_lag) {
  check_screen_set(screens);
  const GridSpec& g = screens.front().grid;
  const int lag_max = resolve_max_lag(g, max_lag);
  const int n = g.n_samples;

  StructureFunctionProfile profile;
  profile.separation_m.resize(lag_max + 1);
  profile.value.resize(lag_max + 1);
  for (int l = 0; l <= lag_max; ++l) {
    double sum = 0.0;
    size_t count = 0;
    for (const PhaseScreen& s : screens) {
      for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix + l < n; ++ix) sum += s.at(ix + l, iy) * s.at(ix, iy);
      for (int iy = 0; iy + l < n; ++iy)
        for (int ix = 0; ix < n; ++ix) sum += s.at(ix, iy + l) * s.at(ix, iy);
      count += 2 * static_cast<size_t>(n) * (n - l);
    }
    profile.separation_m[l] = l * g.pitch_m;
    profile.value[l] = sum / double(count);
  }
  return profile;
}

double structure_log_slope(const StructureFunctionProfile& profile, double min_separation_m,
                           double max_separation_m) {
  if (profile.separation_m.size() != profile.value.size())
    throw std::invalid_argument("structure_log_slope: malformed profile");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  size_t used = 0;
  for (size_t i = 0; i < profile.separation_m.size(); ++i) {
    const double r = profile.separation_m[i];
    const double v = profile.value[i];
    if (r < min_separation_m || r > max_separation_m || !(r > 0.0) || !(v > 0.0)) continue;
    const double x = std::log(r);
    const double y = std::log(v);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++used;
  }
  if (used < 2)
    throw std::invalid_argument("structure_log_slope: fewer than two usable bins in range");
  const double denom = double(used) * sxx - sx * sx;
  if (denom == 0.0) throw std::invalid_argument("structure_log_slope: degenerate separations");
  return (double(used) * sxy - sx * sy) / denom;
}

namespace {

constexpr char screen_magic[8] = {'O', 'A', 'M', 'S', 'C', 'R', 'N', '1'};
constexpr std::uint32_t screen_format_version = 1;

template <typename T>
void write_raw(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_raw(std::istream& in, const std::string& path) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw std::runtime_error("read_screens: truncated file " + path);
  return value;
}

}  // namespace

void write_screens(const std::string& path, const std::vector<PhaseScreen>& screens) {
  if (screens.empty()) throw std::invalid_argument("write_screens: no screens to write");
  const GridSpec& g = screens.front().grid;
  const double fried = screens.front().fried_m;
  for (const PhaseScreen& s : screens) {
    if (!(s.grid == g) || s.fried_m != fried)
      throw std::invalid_argument("write_screens: screens differ in grid or strength");
    if (s.theta.size() != static_cast<size_t>(g.n_samples) * g.n_samples)
      throw std::invalid_argument("write_screens: sample count does not match the grid");
  }

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_screens: cannot open " + path);
  out.write(screen_magic, sizeof(screen_magic));
  write_raw(out, screen_format_version);
  write_raw(out, static_cast<std::uint32_t>(g.n_samples));
  write_raw(out, static_cast<std::uint64_t>(screens.size()));
  write_raw(out, g.pitch_m);
  write_raw(out, fried);
  std::vector<float> samples(static_cast<size_t>(g.n_samples) * g.n_samples);
  for (const PhaseScreen& s : screens) {
    write_raw(out, s.seed);
    write_raw(out, static_cast<std::int32_t>(s.pair_index));
    for (size_t k = 0; k < samples.size(); ++k) samples[k] = static_cast<float>(s.theta[k]);
    out.write(reinterpret_cast<const char*>(samples.data()),
              static_cast<std::streamsize>(samples.size() * sizeof(float)));
  }
  if (!out) throw std::runtime_error("write_screens: write failed for " + path);
}

std::vector<PhaseScreen> read_screens(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_screens: cannot open " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, screen_magic, sizeof(magic)) != 0)
    throw std::runtime_error("read_screens: not a phase-screen file: " + path);
  const auto version = read_raw<std::uint32_t>(in, path);
  if (version != screen_format_version)
    throw std::runtime_error("read_screens: unsupported format version " +
                             std::to_string(version));
  const auto n = read_raw<std::uint32_t>(in, path);
  const auto count = read_raw<std::uint64_t>(in, path);
  const auto pitch = read_raw<double>(in, path);
  const auto fried = read_raw<double>(in, path);
  if (n < 2 || n > (1u << 15) || count > (1u << 24) || pitch <= 0.0 || !(fried > 0.0))
    throw std::runtime_error("read_screens: corrupt header in " + path);

  const GridSpec grid{static_cast<int>(n), pitch};
  std::vector<PhaseScreen> screens;
  screens.reserve(count);
  std::vector<float> samples(static_cast<size_t>(n) * n);
  for (std::uint64_t i = 0; i < count; ++i) {
    PhaseScreen s;
    s.grid = grid;
    s.fried_m = fried;
    s.seed = read_raw<std::uint64_t>(in, path);
    s.pair_index = static_cast<int>(read_raw<std::int32_t>(in, path));
    in.read(reinterpret_cast<char*>(samples.data()),
            static_cast<std::streamsize>(samples.size() * sizeof(float)));
    if (!in) throw std::runtime_error("read_screens: truncated screen data in " + path);
    s.theta.assign(samples.begin(), samples.end());
    screens.push_back(std::move(s));
  }
  return screens;
}

}  // namespace oamturb
