#include "oamturb/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace oamturb {
namespace {

// FFTW planning is not thread-safe; execution through fftw_execute_dft is.
// Plans are created with FFTW_UNALIGNED so they can run on any caller buffer.
fftw_plan plan_for(int n, int sign) {
  static std::mutex plan_mutex;
  static std::map<std::pair<int, int>, fftw_plan> cache;
  std::lock_guard<std::mutex> lock(plan_mutex);
  const auto key = std::make_pair(n, sign);
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  std::vector<std::complex<double>> probe(static_cast<size_t>(n) * n);
  fftw_plan plan = fftw_plan_dft_2d(n, n,
                                    reinterpret_cast<fftw_complex*>(probe.data()),
                                    reinterpret_cast<fftw_complex*>(probe.data()),
                                    sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (!plan) throw std::runtime_error("fft: planner failed for n=" + std::to_string(n));
  cache.emplace(key, plan);
  return plan;
}

void run(int n, int sign, std::complex<double>* data) {
  if (n <= 0) throw std::invalid_argument("fft: grid size must be positive");
  fftw_plan plan = plan_for(n, sign);
  fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(data),
                   reinterpret_cast<fftw_complex*>(data));
}

}  // namespace

void fft2_forward(int n, std::complex<double>* data) { run(n, FFTW_FORWARD, data); }
void fft2_backward(int n, std::complex<double>* data) { run(n, FFTW_BACKWARD, data); }

}  // namespace oamturb
