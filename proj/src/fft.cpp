#include "tgsta/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

namespace tgsta {
namespace {

// The FFTW planner is not thread-safe.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

fftw_complex* as_fftw(std::complex<double>* p) {
  return reinterpret_cast<fftw_complex*>(p);
}

}  // namespace

FftPlan::FftPlan(std::size_t n) : n_(n) {
  if (n == 0) throw std::invalid_argument("FftPlan: zero length");
  std::vector<std::complex<double>> scratch(n);
  std::lock_guard lock(planner_mutex());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  forward_plan_ = fftw_plan_dft_1d(static_cast<int>(n), as_fftw(scratch.data()),
                                   as_fftw(scratch.data()), FFTW_FORWARD, flags);
  backward_plan_ = fftw_plan_dft_1d(static_cast<int>(n), as_fftw(scratch.data()),
                                    as_fftw(scratch.data()), FFTW_BACKWARD, flags);
  if (!forward_plan_ || !backward_plan_) {
    release();
    throw std::runtime_error("FftPlan: FFTW failed to create plans for n=" + std::to_string(n));
  }
}

FftPlan::~FftPlan() { release(); }

FftPlan::FftPlan(FftPlan&& other) noexcept
    : n_(other.n_), forward_plan_(other.forward_plan_), backward_plan_(other.backward_plan_) {
  other.forward_plan_ = nullptr;
  other.backward_plan_ = nullptr;
}

FftPlan& FftPlan::operator=(FftPlan&& other) noexcept {
  if (this != &other) {
    release();
    n_ = other.n_;
    forward_plan_ = other.forward_plan_;
    backward_plan_ = other.backward_plan_;
    other.forward_plan_ = nullptr;
    other.backward_plan_ = nullptr;
  }
  return *this;
}

void FftPlan::release() noexcept {
  if (!forward_plan_ && !backward_plan_) return;
  std::lock_guard lock(planner_mutex());
  if (forward_plan_) fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  if (backward_plan_) fftw_destroy_plan(static_cast<fftw_plan>(backward_plan_));
  forward_plan_ = nullptr;
  backward_plan_ = nullptr;
}

void FftPlan::forward(std::span<std::complex<double>> data) const {
  if (data.size() != n_) throw std::invalid_argument("FftPlan::forward: length mismatch");
  fftw_execute_dft(static_cast<fftw_plan>(forward_plan_), as_fftw(data.data()),
                   as_fftw(data.data()));
}

void FftPlan::backward(std::span<std::complex<double>> data) const {
  if (data.size() != n_) throw std::invalid_argument("FftPlan::backward: length mismatch");
  fftw_execute_dft(static_cast<fftw_plan>(backward_plan_), as_fftw(data.data()),
                   as_fftw(data.data()));
}

const FftPlan& thread_local_plan(std::size_t n) {
  thread_local std::map<std::size_t, FftPlan> plans;
  auto it = plans.find(n);
  if (it == plans.end()) it = plans.emplace(n, FftPlan(n)).first;
  return it->second;
}

}  // namespace tgsta
