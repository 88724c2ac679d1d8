#pragma once

#include <complex>
#include <cstddef>
#include <span>

namespace tgsta {

/// In-place complex-to-complex FFT of fixed length, backed by FFTW.
///
/// Both directions are unnormalized: backward(forward(f)) == n * f.
/// Plans are built with FFTW_ESTIMATE so that results are bit-reproducible
/// from run to run. Executing a plan is thread-safe; each thread may still
/// prefer its own FftPlan to avoid sharing.
class FftPlan {
 public:
  explicit FftPlan(std::size_t n);
  ~FftPlan();

  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;
  FftPlan(FftPlan&& other) noexcept;
  FftPlan& operator=(FftPlan&& other) noexcept;

  std::size_t size() const { return n_; }

  void forward(std::span<std::complex<double>> data) const;
  void backward(std::span<std::complex<double>> data) const;

 private:
  void release() noexcept;

  std::size_t n_ = 0;
  void* forward_plan_ = nullptr;
  void* backward_plan_ = nullptr;
};

/// Per-thread cached plan of length n.
const FftPlan& thread_local_plan(std::size_t n);

}  // namespace tgsta
