#pragma once

#include <complex>
#include <cstddef>
#include <mutex>
#include <new>
#include <stdexcept>

#include <fftw3.h>

#include "qoct/state.hpp"

namespace qoct {

/// In-place complex 1-D DFT workspace around FFTW.
///
/// Plans are created with FFTW_ESTIMATE so the chosen algorithm depends only
/// on the transform size, which keeps seeded runs reproducible. Plan creation
/// and destruction are serialized internally; execution is thread-safe across
/// distinct instances, so each concurrent propagation owns one transformer.
class FourierTransformer {
 public:
  explicit FourierTransformer(std::size_t n) : n_(n), inv_n_(1.0 / static_cast<double>(n)) {
    if (n == 0) throw std::invalid_argument("FourierTransformer: empty transform");
    std::scoped_lock lock(planner_mutex());
    buffer_ = fftw_alloc_complex(n);
    if (buffer_ == nullptr) throw std::bad_alloc();
    const int size = static_cast<int>(n);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    forward_ = fftw_plan_dft_1d(size, buffer_, buffer_, FFTW_FORWARD, flags);
    backward_ = fftw_plan_dft_1d(size, buffer_, buffer_, FFTW_BACKWARD, flags);
    if (forward_ == nullptr || backward_ == nullptr)
      throw std::runtime_error("FourierTransformer: planning failed");
  }

  ~FourierTransformer() {
    std::scoped_lock lock(planner_mutex());
    if (forward_ != nullptr) fftw_destroy_plan(forward_);
    if (backward_ != nullptr) fftw_destroy_plan(backward_);
    if (buffer_ != nullptr) fftw_free(buffer_);
  }

  FourierTransformer(const FourierTransformer&) = delete;
  FourierTransformer& operator=(const FourierTransformer&) = delete;

  std::size_t size() const { return n_; }

  /// Unnormalized forward DFT, in place.
  void forward(cplx* data) const {
    auto* p = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(forward_, p, p);
  }

  /// Inverse DFT including the 1/n factor, in place.
  void inverse(cplx* data) const {
    auto* p = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(backward_, p, p);
    for (std::size_t j = 0; j < n_; ++j) data[j] *= inv_n_;
  }

 private:
  static std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
  }

  std::size_t n_;
  double inv_n_;
  fftw_complex* buffer_ = nullptr;
  fftw_plan forward_ = nullptr;
  fftw_plan backward_ = nullptr;
};

}  // namespace qoct
