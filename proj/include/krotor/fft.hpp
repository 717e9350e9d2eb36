#pragma once

#include <fftw3.h>

#include <memory>
#include <mutex>
#include <thread>

#include "krotor/common.hpp"

namespace krotor::detail {

inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

template <class Real>
struct FftwApi;

template <>
struct FftwApi<double> {
  using complex_t = fftw_complex;
  using plan_t = fftw_plan;
  static void* malloc(std::size_t bytes) { return fftw_malloc(bytes); }
  static void free(void* p) { fftw_free(p); }
  static plan_t plan(int n, complex_t* buf, int sign, unsigned flags) {
    return fftw_plan_dft_1d(n, buf, buf, sign, flags);
  }
  static void execute(plan_t p) { fftw_execute(p); }
  static void destroy(plan_t p) { fftw_destroy_plan(p); }
  static void set_threads(int n) {
#ifdef KROTOR_FFTW_THREADS
    static std::once_flag once;
    std::call_once(once, [] { fftw_init_threads(); });
    fftw_plan_with_nthreads(n);
#else
    (void)n;
#endif
  }
};

template <>
struct FftwApi<float> {
  using complex_t = fftwf_complex;
  using plan_t = fftwf_plan;
  static void* malloc(std::size_t bytes) { return fftwf_malloc(bytes); }
  static void free(void* p) { fftwf_free(p); }
  static plan_t plan(int n, complex_t* buf, int sign, unsigned flags) {
    return fftwf_plan_dft_1d(n, buf, buf, sign, flags);
  }
  static void execute(plan_t p) { fftwf_execute(p); }
  static void destroy(plan_t p) { fftwf_destroy_plan(p); }
  static void set_threads(int n) {
#ifdef KROTOR_FFTW_THREADS
    static std::once_flag once;
    std::call_once(once, [] { fftwf_init_threads(); });
    fftwf_plan_with_nthreads(n);
#else
    (void)n;
#endif
  }
};

inline int auto_fft_threads(std::size_t n) {
  if (n < (std::size_t{1} << 17)) return 1;
  const unsigned hc = std::thread::hardware_concurrency();
  return static_cast<int>(std::max(1u, hc));
}

/// In-place DFT pair between lattice amplitudes and the uniform angle grid
/// theta_j = 2 pi j / N, with the pairing
///   grid[j] = sum_m amps[m] exp(-i m theta_j)   (to_grid)
/// so that multiplying the grid by exp(-i omega theta_j) shifts the lattice
/// index up by omega. The window offset phase exp(-i n_min theta_j) commutes
/// with any diagonal angle-space factor and is therefore omitted.
///
/// Plans use FFTW_ESTIMATE so that planning is fast and repeatable.
template <class Real>
class CircleTransform {
  using Api = FftwApi<Real>;

 public:
  explicit CircleTransform(std::size_t n, int nthreads = 0) : n_(n) {
    buf_ = static_cast<std::complex<Real>*>(Api::malloc(sizeof(std::complex<Real>) * n));
    if (!buf_) throw std::bad_alloc();
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    Api::set_threads(nthreads > 0 ? nthreads : auto_fft_threads(n));
    fwd_ = Api::plan(static_cast<int>(n), reinterpret_cast<typename Api::complex_t*>(buf_),
                     FFTW_FORWARD, FFTW_ESTIMATE);
    bwd_ = Api::plan(static_cast<int>(n), reinterpret_cast<typename Api::complex_t*>(buf_),
                     FFTW_BACKWARD, FFTW_ESTIMATE);
    if (!fwd_ || !bwd_) throw std::runtime_error("CircleTransform: FFTW planning failed");
  }

  ~CircleTransform() {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    if (fwd_) Api::destroy(fwd_);
    if (bwd_) Api::destroy(bwd_);
    Api::free(buf_);
  }

  CircleTransform(const CircleTransform&) = delete;
  CircleTransform& operator=(const CircleTransform&) = delete;

  std::size_t size() const { return n_; }
  std::complex<Real>* data() { return buf_; }
  const std::complex<Real>* data() const { return buf_; }

  void to_grid() { Api::execute(fwd_); }
  /// Inverse transform; the caller is responsible for the 1/N scale.
  void from_grid() { Api::execute(bwd_); }

 private:
  std::size_t n_ = 0;
  std::complex<Real>* buf_ = nullptr;
  typename Api::plan_t fwd_ = nullptr;
  typename Api::plan_t bwd_ = nullptr;
};

}  // namespace krotor::detail
