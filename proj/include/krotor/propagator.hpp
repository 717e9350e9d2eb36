#pragma once

#include <limits>
#include <memory>
#include <span>

#include "krotor/fft.hpp"
#include "krotor/observables.hpp"
#include "krotor/params.hpp"
#include "krotor/wavefunction.hpp"

namespace krotor {

namespace detail {

/// 2 pi ((r n^2) mod s) / s, reduced with exact integer arithmetic.
inline double resonant_phase_angle(std::int64_t n, int r, int s) {
  std::int64_t q = (n % s) * (n % s) % s;
  q = (q * (r % s)) % s;
  if (q < 0) q += s;
  return kTwoPi * static_cast<double>(q) / static_cast<double>(s);
}

/// (delta/2) n^2 mod 2pi, as 2pi frac(n^2 delta / 4pi) with a compensated
/// product so the reduction stays accurate for |n| up to ~2^26.
inline double detuned_phase_angle(std::int64_t n, double delta) {
  const double c = delta / (2.0 * kTwoPi);
  const double n2 = static_cast<double>(n) * static_cast<double>(n);  // exact for |n| < 2^26
  const double hi = c * n2;
  const double lo = std::fma(c, n2, -hi);
  double f = (hi - std::floor(hi)) + lo;
  f -= std::floor(f);
  return kTwoPi * f;
}

/// Free-rotation phases exp(-i 2pi(r/s) n^2) exp(-i (delta/2) n^2) over the
/// window, times `scale`.
template <class Real>
void fill_free_phases(std::vector<std::complex<Real>>& out, const LatticeWindow& win,
                      const ModelParams& mp, double scale) {
  out.resize(win.size);
  for (std::size_t j = 0; j < win.size; ++j) {
    const std::int64_t n = win.n_min + static_cast<std::int64_t>(j);
    const double ang = resonant_phase_angle(n, mp.r, mp.s) + detuned_phase_angle(n, mp.delta);
    out[j] = std::complex<Real>(static_cast<Real>(scale * std::cos(-ang)),
                                static_cast<Real>(scale * std::sin(-ang)));
  }
}

/// Kick factor exp(-i (k/(delta omega)) cos(omega theta)) on the angle grid,
/// including the gain exp((k lambda/delta) sin(omega theta)) when lambda > 0.
/// The e^{-i n theta_j} grid pairing mirrors the angle axis relative to the
/// physical angle operator, so the field is sampled at -theta_j: the cosine
/// is unchanged and the gain enters with a negative sign.
template <class Real>
void fill_kick_field(std::vector<std::complex<Real>>& out, std::size_t n, const ModelParams& mp) {
  out.resize(n);
  const double beta = mp.k / (mp.delta * mp.omega);
  const double gain = mp.k * mp.lambda / mp.delta;
  for (std::size_t j = 0; j < n; ++j) {
    const double theta = kTwoPi * static_cast<double>(j) / static_cast<double>(n);
    const double ang = -beta * std::cos(mp.omega * theta);
    double mag = 1.0;
    if (mp.lambda > 0.0) mag = std::exp(-gain * std::sin(mp.omega * theta));
    out[j] = std::complex<Real>(static_cast<Real>(mag * std::cos(ang)),
                                static_cast<Real>(mag * std::sin(ang)));
  }
}

template <class Real>
inline void multiply_pointwise(std::complex<Real>* a, const std::complex<Real>* b, std::size_t n) {
  Real* ar = reinterpret_cast<Real*>(a);
  const Real* br = reinterpret_cast<const Real*>(b);
#pragma omp parallel for schedule(static) if (n >= (std::size_t{1} << 20))
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    const Real xr = ar[2 * i], xi = ar[2 * i + 1];
    const Real yr = br[2 * i], yi = br[2 * i + 1];
    ar[2 * i] = xr * yr - xi * yi;
    ar[2 * i + 1] = xr * yi + xi * yr;
  }
}

/// Deterministic 4-lane squared-norm sum with double accumulation.
template <class Real>
inline double norm2_of(const std::complex<Real>* a, std::size_t n) {
  const Real* ar = reinterpret_cast<const Real*>(a);
  double s0 = 0, s1 = 0, s2 = 0, s3 = 0;
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    s0 += static_cast<double>(ar[2 * i]) * ar[2 * i];
    s1 += static_cast<double>(ar[2 * i + 1]) * ar[2 * i + 1];
    s2 += static_cast<double>(ar[2 * i + 2]) * ar[2 * i + 2];
    s3 += static_cast<double>(ar[2 * i + 3]) * ar[2 * i + 3];
  }
  for (; i < n; ++i) {
    s0 += static_cast<double>(ar[2 * i]) * ar[2 * i];
    s1 += static_cast<double>(ar[2 * i + 1]) * ar[2 * i + 1];
  }
  return (s0 + s1) + (s2 + s3);
}

struct RawStepResult {
  double norm = 0.0;      // squared norm after the step, before any renormalization
  double edge_occ = 0.0;  // |amps.front()|^2 + |amps.back()|^2, unnormalized
};

/// One Floquet period on the state resident in the transform buffer:
/// kick in the angle representation first, then the free phases.
template <class Real>
RawStepResult split_step(CircleTransform<Real>& fft, const std::vector<std::complex<Real>>& kick,
                         const std::vector<std::complex<Real>>& free_scaled) {
  const std::size_t n = fft.size();
  fft.to_grid();
  multiply_pointwise(fft.data(), kick.data(), n);
  fft.from_grid();
  multiply_pointwise(fft.data(), free_scaled.data(), n);
  RawStepResult r;
  r.norm = norm2_of(fft.data(), n);
  r.edge_occ = std::norm(fft.data()[0]) + std::norm(fft.data()[n - 1]);
  return r;
}

}  // namespace detail

/// Norms and boundary occupancy around one application of the Floquet
/// operator. norm_after is the pre-renormalization squared-root norm.
struct StepReport {
  double norm_before = 0.0;
  double norm_after = 0.0;
  double boundary_leak = 0.0;
};

/// Split-step plan for one Floquet period on a fixed lattice window:
/// transform to the angle grid, multiply the kick factor (with gain when
/// lambda > 0), transform back, multiply the free-rotation phases.
class PropagatorPlan {
 public:
  PropagatorPlan(const ModelParams& mp, LatticeWindow win,
                 double leak_tol = kDefaultTol.leak_tol)
      : mp_(mp), win_(win), leak_tol_(leak_tol), fft_(win.size) {
    if (win.size < 4) throw std::invalid_argument("PropagatorPlan: window too small");
    if (std::max(std::llabs(win.n_min), std::llabs(win.n_max())) >= (std::int64_t{1} << 26))
      throw std::invalid_argument("PropagatorPlan: |n| too large for exact phase reduction");
    detail::fill_free_phases(free_, win, mp, 1.0);
    detail::fill_free_phases(free_scaled_, win, mp, 1.0 / static_cast<double>(win.size));
    detail::fill_kick_field(kick_, win.size, mp);
  }

  const ModelParams& params() const { return mp_; }
  const LatticeWindow& window() const { return win_; }
  double leak_tol() const { return leak_tol_; }

  std::span<const cplx> free_phases() const { return free_; }
  std::span<const cplx> kick_field() const { return kick_; }

  /// Advance `amps` (which must span exactly the plan window) by one period.
  /// Renormalizes after the step when lambda > 0; norm_after always records
  /// the pre-renormalization norm. Does not throw on boundary leak.
  StepReport step_in_place(std::span<cplx> amps) {
    if (amps.size() != win_.size) throw std::invalid_argument("step_in_place: size mismatch");
    StepReport rep;
    rep.norm_before = std::sqrt(detail::norm2_of(amps.data(), amps.size()));
    std::copy(amps.begin(), amps.end(), fft_.data());
    const auto raw = detail::split_step(fft_, kick_, free_scaled_);
    rep.norm_after = std::sqrt(raw.norm);
    rep.boundary_leak = raw.norm > 0.0 ? raw.edge_occ / raw.norm : 0.0;
    if (mp_.lambda > 0.0 && raw.norm > 0.0) {
      const double inv = 1.0 / rep.norm_after;
      for (std::size_t j = 0; j < win_.size; ++j) amps[j] = fft_.data()[j] * inv;
    } else {
      std::copy(fft_.data(), fft_.data() + win_.size, amps.begin());
    }
    return rep;
  }

 private:
  ModelParams mp_;
  LatticeWindow win_;
  double leak_tol_;
  std::vector<cplx> free_;         // unit-modulus free phases (diagnostic)
  std::vector<cplx> free_scaled_;  // free phases with the 1/N transform scale folded in
  std::vector<cplx> kick_;
  detail::CircleTransform<double> fft_;
};

/// U * psi for one Floquet period. Throws window_error if the boundary
/// occupancy after the step exceeds the plan's leak tolerance.
inline std::pair<Wavefunction, StepReport> apply_floquet(const Wavefunction& psi,
                                                         PropagatorPlan& plan) {
  if (psi.n_min != plan.window().n_min || psi.amps.size() != plan.window().size)
    throw std::invalid_argument("apply_floquet: state not on the plan window");
  Wavefunction out = psi;
  StepReport rep = plan.step_in_place(out.amps);
  if (rep.boundary_leak > plan.leak_tol())
    throw window_error("apply_floquet: boundary leak above tolerance; re-plan with a larger window");
  return {std::move(out), rep};
}

namespace detail {

/// Per-step momentum spread of the kick in lattice sites (Bessel bandwidth
/// of the kick factor plus slack).
inline std::int64_t kick_band_sites(const ModelParams& mp) {
  const double beta = mp.k / (mp.delta * mp.omega);
  const double band = std::ceil(beta) + 12.0 * std::cbrt(std::max(1.0, beta)) + 16.0;
  return static_cast<std::int64_t>(mp.omega) * static_cast<std::int64_t>(band);
}

/// Adaptive-window split-step propagator. The state lives in the transform
/// buffer; when probability reaches the outer margin the window is re-planned
/// at twice the half-width (embedding is exact, nothing is wrapped). A step
/// whose boundary occupancy still exceeds leak_tol throws window_error.
template <class Real>
class PropagationEngine {
 public:
  struct Options {
    double leak_tol = kDefaultTol.leak_tol;
    bool renormalize = false;              // keep the stored state at unit norm
    std::int64_t max_halfwidth = std::int64_t{1} << 25;
    std::int64_t initial_halfwidth = 0;    // 0 = derive from the initial state
    int nthreads = 0;                      // 0 = auto
    double grow_occupancy = 0.0;           // margin occupancy that triggers growth;
                                           // 0 = by precision (must sit above the
                                           // transform's roundoff floor)
  };

  PropagationEngine(const ModelParams& mp, const Wavefunction& psi0, Options opt = {})
      : mp_(mp), opt_(opt), margin_(2 * kick_band_sites(mp) + 128) {
    if (opt_.grow_occupancy <= 0.0)
      opt_.grow_occupancy = std::is_same_v<Real, float> ? 1e-10 : 1e-20;
    const LatticeWindow w0 = psi0.window();
    if (w0.size == 0) throw std::invalid_argument("PropagationEngine: empty state");
    center_ = w0.n_min + static_cast<std::int64_t>(w0.size) / 2;
    std::int64_t h = opt.initial_halfwidth;
    if (h <= 0) {
      const std::int64_t extent =
          std::max(center_ - w0.n_min, w0.n_max() - center_);
      h = std::max<std::int64_t>(extent + 2 * margin_, 512);
    }
    plan_for(h);
    load(psi0);
    norm_ = norm2_of(fft_->data(), win_.size);
    if (opt_.renormalize) renormalize();
  }

  const ModelParams& params() const { return mp_; }
  const LatticeWindow& window() const { return win_; }
  int time() const { return t_; }
  double norm2() const { return norm_; }

  /// One Floquet period; grows the window first if the margin is occupied.
  StepReport step() {
    if (margin_occupancy() > opt_.grow_occupancy * norm_) grow();
    StepReport rep;
    rep.norm_before = std::sqrt(norm_);
    const auto raw = split_step(*fft_, kick_, free_scaled_);
    rep.norm_after = std::sqrt(raw.norm);
    rep.boundary_leak = raw.norm > 0.0 ? raw.edge_occ / raw.norm : 0.0;
    norm_ = raw.norm;
    if (rep.boundary_leak > opt_.leak_tol)
      throw window_error("propagation: boundary leak above tolerance at t=" + std::to_string(t_ + 1));
    if (opt_.renormalize) renormalize();
    ++t_;
    return rep;
  }

  /// Moments of the current state (renormalized by its stored norm).
  Moments moments(double p0) const {
    const Real* ar = reinterpret_cast<const Real*>(fft_->data());
    double w = 0, wp = 0, wd = 0;
    for (std::size_t j = 0; j < win_.size; ++j) {
      const double prob = static_cast<double>(ar[2 * j]) * ar[2 * j] +
                          static_cast<double>(ar[2 * j + 1]) * ar[2 * j + 1];
      const double pn = mp_.delta * static_cast<double>(win_.n_min + static_cast<std::int64_t>(j));
      w += prob;
      wp += prob * pn;
      wd += prob * (pn - p0) * (pn - p0);
    }
    if (w <= 0.0) throw std::domain_error("moments: zero state");
    return {wp / w, wd / w};
  }

  Wavefunction state() const {
    Wavefunction psi;
    psi.n_min = win_.n_min;
    psi.amps.assign(fft_->data(), fft_->data() + win_.size);
    return psi;
  }

 private:
  void plan_for(std::int64_t halfwidth) {
    if (halfwidth > opt_.max_halfwidth)
      throw window_error("propagation: window exceeds the configured maximum half-width");
    win_ = LatticeWindow{center_ - halfwidth, static_cast<std::size_t>(2 * halfwidth + 1)};
    if (std::max(std::llabs(win_.n_min), std::llabs(win_.n_max())) >= (std::int64_t{1} << 26))
      throw window_error("propagation: |n| too large for exact phase reduction");
    fft_ = std::make_unique<CircleTransform<Real>>(win_.size, opt_.nthreads);
    std::fill(fft_->data(), fft_->data() + win_.size, std::complex<Real>{});
    fill_free_phases(free_scaled_, win_, mp_, 1.0 / static_cast<double>(win_.size));
    fill_kick_field(kick_, win_.size, mp_);
  }

  void load(const Wavefunction& psi) {
    for (std::size_t j = 0; j < psi.amps.size(); ++j) {
      const std::int64_t n = psi.n_min + static_cast<std::int64_t>(j);
      if (!win_.contains(n)) {
        if (std::norm(psi.amps[j]) > 0.0)
          throw window_error("propagation: initial state exceeds the window");
        continue;
      }
      fft_->data()[n - win_.n_min] =
          std::complex<Real>(static_cast<Real>(psi.amps[j].real()),
                             static_cast<Real>(psi.amps[j].imag()));
    }
  }

  double margin_occupancy() const {
    const std::size_t m = std::min<std::size_t>(static_cast<std::size_t>(margin_), win_.size / 4);
    const Real* ar = reinterpret_cast<const Real*>(fft_->data());
    double s = 0.0;
    for (std::size_t j = 0; j < m; ++j)
      s += static_cast<double>(ar[2 * j]) * ar[2 * j] +
           static_cast<double>(ar[2 * j + 1]) * ar[2 * j + 1];
    for (std::size_t j = win_.size - m; j < win_.size; ++j)
      s += static_cast<double>(ar[2 * j]) * ar[2 * j] +
           static_cast<double>(ar[2 * j + 1]) * ar[2 * j + 1];
    return s;
  }

  void grow() {
    const std::int64_t old_half = static_cast<std::int64_t>(win_.size) / 2;
    Wavefunction keep = state();
    plan_for(2 * old_half);
    load(keep);
  }

  void renormalize() {
    if (norm_ <= 0.0) throw std::domain_error("propagation: zero state");
    const Real inv = static_cast<Real>(1.0 / std::sqrt(norm_));
    Real* ar = reinterpret_cast<Real*>(fft_->data());
#pragma omp parallel for schedule(static) if (win_.size >= (std::size_t{1} << 20))
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(2 * win_.size); ++i) ar[i] *= inv;
    norm_ = 1.0;
  }

  ModelParams mp_;
  Options opt_;
  std::int64_t margin_ = 0;
  std::int64_t center_ = 0;
  LatticeWindow win_;
  std::unique_ptr<CircleTransform<Real>> fft_;
  std::vector<std::complex<Real>> free_scaled_;
  std::vector<std::complex<Real>> kick_;
  double norm_ = 1.0;
  int t_ = 0;
};

}  // namespace detail

struct EvolveOptions {
  double p0 = std::numeric_limits<double>::quiet_NaN();  // NaN: use the initial <p>
  double leak_tol = kDefaultTol.leak_tol;
  std::int64_t max_halfwidth = std::int64_t{1} << 25;
  std::vector<int> snapshot_times;  // states copied out at these times (including t=0)
};

struct EvolveResult {
  ObservableSeries series;
  std::vector<std::pair<int, Wavefunction>> snapshots;
};

/// Iterate the Floquet operator t_max times from psi0, recording <p>,
/// <(p-p0)^2>, the pre-renormalization norm and the boundary leak after every
/// step. For lambda > 0 the state is renormalized after each full period.
inline EvolveResult evolve(const Wavefunction& psi0, const ModelParams& mp, int t_max,
                           const EvolveOptions& opt = {}) {
  if (t_max < 0) throw std::invalid_argument("evolve: t_max must be >= 0");
  detail::PropagationEngine<double>::Options eopt;
  eopt.leak_tol = opt.leak_tol;
  eopt.renormalize = mp.lambda > 0.0;
  eopt.max_halfwidth = opt.max_halfwidth;
  detail::PropagationEngine<double> engine(mp, psi0, eopt);

  const double p0 = std::isnan(opt.p0) ? engine.moments(0.0).mean_p : opt.p0;
  const auto snap_wanted = [&](int t) {
    return std::find(opt.snapshot_times.begin(), opt.snapshot_times.end(), t) !=
           opt.snapshot_times.end();
  };

  EvolveResult out;
  auto record = [&](double norm_factor, double leak) {
    const Moments m = engine.moments(p0);
    out.series.times.push_back(engine.time());
    out.series.mean_p.push_back(m.mean_p);
    out.series.var_p.push_back(m.var_p);
    out.series.norm_factor.push_back(norm_factor);
    out.series.boundary_leak.push_back(leak);
  };

  record(std::sqrt(engine.norm2()), 0.0);
  if (snap_wanted(0)) out.snapshots.emplace_back(0, engine.state());
  for (int t = 1; t <= t_max; ++t) {
    const StepReport rep = engine.step();
    record(rep.norm_after, rep.boundary_leak);
    if (snap_wanted(t)) out.snapshots.emplace_back(t, engine.state());
  }
  return out;
}

}  // namespace krotor
