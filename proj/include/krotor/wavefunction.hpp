#pragma once

#include "krotor/common.hpp"
#include "krotor/tolerances.hpp"

namespace krotor {

/// Contiguous window [n_min, n_min + size) of the integer momentum lattice.
struct LatticeWindow {
  std::int64_t n_min = 0;
  std::size_t size = 0;

  std::int64_t n_max() const { return n_min + static_cast<std::int64_t>(size) - 1; }
  bool contains(std::int64_t n) const { return n >= n_min && n <= n_max(); }
};

/// State on a truncated angular-momentum lattice: amps[j] = <n_min + j | psi>.
struct Wavefunction {
  std::int64_t n_min = 0;
  std::vector<cplx> amps;

  LatticeWindow window() const { return {n_min, amps.size()}; }

  double norm2() const {
    detail::KahanSum s;
    for (const cplx& a : amps) s.add(std::norm(a));
    return s.value();
  }

  /// Occupancy of the two outermost lattice sites.
  double boundary_occupancy() const {
    if (amps.empty()) return 0.0;
    return std::norm(amps.front()) + std::norm(amps.back());
  }

  void normalize() {
    const double n2 = norm2();
    if (n2 <= 0.0) throw std::domain_error("normalize: zero state");
    const double inv = 1.0 / std::sqrt(n2);
    for (cplx& a : amps) a *= inv;
  }
};

/// sum_n conj(a_n) b_n over the overlapping part of the two windows.
inline cplx overlap(const Wavefunction& a, const Wavefunction& b) {
  const std::int64_t lo = std::max(a.n_min, b.n_min);
  const std::int64_t hi = std::min(a.window().n_max(), b.window().n_max());
  cplx acc{0.0, 0.0};
  for (std::int64_t n = lo; n <= hi; ++n)
    acc += std::conj(a.amps[static_cast<std::size_t>(n - a.n_min)]) *
           b.amps[static_cast<std::size_t>(n - b.n_min)];
  return acc;
}

/// Lattice std deviation of the coherent-state magnitude profile.
inline double coherent_sigma_n(double delta) { return std::sqrt(1.0 / (2.0 * delta)); }

/// Default half-width of a coherent-state window: 8 sigma, at least 16 sites
/// (the Gaussian tail is below 1e-14 in amplitude at 8 sigma).
inline std::int64_t coherent_halfwidth(double delta) {
  return std::max<std::int64_t>(static_cast<std::int64_t>(std::ceil(8.0 * coherent_sigma_n(delta))), 16);
}

/// Minimum-uncertainty state centered at the phase-space point (p, theta):
///   amps[n] ∝ exp(-(delta/2)(n - p/delta)^2) exp(-i n theta),
/// normalized to unit norm. The Gaussian center p/delta need not be an
/// integer. Throws window_error if the window cannot hold the state.
inline Wavefunction coherent_state(double p, double theta, double delta, LatticeWindow window,
                                   double leak_tol = kDefaultTol.leak_tol) {
  if (!(delta > 0.0)) throw std::invalid_argument("coherent_state: delta must be positive");
  if (window.size < 3) throw window_error("coherent_state: window too small");
  const double center = p / delta;
  Wavefunction psi;
  psi.n_min = window.n_min;
  psi.amps.resize(window.size);
  for (std::size_t j = 0; j < window.size; ++j) {
    const double n = static_cast<double>(window.n_min + static_cast<std::int64_t>(j));
    const double g = std::exp(-0.5 * delta * (n - center) * (n - center));
    const double ang = -n * theta;
    psi.amps[j] = g * cplx{std::cos(ang), std::sin(ang)};
  }
  psi.normalize();
  if (psi.boundary_occupancy() > leak_tol)
    throw window_error("coherent_state: window too small (boundary leak above tolerance)");
  return psi;
}

/// Same, with the default window centered at round(p/delta).
inline Wavefunction coherent_state(double p, double theta, double delta) {
  const std::int64_t c = std::llround(p / delta);
  const std::int64_t h = coherent_halfwidth(delta);
  return coherent_state(p, theta, delta, LatticeWindow{c - h, static_cast<std::size_t>(2 * h + 1)});
}

struct Moments {
  double mean_p = 0.0;
  double var_p = 0.0;  // about the reference momentum passed in
};

/// <p> and <(p - p0)^2> with p_n = delta * n. The state is renormalized
/// internally, so a non-unit norm (e.g. after non-Hermitian steps) is fine.
inline Moments momentum_moments(const Wavefunction& psi, double delta, double p0) {
  detail::KahanSum w, wp, wd2;
  for (std::size_t j = 0; j < psi.amps.size(); ++j) {
    const double prob = std::norm(psi.amps[j]);
    const double pn = delta * static_cast<double>(psi.n_min + static_cast<std::int64_t>(j));
    w.add(prob);
    wp.add(prob * pn);
    wd2.add(prob * (pn - p0) * (pn - p0));
  }
  if (w.value() <= 0.0) throw std::domain_error("momentum_moments: zero state");
  return {wp.value() / w.value(), wd2.value() / w.value()};
}

}  // namespace krotor
