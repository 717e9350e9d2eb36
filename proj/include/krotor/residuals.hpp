#pragma once

#include "krotor/fft.hpp"
#include "krotor/gauss_sum.hpp"
#include "krotor/propagator.hpp"
#include "krotor/wavefunction.hpp"

namespace krotor {

/// || U_f |p,theta>  -  sum_l A_l |p, theta + Delta_l> ||  on the lattice,
/// with U_f applied as the exact phases exp(-i 2 pi (r/s) n^2) and the
/// branch set taken from `spec`. The identity is exact on the infinite
/// lattice, so the residual measures only windowing and rounding -- and
/// blows up to O(1) if the amplitude<->offset assignment is wrong.
inline double free_rotation_residual(double p, double theta, int r, int s, double delta,
                                     const BranchSpec& spec) {
  Wavefunction lhs = coherent_state(p, theta, delta);
  for (std::size_t j = 0; j < lhs.amps.size(); ++j) {
    const std::int64_t n = lhs.n_min + static_cast<std::int64_t>(j);
    const double ang = -detail::resonant_phase_angle(n, r, s);
    lhs.amps[j] *= cplx{std::cos(ang), std::sin(ang)};
  }
  std::vector<cplx> rhs(lhs.amps.size(), cplx{});
  for (const BranchSpecEntry& e : spec.entries) {
    const Wavefunction term = coherent_state(p, theta + e.delta_theta, delta, lhs.window());
    for (std::size_t j = 0; j < rhs.size(); ++j) rhs[j] += e.amplitude * term.amps[j];
  }
  detail::KahanSum acc;
  for (std::size_t j = 0; j < rhs.size(); ++j) acc.add(std::norm(lhs.amps[j] - rhs[j]));
  return std::sqrt(acc.value());
}

namespace detail {

/// Row-major dense complex product C = A * B.
inline void dense_matmul(const std::vector<cplx>& A, const std::vector<cplx>& B,
                         std::vector<cplx>& C, std::size_t n) {
  C.assign(n * n, cplx{});
  const double* a = reinterpret_cast<const double*>(A.data());
  const double* b = reinterpret_cast<const double*>(B.data());
  double* c = reinterpret_cast<double*>(C.data());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      const double ar = a[2 * (i * n + k)], ai = a[2 * (i * n + k) + 1];
      if (ar == 0.0 && ai == 0.0) continue;
      const double* brow = b + 2 * k * n;
      double* crow = c + 2 * i * n;
      for (std::size_t j = 0; j < n; ++j) {
        const double br = brow[2 * j], bi = brow[2 * j + 1];
        crow[2 * j] += ar * br - ai * bi;
        crow[2 * j + 1] += ar * bi + ai * br;
      }
    }
  }
}

/// Kick-factor convolution coefficients K_d for |d| < n, from a uniform
/// theta-grid quadrature padded well beyond the Bessel bandwidth so that
/// aliasing is negligible and the matrix is genuinely banded Toeplitz.
inline std::vector<cplx> kick_toeplitz(const ModelParams& mp, std::size_t n) {
  std::size_t m = 1;
  const double beta = mp.k / (mp.delta * mp.omega);
  const std::size_t need =
      std::max<std::size_t>(8 * n, 4 * static_cast<std::size_t>(kick_band_sites(mp)) + 64);
  while (m < need) m *= 2;
  CircleTransform<double> fft(m);
  std::vector<std::complex<double>> field;
  fill_kick_field(field, m, mp);
  std::copy(field.begin(), field.end(), fft.data());
  fft.from_grid();  // coeff[d] = sum_j f_j exp(+i 2 pi j d / m)
  std::vector<cplx> coeff(2 * n - 1);  // coeff[d + n - 1], d in (-n, n)
  for (std::ptrdiff_t d = -(static_cast<std::ptrdiff_t>(n) - 1);
       d <= static_cast<std::ptrdiff_t>(n) - 1; ++d) {
    const std::size_t idx = d >= 0 ? static_cast<std::size_t>(d) : m - static_cast<std::size_t>(-d);
    coeff[static_cast<std::size_t>(d + static_cast<std::ptrdiff_t>(n) - 1)] =
        fft.data()[idx] / static_cast<double>(m);
  }
  (void)beta;
  return coeff;
}

/// Dense U_delta on the window centered at n = 0 (size n):
/// exp(-i (delta/2) m^2) times the kick convolution.
inline std::vector<cplx> dense_u_delta(const ModelParams& mp, std::size_t n) {
  const std::vector<cplx> coeff = kick_toeplitz(mp, n);
  const std::int64_t n_min = -static_cast<std::int64_t>(n) / 2;
  std::vector<cplx> u(n * n);
  for (std::size_t a = 0; a < n; ++a) {
    const std::int64_t ma = n_min + static_cast<std::int64_t>(a);
    const double ang = -detuned_phase_angle(ma, mp.delta);
    const cplx da{std::cos(ang), std::sin(ang)};
    for (std::size_t b = 0; b < n; ++b) {
      const std::ptrdiff_t d = static_cast<std::ptrdiff_t>(a) - static_cast<std::ptrdiff_t>(b);
      u[a * n + b] = da * coeff[static_cast<std::size_t>(d + static_cast<std::ptrdiff_t>(n) - 1)];
    }
  }
  return u;
}

/// Dense (diagonal) U_f on the same window.
inline std::vector<cplx> dense_u_f(const ModelParams& mp, std::size_t n) {
  const std::int64_t n_min = -static_cast<std::int64_t>(n) / 2;
  std::vector<cplx> u(n * n, cplx{});
  for (std::size_t a = 0; a < n; ++a) {
    const std::int64_t ma = n_min + static_cast<std::int64_t>(a);
    const double ang = -resonant_phase_angle(ma, mp.r, mp.s);
    u[a * n + a] = cplx{std::cos(ang), std::sin(ang)};
  }
  return u;
}

}  // namespace detail

/// Max-magnitude entry of U_f U_delta - U_delta U_f over the interior of an
/// n-site window, excluding a boundary frame where truncation breaks the
/// band structure. With primed = true the split U'_f = U_f exp(i pi r nu),
/// U'_delta = exp(-i pi r nu) U_delta is tested instead (the parity phases
/// are exact +-1 on the integer lattice).
inline double commutator_norm(const ModelParams& mp, std::size_t n, bool primed,
                              std::size_t frame = 0) {
  if (n < 16 || n > 4096) throw std::invalid_argument("commutator_norm: n out of range");
  if (frame == 0) frame = 2 * static_cast<std::size_t>(mp.omega);
  std::vector<cplx> uf = detail::dense_u_f(mp, n);
  std::vector<cplx> ud = detail::dense_u_delta(mp, n);
  if (primed) {
    const std::int64_t n_min = -static_cast<std::int64_t>(n) / 2;
    for (std::size_t a = 0; a < n; ++a) {
      const std::int64_t ma = n_min + static_cast<std::int64_t>(a);
      const double sign = ((mp.r * ma) % 2 != 0) ? -1.0 : 1.0;  // exp(+-i pi r m)
      uf[a * n + a] *= sign;
      for (std::size_t b = 0; b < n; ++b) ud[a * n + b] *= sign;
    }
  }
  std::vector<cplx> ab, ba;
  detail::dense_matmul(uf, ud, ab, n);
  detail::dense_matmul(ud, uf, ba, n);
  double worst = 0.0;
  for (std::size_t a = frame; a + frame < n; ++a)
    for (std::size_t b = frame; b + frame < n; ++b)
      worst = std::max(worst, std::abs(ab[a * n + b] - ba[a * n + b]));
  return worst;
}

/// Max |<m|U_delta|m'>| over pairs with (m - m') not a multiple of omega;
/// the kick couples lattice sites only in steps of omega, so this is a
/// quadrature-quality probe.
inline double selection_rule_violation(const ModelParams& mp, std::size_t n) {
  const std::vector<cplx> ud = detail::dense_u_delta(mp, n);
  double worst = 0.0;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      const std::ptrdiff_t d = static_cast<std::ptrdiff_t>(a) - static_cast<std::ptrdiff_t>(b);
      if (d % mp.omega != 0) worst = std::max(worst, std::abs(ud[a * n + b]));
    }
  return worst;
}

}  // namespace krotor
