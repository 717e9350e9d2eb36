#pragma once

#include <cstddef>

namespace krotor {

/// Central numeric defaults. The library, the verification suite and the
/// experiment configs all read from here so they cannot drift apart.
struct Tolerances {
  double eps_zero = 1e-10;        // Gaussian-sum magnitudes below this are exact zeros
  double leak_tol = 1e-12;        // boundary occupancy that aborts a propagation
  double pos_tol = 1e-9;          // phase-space distance below which branches merge
  double amp_tol = 1e-12;         // branches with |amplitude| below this are pruned
  double sel_tol = 1e-9;          // selector tie tolerance on sin(omega*theta)
  double tdiff_threshold = 0.15;  // one-sided deviation defining the diffusion time
  std::size_t branch_cap = std::size_t{1} << 24;  // hard cap on ensemble size
};

inline constexpr Tolerances kDefaultTol{};

}  // namespace krotor
