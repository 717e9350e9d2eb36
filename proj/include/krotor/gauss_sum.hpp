#pragma once

#include <numeric>

#include "krotor/common.hpp"
#include "krotor/tolerances.hpp"

namespace krotor {

/// Quadratic Gaussian sum
///   G_l = (1/s) * sum_{m=0}^{s-1} exp(-i 2 pi (r/s) m (m-l)),
/// evaluated by direct summation. The phase is reduced with exact integer
/// arithmetic, so sums that vanish do so to machine precision.
inline cplx gauss_sum(int r, int s, int l) {
  if (s <= 0 || r <= 0) throw std::invalid_argument("gauss_sum: r, s must be positive");
  if (l < 0 || l >= s) throw std::invalid_argument("gauss_sum: l out of range [0, s)");
  cplx acc{0.0, 0.0};
  for (int m = 0; m < s; ++m) {
    std::int64_t q = (static_cast<std::int64_t>(r) * m * (m - l)) % s;
    if (q < 0) q += s;
    const double ang = -kTwoPi * static_cast<double>(q) / static_cast<double>(s);
    acc += cplx{std::cos(ang), std::sin(ang)};
  }
  return acc / static_cast<double>(s);
}

/// One output branch of the resonant free rotation: the angular offset it
/// applies and the complex amplitude it carries.
struct BranchSpecEntry {
  double delta_theta = 0.0;  // in [0, 2*pi)
  cplx amplitude{0.0, 0.0};
};

/// The set of nonzero-amplitude branches produced by one resonant free
/// rotation, sorted by angular offset.
struct BranchSpec {
  int r = 1;
  int s = 1;
  std::vector<BranchSpecEntry> entries;

  int n_branches() const { return static_cast<int>(entries.size()); }

  double total_weight() const {
    double w = 0.0;
    for (const auto& e : entries) w += std::norm(e.amplitude);
    return w;
  }
};

/// Branch set of the resonant free rotation: offsets 2*pi*l*r/s (mod 2*pi)
/// paired with the Gaussian sums G_l, keeping only |G_l| > eps_zero.
///
/// The count is s for odd s and s/2 for even s; for even s the zeros sit at
/// odd l when s = 0 (mod 4) and at even l when s = 2 (mod 4).
inline BranchSpec branch_spec(int r, int s, double eps_zero = kDefaultTol.eps_zero) {
  if (r <= 0 || s <= 0) throw std::invalid_argument("branch_spec: r, s must be positive");
  if (std::gcd(r, s) != 1) throw std::invalid_argument("branch_spec: r, s must be coprime");
  BranchSpec spec;
  spec.r = r;
  spec.s = s;
  for (int l = 0; l < s; ++l) {
    const cplx g = gauss_sum(r, s, l);
    if (std::abs(g) <= eps_zero) continue;
    const std::int64_t q = (static_cast<std::int64_t>(l) * r) % s;  // offset residue, exact
    spec.entries.push_back({kTwoPi * static_cast<double>(q) / static_cast<double>(s), g});
  }
  std::sort(spec.entries.begin(), spec.entries.end(),
            [](const BranchSpecEntry& a, const BranchSpecEntry& b) {
              return a.delta_theta < b.delta_theta;
            });
  return spec;
}

}  // namespace krotor
