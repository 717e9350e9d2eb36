#pragma once

#include "krotor/wavefunction.hpp"

namespace krotor {

/// Phase-space density H(p, theta) = |<p,theta|psi>|^2 sampled on a grid.
/// Rows are momentum nodes, columns angle nodes.
struct HusimiField {
  std::vector<double> p_grid;
  std::vector<double> theta_grid;
  std::vector<double> values;  // row-major [p][theta]

  double at(std::size_t ip, std::size_t it) const { return values[ip * theta_grid.size() + it]; }
};

inline std::vector<double> uniform_grid(double lo, double hi, std::size_t n) {
  if (n < 2 || !(hi > lo)) throw std::invalid_argument("uniform_grid: bad range");
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i)
    g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return g;
}

/// n equally spaced angles covering [0, 2 pi).
inline std::vector<double> circle_grid(std::size_t n) {
  if (n < 2) throw std::invalid_argument("circle_grid: need at least 2 nodes");
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i)
    g[i] = kTwoPi * static_cast<double>(i) / static_cast<double>(n);
  return g;
}

/// Husimi field of psi over the given grids, with the coherent-state width
/// set by delta. Each node evaluates the overlap against the normalized
/// coherent state restricted to its 8-sigma momentum support.
inline HusimiField husimi_field(const Wavefunction& psi, std::vector<double> p_grid,
                                std::vector<double> theta_grid, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("husimi_field: delta must be positive");
  if (p_grid.empty() || theta_grid.empty())
    throw std::invalid_argument("husimi_field: empty grid");
  HusimiField field;
  field.p_grid = std::move(p_grid);
  field.theta_grid = std::move(theta_grid);
  field.values.assign(field.p_grid.size() * field.theta_grid.size(), 0.0);

  const std::int64_t h = coherent_halfwidth(delta);
  const std::size_t nt = field.theta_grid.size();

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ip = 0; ip < static_cast<std::ptrdiff_t>(field.p_grid.size()); ++ip) {
    const double p = field.p_grid[static_cast<std::size_t>(ip)];
    const double center = p / delta;
    const std::int64_t c = std::llround(center);
    // Gaussian normalization over the full coherent support
    double g2 = 0.0;
    for (std::int64_t n = c - h; n <= c + h; ++n) {
      const double g = std::exp(-delta * (static_cast<double>(n) - center) *
                                (static_cast<double>(n) - center));
      g2 += g;
    }
    const std::int64_t lo = std::max(c - h, psi.n_min);
    const std::int64_t hi = std::min(c + h, psi.window().n_max());
    if (lo > hi || g2 <= 0.0) continue;
    std::vector<double> weight(static_cast<std::size_t>(hi - lo + 1));
    for (std::int64_t n = lo; n <= hi; ++n)
      weight[static_cast<std::size_t>(n - lo)] =
          std::exp(-0.5 * delta * (static_cast<double>(n) - center) *
                   (static_cast<double>(n) - center));
    for (std::size_t it = 0; it < nt; ++it) {
      const double theta = field.theta_grid[it];
      // <p,theta|psi> = c sum_n g_n e^{+i n theta} psi_n
      cplx rot{std::cos(theta), std::sin(theta)};
      cplx phase{std::cos(static_cast<double>(lo) * theta),
                 std::sin(static_cast<double>(lo) * theta)};
      cplx acc{0.0, 0.0};
      for (std::int64_t n = lo; n <= hi; ++n) {
        acc += weight[static_cast<std::size_t>(n - lo)] * phase *
               psi.amps[static_cast<std::size_t>(n - psi.n_min)];
        phase *= rot;
      }
      field.values[static_cast<std::size_t>(ip) * nt + it] = std::norm(acc) / g2;
    }
  }
  return field;
}

}  // namespace krotor
