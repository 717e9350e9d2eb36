#pragma once

#include <span>

#include "krotor/husimi.hpp"
#include "krotor/observables.hpp"
#include "krotor/pseudoclassical.hpp"

namespace krotor {

inline constexpr int kDiffusionNotReached = -1;

/// First time at which the quantum variance falls below the pseudoclassical
/// one by more than threshold (one-sided):
///   pseudo.var(t) - quantum.var(t) > threshold * pseudo.var(t).
/// Returns kDiffusionNotReached if that never happens.
inline int diffusion_time(const ObservableSeries& quantum, const ObservableSeries& pseudo,
                          double threshold = kDefaultTol.tdiff_threshold) {
  if (quantum.times != pseudo.times)
    throw std::invalid_argument("diffusion_time: mismatched time grids");
  for (std::size_t i = 0; i < quantum.times.size(); ++i) {
    if (pseudo.var_p[i] - quantum.var_p[i] > threshold * pseudo.var_p[i])
      return quantum.times[i];
  }
  return kDiffusionNotReached;
}

struct PowerlawFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Least-squares line through (log x, log y). Needs at least 3 strictly
/// positive points.
inline PowerlawFit powerlaw_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("powerlaw_fit: size mismatch");
  if (x.size() < 3) throw std::invalid_argument("powerlaw_fit: need at least 3 points");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0))
      throw std::invalid_argument("powerlaw_fit: inputs must be positive");
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double det = n * sxx - sx * sx;
  if (det == 0.0) throw std::invalid_argument("powerlaw_fit: degenerate abscissae");
  PowerlawFit fit;
  fit.slope = (n * sxy - sx * sy) / det;
  fit.intercept = (sy - fit.slope * sx) / n;
  double ss_res = 0, ss_tot = 0;
  const double ybar = sy / n;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double ly = std::log(y[i]);
    const double fit_y = fit.intercept + fit.slope * std::log(x[i]);
    ss_res += (ly - fit_y) * (ly - fit_y);
    ss_tot += (ly - ybar) * (ly - ybar);
  }
  fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : (ss_res < 1e-18 ? 1.0 : 0.0);
  return fit;
}

struct GridPeak {
  double p = 0.0;
  double theta = 0.0;
  double value = 0.0;
};

/// Grid-local maxima of a Husimi field: strictly larger than all 8
/// neighbors, with wrap-around in theta; boundary momentum rows are skipped.
inline std::vector<GridPeak> local_maxima(const HusimiField& f) {
  const std::size_t np = f.p_grid.size(), nt = f.theta_grid.size();
  std::vector<GridPeak> peaks;
  if (np < 3 || nt < 3) return peaks;
  for (std::size_t i = 1; i + 1 < np; ++i) {
    for (std::size_t j = 0; j < nt; ++j) {
      const std::size_t jm = (j + nt - 1) % nt, jp = (j + 1) % nt;
      const double v = f.at(i, j);
      if (v > f.at(i, jm) && v > f.at(i, jp) && v > f.at(i - 1, jm) && v > f.at(i - 1, j) &&
          v > f.at(i - 1, jp) && v > f.at(i + 1, jm) && v > f.at(i + 1, j) && v > f.at(i + 1, jp))
        peaks.push_back({f.p_grid[i], f.theta_grid[j], v});
    }
  }
  return peaks;
}

struct PeakMatchReport {
  std::vector<double> branch_distance_sigma;  // per branch: distance to the nearest maximum, in sigma
  double matched_fraction = 0.0;              // fraction of branches within 3 sigma
  std::vector<GridPeak> unmatched_maxima;     // maxima above 10% of the global max with no branch nearby
  std::size_t n_maxima = 0;
};

/// Match every ensemble branch against the local maxima of the field.
/// Distances are reported in units of sigma (the coherent-state width);
/// strong field maxima not claimed by any branch within 3 sigma are listed.
inline PeakMatchReport peak_match(const HusimiField& field, const BranchEnsemble& ensemble,
                                  double sigma) {
  if (ensemble.branches.empty()) throw std::invalid_argument("peak_match: empty ensemble");
  if (!(sigma > 0.0)) throw std::invalid_argument("peak_match: sigma must be positive");
  const std::vector<GridPeak> peaks = local_maxima(field);
  PeakMatchReport rep;
  rep.n_maxima = peaks.size();
  std::vector<bool> claimed(peaks.size(), false);
  std::size_t matched = 0;
  for (const Branch& b : ensemble.branches) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_i = peaks.size();
    for (std::size_t i = 0; i < peaks.size(); ++i) {
      const double d = std::hypot(peaks[i].p - b.point.p,
                                  circle_distance(peaks[i].theta, b.point.theta));
      if (d < best) {
        best = d;
        best_i = i;
      }
    }
    const double d_sigma = best / sigma;
    rep.branch_distance_sigma.push_back(d_sigma);
    if (d_sigma <= 3.0) {
      ++matched;
      if (best_i < peaks.size()) claimed[best_i] = true;
    }
  }
  rep.matched_fraction =
      static_cast<double>(matched) / static_cast<double>(ensemble.branches.size());
  double global = 0.0;
  for (const GridPeak& pk : peaks) global = std::max(global, pk.value);
  for (std::size_t i = 0; i < peaks.size(); ++i) {
    if (peaks[i].value < 0.1 * global) continue;
    bool near_branch = false;
    for (const Branch& b : ensemble.branches) {
      const double d = std::hypot(peaks[i].p - b.point.p,
                                  circle_distance(peaks[i].theta, b.point.theta));
      if (d <= 3.0 * sigma) {
        near_branch = true;
        break;
      }
    }
    if (!near_branch) rep.unmatched_maxima.push_back(peaks[i]);
  }
  return rep;
}

}  // namespace krotor
