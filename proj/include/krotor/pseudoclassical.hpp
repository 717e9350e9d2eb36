#pragma once

#include "krotor/gauss_sum.hpp"
#include "krotor/observables.hpp"
#include "krotor/params.hpp"
#include "krotor/tolerances.hpp"
#include "krotor/wavefunction.hpp"

namespace krotor {

/// One amplitude-carrying phase-space point.
struct Branch {
  PhasePoint point;
  cplx amp{0.0, 0.0};
};

/// A finite set of amplitude-carrying phase-space points; the
/// pseudoclassical state at generation (time step) t.
struct BranchEnsemble {
  std::vector<Branch> branches;
  int generation = 0;

  double total_weight() const {
    double w = 0.0;
    for (const Branch& b : branches) w += std::norm(b.amp);
    return w;
  }
};

/// Kick map: p' = p + k sin(omega theta), theta' = theta + p' (mod 2 pi).
inline PhasePoint map_delta(const PhasePoint& x, double k, int omega) {
  const double p = x.p + k * std::sin(omega * x.theta);
  return PhasePoint{p, x.theta + p};
}

/// Non-Hermitian kick map: both delta-function jumps are evaluated at the
/// pre-kick angle, then the free drift is applied;
///   p'      = p + k sin(omega theta)
///   theta+  = theta + k lambda cos(omega theta)
///   theta'  = theta+ + p'   (mod 2 pi).
/// Reduces exactly to map_delta at lambda = 0.
inline PhasePoint map_delta_nh(const PhasePoint& x, double k, int omega, double lambda) {
  if (lambda < 0.0) throw std::invalid_argument("map_delta_nh: lambda must be >= 0");
  const double p = x.p + k * std::sin(omega * x.theta);
  const double theta_plus = x.theta + k * lambda * std::cos(omega * x.theta);
  return PhasePoint{p, theta_plus + p};
}

/// Branching map of the resonant free rotation: one output branch per spec
/// entry, at (p, theta + Delta_j) with amplitude amp * A_j. Appends to out.
inline void map_f(const Branch& b, const BranchSpec& spec, std::vector<Branch>& out) {
  for (const BranchSpecEntry& e : spec.entries)
    out.push_back({PhasePoint{b.point.p, b.point.theta + e.delta_theta}, b.amp * e.amplitude});
}

inline std::vector<Branch> map_f(const Branch& b, const BranchSpec& spec) {
  std::vector<Branch> out;
  out.reserve(spec.entries.size());
  map_f(b, spec, out);
  return out;
}

namespace detail {

/// Clusters of indices whose sorted keys have no gap larger than tol.
inline std::vector<std::pair<std::size_t, std::size_t>> gap_clusters(
    const std::vector<double>& sorted_keys, double tol) {
  std::vector<std::pair<std::size_t, std::size_t>> spans;
  std::size_t begin = 0;
  for (std::size_t i = 1; i <= sorted_keys.size(); ++i) {
    if (i == sorted_keys.size() || sorted_keys[i] - sorted_keys[i - 1] > tol) {
      spans.emplace_back(begin, i);
      begin = i;
    }
  }
  return spans;
}

}  // namespace detail

namespace detail {

/// Accumulator for one cluster of coincident branches. The first member's
/// point anchors the coincidence test; the emitted point is the
/// weight-averaged one (theta unwrapped around the anchor).
struct MergeCluster {
  PhasePoint anchor;
  cplx amp{0.0, 0.0};
  double wsum = 0.0, pavg = 0.0, tavg = 0.0;

  void add(const Branch& b) {
    amp += b.amp;
    const double w = std::norm(b.amp);
    wsum += w;
    pavg += w * b.point.p;
    double dt = b.point.theta - anchor.theta;
    if (dt > std::numbers::pi) dt -= kTwoPi;
    if (dt < -std::numbers::pi) dt += kTwoPi;
    tavg += w * dt;
  }

  Branch finalize() const {
    Branch merged;
    merged.point = wsum > 0.0 ? PhasePoint{pavg / wsum, anchor.theta + tavg / wsum} : anchor;
    merged.amp = amp;
    return merged;
  }
};

/// Merge `raw` into `out` (clusters within pos_tol summed coherently,
/// |amplitude| < amp_tol dropped, result sorted by (p, theta)).
/// Small inputs use direct pairwise clustering without heap traffic; the
/// physics guarantees clusters are either coincident to rounding or far
/// apart, so pairwise and gap clustering agree.
inline void merge_and_prune_into(const std::vector<Branch>& raw, double pos_tol, double amp_tol,
                                 std::vector<Branch>& out) {
  out.clear();
  if (raw.empty()) return;

  if (raw.size() <= 32) {
    MergeCluster clusters[32];
    std::size_t n_clusters = 0;
    for (const Branch& b : raw) {
      MergeCluster* home = nullptr;
      for (std::size_t c = 0; c < n_clusters; ++c) {
        if (std::fabs(clusters[c].anchor.p - b.point.p) <= pos_tol &&
            circle_distance(clusters[c].anchor.theta, b.point.theta) <= pos_tol) {
          home = &clusters[c];
          break;
        }
      }
      if (!home) {
        home = &clusters[n_clusters++];
        *home = MergeCluster{};
        home->anchor = b.point;
      }
      home->add(b);
    }
    for (std::size_t c = 0; c < n_clusters; ++c) {
      if (std::abs(clusters[c].amp) < amp_tol) continue;
      out.push_back(clusters[c].finalize());
    }
  } else {
    std::vector<std::size_t> order(raw.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return raw[a].point.p < raw[b].point.p;
    });
    std::vector<double> ps(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) ps[i] = raw[order[i]].point.p;

    auto emit = [&](const std::vector<std::size_t>& cluster) {
      MergeCluster acc;
      acc.anchor = raw[cluster.front()].point;
      for (std::size_t idx : cluster) acc.add(raw[idx]);
      if (std::abs(acc.amp) < amp_tol) return;
      out.push_back(acc.finalize());
    };

    for (const auto& [pb, pe] : gap_clusters(ps, pos_tol)) {
      // sort the p-cluster by theta and split at circular gaps
      std::vector<std::size_t> grp(order.begin() + pb, order.begin() + pe);
      std::sort(grp.begin(), grp.end(), [&](std::size_t a, std::size_t b) {
        return raw[a].point.theta < raw[b].point.theta;
      });
      std::vector<double> ts(grp.size());
      for (std::size_t i = 0; i < grp.size(); ++i) ts[i] = raw[grp[i]].point.theta;
      auto spans = gap_clusters(ts, pos_tol);
      // the first and last theta clusters may touch across the 0/2pi seam
      const bool wrap = spans.size() > 1 && (ts.front() + kTwoPi - ts.back()) <= pos_tol;
      std::vector<std::vector<std::size_t>> clusters;
      for (const auto& [b, e] : spans) clusters.emplace_back(grp.begin() + b, grp.begin() + e);
      if (wrap) {
        for (std::size_t idx : clusters.back()) clusters.front().push_back(idx);
        clusters.pop_back();
      }
      for (const auto& c : clusters) emit(c);
    }
  }

  std::sort(out.begin(), out.end(), [](const Branch& a, const Branch& b) {
    return a.point.p != b.point.p ? a.point.p < b.point.p : a.point.theta < b.point.theta;
  });
}

}  // namespace detail

/// Coherent merge of coincident branches and removal of cancelled ones.
/// Points coincide when both |p1 - p2| and the circular theta distance are
/// within pos_tol; coincident branches are replaced by one branch at the
/// weight-averaged point carrying the complex sum of the amplitudes.
/// Branches with |amplitude| < amp_tol are removed.
inline BranchEnsemble merge_and_prune(const BranchEnsemble& in,
                                      double pos_tol = kDefaultTol.pos_tol,
                                      double amp_tol = kDefaultTol.amp_tol) {
  BranchEnsemble out;
  out.generation = in.generation;
  detail::merge_and_prune_into(in.branches, pos_tol, amp_tol, out.branches);
  return out;
}

/// Gain selector of the non-Hermitian map: keeps the branch(es) maximizing
/// sin(omega theta); branches within sel_tol of the maximum are all kept.
/// The surviving amplitudes are rescaled by a common positive factor so the
/// total weight returns to 1; phases are preserved.
inline BranchEnsemble select(const BranchEnsemble& in, int omega,
                             double sel_tol = kDefaultTol.sel_tol) {
  if (in.branches.empty()) throw std::invalid_argument("select: empty ensemble");
  double best = -2.0;
  for (const Branch& b : in.branches) best = std::max(best, std::sin(omega * b.point.theta));
  BranchEnsemble out;
  out.generation = in.generation;
  double w = 0.0;
  for (const Branch& b : in.branches) {
    if (std::sin(omega * b.point.theta) >= best - sel_tol) {
      out.branches.push_back(b);
      w += std::norm(b.amp);
    }
  }
  if (w <= 0.0) throw std::domain_error("select: surviving weight is zero");
  const double scale = 1.0 / std::sqrt(w);
  for (Branch& b : out.branches) b.amp *= scale;
  return out;
}

struct StepOptions {
  double pos_tol = kDefaultTol.pos_tol;
  double amp_tol = kDefaultTol.amp_tol;
  double sel_tol = kDefaultTol.sel_tol;
  std::size_t branch_cap = kDefaultTol.branch_cap;
};

/// One period of the pseudoclassical map, writing into `out` and reusing
/// `scratch` for the pre-merge children (hot path for large ensembles of
/// initial conditions).
/// Hermitian: kick map, branching map, coherent merge.
/// PT: selector, non-Hermitian kick map, branching map, coherent merge.
inline void step_ensemble_into(const BranchEnsemble& in, const ModelParams& mp,
                               const BranchSpec& spec, EvolutionMode mode,
                               const StepOptions& opt, BranchEnsemble& out,
                               std::vector<Branch>& scratch) {
  if ((mode == EvolutionMode::PT) != (mp.lambda > 0.0))
    throw std::invalid_argument("step_ensemble: mode inconsistent with params.lambda");
  const BranchEnsemble* src = &in;
  BranchEnsemble selected;
  if (mode == EvolutionMode::PT) {
    selected = select(in, mp.omega, opt.sel_tol);
    src = &selected;
  }
  if (src->branches.size() * spec.entries.size() > opt.branch_cap)
    throw branch_cap_error("step_ensemble: branch count would exceed the hard cap");
  scratch.clear();
  scratch.reserve(src->branches.size() * spec.entries.size());
  for (const Branch& b : src->branches) {
    const PhasePoint moved = (mode == EvolutionMode::PT)
                                 ? map_delta_nh(b.point, mp.k, mp.omega, mp.lambda)
                                 : map_delta(b.point, mp.k, mp.omega);
    map_f(Branch{moved, b.amp}, spec, scratch);
  }
  detail::merge_and_prune_into(scratch, opt.pos_tol, opt.amp_tol, out.branches);
  out.generation = in.generation + 1;
}

inline BranchEnsemble step_ensemble(const BranchEnsemble& in, const ModelParams& mp,
                                    const BranchSpec& spec, EvolutionMode mode,
                                    const StepOptions& opt = {}) {
  BranchEnsemble out;
  std::vector<Branch> scratch;
  step_ensemble_into(in, mp, spec, mode, opt, out, scratch);
  return out;
}

/// Amplitude-weighted momentum moments: weights |amp|^2 / total_weight.
inline Moments ensemble_moments(const BranchEnsemble& ens, double p0) {
  double w = 0.0, wp = 0.0, wd = 0.0;
  for (const Branch& b : ens.branches) {
    const double wi = std::norm(b.amp);
    w += wi;
    wp += wi * b.point.p;
    wd += wi * (b.point.p - p0) * (b.point.p - p0);
  }
  if (w <= 0.0) throw std::domain_error("ensemble_moments: zero total weight");
  return {wp / w, wd / w};
}

/// n_points branches on the line p = p0 at theta_i = 2 pi i / n_points, each
/// with amplitude sqrt(1/n_points). Intended as an incoherent classical
/// ensemble: evolve each point separately and average the moments; do not
/// feed the whole line through step_ensemble, which would merge across
/// points.
inline BranchEnsemble uniform_line_ensemble(double p0, std::size_t n_points) {
  if (n_points < 1) throw std::invalid_argument("uniform_line_ensemble: n_points must be >= 1");
  BranchEnsemble ens;
  ens.branches.reserve(n_points);
  const double amp = std::sqrt(1.0 / static_cast<double>(n_points));
  for (std::size_t i = 0; i < n_points; ++i)
    ens.branches.push_back(
        {PhasePoint{p0, kTwoPi * static_cast<double>(i) / static_cast<double>(n_points)},
         cplx{amp, 0.0}});
  return ens;
}

}  // namespace krotor
