#pragma once

#include "krotor/analysis.hpp"
#include "krotor/propagator.hpp"
#include "krotor/pseudoclassical.hpp"

namespace krotor {

/// Incoherent pseudoclassical baseline: every initial point is evolved as its
/// own branch ensemble (no cross-point merging) and <(p-p0)^2> is averaged
/// over points. The series is extended lazily, so a sweep that exits early
/// never pays for unused steps. The point set is split into a fixed number of
/// blocks whose partial sums are combined in block order, which keeps the
/// result independent of the thread count.
class ClassicalBaseline {
 public:
  ClassicalBaseline(const ModelParams& mp, const BranchSpec& spec, double p0,
                    const BranchEnsemble& initial_points, StepOptions opt = {})
      : mp_(mp), spec_(spec), p0_(p0), opt_(opt) {
    states_.reserve(initial_points.branches.size());
    for (const Branch& b : initial_points.branches) {
      BranchEnsemble e;
      e.branches.push_back({b.point, cplx{1.0, 0.0}});
      states_.push_back(std::move(e));
    }
    if (states_.empty()) throw std::invalid_argument("ClassicalBaseline: no initial points");
    var_.push_back(average_var());
  }

  /// <(p-p0)^2> at step t, extending the cached series as needed.
  double var_at(int t) {
    extend_to(t);
    return var_[static_cast<std::size_t>(t)];
  }

  void extend_to(int t) {
    while (static_cast<int>(var_.size()) <= t) {
#pragma omp parallel
      {
        std::vector<Branch> scratch;  // per-thread, reused across points
        BranchEnsemble next;
#pragma omp for schedule(dynamic, 64)
        for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(states_.size()); ++i) {
          BranchEnsemble& state = states_[static_cast<std::size_t>(i)];
          step_ensemble_into(state, mp_, spec_, EvolutionMode::Hermitian, opt_, next, scratch);
          std::swap(state.branches, next.branches);
          state.generation = next.generation;
        }
      }
      var_.push_back(average_var());
    }
  }

  const std::vector<double>& var_series() const { return var_; }

  /// The series up to t_max as an ObservableSeries (mean is not tracked).
  ObservableSeries series(int t_max) {
    extend_to(t_max);
    ObservableSeries s;
    for (int t = 0; t <= t_max; ++t) {
      s.times.push_back(t);
      s.mean_p.push_back(0.0);
      s.var_p.push_back(var_[static_cast<std::size_t>(t)]);
    }
    return s;
  }

 private:
  double average_var() const {
    constexpr std::size_t kBlocks = 64;
    const std::size_t n = states_.size();
    double partial[kBlocks] = {};
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(kBlocks); ++b) {
      const std::size_t lo = n * static_cast<std::size_t>(b) / kBlocks;
      const std::size_t hi = n * (static_cast<std::size_t>(b) + 1) / kBlocks;
      detail::KahanSum acc;
      for (std::size_t i = lo; i < hi; ++i)
        acc.add(ensemble_moments(states_[i], p0_).var_p);
      partial[b] = acc.value();
    }
    detail::KahanSum total;
    for (std::size_t b = 0; b < kBlocks; ++b) total.add(partial[b]);
    return total.value() / static_cast<double>(n);
  }

  ModelParams mp_;
  BranchSpec spec_;
  double p0_;
  StepOptions opt_;
  std::vector<BranchEnsemble> states_;
  std::vector<double> var_;
};

struct TdiffResult {
  int t_diff = kDiffusionNotReached;
  int t_reached = 0;               // last step actually propagated
  std::vector<double> quantum_var; // var series up to t_reached
  double seconds = 0.0;
};

/// Quantum side of a diffusion-time measurement: propagate psi0 under the
/// detuned Floquet operator, comparing <(p-p0)^2> against the lazily
/// extended baseline after every step, and stop at the first one-sided
/// deviation beyond `threshold` (or at t_max).
template <class Real>
TdiffResult quantum_tdiff(const ModelParams& mp, const Wavefunction& psi0, double p0,
                          ClassicalBaseline& baseline, int t_max, double threshold,
                          double leak_tol = kDefaultTol.leak_tol) {
  typename detail::PropagationEngine<Real>::Options opt;
  opt.renormalize = true;  // keeps long float runs well-scaled; Hermitian physics unchanged
  opt.leak_tol = leak_tol;
  detail::PropagationEngine<Real> engine(mp, psi0, opt);
  TdiffResult res;
  const auto t0 = std::chrono::steady_clock::now();
  res.quantum_var.push_back(engine.moments(p0).var_p);
  for (int t = 1; t <= t_max; ++t) {
    engine.step();
    const double vq = engine.moments(p0).var_p;
    res.quantum_var.push_back(vq);
    res.t_reached = t;
    const double vp = baseline.var_at(t);
    if (vp - vq > threshold * vp) {
      res.t_diff = t;
      break;
    }
  }
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

}  // namespace krotor
