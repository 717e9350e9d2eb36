#pragma once

#include <random>

#include "krotor/analysis.hpp"
#include "krotor/propagator.hpp"
#include "krotor/pseudoclassical.hpp"
#include "krotor/residuals.hpp"

namespace krotor {

/// One row of the verification table.
struct CheckResult {
  std::string name;
  double measured = 0.0;
  double bound = 0.0;
  bool larger_is_better = false;  // negative controls expect measured > bound
  bool pass = false;
};

inline CheckResult check_below(std::string name, double measured, double bound) {
  return {std::move(name), measured, bound, false, measured < bound};
}

inline CheckResult check_above(std::string name, double measured, double bound) {
  return {std::move(name), measured, bound, true, measured > bound};
}

/// Invariant suite aggregating the structural identities of the model:
/// Gaussian-sum algebra, the free-rotation branching identity, the
/// commutation relations behind the bounded cases, unitarity, and weight
/// conservation of the branch dynamics.
inline std::vector<CheckResult> run_verification(unsigned seed = 20240901) {
  std::vector<CheckResult> table;

  {  // Gaussian sums: weights, magnitudes, zero pattern for all coprime s <= 50
    double worst_weight = 0.0, worst_mag = 0.0;
    int pattern_violations = 0;
    for (int s = 1; s <= 50; ++s) {
      for (int r = 1; r <= s; ++r) {
        if (std::gcd(r, s) != 1) continue;
        double weight = 0.0;
        for (int l = 0; l < s; ++l) {
          const cplx g = gauss_sum(r, s, l);
          weight += std::norm(g);
          const bool is_zero = std::abs(g) <= kDefaultTol.eps_zero;
          if (s % 2 == 1) {
            worst_mag = std::max(worst_mag,
                                 std::abs(std::abs(g) - 1.0 / std::sqrt(double(s))));
            if (is_zero) ++pattern_violations;
          } else {
            const bool zero_expected = (s % 4 == 0) ? (l % 2 == 1) : (l % 2 == 0);
            if (zero_expected != is_zero) ++pattern_violations;
            if (!is_zero)
              worst_mag = std::max(worst_mag,
                                   std::abs(std::abs(g) - std::sqrt(2.0 / double(s))));
          }
        }
        worst_weight = std::max(worst_weight, std::abs(weight - 1.0));
      }
    }
    table.push_back(check_below("gauss-sum weight sum", worst_weight, 1e-12));
    table.push_back(check_below("gauss-sum magnitudes", worst_mag, 1e-12));
    table.push_back(check_below("gauss-sum zero pattern violations",
                                static_cast<double>(pattern_violations), 0.5));
  }

  {  // free-rotation branching identity on random coherent states
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double worst = 0.0;
    for (const auto& [r, s] :
         std::vector<std::pair<int, int>>{{1, 3}, {1, 4}, {1, 5}, {2, 5}, {1, 6}}) {
      const BranchSpec spec = branch_spec(r, s);
      for (const double delta : {0.04, 0.01}) {
        for (int trial = 0; trial < 20; ++trial) {
          const double p = 2.0 * unif(rng) - 1.0;
          const double theta = kTwoPi * unif(rng);
          worst = std::max(worst, free_rotation_residual(p, theta, r, s, delta, spec));
        }
      }
    }
    table.push_back(check_below("free-rotation branching residual", worst, 1e-8));
  }

  {  // commutation relations on a 512-site window
    table.push_back(check_below(
        "commutator C1 (r=1 s=3 w=3)",
        commutator_norm(make_params(1, 3, 3, 0.5, 0.04), 512, false), 1e-10));
    table.push_back(check_below(
        "commutator C2 primed (r=1 s=4 w=2)",
        commutator_norm(make_params(1, 4, 2, 0.5, 0.04), 512, true), 1e-10));
    table.push_back(check_above(
        "commutator general control (r=1 s=4 w=1)",
        commutator_norm(make_params(1, 4, 1, 0.5, 0.04), 512, false), 0.1));
    table.push_back(check_below("kick selection rule (w=2)",
                                selection_rule_violation(make_params(1, 4, 2, 0.5, 0.04), 128),
                                1e-12));
    table.push_back(check_below("kick selection rule (w=3)",
                                selection_rule_violation(make_params(1, 3, 3, 0.5, 0.04), 128),
                                1e-12));
  }

  {  // unitarity drift over 1000 Hermitian periods
    const ModelParams mp = make_params(1, 4, 1, 0.5, 0.04);
    const EvolveResult r = evolve(coherent_state(0.5, 0.5, mp.delta), mp, 1000);
    double drift = 0.0;
    for (const double nf : r.series.norm_factor) drift = std::max(drift, std::abs(nf - 1.0));
    table.push_back(check_below("unitarity drift over 1000 steps", drift, 1e-9));
  }

  {  // weight conservation of the branch dynamics
    double worst = 0.0;
    const auto run = [&worst](const ModelParams& mp, int t_max) {
      const BranchSpec spec = branch_spec(mp.r, mp.s);
      BranchEnsemble e;
      e.branches.push_back({PhasePoint{0.5, 0.5}, cplx{1.0, 0.0}});
      for (int t = 0; t < t_max; ++t) {
        e = step_ensemble(e, mp, spec, EvolutionMode::Hermitian);
        worst = std::max(worst, std::abs(e.total_weight() - 1.0));
      }
    };
    run(make_params(1, 4, 1, 0.5, 0.04), 10);  // general, 2^10 branches
    run(make_params(1, 3, 3, 2.0, 0.01), 50);  // C1
    run(make_params(1, 4, 2, 2.0, 0.01), 50);  // C2
    run(make_params(1, 6, 3, 0.7, 0.02), 40);  // C2 with s = 2 (mod 4)
    table.push_back(check_below("ensemble weight conservation", worst, 1e-9));
  }

  return table;
}

}  // namespace krotor
