#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "krotor/analysis.hpp"
#include "krotor/husimi.hpp"
#include "krotor/propagator.hpp"
#include "krotor/pseudoclassical.hpp"

using namespace krotor;

TEST_CASE("husimi field of a coherent state peaks at its own center") {
  const double delta = 0.04;
  const Wavefunction psi = coherent_state(0.5, 2.0, delta);
  const HusimiField f =
      husimi_field(psi, uniform_grid(-0.5, 1.5, 101), circle_grid(160), delta);
  double best = -1.0;
  std::size_t bi = 0, bj = 0;
  for (std::size_t i = 0; i < f.p_grid.size(); ++i)
    for (std::size_t j = 0; j < f.theta_grid.size(); ++j)
      if (f.at(i, j) > best) {
        best = f.at(i, j);
        bi = i;
        bj = j;
      }
  CHECK(std::abs(f.p_grid[bi] - 0.5) <= 0.02 + 1e-12);     // within one p node
  CHECK(circle_distance(f.theta_grid[bj], 2.0) <= 0.045);  // within one theta node
  CHECK(best == doctest::Approx(1.0).epsilon(1e-3));       // |<x|x>|^2 = 1 at the center
}

TEST_CASE("equal superposition of two coherent states shows two equal maxima") {
  const double delta = 0.01;
  const Wavefunction a = coherent_state(0.0, 1.0, delta);
  const Wavefunction b = coherent_state(0.0, 1.0 + std::numbers::pi, delta);
  Wavefunction sum;
  sum.n_min = std::min(a.n_min, b.n_min);
  const std::int64_t n_max = std::max(a.window().n_max(), b.window().n_max());
  sum.amps.assign(static_cast<std::size_t>(n_max - sum.n_min + 1), cplx{});
  for (std::size_t j = 0; j < a.amps.size(); ++j)
    sum.amps[static_cast<std::size_t>(a.n_min - sum.n_min) + j] += a.amps[j];
  for (std::size_t j = 0; j < b.amps.size(); ++j)
    sum.amps[static_cast<std::size_t>(b.n_min - sum.n_min) + j] += b.amps[j];
  sum.normalize();

  const HusimiField f =
      husimi_field(sum, uniform_grid(-0.6, 0.6, 121), circle_grid(256), delta);
  const std::vector<GridPeak> peaks = local_maxima(f);
  // the two dominant peaks sit at the two centers with equal height
  std::vector<GridPeak> strong;
  for (const GridPeak& pk : peaks)
    if (pk.value > 0.2) strong.push_back(pk);
  REQUIRE(strong.size() == 2);
  CHECK(strong[0].value == doctest::Approx(strong[1].value).epsilon(1e-2));
  for (const GridPeak& pk : strong) {
    CHECK(std::abs(pk.p) < 0.02);
    const bool near_a = circle_distance(pk.theta, 1.0) < 0.05;
    const bool near_b = circle_distance(pk.theta, 1.0 + std::numbers::pi) < 0.05;
    CHECK((near_a || near_b));
  }
}

TEST_CASE("one kicked period moves the Husimi peaks onto the branch-map points") {
  const ModelParams mp = make_params(1, 4, 1, 0.5, 0.04);
  const BranchSpec spec = branch_spec(1, 4);

  EvolveOptions opt;
  opt.snapshot_times = {1};
  const EvolveResult r = evolve(coherent_state(0.5, 0.5, mp.delta), mp, 1, opt);
  REQUIRE(r.snapshots.size() == 1);

  BranchEnsemble ens;
  ens.branches.push_back({PhasePoint{0.5, 0.5}, cplx{1.0, 0.0}});
  ens = step_ensemble(ens, mp, spec, EvolutionMode::Hermitian);
  REQUIRE(ens.branches.size() == 2);

  const double sigma = std::sqrt(mp.delta / 2.0);
  const HusimiField f = husimi_field(r.snapshots[0].second, uniform_grid(-0.5, 2.0, 176),
                                     circle_grid(300), mp.delta);
  const PeakMatchReport rep = peak_match(f, ens, sigma);
  CHECK(rep.matched_fraction == 1.0);
  for (const double d : rep.branch_distance_sigma) CHECK(d < 1.0);
  CHECK(rep.unmatched_maxima.empty());
}
