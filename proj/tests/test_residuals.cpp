#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "krotor/residuals.hpp"

using namespace krotor;

TEST_CASE("free rotation residual vanishes for s = 1") {
  const double r = free_rotation_residual(0.3, 1.2, 1, 1, 0.04, branch_spec(1, 1));
  CHECK(r < 1e-15);
}

TEST_CASE("free rotation identity holds at machine precision") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (const auto& [r, s] : std::vector<std::pair<int, int>>{{1, 3}, {1, 4}, {1, 5}, {2, 5}, {1, 6}}) {
    const BranchSpec spec = branch_spec(r, s);
    for (int trial = 0; trial < 5; ++trial) {
      const double p = 2.0 * unif(rng) - 1.0;
      const double theta = kTwoPi * unif(rng);
      CHECK(free_rotation_residual(p, theta, r, s, 0.04, spec) < 1e-8);
    }
  }
  CHECK(free_rotation_residual(0.5, 0.5, 1, 3, 0.04, branch_spec(1, 3)) < 1e-8);
}

TEST_CASE("the residual pins the amplitude<->offset assignment for r=1, s=4") {
  const BranchSpec good = branch_spec(1, 4);
  BranchSpec swapped = good;
  std::swap(swapped.entries[0].amplitude, swapped.entries[1].amplitude);
  const double ok = free_rotation_residual(0.5, 0.5, 1, 4, 0.04, good);
  const double bad = free_rotation_residual(0.5, 0.5, 1, 4, 0.04, swapped);
  CHECK(ok < 1e-8);
  CHECK(bad > 0.1);  // exactly one candidate passes
}

TEST_CASE("commutator of the free rotation and the detuned period") {
  SUBCASE("C1: r=1 s=3 omega=3 commutes on the interior") {
    const double norm = commutator_norm(make_params(1, 3, 3, 0.5, 0.04), 256, false);
    CHECK(norm < 1e-10);
  }
  SUBCASE("C2: r=1 s=4 omega=2 commutes after the parity split") {
    const double norm = commutator_norm(make_params(1, 4, 2, 0.5, 0.04), 256, true);
    CHECK(norm < 1e-10);
  }
  SUBCASE("general case: r=1 s=4 omega=1 does not commute") {
    const double norm = commutator_norm(make_params(1, 4, 1, 0.5, 0.04), 256, false);
    CHECK(norm > 0.1);
  }
  // For s = 0 (mod 4) the parity phases are trivial on the omega-coupled
  // sublattice and even the unprimed split commutes; s = 2 (mod 4) needs
  // the parity split.
  SUBCASE("C2 with s=6: the parity split is what makes it commute") {
    const double unprimed = commutator_norm(make_params(1, 6, 3, 0.5, 0.04), 256, false);
    const double primed = commutator_norm(make_params(1, 6, 3, 0.5, 0.04), 256, true);
    CHECK(unprimed > 0.1);
    CHECK(primed < 1e-10);
  }
}

TEST_CASE("kick couples lattice sites only in steps of omega") {
  for (int omega : {2, 3}) {
    const ModelParams mp = make_params(1, 4, omega, 0.5, 0.04);
    CHECK(selection_rule_violation(mp, 128) < 1e-12);
  }
}
