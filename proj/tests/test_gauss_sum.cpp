#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <numeric>

#include "krotor/gauss_sum.hpp"

using namespace krotor;

namespace {
double cabs_diff(cplx a, cplx b) { return std::abs(a - b); }
}  // namespace

TEST_CASE("gauss_sum known values") {
  // s = 1: single-term sum
  CHECK(cabs_diff(gauss_sum(1, 1, 0), cplx{1.0, 0.0}) < 1e-15);

  // s = 2: direct two-term summation gives {0, 1}
  CHECK(std::abs(gauss_sum(1, 2, 0)) < 1e-15);
  CHECK(cabs_diff(gauss_sum(1, 2, 1), cplx{1.0, 0.0}) < 1e-15);

  // s = 3: G_0 = -(sqrt(3)/3) i, G_1 = G_2 = (3 + sqrt(3) i)/6
  const double s3 = std::sqrt(3.0);
  CHECK(cabs_diff(gauss_sum(1, 3, 0), cplx{0.0, -s3 / 3.0}) < 1e-14);
  CHECK(cabs_diff(gauss_sum(1, 3, 1), cplx{0.5, s3 / 6.0}) < 1e-14);
  CHECK(cabs_diff(gauss_sum(1, 3, 2), cplx{0.5, s3 / 6.0}) < 1e-14);

  // s = 4: two vanish, the surviving pair is (1 -+ i)/2
  CHECK(cabs_diff(gauss_sum(1, 4, 0), cplx{0.5, -0.5}) < 1e-14);
  CHECK(std::abs(gauss_sum(1, 4, 1)) < 1e-15);
  CHECK(cabs_diff(gauss_sum(1, 4, 2), cplx{0.5, 0.5}) < 1e-14);
  CHECK(std::abs(gauss_sum(1, 4, 3)) < 1e-15);
}

TEST_CASE("gauss_sum rejects l out of range") {
  CHECK_THROWS_AS(gauss_sum(1, 3, -1), std::invalid_argument);
  CHECK_THROWS_AS(gauss_sum(1, 3, 3), std::invalid_argument);
}

TEST_CASE("gauss_sum magnitudes and zero pattern for all coprime (r, s), s <= 50") {
  for (int s = 1; s <= 50; ++s) {
    for (int r = 1; r <= s; ++r) {
      if (std::gcd(r, s) != 1) continue;
      double weight = 0.0;
      int zeros = 0;
      for (int l = 0; l < s; ++l) {
        const cplx g = gauss_sum(r, s, l);
        weight += std::norm(g);
        const bool is_zero = std::abs(g) <= 1e-10;
        if (is_zero) ++zeros;
        if (s % 2 == 1) {
          CHECK(std::abs(std::abs(g) - 1.0 / std::sqrt(static_cast<double>(s))) < 1e-12);
        } else if (!is_zero) {
          CHECK(std::abs(std::abs(g) - std::sqrt(2.0 / static_cast<double>(s))) < 1e-12);
        }
        if (s % 4 == 0 && l % 2 == 1) CHECK(is_zero);  // zeros at odd l
        if (s % 2 == 0 && s % 4 == 2 && l % 2 == 0) CHECK(is_zero);  // zeros at even l
      }
      CHECK(std::abs(weight - 1.0) < 1e-12);
      CHECK(zeros == (s % 2 == 1 ? 0 : s / 2));
    }
  }
}

TEST_CASE("branch_spec keeps the nonzero sums sorted by offset") {
  SUBCASE("r=1 s=4: two branches at 0 and pi") {
    const BranchSpec spec = branch_spec(1, 4);
    REQUIRE(spec.n_branches() == 2);
    CHECK(spec.entries[0].delta_theta == doctest::Approx(0.0));
    CHECK(spec.entries[1].delta_theta == doctest::Approx(std::numbers::pi).epsilon(1e-15));
    // direct summation pins (1-i)/2 to offset 0 and (1+i)/2 to offset pi;
    // test_residuals confirms this assignment against the exact lattice identity
    CHECK(cabs_diff(spec.entries[0].amplitude, cplx{0.5, -0.5}) < 1e-14);
    CHECK(cabs_diff(spec.entries[1].amplitude, cplx{0.5, 0.5}) < 1e-14);
    CHECK(spec.total_weight() == doctest::Approx(1.0).epsilon(1e-14));
  }
  SUBCASE("r=1 s=3: three equal-weight branches at multiples of 2pi/3") {
    const BranchSpec spec = branch_spec(1, 3);
    REQUIRE(spec.n_branches() == 3);
    for (int j = 0; j < 3; ++j) {
      CHECK(spec.entries[j].delta_theta ==
            doctest::Approx(j * kTwoPi / 3.0).epsilon(1e-15));
      CHECK(std::abs(spec.entries[j].amplitude) ==
            doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-14));
    }
  }
  SUBCASE("r=1 s=6: mod(s,4)=2 kills the even-l sums") {
    const BranchSpec spec = branch_spec(1, 6);
    REQUIRE(spec.n_branches() == 3);
    CHECK(spec.entries[0].delta_theta == doctest::Approx(kTwoPi / 6.0));
    CHECK(spec.entries[1].delta_theta == doctest::Approx(std::numbers::pi));
    CHECK(spec.entries[2].delta_theta == doctest::Approx(5.0 * kTwoPi / 6.0));
  }
  SUBCASE("r=2 s=5: offsets are 2 pi (2 l mod 5) / 5, still sorted") {
    const BranchSpec spec = branch_spec(2, 5);
    REQUIRE(spec.n_branches() == 5);
    for (int j = 1; j < 5; ++j)
      CHECK(spec.entries[j].delta_theta > spec.entries[j - 1].delta_theta);
    CHECK(spec.total_weight() == doctest::Approx(1.0).epsilon(1e-14));
  }
  SUBCASE("non-coprime input rejected") {
    CHECK_THROWS_AS(branch_spec(2, 4), std::invalid_argument);
  }
}
