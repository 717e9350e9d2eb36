#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "krotor/analysis.hpp"

using namespace krotor;

namespace {

ObservableSeries series_from(std::vector<double> var) {
  ObservableSeries s;
  for (std::size_t i = 0; i < var.size(); ++i) {
    s.times.push_back(static_cast<int>(i));
    s.mean_p.push_back(0.0);
    s.var_p.push_back(var[i]);
  }
  return s;
}

}  // namespace

TEST_CASE("diffusion_time") {
  SUBCASE("identical series never deviate") {
    const ObservableSeries s = series_from({0.0, 1.0, 2.0, 3.0});
    CHECK(diffusion_time(s, s) == kDiffusionNotReached);
  }
  SUBCASE("20% deficit from t = 5 crosses the 15% threshold at t = 5") {
    std::vector<double> pseudo, quantum;
    for (int t = 0; t <= 10; ++t) {
      pseudo.push_back(static_cast<double>(t));
      quantum.push_back(t >= 5 ? 0.8 * t : static_cast<double>(t));
    }
    CHECK(diffusion_time(series_from(quantum), series_from(pseudo)) == 5);
  }
  SUBCASE("mismatched grids are rejected") {
    CHECK_THROWS_AS(diffusion_time(series_from({0, 1}), series_from({0, 1, 2})),
                    std::invalid_argument);
  }
  SUBCASE("monotone in the threshold") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<double> pseudo, quantum;
      double v = 0.0;
      for (int t = 0; t <= 40; ++t) {
        v += unif(rng);
        pseudo.push_back(v);
        quantum.push_back(v * (0.5 + 0.5 * unif(rng)));
      }
      const ObservableSeries qs = series_from(quantum), ps = series_from(pseudo);
      int prev = -2;
      for (const double thr : {0.05, 0.15, 0.3, 0.45}) {
        const int t = diffusion_time(qs, ps, thr);
        if (prev != -2 && prev != kDiffusionNotReached)
          CHECK((t == kDiffusionNotReached || t >= prev));
        if (prev == kDiffusionNotReached) CHECK(t == kDiffusionNotReached);
        prev = t;
      }
    }
  }
}

TEST_CASE("powerlaw_fit recovers exact laws") {
  const std::vector<double> deltas = {1e-2, std::pow(10.0, -2.4), std::pow(10.0, -2.8),
                                      std::pow(10.0, -3.2)};
  SUBCASE("t = delta^-2") {
    std::vector<double> t;
    for (double d : deltas) t.push_back(1.0 / (d * d));
    const PowerlawFit fit = powerlaw_fit(deltas, t);
    CHECK(std::abs(fit.slope + 2.0) < 1e-9);
    CHECK(std::abs(fit.intercept) < 1e-9);
    CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("t = c delta^-1") {
    std::vector<double> t;
    for (double d : deltas) t.push_back(7.5 / d);
    const PowerlawFit fit = powerlaw_fit(deltas, t);
    CHECK(std::abs(fit.slope + 1.0) < 1e-9);
    CHECK(fit.intercept == doctest::Approx(std::log(7.5)).epsilon(1e-9));
  }
  SUBCASE("nonpositive inputs are rejected") {
    CHECK_THROWS_AS(powerlaw_fit(std::vector<double>{1.0, 2.0, -3.0},
                                 std::vector<double>{1.0, 2.0, 3.0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(powerlaw_fit(std::vector<double>{1.0, 2.0, 3.0},
                                 std::vector<double>{1.0, 0.0, 3.0}),
                    std::invalid_argument);
  }
  SUBCASE("fewer than three points are rejected") {
    CHECK_THROWS_AS(powerlaw_fit(std::vector<double>{1.0, 2.0}, std::vector<double>{1.0, 2.0}),
                    std::invalid_argument);
  }
}

TEST_CASE("peak_match on a synthetic two-peak field") {
  // two Gaussian bumps on a grid, one branch on each
  const double sigma = 0.1;
  HusimiField f;
  f.p_grid = uniform_grid(-1.0, 1.0, 121);
  f.theta_grid = circle_grid(240);
  f.values.assign(f.p_grid.size() * f.theta_grid.size(), 0.0);
  const auto bump = [&](double p0, double th0, double h) {
    for (std::size_t i = 0; i < f.p_grid.size(); ++i)
      for (std::size_t j = 0; j < f.theta_grid.size(); ++j) {
        const double dp = f.p_grid[i] - p0;
        const double dt = circle_distance(f.theta_grid[j], th0);
        f.values[i * f.theta_grid.size() + j] +=
            h * std::exp(-(dp * dp + dt * dt) / (2.0 * sigma * sigma));
      }
  };
  bump(0.4, 1.0, 1.0);
  bump(-0.3, 4.0, 0.8);

  BranchEnsemble ens;
  ens.branches.push_back({PhasePoint{0.4, 1.0}, cplx{0.8, 0.0}});
  ens.branches.push_back({PhasePoint{-0.3, 4.0}, cplx{0.6, 0.0}});
  const PeakMatchReport rep = peak_match(f, ens, sigma);
  CHECK(rep.matched_fraction == 1.0);
  CHECK(rep.n_maxima >= 2);
  CHECK(rep.unmatched_maxima.empty());
  for (const double d : rep.branch_distance_sigma) CHECK(d < 0.5);

  SUBCASE("a strong unclaimed maximum is reported") {
    bump(0.8, 5.5, 0.9);
    const PeakMatchReport rep2 = peak_match(f, ens, sigma);
    REQUIRE(rep2.unmatched_maxima.size() == 1);
    CHECK(rep2.unmatched_maxima[0].p == doctest::Approx(0.8).epsilon(0.05));
  }
  SUBCASE("empty ensemble is rejected") {
    CHECK_THROWS_AS(peak_match(f, BranchEnsemble{}, sigma), std::invalid_argument);
  }
}
