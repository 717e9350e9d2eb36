#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "krotor/wavefunction.hpp"

using namespace krotor;

TEST_CASE("coherent state at the origin: real, positive, symmetric, unit norm") {
  const Wavefunction psi = coherent_state(0.0, 0.0, 0.04);
  CHECK(psi.norm2() == doctest::Approx(1.0).epsilon(1e-12));
  const std::size_t c = static_cast<std::size_t>(-psi.n_min);  // index of n = 0
  for (std::size_t j = 0; j < psi.amps.size(); ++j) {
    CHECK(psi.amps[j].imag() == 0.0);
    CHECK(psi.amps[j].real() >= 0.0);
  }
  for (std::size_t d = 1; d <= 8; ++d)
    CHECK(psi.amps[c - d].real() == doctest::Approx(psi.amps[c + d].real()).epsilon(1e-13));
  // width of the magnitude-squared profile: sigma_n^2 = 1/(2 delta)
  double var_n = 0.0;
  for (std::size_t j = 0; j < psi.amps.size(); ++j) {
    const double n = static_cast<double>(psi.n_min + static_cast<std::int64_t>(j));
    var_n += std::norm(psi.amps[j]) * n * n;
  }
  CHECK(var_n == doctest::Approx(1.0 / (2.0 * 0.04)).epsilon(1e-6));
}

TEST_CASE("coherent state with non-integer center p/delta = 12.5") {
  const Wavefunction psi = coherent_state(0.5, 0.5, 0.04);
  CHECK(psi.norm2() == doctest::Approx(1.0).epsilon(1e-12));
  // the magnitude peak straddles n = 12 and n = 13 with equal weight
  const std::size_t i12 = static_cast<std::size_t>(12 - psi.n_min);
  const std::size_t i13 = static_cast<std::size_t>(13 - psi.n_min);
  CHECK(std::abs(psi.amps[i12]) == doctest::Approx(std::abs(psi.amps[i13])).epsilon(1e-12));
  for (std::size_t j = 0; j < psi.amps.size(); ++j)
    CHECK(std::abs(psi.amps[j]) <= std::abs(psi.amps[i12]) * (1.0 + 1e-12));
}

TEST_CASE("coherent overlap decays as the Gaussian of the angle separation") {
  // brute-force overlap against exp(-Delta^2/(4 delta))
  const double delta = 0.04;
  for (double sep : {0.1, 0.3, 0.7}) {
    const Wavefunction a = coherent_state(0.5, 0.5, delta);
    const Wavefunction b = coherent_state(0.5, 0.5 + sep, delta);
    const double got = std::abs(overlap(a, b));
    const double expected = std::exp(-sep * sep / (4.0 * delta));
    CHECK(got == doctest::Approx(expected).epsilon(1e-10));
  }
}

TEST_CASE("coherent state rejects a window that cannot hold it") {
  CHECK_THROWS_AS(coherent_state(0.0, 0.0, 0.04, LatticeWindow{-3, 7}), window_error);
}

TEST_CASE("momentum moments of an eigenstate") {
  Wavefunction psi;
  psi.n_min = 3;
  psi.amps = {cplx{1.0, 0.0}};
  const Moments m = momentum_moments(psi, 0.1, 0.0);
  CHECK(m.mean_p == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(m.var_p == doctest::Approx(0.09).epsilon(1e-15));
}

TEST_CASE("momentum moments of a coherent state: var about the center is delta/2") {
  const double delta = 0.04;
  const Moments m = momentum_moments(coherent_state(0.5, 1.3, delta), delta, 0.5);
  CHECK(m.mean_p == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(m.var_p == doctest::Approx(delta / 2.0).epsilon(0.02));  // within 2%
}

TEST_CASE("momentum moments of a parity-symmetric superposition") {
  Wavefunction psi;
  psi.n_min = -5;
  psi.amps.assign(11, cplx{});
  psi.amps[0] = cplx{1.0 / std::sqrt(2.0), 0.0};   // n = -5
  psi.amps[10] = cplx{1.0 / std::sqrt(2.0), 0.0};  // n = +5
  const Moments m = momentum_moments(psi, 0.1, 0.0);
  CHECK(m.mean_p == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(m.var_p == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("momentum moments renormalize a non-unit state") {
  Wavefunction psi;
  psi.n_min = 2;
  psi.amps = {cplx{2.0, 0.0}};
  const Moments m = momentum_moments(psi, 0.1, 0.0);
  CHECK(m.mean_p == doctest::Approx(0.2).epsilon(1e-15));
}
