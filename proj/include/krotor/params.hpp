#pragma once

#include <numeric>

#include "krotor/common.hpp"

namespace krotor {

/// Whether the kick argument is the bare strength K of the lab Hamiltonian
/// or the effective strength k = K*delta/alpha of the detuned map.
enum class KickMode { Bare, Effective };

enum class SymmetryCase { General, C1, C2 };

enum class EvolutionMode { Hermitian, PT };

/// Validated parameters of the kicked rotor near the resonance
/// alpha = 4*pi*r/s, detuned by delta.
struct ModelParams {
  int r = 1;
  int s = 1;
  int omega = 1;       // harmonic of the kick potential
  double delta = 0.0;  // detuning; the effective Planck constant of the detuned map
  double k = 0.0;      // effective kick strength
  double lambda = 0.0; // non-Hermiticity of the kick potential (0 = Hermitian)
  double alpha = 0.0;  // 4*pi*r/s + delta

  bool hermitian() const { return lambda == 0.0; }
};

inline SymmetryCase classify_case(int s, int omega) {
  if (s % 2 == 1 && omega == s) return SymmetryCase::C1;
  if (s % 2 == 0 && omega == s / 2) return SymmetryCase::C2;
  return SymmetryCase::General;
}

inline const char* to_string(SymmetryCase c) {
  switch (c) {
    case SymmetryCase::C1: return "C1";
    case SymmetryCase::C2: return "C2";
    default: return "GENERAL";
  }
}

/// Validate and derive the full parameter set.
///
/// kick is interpreted per `mode`; delta must be positive and must not be an
/// integer multiple of pi.
inline ModelParams make_params(int r, int s, int omega, double kick, double delta,
                               double lambda = 0.0, KickMode mode = KickMode::Effective) {
  if (r <= 0 || s <= 0) throw config_error("r and s must be positive integers");
  if (std::gcd(r, s) != 1) throw config_error("r and s must be coprime");
  if (omega <= 0) throw config_error("omega must be a positive integer");
  if (!(delta > 0.0)) throw config_error("delta must be positive");
  const double m = std::round(delta / std::numbers::pi);
  if (m >= 1.0 && std::fabs(delta - m * std::numbers::pi) <= 1e-12 * delta)
    throw config_error("delta must not be an integer multiple of pi");
  if (kick < 0.0) throw config_error("kick strength must be non-negative");
  if (lambda < 0.0) throw config_error("lambda must be non-negative");

  ModelParams p;
  p.r = r;
  p.s = s;
  p.omega = omega;
  p.delta = delta;
  p.lambda = lambda;
  p.alpha = 2.0 * kTwoPi * static_cast<double>(r) / static_cast<double>(s) + delta;
  p.k = (mode == KickMode::Bare) ? kick * delta / p.alpha : kick;
  return p;
}

/// A point of the cylindrical phase space; theta is reduced mod 2*pi on
/// construction, p is unbounded.
struct PhasePoint {
  double p = 0.0;
  double theta = 0.0;

  PhasePoint() = default;
  PhasePoint(double p_, double theta_) : p(p_), theta(wrap_angle(theta_)) {}
};

}  // namespace krotor
