#pragma once

#include <functional>

namespace expfun {

// Hint describing how an integrand decays as x -> infinity.  Used by
// integrate_to_infinity to pick a change of variables; None falls back to
// a doubling-horizon scheme with divergence detection.
struct TailDecay {
  enum class Kind { None, Exponential, Polynomial };

  Kind kind = Kind::None;
  double param = 0.0;  // rate r for f ~ e^{-r x}, exponent q for f ~ x^{-q}

  static TailDecay none() { return {}; }
  static TailDecay exponential(double rate) {
    return {Kind::Exponential, rate};
  }
  static TailDecay polynomial(double exponent) {
    return {Kind::Polynomial, exponent};
  }
};

struct QuadConfig {
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  int max_subdivisions = 2000;
  double infinite_map_scale = 1.0;  // scale of the power map for poly tails
};

struct QuadResult {
  double value = 0.0;
  double error_estimate = 0.0;
  bool converged = false;
  bool divergence_suspected = false;
  long long evaluations = 0;
};

// Globally adaptive Gauss-Kronrod (G7/K15) integration of f over the finite
// interval [a, b].  Throws std::invalid_argument for bad bounds or config and
// std::domain_error if the integrand returns NaN or +-inf.
QuadResult integrate(const std::function<double(double)>& f, double a,
                     double b, const QuadConfig& config = {});

// Integration of f over [a, infinity).  An Exponential or Polynomial (q > 1)
// decay hint selects an analytic change of variables; otherwise the horizon
// is doubled until increments fall below abs_tol, with divergence_suspected
// set when partial integrals keep growing.
QuadResult integrate_to_infinity(const std::function<double(double)>& f,
                                 double a, const QuadConfig& config = {},
                                 const TailDecay& decay = {});

}  // namespace expfun
