#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "expfun/exponent_model.hpp"

namespace expfun {

struct SimConfig {
  long paths = 200000;
  double dt = 1e-3;
  double horizon = 50.0;  // truncation time for t = infinity targets
  std::uint64_t seed = 42;
  int streams = 1;  // worker threads; does not affect the result
};

struct MomentEstimate {
  double mean = 0.0;
  double std_error = 0.0;  // sample standard deviation / sqrt(paths_used)
  long paths_used = 0;
  // Upper bound for the mass lost by truncating at the horizon, when one is
  // available from the closed-form machinery.
  std::optional<double> truncation_bias_bound;
};

// E[I_{0,t}^alpha] for X_u = mu u + sigma W_u, exact Gaussian increments on
// a uniform grid, trapezoidal accumulation of I.  t may be infinity, in
// which case integration stops at config.horizon and requires mu > 0.
// alpha may be fractional.
MomentEstimate simulate_brownian_drift_functional(double mu, double sigma,
                                                  double alpha, double t,
                                                  const SimConfig& config = {});

// Exact n-th moment of 1/(2 Z) with Z ~ Gamma(mu/2, 1): the analytic target
// of simulate_brownian_drift_functional at sigma = 2.  Requires n < mu/2.
double dufresne_gamma_oracle(double mu, int n);

// E[I_{0,inf}^n] for the geometric-Brownian first-hit clock: X_t is the time
// a GBM(mu, sigma) started at 1 first reaches 1 + t.  Exact inverse-Gaussian
// increments over a geometric grid in t; requires mu >= sigma^2 / 2.
MomentEstimate simulate_gbm_first_hit_functional(double mu, double sigma,
                                                 int n,
                                                 const SimConfig& config = {});

// E[I_{0,inf}^n] for the Bessel first-hit clock started at the origin:
// X_t is the first time a Bessel(delta) process reaches t.  Integer delta
// uses the norm of a delta-dimensional Brownian motion; fractional delta >= 2
// uses Euler on the Bessel generator.  Rejects delta < 2.
MomentEstimate simulate_bessel_first_hit_functional(double delta, int n,
                                                    const SimConfig& config = {});

struct LaplacePoint {
  double t = 0.0;
  double lambda = 0.0;
  double empirical = 0.0;  // sample mean of exp(-lambda X_t)
  double std_error = 0.0;
  double theory = 0.0;  // exp(-Phi(t; lambda))
};

// Empirical check of E[e^{-lambda X_t}] = e^{-Phi(t; lambda)} over a grid,
// using exact-increment simulation of the named built-in model.  Supports
// brownian-drift, deterministic-drift, gbm-first-hit and bessel-first-hit.
std::vector<LaplacePoint> laplace_check(const ExponentModel& model,
                                        const std::vector<double>& times,
                                        const std::vector<double>& lambdas,
                                        const SimConfig& config = {});

}  // namespace expfun
