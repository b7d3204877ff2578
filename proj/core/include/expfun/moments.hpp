#pragma once

#include <limits>
#include <optional>
#include <string>

#include "expfun/exponent_model.hpp"
#include "expfun/quadrature.hpp"

namespace expfun {

enum class MomentMethod { Auto, Recursive, Product, Closed };
enum class MomentVerdict { Finite, Infinite, Inconclusive };
enum class FinitenessVerdict { Sufficient, NotSufficient, Inconclusive };

// Request for the n-th moment of I_{s,t} = int_s^t exp(-X_u) du.
struct MomentQuery {
  int n = 1;
  double s = 0.0;
  double t = std::numeric_limits<double>::infinity();
  MomentMethod method = MomentMethod::Auto;
  QuadConfig quad;
};

struct MomentResult {
  MomentVerdict verdict = MomentVerdict::Inconclusive;
  double value = std::numeric_limits<double>::quiet_NaN();  // +inf if Infinite
  double error_estimate = std::numeric_limits<double>::quiet_NaN();
  MomentMethod method_used = MomentMethod::Auto;
  long long evaluations = 0;
  std::string diagnostic;  // reason for Infinite / Inconclusive verdicts
};

// Integrand weight w_n(u) = exp(-(Phi(u; n) - Phi(u; n-1))) appearing in all
// moment formulas; n >= 1.
double weight(const ExponentModel& model, int n, double u);

// Moment over a finite window [s, t] through the one-dimensional recursion
//   m^(k)_{u,t} = k int_u^t m^(k-1)_{r,t} w_k(r) dr,
// memoizing each layer as a Chebyshev interpolant.  Requires finite t.
MomentResult moment_recursive(const ExponentModel& model,
                              const MomentQuery& query);

// Moment through the iterated-integral (product) representation
//   m^(n)_{s,t} = n! F_n(s),  F_j(x) = int_x^t w_j(r) F_{j-1}(r) dr,
// evaluated lazily innermost-out with caching.  Supports t = infinity; over
// an infinite horizon a divergent outer integral yields verdict Infinite.
MomentResult moment_product(const ExponentModel& model,
                            const MomentQuery& query);

// Closed form over [0, infinity) for models carrying one:
// n! / prod_{k=1..n} factor(k); any factor <= 0 yields verdict Infinite.
MomentResult moment_closed(const ExponentModel& model, int n);

// Smallest n with closed_factor(n) <= 0 (the first infinite moment order),
// or nullopt when all orders up to `limit` have finite moments.
std::optional<int> critical_index(const ExponentModel& model, int limit = 64);

// Sufficient integral test for finiteness of the n-th moment over
// [0, infinity): checks int_0^inf w_n(u) du < infinity.  One-directional:
// NotSufficient does not imply the moment is infinite.
FinitenessVerdict finiteness_sufficient(const ExponentModel& model, int n,
                                        const QuadConfig& config = {});

// Main entry point: validates the query and dispatches on method.  Auto
// prefers closed forms (s = 0, t = inf), then the recursion for finite t,
// then the product representation.
MomentResult moment(const ExponentModel& model, const MomentQuery& query);

const char* to_string(MomentMethod method);
const char* to_string(MomentVerdict verdict);
const char* to_string(FinitenessVerdict verdict);

}  // namespace expfun
