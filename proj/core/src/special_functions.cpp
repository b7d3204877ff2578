#include "expfun/special_functions.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace expfun {

namespace {

constexpr double kLog1e280 = 280.0 * 2.302585092994045684;  // ln(1e280)

// Ascending series I_p(x) = (x/2)^p / Gamma(p+1) * sum_k t_k with
// t_0 = 1, t_k = t_{k-1} * (x/2)^2 / (k (k+p)).  All terms positive for
// p > -1, so the sum is stable; partial sums are rescaled to avoid
// overflow for mid-size x.
double log_bessel_series(double p, double x) {
  const double q = 0.25 * x * x;
  double term = 1.0;
  double sum = 1.0;
  double scale_log = 0.0;
  for (int k = 1; k < 1000; ++k) {
    term *= q / (k * (k + p));
    sum += term;
    if (term < 1e-18 * sum) break;
    if (sum > 1e280) {
      sum *= 1e-280;
      term *= 1e-280;
      scale_log += kLog1e280;
    }
  }
  return p * std::log(0.5 * x) - log_gamma(p + 1.0) + std::log(sum) + scale_log;
}

// Large-argument expansion
//   I_p(x) ~ e^x / sqrt(2 pi x) * sum_k (-1)^k u_k
//          - sin(p pi) e^{-x} / sqrt(2 pi x) * sum_k u_k,
//   u_k = prod_{j<=k} (mu - (2j-1)^2) / (8 j x),  mu = 4 p^2.
// The series is divergent; truncate adaptively at the smallest term.
double log_bessel_asymptotic(double p, double x) {
  const double mu = 4.0 * p * p;
  double u = 1.0;
  double main_sum = 1.0;
  double refl_sum = 1.0;
  double prev = 1.0;
  for (int k = 1; k <= 30; ++k) {
    const double f = 2.0 * k - 1.0;
    u *= (mu - f * f) / (8.0 * k * x);
    if (std::abs(u) > prev) break;  // tail started growing: stop
    prev = std::abs(u);
    main_sum += (k % 2 != 0) ? -u : u;
    refl_sum += u;
    if (std::abs(u) < 1e-17 * std::abs(main_sum)) break;
  }
  double total = main_sum;
  if (x < 350.0) {  // e^{-2x} underflows past this point
    total -= std::sin(p * std::numbers::pi) * std::exp(-2.0 * x) * refl_sum;
  }
  return x - 0.5 * std::log(2.0 * std::numbers::pi * x) + std::log(total);
}

}  // namespace

double log_gamma(double x) {
  if (!(x > 0.0)) {
    throw std::domain_error("log_gamma: argument must be positive, got " +
                            std::to_string(x));
  }
  return std::lgamma(x);
}

double log_bessel_i(double p, double x) {
  if (!std::isfinite(p) || !(p > -1.0)) {
    throw std::domain_error("log_bessel_i: order must satisfy p > -1, got " +
                            std::to_string(p));
  }
  if (std::isnan(x) || x < 0.0) {
    throw std::domain_error("log_bessel_i: argument must be >= 0, got " +
                            std::to_string(x));
  }
  if (std::isinf(x)) return std::numeric_limits<double>::infinity();
  if (x == 0.0) {
    if (p == 0.0) return 0.0;
    return p > 0.0 ? -std::numeric_limits<double>::infinity()
                   : std::numeric_limits<double>::infinity();
  }
  const double crossover = std::max(12.0, 0.5 * p * p);
  return (x <= crossover) ? log_bessel_series(p, x)
                          : log_bessel_asymptotic(p, x);
}

double bessel_i(double p, double x) {
  const double lv = log_bessel_i(p, x);
  if (lv > 709.0) {
    throw std::range_error("bessel_i: I_" + std::to_string(p) + "(" +
                           std::to_string(x) +
                           ") exceeds the range of double; use log_bessel_i");
  }
  return std::exp(lv);
}

}  // namespace expfun
