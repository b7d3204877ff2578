#pragma once

#include <cmath>

// Independent extended-precision oracle for ln I_p(x): the ascending series
// evaluated in long double.  The largest series term is about e^x, so the
// oracle is reliable for x up to ~1e3 without any asymptotic machinery.
inline long double log_bessel_series_oracle(long double p, long double x) {
  const long double q = 0.25L * x * x;
  long double term = 1.0L;
  long double sum = 1.0L;
  for (int k = 1; k < 20000; ++k) {
    term *= q / (static_cast<long double>(k) * (k + p));
    sum += term;
    if (term < 1e-25L * sum) break;
  }
  return p * std::log(0.5L * x) - std::lgamma(p + 1.0L) + std::log(sum);
}
