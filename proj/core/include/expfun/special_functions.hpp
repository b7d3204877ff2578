#pragma once

namespace expfun {

// Natural logarithm of the gamma function for x > 0.
// Throws std::domain_error for x <= 0 or non-finite x.
double log_gamma(double x);

// Modified Bessel function of the first kind I_p(x) for real order p > -1
// and argument x >= 0.  Throws std::domain_error outside that domain and
// std::range_error when the result exceeds the range of double.
double bessel_i(double p, double x);

// ln I_p(x), same domain as bessel_i.  Stays accurate far beyond the
// overflow point of I_p itself (tested up to x = 1e6).  Returns -inf for
// x == 0 with p > 0, +inf for x == 0 with p in (-1, 0), and 0 for p == 0.
double log_bessel_i(double p, double x);

}  // namespace expfun
