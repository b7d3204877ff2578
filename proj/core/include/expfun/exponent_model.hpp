#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "expfun/quadrature.hpp"

namespace expfun {

// Which closed-form family the moment formulas can use for a model over
// [0, infinity): none, the Levy form n! / prod Phi(k), or the geometric
// Brownian first-hit form n! / prod (rho(k) - k).
enum class ClosedFormKind { None, Levy, GeometricBrownian };

// An additive process X specified through its Laplace exponent
//   Phi(t; lambda) = -ln E[exp(-lambda X_t)],  Phi(0; lambda) = 0.
// All numerical routines consume the process only through this interface.
class ExponentModel {
 public:
  using PhiFn = std::function<double(double, double)>;
  using LevyFn = std::function<double(double)>;
  using FactorFn = std::function<double(int)>;
  using TailFn = std::function<TailDecay(int)>;

  struct Init {
    std::string name;
    PhiFn phi;                   // (t, lambda) -> Phi(t; lambda)
    LevyFn levy;                 // lambda -> Phi(lambda) when time-homogeneous
    ClosedFormKind closed = ClosedFormKind::None;
    FactorFn closed_factor;      // k -> Phi(k) or rho(k) - k
    TailFn tail;                 // n -> decay of u -> w_n(u) as u -> infinity
    bool increasing = false;     // X has nondecreasing paths
    std::map<std::string, double> params;
  };

  explicit ExponentModel(Init init);

  const std::string& name() const { return name_; }
  const std::map<std::string, double>& params() const { return params_; }

  // Phi(t; lambda) for t >= 0, lambda >= 0; exactly 0 when either is 0.
  double phi(double t, double lambda) const;

  bool is_levy() const { return static_cast<bool>(levy_); }
  // The stationary exponent Phi(lambda) with Phi(t; lambda) = t Phi(lambda).
  // Throws std::logic_error for models that are not time-homogeneous.
  double levy_exponent(double lambda) const;

  ClosedFormKind closed_form() const { return closed_; }
  // k-th denominator factor of the closed form over [0, infinity).
  // Throws std::logic_error when closed_form() == ClosedFormKind::None.
  double closed_factor(int k) const;

  // Decay hint for the weight u -> w_n(u); TailDecay::none() when unknown.
  TailDecay tail_rate(int n) const;

  bool increasing() const { return increasing_; }

 private:
  std::string name_;
  PhiFn phi_;
  LevyFn levy_;
  ClosedFormKind closed_ = ClosedFormKind::None;
  FactorFn closed_factor_;
  TailFn tail_;
  bool increasing_ = false;
  std::map<std::string, double> params_;
};

// Brownian motion with drift: X_t = mu t + sigma B_t, sigma > 0.
// Phi(lambda) = lambda mu - lambda^2 sigma^2 / 2.
ExponentModel brownian_drift(double mu, double sigma);

// Deterministic drift X_t = mu t; Phi(lambda) = lambda mu.
ExponentModel deterministic_drift(double mu);

// Deterministic time change of a Levy base model: Phi(t; lambda) =
// g(t) Phi_base(lambda) for a clock g with g(0) = 0.  The clock must be
// nondecreasing for the result to be a bona fide exponent; only g(0) = 0 is
// checked here.
ExponentModel time_changed_levy(const ExponentModel& base,
                                std::function<double(double)> clock,
                                const std::string& name = "time-changed");

// First-hit clock of a Bessel process of dimension delta > 0 started at
// v >= 0: X_t is the first time the process reaches v + t.
ExponentModel bessel_first_hit(double delta, double v = 0.0);

// First-hit clock of a geometric Brownian motion with parameters mu, sigma
// (requires mu >= sigma^2 / 2 so that every level is reached).
ExponentModel gbm_first_hit(double mu, double sigma);

struct CustomModelOptions {
  ExponentModel::LevyFn levy;
  ClosedFormKind closed = ClosedFormKind::None;
  ExponentModel::FactorFn closed_factor;
  ExponentModel::TailFn tail;
  bool increasing = false;
};

// Wraps a user-supplied exponent callable.  Validates Phi(0; lambda) = 0 and
// Phi(t; 0) = 0 on a fixed grid; throws std::invalid_argument on violation.
ExponentModel custom_model(const std::string& name, ExponentModel::PhiFn phi,
                           CustomModelOptions options = {});

// Registry used by the command line tool: builds a model from its public
// name ("brownian-drift", "deterministic-drift", "bessel-first-hit",
// "gbm-first-hit") and a key/value parameter map.
ExponentModel make_model(const std::string& name,
                         const std::map<std::string, double>& params);
std::vector<std::string> model_names();

}  // namespace expfun
