#include "expfun/exponent_model.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

#include "expfun/special_functions.hpp"

namespace expfun {

ExponentModel::ExponentModel(Init init)
    : name_(std::move(init.name)),
      phi_(std::move(init.phi)),
      levy_(std::move(init.levy)),
      closed_(init.closed),
      closed_factor_(std::move(init.closed_factor)),
      tail_(std::move(init.tail)),
      increasing_(init.increasing),
      params_(std::move(init.params)) {
  if (!phi_) {
    throw std::invalid_argument("ExponentModel: phi callable is required");
  }
}

double ExponentModel::phi(double t, double lambda) const {
  if (!(t >= 0.0)) {
    throw std::domain_error("ExponentModel::phi: t must be >= 0, got " +
                            std::to_string(t));
  }
  if (!(lambda >= 0.0)) {
    throw std::domain_error("ExponentModel::phi: lambda must be >= 0, got " +
                            std::to_string(lambda));
  }
  if (t == 0.0 || lambda == 0.0) return 0.0;
  return phi_(t, lambda);
}

double ExponentModel::levy_exponent(double lambda) const {
  if (!levy_) {
    throw std::logic_error("ExponentModel::levy_exponent: model '" + name_ +
                           "' is not time-homogeneous");
  }
  return levy_(lambda);
}

double ExponentModel::closed_factor(int k) const {
  if (closed_ == ClosedFormKind::None || !closed_factor_) {
    throw std::logic_error("ExponentModel::closed_factor: model '" + name_ +
                           "' has no closed form");
  }
  if (k < 1) {
    throw std::invalid_argument("ExponentModel::closed_factor: k must be >= 1");
  }
  return closed_factor_(k);
}

TailDecay ExponentModel::tail_rate(int n) const {
  if (n < 1) {
    throw std::invalid_argument("ExponentModel::tail_rate: n must be >= 1");
  }
  if (!tail_) return TailDecay::none();
  return tail_(n);
}

ExponentModel brownian_drift(double mu, double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma) || !std::isfinite(mu)) {
    throw std::invalid_argument(
        "brownian_drift: requires finite mu and sigma > 0");
  }
  const double half_var = 0.5 * sigma * sigma;
  auto levy = [mu, half_var](double lam) { return lam * (mu - half_var * lam); };
  ExponentModel::Init init;
  init.name = "brownian-drift";
  init.phi = [levy](double t, double lam) { return t * levy(lam); };
  init.levy = levy;
  init.closed = ClosedFormKind::Levy;
  init.closed_factor = [levy](int k) { return levy(static_cast<double>(k)); };
  init.tail = [levy](int n) {
    // Signed rate: zero marks a weight tending to a constant and a negative
    // value marks growth; both still combine correctly across layers.
    return TailDecay::exponential(levy(static_cast<double>(n)) -
                                  levy(static_cast<double>(n - 1)));
  };
  init.increasing = false;
  init.params = {{"mu", mu}, {"sigma", sigma}};
  return ExponentModel(std::move(init));
}

ExponentModel deterministic_drift(double mu) {
  if (!std::isfinite(mu)) {
    throw std::invalid_argument("deterministic_drift: mu must be finite");
  }
  ExponentModel::Init init;
  init.name = "deterministic-drift";
  init.phi = [mu](double t, double lam) { return t * lam * mu; };
  init.levy = [mu](double lam) { return lam * mu; };
  init.closed = ClosedFormKind::Levy;
  init.closed_factor = [mu](int k) { return k * mu; };
  init.tail = [mu](int) { return TailDecay::exponential(mu); };
  init.increasing = mu > 0.0;
  init.params = {{"mu", mu}};
  return ExponentModel(std::move(init));
}

ExponentModel time_changed_levy(const ExponentModel& base,
                                std::function<double(double)> clock,
                                const std::string& name) {
  if (!base.is_levy()) {
    throw std::invalid_argument(
        "time_changed_levy: base model must be time-homogeneous");
  }
  if (!clock) {
    throw std::invalid_argument("time_changed_levy: clock callable required");
  }
  if (std::abs(clock(0.0)) > 1e-12) {
    throw std::invalid_argument("time_changed_levy: clock must satisfy g(0) = 0");
  }
  auto levy = [base](double lam) { return base.levy_exponent(lam); };
  ExponentModel::Init init;
  init.name = name;
  init.phi = [clock, levy](double t, double lam) { return clock(t) * levy(lam); };
  init.params = base.params();
  return ExponentModel(std::move(init));
}

namespace {

// log psi_beta(x) = (1 - delta/2) ln x + ln I_{delta/2-1}(x sqrt(2 beta));
// psi is the increasing eigenfunction whose ratio gives the first-hit
// Laplace transform of a Bessel(delta) process.
double log_bessel_psi(double delta, double x, double beta) {
  const double p = 0.5 * delta - 1.0;
  return -p * std::log(x) + log_bessel_i(p, x * std::sqrt(2.0 * beta));
}

}  // namespace

ExponentModel bessel_first_hit(double delta, double v) {
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw std::invalid_argument("bessel_first_hit: requires delta > 0");
  }
  if (!(v >= 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument("bessel_first_hit: requires v >= 0");
  }
  const double p = 0.5 * delta - 1.0;
  ExponentModel::Init init;
  init.name = "bessel-first-hit";
  if (v > 0.0) {
    init.phi = [delta, v](double t, double beta) {
      return log_bessel_psi(delta, t + v, beta) - log_bessel_psi(delta, v, beta);
    };
  } else {
    // Started at the origin the ratio of psi values degenerates; the limit is
    //   Phi(t; beta) = ln Gamma(delta/2) - p ln(sqrt(2 beta)/2) - p ln t
    //                + ln I_p(t sqrt(2 beta)).
    init.phi = [delta, p](double t, double beta) {
      const double root = std::sqrt(2.0 * beta);
      return log_gamma(0.5 * delta) - p * std::log(0.5 * root) -
             p * std::log(t) + log_bessel_i(p, t * root);
    };
  }
  init.tail = [](int n) {
    return TailDecay::exponential(std::sqrt(2.0 * n) -
                                  std::sqrt(2.0 * (n - 1)));
  };
  init.increasing = true;
  init.params = {{"delta", delta}, {"v", v}};
  return ExponentModel(std::move(init));
}

ExponentModel gbm_first_hit(double mu, double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma) || !std::isfinite(mu)) {
    throw std::invalid_argument(
        "gbm_first_hit: requires finite mu and sigma > 0");
  }
  double nu = (mu - 0.5 * sigma * sigma) / sigma;
  // Snap tiny negative drifts caused by rounded inputs to the boundary case.
  if (std::abs(mu - 0.5 * sigma * sigma) <=
      1e-9 * std::max(1.0, sigma * sigma)) {
    nu = 0.0;
  }
  if (nu < 0.0) {
    throw std::invalid_argument(
        "gbm_first_hit: requires mu >= sigma^2/2, otherwise the process "
        "fails to reach every level");
  }
  const double sig = sigma;
  auto rho = [nu, sig](double beta) {
    return (std::sqrt(2.0 * beta + nu * nu) - nu) / sig;
  };
  ExponentModel::Init init;
  init.name = "gbm-first-hit";
  init.phi = [rho](double t, double beta) { return rho(beta) * std::log1p(t); };
  init.closed = ClosedFormKind::GeometricBrownian;
  init.closed_factor = [rho](int k) { return rho(static_cast<double>(k)) - k; };
  init.tail = [rho](int n) {
    return TailDecay::polynomial(rho(static_cast<double>(n)) -
                                 rho(static_cast<double>(n - 1)));
  };
  init.increasing = true;
  init.params = {{"mu", mu}, {"sigma", sigma}};
  return ExponentModel(std::move(init));
}

ExponentModel custom_model(const std::string& name, ExponentModel::PhiFn phi,
                           CustomModelOptions options) {
  if (!phi) {
    throw std::invalid_argument("custom_model: phi callable is required");
  }
  for (double lam : {0.0, 0.5, 1.0, 2.0}) {
    if (std::abs(phi(0.0, lam)) > 1e-9) {
      throw std::invalid_argument("custom_model '" + name +
                                  "': Phi(0; lambda) must vanish");
    }
  }
  for (double t : {0.0, 0.5, 1.0, 3.0}) {
    if (std::abs(phi(t, 0.0)) > 1e-9) {
      throw std::invalid_argument("custom_model '" + name +
                                  "': Phi(t; 0) must vanish");
    }
  }
  ExponentModel::Init init;
  init.name = name;
  init.phi = std::move(phi);
  init.levy = std::move(options.levy);
  init.closed = options.closed;
  init.closed_factor = std::move(options.closed_factor);
  init.tail = std::move(options.tail);
  init.increasing = options.increasing;
  return ExponentModel(std::move(init));
}

namespace {

double require_param(const std::string& model,
                     const std::map<std::string, double>& params,
                     const std::string& key) {
  const auto it = params.find(key);
  if (it == params.end()) {
    throw std::invalid_argument("model '" + model + "' requires parameter '" +
                                key + "'");
  }
  return it->second;
}

}  // namespace

ExponentModel make_model(const std::string& name,
                         const std::map<std::string, double>& params) {
  if (name == "brownian-drift") {
    return brownian_drift(require_param(name, params, "mu"),
                          require_param(name, params, "sigma"));
  }
  if (name == "deterministic-drift") {
    return deterministic_drift(require_param(name, params, "mu"));
  }
  if (name == "bessel-first-hit") {
    const auto v = params.find("v");
    return bessel_first_hit(require_param(name, params, "delta"),
                            v == params.end() ? 0.0 : v->second);
  }
  if (name == "gbm-first-hit") {
    return gbm_first_hit(require_param(name, params, "mu"),
                         require_param(name, params, "sigma"));
  }
  std::string known;
  for (const auto& m : model_names()) {
    if (!known.empty()) known += ", ";
    known += m;
  }
  throw std::invalid_argument("unknown model '" + name + "'; known models: " +
                              known);
}

std::vector<std::string> model_names() {
  return {"brownian-drift", "deterministic-drift", "bessel-first-hit",
          "gbm-first-hit"};
}

}  // namespace expfun
