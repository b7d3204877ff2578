#include "expfun/monte_carlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "expfun/rng.hpp"
#include "expfun/special_functions.hpp"

namespace expfun {

namespace {

constexpr long kBlock = 4096;
// Contributions to I below this size are dropped; the induced error is many
// orders below any achievable std_error.
constexpr double kPathCutoff = 1e-20;

void validate_sim(const SimConfig& config) {
  if (config.paths < 100) {
    throw std::invalid_argument("SimConfig: paths must be >= 100");
  }
  if (!(config.dt > 0.0)) {
    throw std::invalid_argument("SimConfig: dt must be positive");
  }
  if (!(config.horizon > 0.0)) {
    throw std::invalid_argument("SimConfig: horizon must be positive");
  }
  if (config.streams < 1) {
    throw std::invalid_argument("SimConfig: streams must be >= 1");
  }
}

double integer_power(double x, int n) {
  double out = 1.0;
  for (int k = 0; k < n; ++k) out *= x;
  return out;
}

// Runs one path per index through `path_value` and reduces sums in fixed
// blocks of kBlock paths.  Blocks are summed in index order no matter how
// many workers ran them, so the estimate is identical for any stream count.
template <typename PathFn>
MomentEstimate run_paths(const SimConfig& config, const PathFn& path_value) {
  const long paths = config.paths;
  const long blocks = (paths + kBlock - 1) / kBlock;
  std::vector<double> block_sum(blocks, 0.0);
  std::vector<double> block_sumsq(blocks, 0.0);
  const RngStreams streams(config.seed, config.streams);

  const auto run_block = [&](long b) {
    const long lo = b * kBlock;
    const long hi = std::min(paths, lo + kBlock);
    double s = 0.0;
    double q = 0.0;
    for (long p = lo; p < hi; ++p) {
      PhiloxRng rng = streams.path_rng(static_cast<std::uint64_t>(p));
      const double v = path_value(rng);
      s += v;
      q += v * v;
    }
    block_sum[b] = s;
    block_sumsq[b] = q;
  };

  const int workers =
      static_cast<int>(std::min<long>(config.streams, blocks));
  if (workers <= 1) {
    for (long b = 0; b < blocks; ++b) run_block(b);
  } else {
    std::atomic<long> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (long b = next.fetch_add(1); b < blocks; b = next.fetch_add(1)) {
          run_block(b);
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  double sum = 0.0;
  double sumsq = 0.0;
  for (long b = 0; b < blocks; ++b) {
    sum += block_sum[b];
    sumsq += block_sumsq[b];
  }

  MomentEstimate est;
  est.paths_used = paths;
  est.mean = sum / paths;
  const double var =
      std::max(0.0, (sumsq / paths - est.mean * est.mean)) *
      (static_cast<double>(paths) / (paths - 1));
  est.std_error = std::sqrt(var / paths);
  return est;
}

// Closed Levy moment n! / prod Phi(k) when all factors are positive.
std::optional<double> levy_closed_moment(double mu, double sigma, int n) {
  double value = 1.0;
  for (int k = 1; k <= n; ++k) {
    const double factor = k * mu - 0.5 * k * k * sigma * sigma;
    if (factor <= 0.0) return std::nullopt;
    value *= k / factor;
  }
  return value;
}

std::optional<double> brownian_bias_bound(double mu, double sigma,
                                          double alpha, double horizon) {
  const double phi1 = mu - 0.5 * sigma * sigma;
  if (alpha <= 1.0) {
    // E[tail] = e^{-Phi(1) T} / Phi(1); for alpha < 1 apply Jensen.
    if (phi1 <= 0.0) return std::nullopt;
    const double mean_tail = std::exp(-phi1 * horizon) / phi1;
    return std::pow(mean_tail, alpha);
  }
  const double rounded = std::round(alpha);
  if (std::abs(alpha - rounded) > 1e-12) return std::nullopt;
  const int n = static_cast<int>(rounded);
  // Cauchy-Schwarz: bias <= n sqrt(E[tail^2] E[I^{2n-2}]) with
  // E[tail^2] = e^{-Phi(2) T} m_2 by the shift identity.
  const auto m2 = levy_closed_moment(mu, sigma, 2);
  const auto m_high = levy_closed_moment(mu, sigma, 2 * n - 2);
  if (!m2 || !m_high) return std::nullopt;
  const double phi2 = 2.0 * mu - 2.0 * sigma * sigma;
  return n * std::sqrt(std::exp(-phi2 * horizon) * *m2 * *m_high);
}

// Michael-Schucany-Haas inverse-Gaussian sampler (exact first-passage law
// of a positive-drift Brownian motion).
double sample_inverse_gaussian(double mean, double shape, PhiloxRng& rng) {
  const double z = rng.normal();
  const double y = z * z;
  double x = mean + 0.5 * mean * mean * y / shape -
             0.5 * (mean / shape) *
                 std::sqrt(4.0 * mean * shape * y + mean * mean * y * y);
  if (x <= 0.0) x = std::numeric_limits<double>::min();
  const double u = rng.uniform();
  if (u <= mean / (mean + x)) return x;
  return mean * mean / x;
}

}  // namespace

MomentEstimate simulate_brownian_drift_functional(double mu, double sigma,
                                                  double alpha, double t,
                                                  const SimConfig& config) {
  validate_sim(config);
  if (!(alpha > 0.0)) {
    throw std::invalid_argument(
        "simulate_brownian_drift_functional: alpha must be positive");
  }
  if (!(sigma > 0.0)) {
    throw std::invalid_argument(
        "simulate_brownian_drift_functional: sigma must be positive");
  }
  const bool infinite = std::isinf(t);
  if (infinite && !(mu > 0.0)) {
    throw std::invalid_argument(
        "simulate_brownian_drift_functional: t = infinity requires mu > 0 "
        "for an a.s. finite functional");
  }
  if (!infinite && !(t > 0.0)) {
    throw std::invalid_argument(
        "simulate_brownian_drift_functional: t must be positive");
  }

  const double horizon = infinite ? config.horizon : t;
  const long steps = std::max<long>(1, std::lround(std::ceil(
                                           horizon / config.dt - 1e-9)));
  const double dt = horizon / steps;
  const double sqdt = std::sqrt(dt);
  const double drift = mu * dt;

  const auto path_value = [=](PhiloxRng& rng) {
    double x = 0.0;
    double prev = 1.0;
    double acc = 0.0;
    for (long j = 0; j < steps; ++j) {
      x += drift + sigma * sqdt * rng.normal();
      const double e = std::exp(-x);
      acc += prev + e;
      prev = e;
      if (e < kPathCutoff) break;
    }
    const double integral = 0.5 * dt * acc;
    if (alpha == 1.0) return integral;
    if (alpha == 2.0) return integral * integral;
    return std::pow(integral, alpha);
  };

  MomentEstimate est = run_paths(config, path_value);
  if (infinite) {
    est.truncation_bias_bound =
        brownian_bias_bound(mu, sigma, alpha, horizon);
  }
  return est;
}

double dufresne_gamma_oracle(double mu, int n) {
  if (n < 1) {
    throw std::invalid_argument("dufresne_gamma_oracle: n must be >= 1");
  }
  if (!(n < 0.5 * mu)) {
    throw std::invalid_argument(
        "dufresne_gamma_oracle: requires n < mu/2 (the moment is infinite)");
  }
  return std::exp(-n * std::log(2.0) + log_gamma(0.5 * mu - n) -
                  log_gamma(0.5 * mu));
}

MomentEstimate simulate_gbm_first_hit_functional(double mu, double sigma,
                                                 int n,
                                                 const SimConfig& config) {
  validate_sim(config);
  if (n < 1) {
    throw std::invalid_argument(
        "simulate_gbm_first_hit_functional: n must be >= 1");
  }
  if (!(sigma > 0.0)) {
    throw std::invalid_argument(
        "simulate_gbm_first_hit_functional: sigma must be positive");
  }
  double nu = (mu - 0.5 * sigma * sigma) / sigma;
  if (std::abs(mu - 0.5 * sigma * sigma) <=
      1e-9 * std::max(1.0, sigma * sigma)) {
    nu = 0.0;
  }
  if (nu < 0.0) {
    throw std::invalid_argument(
        "simulate_gbm_first_hit_functional: requires mu >= sigma^2/2");
  }

  const double big_l = std::log1p(config.horizon);
  const long m = std::max<long>(1, std::lround(std::ceil(
                                       big_l / config.dt - 1e-9)));
  // Geometric grid t_j = (1+T)^{j/m} - 1 gives a constant level increment
  // da in the hit coordinate a = ln(1+t)/sigma.
  const double da = big_l / (m * sigma);
  std::vector<double> times(m + 1);
  for (long j = 0; j <= m; ++j) times[j] = std::expm1(big_l * j / m);
  const double ig_mean = nu > 0.0 ? da / nu : 0.0;
  const double ig_shape = da * da;

  const auto path_value = [=, &times](PhiloxRng& rng) {
    double x = 0.0;
    double prev = 1.0;
    double integral = 0.0;
    for (long j = 1; j <= m; ++j) {
      double inc;
      if (nu > 0.0) {
        inc = sample_inverse_gaussian(ig_mean, ig_shape, rng);
      } else {
        const double z = rng.normal();
        inc = ig_shape / (z * z);  // exact zero-drift first-passage law
      }
      x += inc;
      const double e = std::exp(-x);
      integral += 0.5 * (prev + e) * (times[j] - times[j - 1]);
      prev = e;
      if (e < kPathCutoff) break;
    }
    return integer_power(integral, n);
  };

  MomentEstimate est = run_paths(config, path_value);
  const double rho1 = (std::sqrt(2.0 + nu * nu) - nu) / sigma;
  if (n == 1 && rho1 > 1.0) {
    est.truncation_bias_bound =
        std::pow(1.0 + config.horizon, 1.0 - rho1) / (rho1 - 1.0);
  }
  return est;
}

namespace {

// Shared state for one Bessel-norm step: advance the radius, then fold in
// the Brownian-bridge running maximum and harvest level crossings.
struct BesselAccumulator {
  double level_step;
  double next_level;
  double prev_exp = 1.0;  // e^{-H} at the previous crossed level
  double integral = 0.0;
  bool done = false;

  void absorb(double y0, double y1, double t_mid, double dt, PhiloxRng& rng) {
    double peak = std::max(y0, y1);
    if (!done && 2.0 * std::max(next_level - y0, 0.0) *
                     std::max(next_level - y1, 0.0) <
                 40.0 * dt) {
      // The bridge can plausibly reach next_level: sample its true maximum.
      const double u = rng.uniform();
      const double d = y1 - y0;
      const double bridge =
          0.5 * (y0 + y1 + std::sqrt(d * d - 2.0 * dt * std::log(u)));
      peak = std::max(peak, bridge);
    }
    while (!done && peak >= next_level) {
      const double e = std::exp(-t_mid);
      integral += 0.5 * (prev_exp + e) * level_step;
      prev_exp = e;
      next_level += level_step;
      if (e < kPathCutoff) done = true;
    }
  }
};

}  // namespace

MomentEstimate simulate_bessel_first_hit_functional(double delta, int n,
                                                    const SimConfig& config) {
  validate_sim(config);
  if (n < 1) {
    throw std::invalid_argument(
        "simulate_bessel_first_hit_functional: n must be >= 1");
  }
  if (!(delta >= 2.0)) {
    throw std::invalid_argument(
        "simulate_bessel_first_hit_functional: requires delta >= 2 "
        "(reflection at the origin is not simulated)");
  }

  const long steps = std::max<long>(1, std::lround(std::ceil(
                                           config.horizon / config.dt - 1e-9)));
  const double dt = config.horizon / steps;
  const double sqdt = std::sqrt(dt);
  const double rounded = std::round(delta);
  const int dim = (std::abs(delta - rounded) < 1e-12 && rounded <= 16.0)
                      ? static_cast<int>(rounded)
                      : 0;
  constexpr double kLevelStep = 1.0 / 256.0;

  const auto path_value = [=](PhiloxRng& rng) {
    BesselAccumulator acc{kLevelStep, kLevelStep};
    if (dim > 0) {
      double b[16] = {0.0};
      double y0 = 0.0;
      for (long j = 1; j <= steps && !acc.done; ++j) {
        double norm_sq = 0.0;
        for (int d = 0; d < dim; ++d) {
          b[d] += sqdt * rng.normal();
          norm_sq += b[d] * b[d];
        }
        const double y1 = std::sqrt(norm_sq);
        acc.absorb(y0, y1, (j - 0.5) * dt, dt, rng);
        y0 = y1;
      }
    } else {
      // Euler on the Bessel generator, reflected, started at sqrt(dt) as the
      // vanishing-origin surrogate.
      const double half_drift = 0.5 * (delta - 1.0);
      double y0 = sqdt;
      for (long j = 1; j <= steps && !acc.done; ++j) {
        const double y1 = std::abs(y0 + half_drift / std::max(y0, sqdt) * dt +
                                   sqdt * rng.normal());
        acc.absorb(y0, y1, (j - 0.5) * dt, dt, rng);
        y0 = y1;
      }
    }
    return integer_power(acc.integral, n);
  };

  MomentEstimate est = run_paths(config, path_value);
  // Heuristic order-of-magnitude bound: levels beyond the one reached at the
  // horizon contribute at most e^{-T} times an O(1) first-moment factor.
  est.truncation_bias_bound =
      n * std::exp(-config.horizon) * (2.0 + std::sqrt(delta));
  return est;
}

namespace {

std::vector<LaplacePoint> laplace_grid(const ExponentModel& model,
                                       const std::vector<double>& times,
                                       const std::vector<double>& lambdas) {
  std::vector<LaplacePoint> grid;
  grid.reserve(times.size() * lambdas.size());
  for (const double t : times) {
    for (const double lam : lambdas) {
      LaplacePoint p;
      p.t = t;
      p.lambda = lam;
      p.theory = std::exp(-model.phi(t, lam));
      grid.push_back(p);
    }
  }
  return grid;
}

void finalize_grid(std::vector<LaplacePoint>& grid,
                   const std::vector<double>& sum,
                   const std::vector<double>& sumsq, long paths) {
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double mean = sum[i] / paths;
    const double var = std::max(0.0, sumsq[i] / paths - mean * mean) *
                       (static_cast<double>(paths) / (paths - 1));
    grid[i].empirical = mean;
    grid[i].std_error = std::sqrt(var / paths);
  }
}

// Simulates X at the requested times (exactly where possible) and fills the
// empirical Laplace transforms; `sample_path` writes X_{t_i} into xs.
template <typename PathFn>
std::vector<LaplacePoint> laplace_generic(const ExponentModel& model,
                                          const std::vector<double>& times,
                                          const std::vector<double>& lambdas,
                                          const SimConfig& config,
                                          const PathFn& sample_path) {
  std::vector<LaplacePoint> grid = laplace_grid(model, times, lambdas);
  std::vector<double> sum(grid.size(), 0.0);
  std::vector<double> sumsq(grid.size(), 0.0);
  std::vector<double> xs(times.size(), 0.0);
  const RngStreams streams(config.seed, config.streams);
  for (long p = 0; p < config.paths; ++p) {
    PhiloxRng rng = streams.path_rng(static_cast<std::uint64_t>(p));
    sample_path(rng, xs);
    std::size_t i = 0;
    for (std::size_t ti = 0; ti < times.size(); ++ti) {
      for (const double lam : lambdas) {
        const double w = std::exp(-lam * xs[ti]);
        sum[i] += w;
        sumsq[i] += w * w;
        ++i;
      }
    }
  }
  finalize_grid(grid, sum, sumsq, config.paths);
  return grid;
}

}  // namespace

std::vector<LaplacePoint> laplace_check(const ExponentModel& model,
                                        const std::vector<double>& times,
                                        const std::vector<double>& lambdas,
                                        const SimConfig& config) {
  validate_sim(config);
  if (times.empty() || lambdas.empty()) {
    throw std::invalid_argument("laplace_check: empty evaluation grid");
  }
  for (double t : times) {
    if (!(t > 0.0) || !std::isfinite(t)) {
      throw std::invalid_argument("laplace_check: times must be finite and positive");
    }
  }
  std::vector<double> ts = times;
  std::sort(ts.begin(), ts.end());

  const auto& params = model.params();
  const std::string& name = model.name();

  if (name == "brownian-drift") {
    const double mu = params.at("mu");
    const double sigma = params.at("sigma");
    return laplace_generic(
        model, ts, lambdas, config,
        [&](PhiloxRng& rng, std::vector<double>& xs) {
          double x = 0.0;
          double prev_t = 0.0;
          for (std::size_t i = 0; i < ts.size(); ++i) {
            const double gap = ts[i] - prev_t;
            x += mu * gap + sigma * std::sqrt(gap) * rng.normal();
            xs[i] = x;
            prev_t = ts[i];
          }
        });
  }

  if (name == "deterministic-drift") {
    const double mu = params.at("mu");
    return laplace_generic(model, ts, lambdas, config,
                           [&](PhiloxRng&, std::vector<double>& xs) {
                             for (std::size_t i = 0; i < ts.size(); ++i) {
                               xs[i] = mu * ts[i];
                             }
                           });
  }

  if (name == "gbm-first-hit") {
    const double mu = params.at("mu");
    const double sigma = params.at("sigma");
    double nu = (mu - 0.5 * sigma * sigma) / sigma;
    if (std::abs(mu - 0.5 * sigma * sigma) <=
        1e-9 * std::max(1.0, sigma * sigma)) {
      nu = 0.0;
    }
    if (nu < 0.0) {
      throw std::invalid_argument("laplace_check: requires mu >= sigma^2/2");
    }
    return laplace_generic(
        model, ts, lambdas, config,
        [&, nu](PhiloxRng& rng, std::vector<double>& xs) {
          double x = 0.0;
          double prev_t = 0.0;
          for (std::size_t i = 0; i < ts.size(); ++i) {
            const double da =
                (std::log1p(ts[i]) - std::log1p(prev_t)) / sigma;
            if (nu > 0.0) {
              x += sample_inverse_gaussian(da / nu, da * da, rng);
            } else {
              const double z = rng.normal();
              x += da * da / (z * z);
            }
            xs[i] = x;
            prev_t = ts[i];
          }
        });
  }

  if (name == "bessel-first-hit") {
    const double delta = params.at("delta");
    const double v = params.at("v");
    if (!(delta >= 2.0)) {
      throw std::invalid_argument("laplace_check: requires delta >= 2");
    }
    const double rounded = std::round(delta);
    const int dim = (std::abs(delta - rounded) < 1e-12 && rounded <= 16.0)
                        ? static_cast<int>(rounded)
                        : 0;
    const double dt = config.dt;
    const double sqdt = std::sqrt(dt);
    const double top = v + ts.back();
    // Safety cap: expected hit time is level^2/delta; allow a generous
    // multiple, then assign the cap itself (the bias is e^{-lambda cap}).
    const long max_steps = std::lround(
        std::ceil(std::max(100.0, 40.0 * top * top / delta) / dt));

    return laplace_generic(
        model, ts, lambdas, config,
        [&, delta, v, dim](PhiloxRng& rng, std::vector<double>& xs) {
          std::size_t next = 0;
          double b[16] = {0.0};
          if (dim > 0) b[0] = v;
          const double half_drift = 0.5 * (delta - 1.0);
          double y0 = dim > 0 ? v : std::max(v, sqdt);
          for (long j = 1; j <= max_steps && next < ts.size(); ++j) {
            double y1;
            if (dim > 0) {
              double norm_sq = 0.0;
              for (int d = 0; d < dim; ++d) {
                b[d] += sqdt * rng.normal();
                norm_sq += b[d] * b[d];
              }
              y1 = std::sqrt(norm_sq);
            } else {
              y1 = std::abs(y0 + half_drift / std::max(y0, sqdt) * dt +
                            sqdt * rng.normal());
            }
            double peak = std::max(y0, y1);
            const double level = v + ts[next];
            if (2.0 * std::max(level - y0, 0.0) *
                    std::max(level - y1, 0.0) <
                40.0 * dt) {
              const double u = rng.uniform();
              const double d = y1 - y0;
              const double bridge =
                  0.5 *
                  (y0 + y1 + std::sqrt(d * d - 2.0 * dt * std::log(u)));
              peak = std::max(peak, bridge);
            }
            const double t_mid = (j - 0.5) * dt;
            while (next < ts.size() && peak >= v + ts[next]) {
              xs[next] = t_mid;
              ++next;
            }
            y0 = y1;
          }
          while (next < ts.size()) {
            xs[next] = max_steps * dt;  // unreached within the cap
            ++next;
          }
        });
  }

  throw std::invalid_argument(
      "laplace_check: model '" + name +
      "' has no exact-increment simulator (built-in models only)");
}

}  // namespace expfun
