// expfun: moments and finiteness diagnostics for exponential functionals
// I_{s,t} = int_s^t exp(-X_u) du of additive processes, plus Monte Carlo
// cross-checks and canned reproduction runs.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "expfun/exponent_model.hpp"
#include "expfun/moments.hpp"
#include "expfun/monte_carlo.hpp"
#include "expfun/quadrature.hpp"
#include "expfun/special_functions.hpp"
#include "expfun/version.hpp"
#include "json.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNumerical = 2;

std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

json json_number(double v) {
  if (std::isinf(v)) return v > 0 ? json("inf") : json("-inf");
  if (std::isnan(v)) return json("nan");
  return json(v);
}

struct Options {
  std::string model;
  std::map<std::string, double> params;

  int n = 1;
  double s = 0.0;
  std::string t_text = "inf";
  double t = std::numeric_limits<double>::infinity();
  std::string method = "auto";
  int max_order = 4;

  expfun::QuadConfig quad;
  expfun::SimConfig sim;

  std::string output_path;
  std::string format;  // "", "json", "csv"
  bool verbose = false;
};

double parse_time(const std::string& text) {
  std::string low;
  for (char c : text) low += static_cast<char>(std::tolower(c));
  if (low == "inf" || low == "infinity" || low == "+inf") {
    return std::numeric_limits<double>::infinity();
  }
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(low, &used);
  } catch (const std::exception&) {
    throw CLI::ValidationError("--t", "expected a number or 'inf', got '" +
                                          text + "'");
  }
  if (used != low.size()) {
    throw CLI::ValidationError("--t", "expected a number or 'inf', got '" +
                                          text + "'");
  }
  return value;
}

expfun::MomentMethod parse_method(const std::string& name) {
  if (name == "auto") return expfun::MomentMethod::Auto;
  if (name == "recursive") return expfun::MomentMethod::Recursive;
  if (name == "product") return expfun::MomentMethod::Product;
  if (name == "closed") return expfun::MomentMethod::Closed;
  throw CLI::ValidationError(
      "--method", "must be one of auto|recursive|product|closed");
}

// ---------------------------------------------------------------------------
// Option wiring shared by the subcommands.

struct ParamCapture {
  CLI::Option* mu = nullptr;
  CLI::Option* sigma = nullptr;
  CLI::Option* delta = nullptr;
  CLI::Option* v = nullptr;
  double mu_val = 0.0, sigma_val = 0.0, delta_val = 0.0, v_val = 0.0;

  void collect(Options& opt) const {
    if (mu->count() > 0) opt.params["mu"] = mu_val;
    if (sigma->count() > 0) opt.params["sigma"] = sigma_val;
    if (delta->count() > 0) opt.params["delta"] = delta_val;
    if (v->count() > 0) opt.params["v"] = v_val;
  }
};

void add_model_options(CLI::App* sub, Options& opt, ParamCapture& cap) {
  sub->add_option("--model", opt.model, "Model name: brownian-drift, "
                  "deterministic-drift, bessel-first-hit, gbm-first-hit")
      ->required();
  cap.mu = sub->add_option("--mu", cap.mu_val, "Drift parameter");
  cap.sigma = sub->add_option("--sigma", cap.sigma_val, "Volatility");
  cap.delta = sub->add_option("--delta", cap.delta_val, "Bessel dimension");
  cap.v = sub->add_option("--v", cap.v_val, "Bessel starting point");
}

void add_quad_options(CLI::App* sub, Options& opt) {
  sub->add_option("--abs-tol", opt.quad.abs_tol, "Quadrature absolute tolerance");
  sub->add_option("--rel-tol", opt.quad.rel_tol, "Quadrature relative tolerance");
  sub->add_option("--max-subdivisions", opt.quad.max_subdivisions,
                  "Adaptive subdivision budget");
  sub->add_option("--map-scale", opt.quad.infinite_map_scale,
                  "Scale of the power map for polynomial tails");
}

void add_sim_options(CLI::App* sub, Options& opt) {
  sub->add_option("--paths", opt.sim.paths, "Monte Carlo path count");
  sub->add_option("--dt", opt.sim.dt, "Simulation step size");
  sub->add_option("--horizon", opt.sim.horizon,
                  "Truncation time for t = inf targets");
  sub->add_option("--seed", opt.sim.seed, "Random seed")
      ->envname("EXPFUN_SEED");
  sub->add_option("--streams", opt.sim.streams, "Worker thread count");
}

void add_output_options(CLI::App* sub, Options& opt) {
  sub->add_option("--output", opt.output_path, "Write a JSON or CSV report");
  sub->add_option("--format", opt.format, "Force output format: json or csv");
  sub->add_flag("--verbose", opt.verbose, "Chatty diagnostics");
}

std::string resolved_format(const Options& opt) {
  if (!opt.format.empty()) return opt.format;
  if (opt.output_path.size() >= 4 &&
      opt.output_path.substr(opt.output_path.size() - 4) == ".csv") {
    return "csv";
  }
  return "json";
}

void write_output(const Options& opt, const json& doc,
                  const std::vector<std::string>& csv_rows) {
  if (opt.output_path.empty()) return;
  std::ofstream out(opt.output_path);
  if (!out) {
    throw std::invalid_argument("cannot open output file '" + opt.output_path +
                                "'");
  }
  if (resolved_format(opt) == "csv") {
    out << "model,n,s,t,method,verdict,value,error,evaluations\n";
    for (const auto& row : csv_rows) out << row << "\n";
  } else {
    out << doc.dump(2) << "\n";
  }
}

std::string csv_row(const std::string& model, int n, double s, double t,
                    const std::string& method, const std::string& verdict,
                    double value, double error, long long evaluations) {
  std::ostringstream os;
  os << model << ',' << n << ',' << fmt(s) << ',' << fmt(t) << ',' << method
     << ',' << verdict << ',' << fmt(value) << ',' << fmt(error) << ','
     << evaluations;
  return os.str();
}

json model_echo(const expfun::ExponentModel& model) {
  json params = json::object();
  for (const auto& [key, value] : model.params()) params[key] = value;
  return json{{"name", model.name()}, {"params", params}};
}

json base_doc(const expfun::ExponentModel& model) {
  return json{{"tool", "expfun"},
              {"version", expfun::version_string},
              {"model", model_echo(model)}};
}

// ---------------------------------------------------------------------------
// moment

int cmd_moment(const Options& opt) {
  const expfun::ExponentModel model = expfun::make_model(opt.model, opt.params);
  expfun::MomentQuery query;
  query.n = opt.n;
  query.s = opt.s;
  query.t = opt.t;
  query.method = parse_method(opt.method);
  query.quad = opt.quad;

  const expfun::MomentResult res = expfun::moment(model, query);

  std::printf("model: %s\n", model.name().c_str());
  std::printf(
      "moment n=%d over [%s, %s): verdict=%s value=%s error=%s method=%s "
      "evaluations=%lld\n",
      opt.n, fmt(opt.s).c_str(), fmt(opt.t).c_str(),
      expfun::to_string(res.verdict), fmt(res.value).c_str(),
      fmt(res.error_estimate).c_str(), expfun::to_string(res.method_used),
      res.evaluations);
  if (!res.diagnostic.empty()) std::printf("note: %s\n", res.diagnostic.c_str());

  json doc = base_doc(model);
  doc["query"] = {{"command", "moment"},
                  {"n", opt.n},
                  {"s", opt.s},
                  {"t", json_number(opt.t)},
                  {"method", opt.method}};
  doc["result"] = {{"verdict", expfun::to_string(res.verdict)},
                   {"value", json_number(res.value)},
                   {"error_estimate", json_number(res.error_estimate)},
                   {"method_used", expfun::to_string(res.method_used)},
                   {"evaluations", res.evaluations}};
  if (!res.diagnostic.empty()) doc["result"]["diagnostic"] = res.diagnostic;

  write_output(opt, doc,
               {csv_row(model.name(), opt.n, opt.s, opt.t,
                        expfun::to_string(res.method_used),
                        expfun::to_string(res.verdict), res.value,
                        res.error_estimate, res.evaluations)});

  return res.verdict == expfun::MomentVerdict::Inconclusive ? kExitNumerical
                                                            : kExitOk;
}

// ---------------------------------------------------------------------------
// finiteness

int cmd_finiteness(const Options& opt) {
  const expfun::ExponentModel model = expfun::make_model(opt.model, opt.params);
  const bool has_closed =
      model.closed_form() != expfun::ClosedFormKind::None;
  std::optional<int> critical;
  if (has_closed) critical = expfun::critical_index(model, opt.max_order + 64);

  std::printf("model: %s\n", model.name().c_str());
  std::printf("%-4s %-20s %-12s %s\n", "n", "sufficient-condition",
              "closed-form", "note");

  json rows = json::array();
  std::vector<std::string> csv_rows;
  for (int n = 1; n <= opt.max_order; ++n) {
    const expfun::FinitenessVerdict suff =
        expfun::finiteness_sufficient(model, n, opt.quad);
    std::string classification = "unknown";
    if (has_closed) {
      classification = (critical && n >= *critical) ? "infinite" : "finite";
    }
    std::string note;
    if (suff == expfun::FinitenessVerdict::NotSufficient &&
        classification == "finite") {
      note = "condition is one-way: moment is finite although the "
             "sufficient test fails";
    }
    std::printf("%-4d %-20s %-12s %s\n", n, expfun::to_string(suff),
                classification.c_str(), note.c_str());
    rows.push_back(json{{"n", n},
                        {"sufficient", expfun::to_string(suff)},
                        {"classification", classification},
                        {"note", note}});
    const double closed_value =
        classification == "infinite"
            ? std::numeric_limits<double>::infinity()
            : (has_closed ? expfun::moment_closed(model, n).value
                          : std::numeric_limits<double>::quiet_NaN());
    csv_rows.push_back(csv_row(model.name(), n, 0.0,
                               std::numeric_limits<double>::infinity(),
                               "finiteness", expfun::to_string(suff),
                               closed_value, 0.0, 0));
  }
  if (has_closed) {
    if (critical) {
      std::printf("first infinite order: n* = %d\n", *critical);
    } else {
      std::printf("all orders finite up to the scan limit\n");
    }
  }

  json doc = base_doc(model);
  doc["query"] = {{"command", "finiteness"}, {"max_order", opt.max_order}};
  doc["result"] = {{"rows", rows}};
  if (critical) doc["result"]["critical_index"] = *critical;
  write_output(opt, doc, csv_rows);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// simulate

int cmd_simulate(const Options& opt) {
  const expfun::ExponentModel model = expfun::make_model(opt.model, opt.params);
  const auto& params = model.params();

  expfun::MomentEstimate est;
  if (model.name() == "brownian-drift") {
    est = expfun::simulate_brownian_drift_functional(
        params.at("mu"), params.at("sigma"), opt.n, opt.t, opt.sim);
  } else if (model.name() == "gbm-first-hit") {
    if (!std::isinf(opt.t)) {
      throw std::invalid_argument(
          "simulate: gbm-first-hit supports t = inf only");
    }
    est = expfun::simulate_gbm_first_hit_functional(
        params.at("mu"), params.at("sigma"), opt.n, opt.sim);
  } else if (model.name() == "bessel-first-hit") {
    if (!std::isinf(opt.t)) {
      throw std::invalid_argument(
          "simulate: bessel-first-hit supports t = inf only");
    }
    est = expfun::simulate_bessel_first_hit_functional(params.at("delta"),
                                                       opt.n, opt.sim);
  } else {
    throw std::invalid_argument("simulate: no stochastic simulator for '" +
                                model.name() + "'");
  }

  // Engine target for the triangulation z-score, when one exists.
  std::optional<expfun::MomentResult> engine;
  try {
    expfun::MomentQuery query;
    query.n = opt.n;
    query.s = 0.0;
    query.t = opt.t;
    query.quad = opt.quad;
    engine = expfun::moment(model, query);
  } catch (const std::exception&) {
    engine.reset();
  }

  std::printf("model: %s\n", model.name().c_str());
  std::printf("estimate n=%d: mean=%s std_error=%s paths=%ld seed=%llu\n",
              opt.n, fmt(est.mean).c_str(), fmt(est.std_error).c_str(),
              est.paths_used,
              static_cast<unsigned long long>(opt.sim.seed));
  if (est.truncation_bias_bound) {
    std::printf("truncation_bias_bound=%s\n",
                fmt(*est.truncation_bias_bound).c_str());
  }

  json doc = base_doc(model);
  doc["query"] = {{"command", "simulate"},
                  {"n", opt.n},
                  {"t", json_number(opt.t)},
                  {"paths", est.paths_used},
                  {"dt", opt.sim.dt},
                  {"horizon", opt.sim.horizon},
                  {"streams", opt.sim.streams}};
  doc["seed"] = opt.sim.seed;
  doc["result"] = {{"mean", json_number(est.mean)},
                   {"std_error", json_number(est.std_error)},
                   {"paths_used", est.paths_used}};
  if (est.truncation_bias_bound) {
    doc["result"]["truncation_bias_bound"] =
        json_number(*est.truncation_bias_bound);
  }

  if (engine && engine->verdict == expfun::MomentVerdict::Finite) {
    const double bias = est.truncation_bias_bound.value_or(0.0);
    const double spread =
        est.std_error + (engine->error_estimate + bias) / 3.0;
    const double z = std::abs(est.mean - engine->value) /
                     std::max(spread, 1e-300);
    std::printf("engine value=%s (method=%s); z=%s\n",
                fmt(engine->value).c_str(),
                expfun::to_string(engine->method_used), fmt(z).c_str());
    doc["result"]["engine_value"] = json_number(engine->value);
    doc["result"]["engine_method"] = expfun::to_string(engine->method_used);
    doc["result"]["z_score"] = json_number(z);
  } else if (engine && engine->verdict == expfun::MomentVerdict::Infinite) {
    std::printf("engine verdict: infinite moment; sample mean is expected "
                "to drift with horizon\n");
    doc["result"]["engine_verdict"] = "infinite";
  }

  write_output(opt, doc,
               {csv_row(model.name(), opt.n, 0.0, opt.t, "monte-carlo",
                        "estimate", est.mean, est.std_error,
                        est.paths_used)});
  return kExitOk;
}

// ---------------------------------------------------------------------------
// reproduce

struct CheckRow {
  std::string label;
  double expected;
  double got;
  double tolerance;  // absolute tolerance the row was judged with
  bool pass;
};

class Reproducer {
 public:
  void check_rel(const std::string& label, double got, double want,
                 double rel_tol) {
    const double tol = rel_tol * std::max(1.0, std::abs(want));
    add(label, want, got, tol, std::abs(got - want) <= tol);
  }

  void check_abs(const std::string& label, double got, double want,
                 double tol) {
    add(label, want, got, tol, std::abs(got - want) <= tol);
  }

  void check_flag(const std::string& label, bool ok) {
    add(label, 1.0, ok ? 1.0 : 0.0, 0.0, ok);
  }

  bool all_pass() const {
    for (const auto& row : rows_) {
      if (!row.pass) return false;
    }
    return true;
  }

  void print() const {
    std::printf("%-52s %-14s %-14s %s\n", "check", "expected", "computed",
                "status");
    for (const auto& row : rows_) {
      std::printf("%-52s %-14s %-14s %s\n", row.label.c_str(),
                  fmt(row.expected).c_str(), fmt(row.got).c_str(),
                  row.pass ? "PASS" : "FAIL");
    }
  }

  json to_json() const {
    json rows = json::array();
    for (const auto& row : rows_) {
      rows.push_back(json{{"check", row.label},
                          {"expected", json_number(row.expected)},
                          {"computed", json_number(row.got)},
                          {"pass", row.pass}});
    }
    return rows;
  }

 private:
  void add(const std::string& label, double want, double got, double tol,
           bool pass) {
    rows_.push_back({label, want, got, tol, pass});
  }

  std::vector<CheckRow> rows_;
};

void reproduce_dufresne(const Options& opt, Reproducer& rep) {
  const auto model = expfun::brownian_drift(6.0, 2.0);
  const double targets[2] = {0.25, 0.125};
  for (int n = 1; n <= 2; ++n) {
    const double want = targets[n - 1];
    rep.check_rel("closed form n=" + std::to_string(n),
                  expfun::moment_closed(model, n).value, want, 1e-12);
    rep.check_rel("gamma oracle n=" + std::to_string(n),
                  expfun::dufresne_gamma_oracle(6.0, n), want, 1e-12);

    expfun::MomentQuery q;
    q.n = n;
    q.method = expfun::MomentMethod::Product;
    q.quad = opt.quad;
    rep.check_rel("product formula t=inf n=" + std::to_string(n),
                  expfun::moment_product(model, q).value, want, 1e-6);

    q.method = expfun::MomentMethod::Recursive;
    q.t = 10.0;
    rep.check_rel("recursion at t=10 n=" + std::to_string(n),
                  expfun::moment_recursive(model, q).value, want, 1e-5);

    expfun::SimConfig sim = opt.sim;
    const expfun::MomentEstimate mc = expfun::simulate_brownian_drift_functional(
        6.0, 2.0, n, std::numeric_limits<double>::infinity(), sim);
    rep.check_abs("monte carlo n=" + std::to_string(n), mc.mean, want,
                  3.0 * mc.std_error +
                      mc.truncation_bias_bound.value_or(0.0) + 1e-6);
  }
  rep.check_flag("closed form n=3 infinite",
                 expfun::moment_closed(model, 3).verdict ==
                     expfun::MomentVerdict::Infinite);
  expfun::MomentQuery q3;
  q3.n = 3;
  q3.method = expfun::MomentMethod::Product;
  q3.quad = opt.quad;
  rep.check_flag("product formula n=3 infinite",
                 expfun::moment_product(model, q3).verdict ==
                     expfun::MomentVerdict::Infinite);
  rep.check_flag("critical index = 3",
                 expfun::critical_index(model).value_or(-1) == 3);
}

void reproduce_gbm(const Options& opt, Reproducer& rep) {
  const double sigma = std::sqrt(0.5);
  const auto model = expfun::gbm_first_hit(0.25, sigma);  // nu = 0
  const double m2 = 1.0 / (std::sqrt(2.0) - 1.0);
  rep.check_rel("closed form n=1", expfun::moment_closed(model, 1).value, 1.0,
                1e-12);
  rep.check_rel("closed form n=2", expfun::moment_closed(model, 2).value, m2,
                1e-12);
  rep.check_flag("critical index = 4",
                 expfun::critical_index(model).value_or(-1) == 4);

  for (int n = 1; n <= 2; ++n) {
    expfun::MomentQuery q;
    q.n = n;
    q.method = expfun::MomentMethod::Product;
    q.quad = opt.quad;
    rep.check_rel("product formula t=inf n=" + std::to_string(n),
                  expfun::moment_product(model, q).value,
                  n == 1 ? 1.0 : m2, 1e-6);
  }

  // Path equivalence over a finite window.
  expfun::MomentQuery qa;
  qa.n = 2;
  qa.t = 5.0;
  qa.quad = opt.quad;
  qa.method = expfun::MomentMethod::Recursive;
  const auto rec = expfun::moment_recursive(model, qa);
  qa.method = expfun::MomentMethod::Product;
  const auto prod = expfun::moment_product(model, qa);
  rep.check_abs("recursion vs product at t=5 (n=2)", rec.value, prod.value,
                5.0 * (rec.error_estimate + prod.error_estimate) + 1e-12);

  rep.check_flag("sufficient condition holds at n=1",
                 expfun::finiteness_sufficient(model, 1, opt.quad) ==
                     expfun::FinitenessVerdict::Sufficient);
  rep.check_flag("sufficiency gap at n=2 (fails yet finite)",
                 expfun::finiteness_sufficient(model, 2, opt.quad) ==
                     expfun::FinitenessVerdict::NotSufficient);

  expfun::SimConfig sim = opt.sim;
  sim.horizon = std::max(sim.horizon, 20000.0);
  for (int n = 1; n <= 2; ++n) {
    const auto mc =
        expfun::simulate_gbm_first_hit_functional(0.25, sigma, n, sim);
    rep.check_abs("monte carlo n=" + std::to_string(n), mc.mean,
                  n == 1 ? 1.0 : m2,
                  3.0 * mc.std_error + 0.01);
  }
}

void reproduce_bessel(const Options& opt, Reproducer& rep) {
  const auto model = expfun::bessel_first_hit(2.0, 0.0);

  // Two independent routes to m^(1): the product engine on the model and
  // direct quadrature of the delta = 2 weight 1/I_0(u sqrt 2).
  expfun::MomentQuery q;
  q.n = 1;
  q.quad = opt.quad;
  q.method = expfun::MomentMethod::Product;
  const double via_product = expfun::moment_product(model, q).value;
  const auto direct = expfun::integrate_to_infinity(
      [](double u) {
        return std::exp(-expfun::log_bessel_i(0.0, u * std::sqrt(2.0)));
      },
      0.0, opt.quad, expfun::TailDecay::exponential(std::sqrt(2.0)));
  rep.check_rel("product vs direct quadrature m1", via_product, direct.value,
                1e-6);

  expfun::MomentQuery qa;
  qa.n = 2;
  qa.t = 4.0;
  qa.quad = opt.quad;
  qa.method = expfun::MomentMethod::Recursive;
  const auto rec = expfun::moment_recursive(model, qa);
  qa.method = expfun::MomentMethod::Product;
  const auto prod = expfun::moment_product(model, qa);
  rep.check_abs("recursion vs product at t=4 (n=2)", rec.value, prod.value,
                5.0 * (rec.error_estimate + prod.error_estimate) + 1e-12);

  bool all_sufficient = true;
  for (int n = 1; n <= 5; ++n) {
    all_sufficient = all_sufficient &&
                     expfun::finiteness_sufficient(model, n, opt.quad) ==
                         expfun::FinitenessVerdict::Sufficient;
  }
  rep.check_flag("sufficient condition holds for n=1..5", all_sufficient);

  expfun::SimConfig sim = opt.sim;
  sim.horizon = std::min(sim.horizon, 45.0);  // e^{-H} support
  const auto mc = expfun::simulate_bessel_first_hit_functional(2.0, 1, sim);
  rep.check_abs("monte carlo m1 (delta=2)", mc.mean, via_product,
                3.0 * mc.std_error + 0.01);
}

int cmd_reproduce(const Options& opt, const std::string& example) {
  Reproducer rep;
  if (example == "dufresne") {
    reproduce_dufresne(opt, rep);
  } else if (example == "gbm") {
    reproduce_gbm(opt, rep);
  } else if (example == "bessel") {
    reproduce_bessel(opt, rep);
  } else {
    throw std::invalid_argument(
        "reproduce: expected one of dufresne|bessel|gbm, got '" + example +
        "'");
  }
  rep.print();
  const bool ok = rep.all_pass();
  std::printf("%s\n", ok ? "ALL CHECKS PASSED" : "SOME CHECKS FAILED");

  if (!opt.output_path.empty()) {
    json doc = {{"tool", "expfun"},
                {"version", expfun::version_string},
                {"query", {{"command", "reproduce"}, {"example", example}}},
                {"result", {{"checks", rep.to_json()}, {"all_pass", ok}}},
                {"seed", opt.sim.seed}};
    write_output(opt, doc, {});
  }
  return ok ? kExitOk : kExitNumerical;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"moments of exponential functionals of additive processes"};
  app.require_subcommand(1);
  // Key-value config file; keys for a subcommand live in its section, e.g.
  //   [simulate]
  //   paths=50000
  // and the flag must precede the subcommand name.
  app.set_config("--config", "", "Read options from a key=value file");
  app.set_version_flag("--version", expfun::version_string);

  Options opt;
  std::string reproduce_target;
  ParamCapture moment_params, finiteness_params, simulate_params;

  CLI::App* moment = app.add_subcommand("moment", "Compute E[I_{s,t}^n]");
  add_model_options(moment, opt, moment_params);
  moment->add_option("--n", opt.n, "Moment order");
  moment->add_option("--s", opt.s, "Left endpoint");
  moment->add_option("--t", opt.t_text, "Right endpoint (number or 'inf')");
  moment->add_option("--method", opt.method,
                     "auto|recursive|product|closed");
  add_quad_options(moment, opt);
  add_output_options(moment, opt);

  CLI::App* finiteness =
      app.add_subcommand("finiteness", "Finiteness table over n = 1..N");
  add_model_options(finiteness, opt, finiteness_params);
  finiteness->add_option("--max-order", opt.max_order, "Largest order N");
  add_quad_options(finiteness, opt);
  add_output_options(finiteness, opt);

  CLI::App* simulate =
      app.add_subcommand("simulate", "Monte Carlo moment estimate");
  add_model_options(simulate, opt, simulate_params);
  simulate->add_option("--n", opt.n, "Moment order");
  simulate->add_option("--t", opt.t_text,
                       "Right endpoint (number or 'inf'; brownian only)");
  add_sim_options(simulate, opt);
  add_quad_options(simulate, opt);
  add_output_options(simulate, opt);

  CLI::App* reproduce = app.add_subcommand(
      "reproduce", "Re-run a canonical worked example end to end");
  reproduce->add_option("target", reproduce_target, "dufresne|bessel|gbm")
      ->required();
  add_sim_options(reproduce, opt);
  add_quad_options(reproduce, opt);
  add_output_options(reproduce, opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    opt.t = parse_time(opt.t_text);
    if (moment->parsed()) {
      moment_params.collect(opt);
      return cmd_moment(opt);
    }
    if (finiteness->parsed()) {
      finiteness_params.collect(opt);
      return cmd_finiteness(opt);
    }
    if (simulate->parsed()) {
      simulate_params.collect(opt);
      return cmd_simulate(opt);
    }
    if (reproduce->parsed()) {
      return cmd_reproduce(opt, reproduce_target);
    }
  } catch (const CLI::ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::logic_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kExitNumerical;
  }
  return kExitUsage;
}
