#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"

using nlohmann::json;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr interleaved
};

std::string cli_path() {
  const char* path = std::getenv("EXPFUN_CLI");
  if (path == nullptr || *path == '\0') {
    throw std::runtime_error("EXPFUN_CLI must point at the expfun binary");
  }
  return path;
}

RunResult run_cli(const std::string& args, const std::string& env = "") {
  std::string cmd;
  if (!env.empty()) cmd += env + " ";
  cmd += "\"" + cli_path() + "\" " + args + " 2>&1";
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (pipe == nullptr) throw std::runtime_error("popen failed");
  RunResult result;
  char buf[4096];
  while (std::fgets(buf, sizeof(buf), pipe) != nullptr) result.output += buf;
  const int status = ::pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("missing output file " + path);
  return json::parse(in);
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("missing output file " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(field);
  return fields;
}

bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

const std::string kBrownian = "--model brownian-drift --mu 6 --sigma 2";

}  // namespace

TEST_CASE("moment: closed-form verdicts and the JSON report") {
  const auto r1 = run_cli("moment " + kBrownian +
                          " --n 1 --output cli_m1.json");
  CHECK(r1.exit_code == 0);
  CHECK(contains(r1.output, "verdict=finite"));
  CHECK(contains(r1.output, "method=closed"));

  const json doc = read_json("cli_m1.json");
  CHECK(doc.at("tool") == "expfun");
  CHECK(doc.at("version").is_string());
  CHECK(!doc.at("version").get<std::string>().empty());
  CHECK(doc.at("model").at("name") == "brownian-drift");
  CHECK(doc.at("model").at("params").at("mu").get<double>() == 6.0);
  CHECK(doc.at("query").at("command") == "moment");
  CHECK(doc.at("query").at("t") == "inf");
  CHECK(doc.at("result").at("verdict") == "finite");
  CHECK(doc.at("result").at("method_used") == "closed");
  CHECK(doc.at("result").at("value").get<double>() ==
        doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("moment: infinite moments are reported, not errored") {
  const auto r = run_cli("moment " + kBrownian +
                         " --n 3 --output cli_m3.json");
  CHECK(r.exit_code == 0);
  CHECK(contains(r.output, "verdict=infinite"));
  CHECK(contains(r.output, "note:"));

  const json doc = read_json("cli_m3.json");
  CHECK(doc.at("result").at("verdict") == "infinite");
  CHECK(doc.at("result").at("value") == "inf");  // serialized as a string
  CHECK(doc.at("result").contains("diagnostic"));
}

TEST_CASE("moment: explicit engines agree through the CLI") {
  const auto rec = run_cli("moment " + kBrownian +
                           " --n 2 --t 1.5 --method recursive"
                           " --output cli_rec.json");
  const auto prod = run_cli("moment " + kBrownian +
                            " --n 2 --t 1.5 --method product"
                            " --output cli_prod.json");
  CHECK(rec.exit_code == 0);
  CHECK(prod.exit_code == 0);
  const double a =
      read_json("cli_rec.json").at("result").at("value").get<double>();
  const double b =
      read_json("cli_prod.json").at("result").at("value").get<double>();
  CHECK(a == doctest::Approx(b).epsilon(1e-8));
  CHECK(read_json("cli_rec.json").at("result").at("method_used") ==
        "recursive");
  CHECK(read_json("cli_prod.json").at("result").at("method_used") ==
        "product");
}

TEST_CASE("moment: csv output is inferred from the file extension") {
  const auto r = run_cli("moment " + kBrownian + " --n 2 --output cli_m2.csv");
  CHECK(r.exit_code == 0);
  const auto lines = read_lines("cli_m2.csv");
  REQUIRE(lines.size() == 2);
  CHECK(lines[0] == "model,n,s,t,method,verdict,value,error,evaluations");
  const auto fields = split_csv(lines[1]);
  REQUIRE(fields.size() == 9);
  CHECK(fields[0] == "brownian-drift");
  CHECK(fields[1] == "2");
  CHECK(fields[3] == "inf");
  CHECK(fields[4] == "closed");
  CHECK(fields[5] == "finite");
  CHECK(std::stod(fields[6]) == doctest::Approx(0.125).epsilon(1e-12));
}

TEST_CASE("usage errors exit with code 1") {
  const auto unknown = run_cli("moment --model no-such-model --n 1");
  CHECK(unknown.exit_code == 1);
  CHECK(contains(unknown.output, "known models"));

  CHECK(run_cli("moment --n 1").exit_code == 1);           // missing --model
  CHECK(run_cli("moment " + kBrownian + " --t bogus --n 1").exit_code == 1);
  CHECK(run_cli("moment " + kBrownian + " --n 0").exit_code == 1);
  CHECK(run_cli("moment " + kBrownian + " --n 1 --s 2 --t 1").exit_code == 1);
  CHECK(run_cli("nonsense").exit_code == 1);
  CHECK(run_cli("simulate --model gbm-first-hit --mu 0.25 "
                "--sigma 0.7071067812 --n 1 --t 1 --paths 500")
            .exit_code == 1);
  CHECK(run_cli("moment --model bessel-first-hit --delta 2 --n 1 "
                "--method closed").exit_code == 1);
}

TEST_CASE("an inconclusive computation exits with code 2") {
  const auto r = run_cli(
      "moment --model bessel-first-hit --delta 2 --n 1 --method product"
      " --max-subdivisions 1 --abs-tol 1e-13 --rel-tol 1e-13"
      " --output cli_inc.json");
  CHECK(r.exit_code == 2);
  CHECK(contains(r.output, "verdict=inconclusive"));
  const json doc = read_json("cli_inc.json");
  CHECK(doc.at("result").at("verdict") == "inconclusive");
  CHECK(doc.at("result").at("value") == "nan");
}

TEST_CASE("finiteness: table, critical order and the one-way caveat") {
  const auto r = run_cli("finiteness " + kBrownian +
                         " --max-order 4 --output cli_fin.csv --format csv");
  CHECK(r.exit_code == 0);
  CHECK(contains(r.output, "first infinite order: n* = 3"));
  CHECK(contains(r.output, "condition is one-way"));

  const auto lines = read_lines("cli_fin.csv");
  REQUIRE(lines.size() == 5);  // header + orders 1..4
  const auto row1 = split_csv(lines[1]);
  REQUIRE(row1.size() == 9);
  CHECK(row1[1] == "1");
  CHECK(row1[5] == "sufficient");
  const auto row3 = split_csv(lines[3]);
  CHECK(row3[5] == "not-sufficient");
  CHECK(row3[6] == "inf");
}

TEST_CASE("simulate: byte-identical reruns and seed control") {
  const std::string base = "simulate " + kBrownian +
                           " --n 1 --t 1 --paths 500 --dt 0.01";
  const auto a = run_cli(base + " --seed 99 --output cli_s1.json");
  const auto b = run_cli(base + " --seed 99 --output cli_s2.json");
  CHECK(a.exit_code == 0);
  CHECK(a.output == b.output);  // byte-for-byte, including the z-score line
  CHECK(contains(a.output, "estimate n=1"));
  CHECK(contains(a.output, "z="));

  const json d1 = read_json("cli_s1.json");
  const json d2 = read_json("cli_s2.json");
  CHECK(d1.at("seed").get<std::uint64_t>() == 99);
  CHECK(d1.at("result").at("mean") == d2.at("result").at("mean"));
  CHECK(d1.at("result").at("paths_used").get<long>() == 500);
  CHECK(d1.at("result").contains("engine_value"));
  CHECK(d1.at("result").contains("z_score"));

  const auto c = run_cli(base + " --seed 100 --output cli_s3.json");
  CHECK(read_json("cli_s3.json").at("result").at("mean") !=
        d1.at("result").at("mean"));
}

TEST_CASE("simulate: the seed falls back to EXPFUN_SEED") {
  const std::string base = "simulate " + kBrownian +
                           " --n 1 --t 0.5 --paths 500 --dt 0.01";
  const auto env = run_cli(base + " --output cli_env.json",
                           "EXPFUN_SEED=777");
  CHECK(env.exit_code == 0);
  CHECK(read_json("cli_env.json").at("seed").get<std::uint64_t>() == 777);

  // An explicit flag wins over the environment.
  const auto flag = run_cli(base + " --seed 5 --output cli_env2.json",
                            "EXPFUN_SEED=777");
  CHECK(read_json("cli_env2.json").at("seed").get<std::uint64_t>() == 5);
}

TEST_CASE("a config file seeds subcommand options") {
  {
    std::ofstream cfg("cli_cfg.ini");
    cfg << "[simulate]\n"
        << "paths=400\n"
        << "seed=55\n";
  }
  const auto r = run_cli("--config cli_cfg.ini simulate " + kBrownian +
                         " --n 1 --t 0.5 --dt 0.01 --output cli_cfg.json");
  CHECK(r.exit_code == 0);
  const json doc = read_json("cli_cfg.json");
  CHECK(doc.at("seed").get<std::uint64_t>() == 55);
  CHECK(doc.at("result").at("paths_used").get<long>() == 400);
}

TEST_CASE("reproduce: the Levy worked example passes end to end") {
  const auto r = run_cli("reproduce dufresne --paths 4000"
                         " --output cli_rep.json");
  CHECK(r.exit_code == 0);
  CHECK(contains(r.output, "ALL CHECKS PASSED"));
  const json doc = read_json("cli_rep.json");
  REQUIRE(doc.at("result").contains("checks"));
  CHECK(doc.at("result").at("checks").size() >= 10);
  CHECK(doc.at("result").at("all_pass").get<bool>());
  for (const auto& check : doc.at("result").at("checks")) {
    CAPTURE(check.at("check").get<std::string>());
    CHECK(check.at("pass").get<bool>());
  }
}

TEST_CASE("--version prints a version and exits cleanly") {
  const auto r = run_cli("--version");
  CHECK(r.exit_code == 0);
  CHECK(!r.output.empty());
}
