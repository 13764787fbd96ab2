#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "minatt/cli.hpp"
#include "minatt/errors.hpp"
#include "minatt/json_io.hpp"
#include "minatt/scenario.hpp"
#include "support/oracles.hpp"

using namespace minatt;
namespace fs = std::filesystem;

namespace {

const Json kCase1Config = Json::parse(R"({
  "operators": {"t": {"variant": "diagonal", "generator": "one_plus_inv_n"}},
  "experiments": [{"name": "case1", "kind": "perturb", "targets": ["t"], "epsilon": 0.5}]
})");

fs::path temp_file(const std::string& name) { return fs::temp_directory_path() / ("minatt_test_" + name); }

void write_file(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "minatt");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return run_cli(int(argv.size()), argv.data());
}

}  // namespace

TEST_CASE("scalar and vector json") {
  CHECK(scalar_to_json(2.5) == Json(2.5));
  CHECK(scalar_from_json(Json::parse("[1, -2]")) == Scalar(1.0, -2.0));
  CHECK_THROWS_AS(scalar_from_json(Json("x")), DomainError);

  const Vec v({{2, Scalar(0.6, 0.0)}, {7, Scalar(0.0, 0.8)}}, 9);
  CHECK(vec_from_json(vec_to_json(v)) == v);
  CHECK(vec_from_json(Json::parse(R"({"basis": 3})")) == Vec::basis(3));
  CHECK_THROWS_AS(vec_from_json(Json::parse(R"({"entries": [[0, 1]]})")), DomainError);
}

TEST_CASE("tail json") {
  const std::vector<TailSpec> tails = {ConvergesTo{1.0}, Periodic{{0.0, Scalar(1.0, 1.0)}}, FiniteRange{{2.0, 3.0}},
                                       DeclaredAccumulation{{4.0}, true}};
  for (const auto& t : tails) CHECK(tail_from_json(tail_to_json(t)) == t);
  CHECK_THROWS_AS(tail_from_json(Json::parse(R"({"kind": "periodic", "values": []})")), DomainError);
}

TEST_CASE("sequence json") {
  const auto s = DiagSeq::from_registry("inv_n")
                     .affine(Scalar(0.0, 2.0), 1.0)
                     .with_override(4, -1.0)
                     .plus(DiagSeq::from_registry("alternating01").abs().defect());
  const auto back = seq_from_json(seq_to_json(s));
  CHECK(back == s);
  for (std::size_t n = 1; n <= 10; ++n) CHECK(back(n) == s(n));

  const auto shorthand = seq_from_json(
      Json::parse(R"({"generator": "one_plus_inv_n", "scale": -1, "shift": 0.5, "overrides": [[3, 0]]})"));
  CHECK(shorthand(2) == Scalar(-1.0));
  CHECK(shorthand(3) == Scalar(0.0));

  const auto declared = seq_from_json(Json::parse(
      R"({"generator": "inv_n", "tail": {"kind": "declared_accumulation", "points": [0]}})"));
  CHECK(std::holds_alternative<DeclaredAccumulation>(declared.tail()));

  const auto custom = DiagSeq::custom("c", [](std::size_t) { return Scalar(1.0); }, ConvergesTo{1.0});
  CHECK_THROWS_AS(seq_to_json(custom), DomainError);
  CHECK_THROWS_AS(seq_from_json(Json::parse(R"({"generator": "bogus"})")), DomainError);
}

TEST_CASE("operator json round trips") {
  std::mt19937_64 rng(29);
  const Matrix m = oracle::random_matrix(rng, 2, 3);
  const std::vector<OperatorRep> ops = {
      OperatorRep::matrix(m),
      OperatorRep::diagonal(DiagSeq::from_registry("linear_n")),
      OperatorRep::sum(DiagonalOp{DiagSeq::from_registry("inv_n")}, 0.25,
                       {RankOneTerm::make(-0.125, Vec::basis(17), Vec::basis(17))}),
      OperatorRep::sum(MatrixOp{m}, 0.0, {RankOneTerm::make(Scalar(0, 1), Vec::basis(3, 3), Vec::basis(1, 2))}),
  };
  for (const auto& op : ops) {
    const Json j = operator_to_json(op);
    CHECK(operator_from_json(Json::parse(j.dump())) == op);
  }
  CHECK_THROWS_AS(operator_from_json(Json::parse(
                      R"({"variant": "sum", "base": {"variant": "sum", "base": {"variant": "matrix", "data": [[1]]}}})")),
                  DomainError);
  CHECK_THROWS_AS(operator_from_json(Json::parse(R"({"variant": "matrix", "data": [[1, 2], [3]]})")), DomainError);
  CHECK_THROWS_AS(operator_from_json(Json::parse(R"({"variant": "tensor"})")), DomainError);
}

TEST_CASE("result json carries the documented fields") {
  const auto t = OperatorRep::diagonal(DiagSeq::from_registry("one_plus_inv_n"));
  const auto r = attainment_perturbation_positive(t, 0.5);
  const Json j = to_json(r);
  CHECK(j["caseTag"] == "Case1");
  CHECK(j["epsilon"] == 0.5);
  CHECK(j["innerEpsilon"].is_null());
  CHECK(j["witness"]["witnessIndex"] == 5);
  CHECK(j["normS"] == doctest::Approx(0.5));
  CHECK(j.contains("gapBound"));

  const auto g = to_json(operator_gap(t, t));
  CHECK(g["route"] == "diagonal");
  CHECK(g["truncationN"] == kDefaultPrefix);
  CHECK(g["tailBound"] == 0.0);

  const auto sp = to_json(essential_spectrum(t));
  CHECK(sp["essential"]["points"] == Json::array({1.0}));
}

TEST_CASE("scenario: case 1 experiment") {
  const auto report = run_scenario(parse_config(kCase1Config));
  REQUIRE(report.experiments.size() == 1);
  const Json& rec = report.experiments[0].record;
  CHECK(rec["pass"] == true);
  CHECK(rec["outputs"]["result"]["caseTag"] == "Case1");
  CHECK(rec["outputs"]["result"]["witness"]["witnessIndex"] == 5);
  CHECK(rec["outputs"]["before"]["attained"] == false);
  for (const auto& c : rec["checks"]) CHECK(c["pass"] == true);
}

TEST_CASE("scenario: empty and invalid configs") {
  const auto empty = run_scenario(parse_config(Json::parse(R"({"operators": {}, "experiments": []})")));
  CHECK(empty.experiments.empty());
  const Json j = empty.to_json();
  CHECK(j["summary"]["total"] == 0);
  CHECK(j["summary"]["passed"] == 0);
  CHECK(j["summary"]["failed"] == 0);

  CHECK_THROWS_AS(parse_config(Json::parse(R"({"experiments": [{"kind": "spectrum", "targets": ["nope"]}]})")),
                  ConfigError);
  CHECK_THROWS_AS(parse_config(Json::parse(R"({"operators": {"a": {"variant": "diagonal", "generator": "inv_n"}},
      "experiments": [{"kind": "perturb", "targets": ["a"], "epsilon": -1}]})")),
                  ConfigError);
  CHECK_THROWS_AS(parse_config(Json::parse(R"({"operators": {"a": {"variant": "diagonal", "generator": "inv_n"}},
      "experiments": [{"kind": "gap", "targets": ["a", "a"], "truncationN": 0}]})")),
                  ConfigError);
  CHECK_THROWS_AS(parse_config(Json::parse(R"({"operators": {"a": {"variant": "diagonal", "generator": "nope"}}})")),
                  ConfigError);
}

TEST_CASE("scenario: per-experiment errors are recorded") {
  const auto cfg = parse_config(Json::parse(R"({
    "operators": {"a": {"variant": "diagonal", "generator": "inv_n"}},
    "experiments": [
      {"name": "bad", "kind": "perturb", "targets": ["a"], "epsilon": 0.5, "method": "bounded_below"},
      {"name": "good", "kind": "spectrum", "targets": ["a"]}
    ]})"));
  const auto report = run_scenario(cfg);
  REQUIRE(report.experiments.size() == 2);
  CHECK_FALSE(report.experiments[0].pass);
  CHECK(report.experiments[0].record["error"].is_string());
  CHECK(report.experiments[1].pass);
  CHECK_FALSE(report.all_passed());
}

TEST_CASE("report formats") {
  auto report = run_scenario(parse_config(kCase1Config));
  const std::string json_text = render_report(report, ReportFormat::Json);
  const Report back = Report::from_json(Json::parse(json_text));
  CHECK(back.to_json() == report.to_json());

  const std::string csv = render_report(report, ReportFormat::Csv);
  std::istringstream in(csv);
  std::string header, row, extra;
  std::getline(in, header);
  std::getline(in, row);
  CHECK(header == "name,kind,value,pass,seconds");
  CHECK_FALSE(std::getline(in, extra));
  const auto first = row.find(','), second = row.find(',', first + 1), third = row.find(',', second + 1);
  const double csv_value = std::stod(row.substr(second + 1, third - second - 1));
  CHECK(csv_value == report.experiments[0].record["value"].get<double>());
  CHECK(row.substr(0, first) == "case1");
}

TEST_CASE("reports are deterministic apart from wall times") {
  RunOptions opts;
  opts.jobs = 3;
  const auto cfg = parse_config(Json::parse(read_file(fs::path(MINATT_SCENARIO_DIR) / "basic.json")));
  Json a = run_scenario(cfg, opts).to_json();
  Json b = run_scenario(cfg).to_json();
  a.erase("wallTimes");
  b.erase("wallTimes");
  CHECK(a.dump() == b.dump());
}

TEST_CASE("cli exit codes") {
  const auto config = temp_file("case1.json");
  const auto out = temp_file("case1_report.json");
  write_file(config, kCase1Config.dump());
  CHECK(cli({"run", config.string(), "--out", out.string()}) == 0);
  const Json report = Json::parse(read_file(out));
  CHECK(report["summary"]["passed"] == 1);

  CHECK(cli({"run", config.string(), "--out", out.string(), "--format", "csv", "--seed", "5"}) == 0);
  CHECK(read_file(out).rfind("name,kind,value,pass,seconds\n", 0) == 0);

  const auto failing = temp_file("failing.json");
  write_file(failing, R"({"operators": {"t": {"variant": "diagonal", "generator": "one_plus_inv_n"}},
    "experiments": [{"kind": "perturb", "targets": ["t"], "epsilon": 0.5, "expected": {"witnessIndex": 6}}]})");
  CHECK(cli({"run", failing.string(), "--out", out.string()}) == 1);

  const auto undeclared = temp_file("undeclared.json");
  write_file(undeclared, R"({"operators": {}, "experiments": [{"kind": "spectrum", "targets": ["x"]}]})");
  CHECK(cli({"run", undeclared.string(), "--out", out.string()}) == 2);
  const auto broken = temp_file("broken.json");
  write_file(broken, "{ not json");
  CHECK(cli({"run", broken.string(), "--out", out.string()}) == 2);
  CHECK(cli({"run", config.string(), "--format", "xml"}) == 2);

  CHECK(cli({"run", config.string(), "--out", "/nonexistent-dir/report.json"}) == 3);
  CHECK(cli({"run", temp_file("missing.json").string()}) == 3);

  const auto empty = temp_file("empty.json");
  write_file(empty, R"({"operators": {}, "experiments": []})");
  CHECK(cli({"run", empty.string(), "--out", out.string()}) == 0);

  for (const auto& p : {config, out, failing, undeclared, broken, empty}) fs::remove(p);
}
