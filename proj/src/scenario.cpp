#include "minatt/scenario.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "minatt/errors.hpp"

namespace minatt {

namespace {

constexpr int kSampledVectors = 16;
constexpr std::size_t kSampleMargin = 8;

const std::set<std::string> kPerturbMethods = {"auto", "positive", "general", "bounded_below"};
const std::set<std::string> kGapMethods = {"auto", "graph", "closed_form", "diagonal"};

ExperimentKind kind_from_string(const std::string& s) {
  for (auto k : {ExperimentKind::Perturb, ExperimentKind::Gap, ExperimentKind::Spectrum, ExperimentKind::Weyl})
    if (to_string(k) == s) return k;
  throw ConfigError("unknown experiment kind '" + s + "'");
}

std::size_t target_count(ExperimentKind k) {
  return k == ExperimentKind::Gap || k == ExperimentKind::Weyl ? 2 : 1;
}

const std::set<std::string>& expected_keys(ExperimentKind k) {
  static const std::set<std::string> perturb = {"caseTag", "witnessIndex", "attained", "value", "attainedBefore"};
  static const std::set<std::string> gap = {"value", "route"};
  static const std::set<std::string> spectrum = {"value", "attained", "essential", "unbounded"};
  static const std::set<std::string> weyl = {"agree"};
  switch (k) {
    case ExperimentKind::Perturb:
      return perturb;
    case ExperimentKind::Gap:
      return gap;
    case ExperimentKind::Spectrum:
      return spectrum;
    case ExperimentKind::Weyl:
      return weyl;
  }
  return weyl;
}

Experiment parse_experiment(const Json& j, std::size_t position, const ScenarioConfig& cfg) {
  if (!j.is_object()) throw ConfigError("experiment " + std::to_string(position) + " is not an object");
  Experiment e;
  e.name = j.value("name", "experiment" + std::to_string(position));
  const std::string where = "experiment '" + e.name + "': ";
  if (!j.contains("kind") || !j["kind"].is_string()) throw ConfigError(where + "missing 'kind'");
  e.kind = kind_from_string(j["kind"].get<std::string>());

  if (j.contains("targets")) {
    if (!j["targets"].is_array()) throw ConfigError(where + "'targets' must be an array of names");
    for (const auto& t : j["targets"]) {
      if (!t.is_string()) throw ConfigError(where + "target names must be strings");
      e.targets.push_back(t.get<std::string>());
    }
  } else if (j.contains("target") && j["target"].is_string()) {
    e.targets.push_back(j["target"].get<std::string>());
  }
  if (e.targets.size() != target_count(e.kind)) {
    throw ConfigError(where + "expects " + std::to_string(target_count(e.kind)) + " target(s)");
  }
  for (const auto& t : e.targets)
    if (!cfg.operators.contains(t)) throw ConfigError(where + "undeclared operator '" + t + "'");

  if (j.contains("epsilon")) {
    if (!j["epsilon"].is_number() || !(j["epsilon"].get<double>() > 0.0) || !std::isfinite(j["epsilon"].get<double>()))
      throw ConfigError(where + "epsilon must be a positive number");
    e.epsilon = j["epsilon"].get<double>();
  }
  if (e.kind == ExperimentKind::Perturb && !e.epsilon) throw ConfigError(where + "perturb needs 'epsilon'");
  if (j.contains("truncationN")) {
    const Json& n = j["truncationN"];
    if (!n.is_number_integer() || n.get<long long>() < 1) throw ConfigError(where + "truncationN must be >= 1");
    e.truncation = n.get<std::size_t>();
  }
  if (j.contains("tolerance")) {
    if (!j["tolerance"].is_number() || !(j["tolerance"].get<double>() > 0.0))
      throw ConfigError(where + "tolerance must be positive");
    e.tolerance = j["tolerance"].get<double>();
  }
  if (j.contains("method")) {
    e.method = j["method"].get<std::string>();
    const auto& allowed = e.kind == ExperimentKind::Perturb ? kPerturbMethods : kGapMethods;
    if (e.kind != ExperimentKind::Perturb && e.kind != ExperimentKind::Gap) throw ConfigError(where + "'method' not used");
    if (!allowed.contains(e.method)) throw ConfigError(where + "unknown method '" + e.method + "'");
  }
  if (j.contains("expected")) {
    if (!j["expected"].is_object()) throw ConfigError(where + "'expected' must be an object");
    for (const auto& [key, _] : j["expected"].items())
      if (!expected_keys(e.kind).contains(key)) throw ConfigError(where + "unknown expectation '" + key + "'");
    e.expected = j["expected"];
  }
  return e;
}

Check expect_equal(const std::string& name, const Json& want, const Json& got) {
  Check c{"expected." + name, want == got, 0.0, 0.0, {}};
  c.detail = "want " + want.dump() + ", got " + got.dump();
  return c;
}

Check expect_close(const std::string& name, double want, double got, double tol) {
  const double err = std::abs(want - got);
  return {"expected." + name, err <= tol, err, tol, "want " + Json(want).dump() + ", got " + Json(got).dump()};
}

std::vector<Check> expectations(const Experiment& e, const Json& observed, double value) {
  std::vector<Check> out;
  for (const auto& [key, want] : e.expected.items()) {
    if (key == "value") {
      out.push_back(expect_close(key, want.get<double>(), value, e.tolerance));
    } else if (key == "essential") {
      std::vector<double> got = observed.at(key).get<std::vector<double>>();
      std::vector<double> w = want.get<std::vector<double>>();
      const bool same = same_points(w, got, e.tolerance);
      out.push_back({"expected.essential", same, 0.0, e.tolerance, "want " + want.dump() + ", got " + Json(got).dump()});
    } else {
      out.push_back(expect_equal(key, want, observed.contains(key) ? observed.at(key) : Json(nullptr)));
    }
  }
  return out;
}

// |(T+S) x| >= m(T+S) on seeded random unit vectors around the witness support.
Check sampled_minimum(const OperatorRep& op, double m, double tol, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  std::size_t n = 0;
  std::optional<std::size_t> dim;
  if (op.is_finite()) {
    n = *op.cols();
    dim = n;
  } else {
    n = op.term_support() + kSampleMargin;
  }
  double worst = std::numeric_limits<double>::infinity();
  for (int k = 0; k < kSampledVectors; ++k) {
    DenseVector v(static_cast<Eigen::Index>(n));
    for (auto& z : v) z = Scalar(gauss(rng), gauss(rng));
    v /= v.norm();
    worst = std::min(worst, apply(op, Vec::from_dense(v, dim)).norm());
  }
  const double floor = m - tol * std::max(1.0, m);
  return {"sampled_minimum", worst >= floor, worst, m, "smallest |(T+S)x| over sampled unit vectors"};
}

struct Runner {
  const ScenarioConfig& cfg;
  const RunOptions& run;

  void perturb(const Experiment& e, const EvalOptions& opts, std::size_t position, Json& outputs,
               std::vector<Check>& checks, double& value) const {
    const OperatorRep& t = cfg.operators.at(e.targets[0]);
    const double eps = *e.epsilon;
    const auto before = minimum_modulus(t, opts);
    outputs["before"] = to_json(before);

    std::string method = e.method;
    if (method == "auto") method = check_positive(t, opts).positive ? "positive" : "general";
    PerturbationResult r = method == "positive"        ? attainment_perturbation_positive(t, eps, opts)
                           : method == "bounded_below" ? bounded_below_perturbation(t, eps, opts)
                                                       : attainment_perturbation(t, eps, opts);
    outputs["method"] = method;
    outputs["result"] = minatt::to_json(r);
    checks.insert(checks.end(), r.certification.begin(), r.certification.end());
    for (auto c : verify_perturbation(t, r, opts).checks) {
      c.name = "verify." + c.name;
      checks.push_back(std::move(c));
    }
    checks.push_back(sampled_minimum(r.perturbed, r.witness.value, e.tolerance, run.seed + position));
    value = r.witness.value;

    Json observed = {{"caseTag", to_string(r.case_tag)},
                     {"attained", r.witness.attained},
                     {"attainedBefore", before.attained}};
    observed["witnessIndex"] = r.witness.witness_index ? Json(*r.witness.witness_index) : Json(nullptr);
    for (auto& c : expectations(e, observed, value)) checks.push_back(std::move(c));
  }

  void gap(const Experiment& e, const EvalOptions& opts, Json& outputs, std::vector<Check>& checks,
           double& value) const {
    const OperatorRep& s = cfg.operators.at(e.targets[0]);
    const OperatorRep& t = cfg.operators.at(e.targets[1]);
    GapResult g;
    if (e.method == "graph") {
      if (!s.is_finite() || !t.is_finite()) throw DomainError("graph route needs finite operators");
      g = operator_gap_graph(dense(s), dense(t));
    } else if (e.method == "closed_form") {
      g = operator_gap_closed_form(s, t, opts);
    } else if (e.method == "diagonal") {
      g = operator_gap_diagonal(s, t, opts);
    } else {
      g = operator_gap(s, t, opts);
    }
    outputs["gap"] = to_json(g);
    value = g.value;
    checks.push_back({"bounded_by_one", g.value <= 1.0 + kExactTol && g.value >= 0.0, g.value, 1.0, {}});

    if (s.is_finite() && t.is_finite() && s.rows() == t.rows() && s.cols() == t.cols()) {
      const GapResult graph = operator_gap_graph(dense(s), dense(t));
      const GapResult closed = operator_gap_closed_form(s, t, opts);
      const double diff = std::abs(graph.value - closed.value);
      checks.push_back({"routes_agree", diff <= e.tolerance, diff, e.tolerance, "graph vs closed form"});
    }
    try {
      const auto bound = gap_upper_bound_check(s, t, opts);
      outputs["differenceNorm"] = bound.difference_norm;
      checks.push_back({"below_difference_norm", bound.holds, bound.gap.upper(), bound.difference_norm, {}});
    } catch (const UnboundedError& ex) {
      outputs["differenceNorm"] = nullptr;
      outputs["boundSkipped"] = ex.what();
    }
    for (auto& c : expectations(e, {{"route", to_string(g.route)}}, value)) checks.push_back(std::move(c));
  }

  void spectrum(const Experiment& e, const EvalOptions& opts, Json& outputs, std::vector<Check>& checks,
                double& value) const {
    const OperatorRep& t = cfg.operators.at(e.targets[0]);
    const SpectrumReport sr = essential_spectrum(t, opts);
    const AttainmentDecision d = is_minimum_attaining(t, opts);
    outputs["spectrum"] = to_json(sr);
    outputs["attainment"] = to_json(d.certificate);
    if (d.eigenvalue_consistent) outputs["eigenvalueConsistent"] = *d.eigenvalue_consistent;
    value = d.certificate.value;
    const bool matches = same_points(sr.detected, sr.essential.points, 1e-3);
    checks.push_back({"detection_matches", matches, double(sr.detected.size()), double(sr.essential.points.size()),
                      "accumulation detected at truncation vs declared"});
    if (d.eigenvalue_consistent) {
      checks.push_back({"eigenvalue_consistent", *d.eigenvalue_consistent, d.certificate.value, 0.0, {}});
    }
    Json observed = {{"attained", d.attained}, {"essential", sr.essential.points}, {"unbounded", sr.essential.unbounded}};
    for (auto& c : expectations(e, observed, value)) checks.push_back(std::move(c));
  }

  void weyl(const Experiment& e, const EvalOptions& opts, Json& outputs, std::vector<Check>& checks,
            double& value) const {
    const WeylReport w = weyl_check(cfg.operators.at(e.targets[0]), cfg.operators.at(e.targets[1]), opts);
    outputs["original"] = to_json(w.original);
    outputs["perturbed"] = to_json(w.perturbed);
    value = double(w.original.essential.points.size());
    checks.push_back({"declared_agree", w.declared_agree, 0.0, 0.0, {}});
    checks.push_back({"detection_matches", w.detection_matches, 0.0, 0.0, {}});
    for (auto& c : expectations(e, {{"agree", w.agree()}}, value)) checks.push_back(std::move(c));
  }

  ExperimentOutcome operator()(const Experiment& e, std::size_t position) const {
    const auto start = std::chrono::steady_clock::now();
    EvalOptions opts;
    opts.prefix = e.truncation.value_or(run.truncation);

    Json inputs = {{"targets", e.targets}, {"truncationN", opts.prefix}, {"tolerance", e.tolerance}};
    inputs["epsilon"] = e.epsilon ? Json(*e.epsilon) : Json(nullptr);
    if (e.kind == ExperimentKind::Perturb || e.kind == ExperimentKind::Gap) inputs["method"] = e.method;
    if (e.kind == ExperimentKind::Perturb) inputs["seed"] = run.seed;
    if (!e.expected.is_null()) inputs["expected"] = e.expected;

    Json outputs = Json::object();
    std::vector<Check> checks;
    double value = std::nan("");
    std::optional<std::string> error;
    try {
      switch (e.kind) {
        case ExperimentKind::Perturb:
          perturb(e, opts, position, outputs, checks, value);
          break;
        case ExperimentKind::Gap:
          gap(e, opts, outputs, checks, value);
          break;
        case ExperimentKind::Spectrum:
          spectrum(e, opts, outputs, checks, value);
          break;
        case ExperimentKind::Weyl:
          weyl(e, opts, outputs, checks, value);
          break;
      }
    } catch (const std::exception& ex) {
      error = ex.what();
    }

    ExperimentOutcome out;
    out.pass = !error && !checks.empty();
    Json check_json = Json::array();
    for (const auto& c : checks) {
      out.pass = out.pass && c.pass;
      check_json.push_back(to_json(c));
    }
    out.record = {{"name", e.name},     {"kind", to_string(e.kind)},      {"inputs", std::move(inputs)},
                  {"outputs", outputs}, {"checks", std::move(check_json)}, {"pass", out.pass}};
    out.record["value"] = std::isfinite(value) ? Json(value) : Json(nullptr);
    out.record["error"] = error ? Json(*error) : Json(nullptr);
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
  }
};

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string g17(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

std::string_view to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::Perturb:
      return "perturb";
    case ExperimentKind::Gap:
      return "gap";
    case ExperimentKind::Spectrum:
      return "spectrum";
    case ExperimentKind::Weyl:
      return "weyl";
  }
  return "unknown";
}

std::size_t Report::passed() const {
  std::size_t n = 0;
  for (const auto& e : experiments) n += e.pass ? 1 : 0;
  return n;
}

std::size_t Report::failed() const { return experiments.size() - passed(); }

Json Report::to_json() const {
  Json list = Json::array();
  Json times = Json::array();
  for (const auto& e : experiments) {
    list.push_back(e.record);
    times.push_back({{"name", e.record.at("name")}, {"seconds", e.seconds}});
  }
  return {{"experiments", std::move(list)},
          {"summary", {{"total", experiments.size()}, {"passed", passed()}, {"failed", failed()}}},
          {"wallTimes", std::move(times)}};
}

Report Report::from_json(const Json& j) {
  Report r;
  const Json& list = j.at("experiments");
  const Json& times = j.at("wallTimes");
  if (times.size() != list.size()) throw ConfigError("wallTimes does not match experiments");
  for (std::size_t k = 0; k < list.size(); ++k) {
    r.experiments.push_back({list[k], list[k].at("pass").get<bool>(), times[k].at("seconds").get<double>()});
  }
  return r;
}

ScenarioConfig parse_config(const Json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  ScenarioConfig cfg;
  if (j.contains("operators")) {
    if (!j["operators"].is_object()) throw ConfigError("'operators' must map names to operator specs");
    for (const auto& [name, spec] : j["operators"].items()) {
      try {
        cfg.operators.emplace(name, operator_from_json(spec));
      } catch (const std::exception& ex) {
        throw ConfigError("operator '" + name + "': " + ex.what());
      }
      cfg.operator_specs[name] = spec;
    }
  }
  if (j.contains("experiments")) {
    if (!j["experiments"].is_array()) throw ConfigError("'experiments' must be an array");
    std::size_t position = 0;
    for (const auto& e : j["experiments"]) {
      try {
        cfg.experiments.push_back(parse_experiment(e, position++, cfg));
      } catch (const Json::exception& ex) {
        throw ConfigError("experiment " + std::to_string(position - 1) + ": " + ex.what());
      }
    }
  }
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config '" + path + "'");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& ex) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + ex.what());
  }
  return parse_config(j);
}

Report run_scenario(const ScenarioConfig& config, const RunOptions& opts) {
  Report report;
  report.experiments.resize(config.experiments.size());
  const Runner runner{config, opts};
  const unsigned jobs = std::max(1u, std::min<unsigned>(opts.jobs, unsigned(config.experiments.size())));
  if (jobs <= 1) {
    for (std::size_t k = 0; k < config.experiments.size(); ++k) report.experiments[k] = runner(config.experiments[k], k);
    return report;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> workers;
  for (unsigned w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      for (std::size_t k = next++; k < config.experiments.size(); k = next++)
        report.experiments[k] = runner(config.experiments[k], k);
    });
  }
  for (auto& w : workers) w.join();
  return report;
}

std::string render_report(const Report& report, ReportFormat format) {
  if (format == ReportFormat::Json) return report.to_json().dump(2) + "\n";
  std::ostringstream os;
  os << "name,kind,value,pass,seconds\n";
  for (const auto& e : report.experiments) {
    const Json& v = e.record.at("value");
    os << csv_field(e.record.at("name").get<std::string>()) << ',' << e.record.at("kind").get<std::string>() << ','
       << (v.is_number() ? g17(v.get<double>()) : "") << ',' << (e.pass ? "true" : "false") << ',' << g17(e.seconds)
       << '\n';
  }
  return os.str();
}

void emit_report(const Report& report, ReportFormat format, const std::string& path) {
  const std::string text = render_report(report, format);
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write report to '" + path + "'");
  out << text;
  out.flush();
  if (!out) throw IoError("failed writing report to '" + path + "'");
}

}  // namespace minatt
