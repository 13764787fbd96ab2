#include "minatt/cli.hpp"

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "minatt/errors.hpp"
#include "minatt/scenario.hpp"

namespace minatt {

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFailed = 1;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

void print_generators() {
  for (const auto& g : DiagSeq::registry()) {
    std::cout << g.key << "\t" << g.description << "\t" << tail_to_json(g.tail).dump() << "\n";
  }
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"minatt - minimum attaining operators: perturbations, gaps and spectra"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::string format = "json";
  std::size_t truncation = kDefaultPrefix;
  std::uint64_t seed = 0;
  unsigned jobs = 1;

  auto* run = app.add_subcommand("run", "Run a scenario config and emit a report");
  run->add_option("config", config_path, "Scenario config (JSON)")->required();
  run->add_option("--out,-o", out_path, "Report path (default: stdout)");
  run->add_option("--format,-f", format, "Report format")->check(CLI::IsMember({"json", "csv"}));
  run->add_option("--truncation", truncation, "Default prefix length for l^2 operators")
      ->check(CLI::PositiveNumber);
  run->add_option("--seed", seed, "Seed for sampled checks");
  run->add_option("--jobs,-j", jobs, "Experiments run concurrently")->check(CLI::PositiveNumber);

  app.add_subcommand("list-generators", "Print the diagonal generator registry");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  if (app.got_subcommand("list-generators")) {
    print_generators();
    return kExitPass;
  }

  try {
    const ScenarioConfig cfg = load_config(config_path);
    RunOptions opts;
    opts.truncation = truncation;
    opts.seed = seed;
    opts.jobs = jobs;
    const Report report = run_scenario(cfg, opts);
    emit_report(report, format == "csv" ? ReportFormat::Csv : ReportFormat::Json, out_path);
    std::cerr << "minatt: " << report.passed() << "/" << report.experiments.size() << " experiments passed\n";
    return report.all_passed() ? kExitPass : kExitFailed;
  } catch (const ConfigError& e) {
    std::cerr << "minatt: config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const IoError& e) {
    std::cerr << "minatt: " << e.what() << "\n";
    return kExitIo;
  }
}

}  // namespace minatt
