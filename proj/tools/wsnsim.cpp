// wsnsim: command-line entry point.
// Exit codes: 0 ok, 1 internal error, 2 parse/validation failure, 3 I/O failure.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "wsn/wsn.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kInternal = 1;
constexpr int kInvalid = 2;
constexpr int kIo = 3;

struct Options {
  std::string scenario;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  bool quiet = false;
  bool no_attacks = false;
};

int load(const Options& o, wsn::Scenario& s) {
  try {
    s = wsn::load_scenario(o.scenario);
    if (o.seed) s.seed = *o.seed;
    return kOk;
  } catch (const wsn::ScenarioIoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const wsn::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kInvalid;
  } catch (const wsn::ValidationError& e) {
    std::cerr << "invalid scenario: " << e.what() << '\n';
    return kInvalid;
  }
}

int cmd_simulate(const Options& o) {
  wsn::Scenario s;
  if (const int rc = load(o, s); rc != kOk) return rc;
  const auto report = wsn::run(s);
  try {
    wsn::write_run_outputs(report, o.out);
  } catch (const wsn::ReportIoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  }
  if (!o.quiet) {
    std::cout << "delivered " << report.total("packets_delivered") << "/" << report.total("packets_sent")
              << ", altered accepted " << report.total("altered_accepted") << ", energy "
              << wsn::format_mj(report.energy_spent()) << " mJ";
    if (report.detection) std::cout << ", spoofing detected " << wsn::yes_no(report.detection->spoofing_detected);
    std::cout << '\n';
  }
  return kOk;
}

int cmd_validate(const Options& o) {
  wsn::Scenario s;
  if (const int rc = load(o, s); rc != kOk) return rc;
  if (!o.quiet) std::cout << wsn::scenario_to_json(s).dump(2) << '\n';
  return kOk;
}

int cmd_attack_matrix(const Options& o) {
  const auto m = wsn::run_attack_matrix(!o.no_attacks);
  try {
    wsn::write_attack_matrix(m, o.out);
  } catch (const wsn::ReportIoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  }
  if (!o.quiet) std::cout << wsn::attack_matrix_text(m);
  return kOk;
}

int cmd_energy_report(const Options& o) {
  const auto r = wsn::energy_report();
  try {
    wsn::write_energy_report(r, o.out);
  } catch (const wsn::ReportIoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  }
  if (!o.quiet) std::cout << wsn::energy_report_text(r);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wireless sensor network security simulator"};
  app.require_subcommand(1);
  Options o;

  auto* sim = app.add_subcommand("simulate", "run a scenario and write metrics.csv, summary.json, detection.csv");
  sim->add_option("--scenario", o.scenario, "scenario JSON file")->required();
  sim->add_option("--out", o.out, "output directory");
  sim->add_option("--seed", o.seed, "override the scenario seed");
  sim->add_flag("--quiet", o.quiet, "print nothing on success");

  auto* val = app.add_subcommand("validate", "check a scenario and print it with defaults filled in");
  val->add_option("--scenario", o.scenario, "scenario JSON file")->required();
  val->add_option("--seed", o.seed, "override the scenario seed");
  val->add_flag("--quiet", o.quiet, "print nothing on success");

  auto* matrix = app.add_subcommand("attack-matrix", "routing attack susceptibility on the 5x5 grid");
  matrix->add_option("--out", o.out, "output directory");
  matrix->add_flag("--no-attacks", o.no_attacks, "run every cell without its attacker");
  matrix->add_flag("--quiet", o.quiet, "print nothing on success");

  auto* energy = app.add_subcommand("energy-report", "crypto energy comparison from the model presets");
  energy->add_option("--out", o.out, "output directory");
  energy->add_flag("--quiet", o.quiet, "print nothing on success");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e, std::cerr, std::cerr);
    return kInvalid;
  }

  try {
    if (sim->parsed()) return cmd_simulate(o);
    if (val->parsed()) return cmd_validate(o);
    if (matrix->parsed()) return cmd_attack_matrix(o);
    if (energy->parsed()) return cmd_energy_report(o);
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kInternal;
  }
  return kInvalid;
}
