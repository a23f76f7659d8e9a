// Command-line driver: experiment runs and the oracle self-checks.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "nsdarcy/experiments.hpp"
#include "nsdarcy/mms.hpp"
#include "nsdarcy/oracle.hpp"

using namespace nsdarcy;

namespace {

const char* kSynopsis =
    "usage:\n"
    "  solver run <experiment> [--config FILE|CASE] [--out DIR] [--seed N] [--case CASE] [--scheme N]\n"
    "             [--set key=value]...\n"
    "  solver test-oracles [--seed N]\n"
    "experiments: convergence, filtration, phase-separation, droplet, bubble, custom\n";

std::string read_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("config: cannot read " + path);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

void put(ConfigEntries& e, const std::string& key, const std::string& value) {
  for (auto& [k, v] : e)
    if (k == key) {
      v = value;
      return;
    }
  e.emplace_back(key, value);
}

int test_oracles(unsigned long long seed) {
  int failed = 0;
  auto report = [&](const oracle::CheckResult& r, double tol) {
    const bool ok = r.error <= tol * r.scale;
    if (!ok) ++failed;
    std::cout << (ok ? "PASS " : "FAIL ") << r.name << " error=" << r.error << " scale=" << r.scale << '\n';
  };
  const auto assembly = oracle::run_assembly_checks(seed);
  for (const auto& r : assembly) report(r, 1e-12);
  for (const auto& r : forcing_checks(seed)) report(r, 1e-6);
  std::cout << (failed ? "oracles: " + std::to_string(failed) + " failed" : std::string("oracles: all passed")) << '\n';
  return failed ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Navier-Stokes-Darcy and phase-field solver"};
  app.require_subcommand(1);
  app.footer(kSynopsis);

  auto* run = app.add_subcommand("run", "run an experiment preset");
  std::string experiment, config, out, case_name;
  std::vector<std::string> sets;
  unsigned long long seed = 0;
  int scheme = 0;
  run->add_option("experiment", experiment, "experiment name")->required();
  run->add_option("--config", config, "config file, or a case name of the experiment");
  run->add_option("--out", out, "output directory");
  auto* seed_opt = run->add_option("--seed", seed, "PRNG seed");
  run->add_option("--case", case_name, "case of the experiment");
  run->add_option("--scheme", scheme, "time scheme (1, 2; 3 for phase-field runs)");
  run->add_option("--set", sets, "extra key=value override (repeatable)");

  auto* oracles = app.add_subcommand("test-oracles", "dense-assembly and forcing oracles");
  unsigned long long oracle_seed = 7;
  oracles->add_option("--seed", oracle_seed, "PRNG seed for random inputs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << '\n' << kSynopsis;
    return kExitUsage;
  }

  if (oracles->parsed()) return test_oracles(oracle_seed);

  try {
    ConfigEntries entries;
    if (!config.empty()) {
      if (std::filesystem::is_regular_file(config)) {
        entries = parse_entries(read_file(config));
      } else if (config.find('/') == std::string::npos && config.find('.') == std::string::npos) {
        put(entries, "case", config);
      } else {
        throw ConfigError("config: cannot read " + config);
      }
    }
    for (const auto& [k, v] : entries)
      if (k == "experiment" && v != experiment)
        throw ConfigError("experiment: config file says '" + v + "' but the command line says '" + experiment + "'");
    put(entries, "experiment", experiment);
    if (!case_name.empty()) put(entries, "case", case_name);
    if (scheme != 0) put(entries, "scheme", std::to_string(scheme));
    if (!out.empty()) put(entries, "out", out);
    if (*seed_opt) put(entries, "seed", std::to_string(seed));
    for (const std::string& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw ConfigError("--set: expected key=value, got '" + s + "'");
      std::ostringstream line;
      line << s << '\n';
      for (const auto& [k, v] : parse_entries(line.str())) put(entries, k, v);
    }
    const RunConfig cfg = resolve_config(entries);
    return run_experiment(cfg, std::cout);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n' << kSynopsis;
    return kExitUsage;
  }
}
