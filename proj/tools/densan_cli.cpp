// densan: run verification suites and inspect traced expansion terms.
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "densan/config.hpp"
#include "densan/errors.hpp"
#include "densan/suite.hpp"

namespace {

int run_command(const std::string& config_path, std::optional<std::string> suite, std::optional<std::string> out,
                std::optional<std::uint64_t> seed, bool trace) {
  densan::RunConfig cfg;
  try {
    cfg = densan::load_config(config_path, seed);
    if (suite) {
      const auto& names = densan::suite_names();
      if (std::find(names.begin(), names.end(), *suite) == names.end()) {
        throw densan::ConfigError("suite", "unknown suite '" + *suite + "'");
      }
      cfg.suite = *suite;
    }
    if (out) cfg.output_dir = *out;
  } catch (const densan::ConfigError& e) {
    std::cerr << "config error in field '" << e.field() << "': " << e.what() << "\n";
    return 2;
  }

  densan::SuiteOptions opts;
  opts.trace_terms = trace;
  const auto result = densan::run_suite(cfg, cfg.suite, opts);
  densan::write_outputs(cfg.output_dir, cfg, cfg.suite, result);

  std::size_t passed = 0;
  for (const auto& c : result.checks) {
    std::cout << (c.pass ? "PASS " : "FAIL ") << c.suite << "/" << c.name;
    if (!c.note.empty()) std::cout << "  (" << c.note << ")";
    std::cout << "\n";
    if (c.pass) ++passed;
  }
  std::cout << passed << "/" << result.checks.size() << " checks passed; outputs in " << cfg.output_dir << "\n";
  return result.all_pass() ? 0 : 1;
}

int explain_command(const std::string& dir, long long id) {
  std::ifstream f(dir + "/terms.json");
  if (!f) {
    std::cerr << "no terms.json in " << dir << " (run with --trace-terms)\n";
    return 2;
  }
  nlohmann::json terms;
  try {
    f >> terms;
    std::cout << densan::explain_term(terms, id);
  } catch (const std::out_of_range& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "cannot read terms.json: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"densan: analyticity checks for one-electron densities"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> suite, out;
  std::optional<std::uint64_t> seed;
  bool trace = false;
  auto* run = app.add_subcommand("run", "run a verification suite");
  run->add_option("--config", config_path, "JSON config file")->required()->check(CLI::ExistingFile);
  run->add_option("--suite", suite, "density, derivs, clusters, potential-bounds, growth, cusp, support or all");
  run->add_option("--out", out, "output directory (overrides the config)");
  run->add_option("--seed", seed, "RNG seed (overrides the config)");
  run->add_flag("--trace-terms", trace, "write terms.json with the expansion tree");

  std::string dir;
  long long term = -1;
  auto* explain = app.add_subcommand("explain", "print the derivation chain of a traced term");
  explain->add_option("--out", dir, "output directory of a traced run")->required();
  explain->add_option("--term", term, "term id from terms.json")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return run_command(config_path, suite, out, seed, trace);
    return explain_command(dir, term);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
