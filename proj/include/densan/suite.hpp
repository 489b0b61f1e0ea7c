#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "densan/config.hpp"
#include "densan/svg.hpp"

namespace densan {

struct CsvRow {
  std::string quantity;
  std::string index;
  double value = 0.0;
  double error = 0.0;
};

struct Check {
  std::string suite;
  std::string name;
  bool pass = false;
  nlohmann::ordered_json values = nlohmann::ordered_json::object();
  std::vector<CsvRow> rows;
  std::string note;
};

struct PlotFile {
  std::string name;  // file name under plots/
  Plot plot;
};

struct SuiteResult {
  std::vector<Check> checks;
  std::vector<PlotFile> plots;
  nlohmann::ordered_json residual;  // eigen-residual of the model under the configured potential
  nlohmann::ordered_json terms;     // expansion trace, null unless requested
  bool all_pass() const;
};

struct SuiteOptions {
  bool trace_terms = false;
};

/// Runs one named suite ("all" runs every suite in order). Numerical failures
/// inside a check mark that check failed with the error text as its note.
SuiteResult run_suite(const RunConfig& cfg, const std::string& suite, const SuiteOptions& opts = {});

/// report.json: schema version, echoed config, residual, checks, overall status.
/// Contains no timestamps or timings, so equal inputs give equal bytes.
nlohmann::ordered_json report_json(const RunConfig& cfg, const std::string& suite, const SuiteResult& result);

/// Long-format table: suite,check,quantity,index,value,error.
std::string tables_csv(const SuiteResult& result);

/// Writes report.json, tables.csv, plots/*.svg and (if traced) terms.json.
void write_outputs(const std::filesystem::path& dir, const RunConfig& cfg, const std::string& suite,
                   const SuiteResult& result);

/// Parent chain of one traced expansion term, root first.
/// Throws std::out_of_range for an unknown id.
std::string explain_term(const nlohmann::json& terms, long long id);

}  // namespace densan
