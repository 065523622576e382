#pragma once

#include <string>
#include <vector>

#include "bloch/config.hpp"
#include "bloch/estimates.hpp"

namespace bloch {

/// transverse-spec, carleman, series-s, sogge, resolvent-lp, conformal,
/// split-q, injectivity, bands, thomas, gelfand-check.
const std::vector<std::string>& subcommand_names();
bool is_subcommand(const std::string& name);

struct RunResult {
  std::vector<EstimateReport> reports;
  std::vector<std::string> artifacts;  // file names inside config.out_dir
  bool pass = true;                    // every pass-expected report passed
};

/// Runs one subcommand and writes its table(s), <name>_report.json and
/// <name>_manifest.json into config.out_dir. Throws ConfigError for an
/// unknown subcommand or a specification the subcommand cannot resolve.
RunResult run_subcommand(const std::string& name, const ExperimentConfig& config);

}  // namespace bloch
