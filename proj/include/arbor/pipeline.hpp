#pragma once

#include <cstdint>
#include <string>

#include "json.hpp"

namespace arbor {

/// Resolved configuration of one CLI/pipeline invocation.
struct PipelineConfig {
  std::string command;
  std::string input;       // primary input path (system/decomposition JSON)
  std::string aux;         // secondary input (partition / decomposition map)
  std::string output = ".";
  std::string kind;        // generator kind or extended-family kind
  std::string against;     // compare target: "circle256" or a compactum JSON
  std::string format = "json";
  std::uint64_t seed = 0;
  int depth = 3;
  int k = 3;
  double ratio = 0.5;
  double tolerance = 1e-9;
  int threads = 1;  // capped by ARBOR_THREADS; computations are sequential
};

struct PipelineOutcome {
  int exit_code = 0;  // 0 ok, 1 checks failed, 2 usage, 3 I/O
  nlohmann::json report;
};

/// Runs one subcommand, writes its artifacts and `<command>-report.json`
/// under config.output, and returns the report.
PipelineOutcome run_pipeline(const PipelineConfig& config);

}  // namespace arbor
