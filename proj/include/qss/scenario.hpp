#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace qss {

using json = nlohmann::json;

// Configuration problems (parse failures, unknown keys, range violations).
// The CLI maps these to exit code 2; other failures exit 3.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ScenarioKind { session, table1, sweep_distance, sweep_users, stabilizer, plan };

const char* scenario_kind_name(ScenarioKind kind);

struct Scenario {
  std::string name;
  ScenarioKind kind = ScenarioKind::session;
  std::uint64_t seed = 1;
  json parameters = json::object();  // user overlay on the kind's defaults
};

struct ValidationReport {
  bool ok = false;
  std::vector<std::string> issues;
  json resolved;
};

struct RunOptions {
  std::string out_dir = ".";
  bool write_timestamp = true;
  std::optional<std::uint64_t> seed_override;
};

struct RunResult {
  std::vector<std::string> files_written;
  json summary;
};

// Reference document with every scenario kind's defaults.
json default_reference();

json read_json_file(const std::string& path);

// Parses the top-level scenario document (kind, name, seed, parameters).
Scenario parse_scenario(const json& doc);

// Full diagnostics without running: unknown keys, out-of-range values and
// the resolved parameter set.
ValidationReport validate_scenario(const json& doc);

// Defaults overlaid with the scenario parameters; throws ConfigError on any
// unknown key or range violation.
json resolve_parameters(ScenarioKind kind, const json& overlay);

// Executes a scenario, writing CSV data files plus a JSON summary into
// options.out_dir. Every output carries a header with the resolved
// parameters and the effective seed.
RunResult run_scenario(const Scenario& scenario, const RunOptions& options);

// Entry point behind the qss-sim binary. Exit codes: 0 ok, 2 config error,
// 3 runtime error.
int run_cli(int argc, const char* const* argv);

}  // namespace qss
