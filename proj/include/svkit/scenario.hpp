#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "svkit/io.hpp"
#include "svkit/operators.hpp"

namespace svkit {

enum class ReportFormat { StructuredText, Csv };
ReportFormat parse_report_format(const std::string& s);

struct ScenarioOptions {
  std::string out_dir = ".";
  std::optional<ReportFormat> format;  // overrides the config
  std::optional<std::uint64_t> seed;   // overrides the config
};

struct ScenarioResult {
  int exit_code = 2;  // 0 all pass, 1 any refutation or failure, 2 input/config error
  std::string name;
  std::vector<std::string> files;  // written files, in order
  int passed = 0;
  int failed = 0;
  std::string error;  // config error message when exit_code == 2
};

/// Runs every task of a scenario config and writes the reports into options.out_dir.
ScenarioResult run_scenario(const std::string& config_path, const ScenarioOptions& options);
/// Same, from an already parsed config; relative file references resolve against base_dir.
ScenarioResult run_scenario_json(const Json& config, const std::string& base_dir, const ScenarioOptions& options);

/// A family reference: catalog name string, {"file": path}, or an inline polynomial family document.
/// An optional "domain" member overrides the domain box.
VectorFieldFamily family_from_ref(const Json& ref, const std::string& base_dir);

struct BuiltOperator {
  OperatorSpec F;
  std::optional<LinearOperatorFamily> linear;  // set for hjb / linear descriptors
  bool hjb_inf_homogeneous = false;
};

/// Operator descriptor kinds: pucci, inf-laplacian, m-laplacian, model, hjb, isaacs, linear, counterexample.
BuiltOperator operator_from_json(const Json& desc, const VectorFieldFamily& family);

std::vector<std::string> catalog_operator_kinds();
std::vector<std::string> scenario_task_names();

}  // namespace svkit
