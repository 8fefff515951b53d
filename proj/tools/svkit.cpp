// Command-line front end. Talks to the toolkit only through the C interface.
#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "svkit/svkit.h"

int main(int argc, char** argv) {
  CLI::App app{"Subunit-vector and maximum-principle verification toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(svk_version()));

  std::string config, out_dir = ".", format;
  std::optional<std::uint64_t> seed;
  auto* run = app.add_subcommand("run", "Run a scenario config and write its reports");
  run->add_option("--config", config, "Scenario config (structured text)")->required();
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--format", format, "Report format")->check(CLI::IsMember({"structured-text", "csv"}));
  run->add_option("--seed", seed, "Override the config seed");

  auto* catalog = app.add_subcommand("catalog", "List built-in families, operator kinds and tasks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (*catalog) {
    std::size_t needed = 0;
    svk_catalog(nullptr, 0, &needed);
    std::vector<char> buf(needed);
    if (svk_catalog(buf.data(), buf.size(), &needed) != SVK_OK) {
      std::fprintf(stderr, "error: %s\n", svk_last_error());
      return 2;
    }
    std::fputs(buf.data(), stdout);
    return 0;
  }

  int exit_code = 2;
  const std::uint64_t seed_value = seed.value_or(0);
  const svk_status st = svk_run_scenario(config.c_str(), out_dir.c_str(), format.empty() ? nullptr : format.c_str(),
                                         seed ? &seed_value : nullptr, &exit_code);
  if (st != SVK_OK) {
    std::fprintf(stderr, "error (%s): %s\n", svk_status_name(st), svk_last_error());
    return 2;
  }
  if (exit_code == 2) std::fprintf(stderr, "config error: %s\n", svk_last_error());
  return exit_code;
}
