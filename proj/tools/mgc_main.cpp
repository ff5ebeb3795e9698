#include <CLI11.hpp>

#include "mgc/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"mgc - modular geometric control toolkit for serial chains on SE(3)"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::vector<std::string> compare_paths;
  std::vector<std::string> sets;
  std::string out_dir = "out";
  std::string filter;
  std::optional<std::uint64_t> seed;

  auto* run_cmd = app.add_subcommand("run", "run one scenario, write trace.csv and summary.json");
  run_cmd->add_option("scenario", scenario_path, "scenario document (JSON)")->required();
  run_cmd->add_option("--out", out_dir, "output directory (created if absent)");
  run_cmd->add_option("--set", sets, "override key=value (repeatable)");
  run_cmd->add_option("--seed", seed, "perturbation seed override");

  auto* compare_cmd =
      app.add_subcommand("compare", "run several scenarios and write comparison.csv");
  compare_cmd->add_option("scenarios", compare_paths, "scenario documents (JSON)")->required();
  compare_cmd->add_option("--out", out_dir, "output directory (created if absent)");
  compare_cmd->add_option("--set", sets, "override key=value applied to every scenario");
  compare_cmd->add_option("--seed", seed, "perturbation seed override");

  auto* check_cmd = app.add_subcommand("check", "run the property suite");
  check_cmd->add_option("--filter", filter, "only properties whose name contains this substring");

  auto* schema_cmd = app.add_subcommand("schema", "print the scenario document schema");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? mgc::cli::kOk : mgc::cli::kUsage;
  }

  if (run_cmd->parsed()) return mgc::cli::cmd_run(scenario_path, sets, seed, out_dir);
  if (compare_cmd->parsed()) return mgc::cli::cmd_compare(compare_paths, sets, seed, out_dir);
  if (check_cmd->parsed()) return mgc::cli::cmd_check(filter);
  if (schema_cmd->parsed()) return mgc::cli::cmd_schema();
  return mgc::cli::kUsage;
}
