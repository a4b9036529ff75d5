#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "app.hpp"
#include "synchrony/errors.hpp"

namespace {

int exit_code_for(synchrony::ErrorKind kind) {
  using synchrony::ErrorKind;
  switch (kind) {
    case ErrorKind::AssumptionViolated:
    case ErrorKind::NotStabilizable:
    case ErrorKind::NotDetectable:
      return 2;
    case ErrorKind::ParseError:
      return 3;
    case ErrorKind::NonFiniteState:
    case ErrorKind::SolverDivergence:
      return 4;
    default:
      return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  using namespace synchrony::tools;

  CLI::App app{"scale-free adaptive synchronization of linear agent networks"};
  app.require_subcommand(1);

  AnalyzeOptions analyze_options;
  CLI::App* analyze = app.add_subcommand(
      "analyze", "Bicomponent structure and mixing weights of a graph");
  CLI::Option* analyze_graph = analyze->add_option(
      "--graph", analyze_options.graph_path, "Edge-list file to analyze");
  CLI::Option* analyze_scenario =
      analyze->add_option("--scenario", analyze_options.scenario_path,
                          "Scenario whose graph should be analyzed");
  analyze_graph->excludes(analyze_scenario);
  analyze->add_option("--out", analyze_options.out_json,
                      "Write the analysis as JSON to this path");

  DesignOptions design_options;
  CLI::App* design = app.add_subcommand(
      "design", "Structural checks and protocol design for a scenario's agent");
  design->add_option("--scenario", design_options.scenario_path,
                     "Scenario file")
      ->required();
  design->add_option("--out", design_options.out_json,
                     "Write the design as JSON to this path");

  RunOptions run_options;
  std::uint64_t seed_value = 0;
  CLI::App* run = app.add_subcommand(
      "run", "Design, simulate, verify, and write run artifacts");
  run->add_option("--scenario", run_options.scenario_path, "Scenario file")
      ->required();
  run->add_option("--out", run_options.out_dir, "Output directory")->required();
  CLI::Option* seed_option = run->add_option(
      "--seed", seed_value, "Override the scenario's initial-state seed");

  PlotOptions plot_options;
  CLI::App* plot = app.add_subcommand(
      "plot", "Render SVG plots from a run's artifacts");
  plot->add_option("--run", plot_options.run_dir,
                   "Directory written by the run command")
      ->required();
  plot->add_option("--out", plot_options.out_dir,
                   "Plot directory (default: <run>/plots)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (analyze->parsed()) return cmd_analyze(analyze_options);
    if (design->parsed()) return cmd_design(design_options);
    if (run->parsed()) {
      if (seed_option->count() > 0) run_options.seed = seed_value;
      return cmd_run(run_options);
    }
    if (plot->parsed()) return cmd_plot(plot_options);
  } catch (const synchrony::Error& e) {
    std::cerr << "error: " << e.what() << " [" << to_string(e.kind()) << "]\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
