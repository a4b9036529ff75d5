#pragma once

// The four CLI commands.  Each throws synchrony::Error on failure; the
// executable's main maps error kinds to exit codes.

#include <cstdint>
#include <optional>
#include <string>

namespace synchrony::tools {

struct AnalyzeOptions {
  std::string graph_path;     // edge-list file, or
  std::string scenario_path;  // scenario whose graph should be analyzed
  std::string out_json;       // optional JSON artifact path
};

struct DesignOptions {
  std::string scenario_path;
  std::string out_json;
};

struct RunOptions {
  std::string scenario_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;  // overrides the scenario's init seed
};

struct PlotOptions {
  std::string run_dir;
  std::string out_dir;  // defaults to <run_dir>/plots
};

int cmd_analyze(const AnalyzeOptions& options);
int cmd_design(const DesignOptions& options);
int cmd_run(const RunOptions& options);
int cmd_plot(const PlotOptions& options);

}  // namespace synchrony::tools
