#pragma once

// Scenario files: JSON descriptions of one closed-loop experiment (agent
// model, graph, protocol choice, integration settings, verification
// thresholds).  Loading resolves graph file references and defaults; saving
// always writes the fully resolved form with the graph inlined, so a saved
// scenario reproduces the run byte for byte with no external files.

#include <complex>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "synchrony/sim.hpp"
#include "synchrony/verify.hpp"

namespace synchrony::tools {

struct Scenario {
  std::string name;
  sim::ScenarioConfig config;
  verify::Thresholds thresholds;
  // Optional closed-loop poles for the collaborative feedback; empty selects
  // the Riccati default.
  std::vector<std::complex<double>> feedback_poles;
};

// base_dir anchors relative graph file references.
Scenario scenario_from_json(const nlohmann::json& j,
                            const std::filesystem::path& base_dir);
Scenario load_scenario(const std::filesystem::path& path);

nlohmann::json scenario_to_json(const Scenario& s);
void save_scenario(const Scenario& s, const std::filesystem::path& path);

// JSON <-> Eigen helpers shared by the other tool sources (row-major nested
// arrays for matrices, flat arrays for vectors).
nlohmann::json matrix_to_json(const Eigen::MatrixXd& M);
nlohmann::json vector_to_json(const Eigen::VectorXd& v);
Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, const std::string& what);
Eigen::VectorXd vector_from_json(const nlohmann::json& j, const std::string& what);

}  // namespace synchrony::tools
