#pragma once

// Run artifacts: design and report serialization plus the trajectory CSV
// format (one row per record and agent; doubles printed with %.17g so the
// files round-trip exactly).

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "synchrony/ctrl.hpp"
#include "synchrony/protocol1.hpp"
#include "synchrony/protocol2.hpp"
#include "synchrony/sim.hpp"
#include "synchrony/verify.hpp"

namespace synchrony::tools {

nlohmann::json design_to_json(const ctrl::StructuralReport& report,
                              const protocol1::NcDesign& design);
nlohmann::json design_to_json(const ctrl::StructuralReport& report,
                              const protocol2::ColDesign& design);

nlohmann::json report_to_json(const verify::SyncReport& report,
                              const verify::Thresholds& thresholds);
std::string report_to_text(const verify::SyncReport& report,
                           const verify::Thresholds& thresholds);

// Header: t,agent,x1..xn,y1..yp,rho,zeta_norm,u1..um; agents are 1-based.
void write_trajectory_csv(const sim::Trajectory& traj, const std::filesystem::path& path);

// The slice of the CSV that the plotting command needs.
struct TrajectoryTable {
  int agents = 0, n = 0, p = 0, m = 0;
  std::vector<double> times;                         // one per record
  std::vector<std::vector<Eigen::VectorXd>> y;       // [agent][record], size p
  std::vector<std::vector<double>> rho;              // [agent][record]
  std::vector<std::vector<double>> zeta_norm;        // [agent][record]
};

TrajectoryTable read_trajectory_csv(const std::filesystem::path& path);

}  // namespace synchrony::tools
