#pragma once

// Closed-loop network simulation.  All agents share one model and one
// protocol design; the graph couples them through zeta_i = sum_j l_ij y_j
// (and zeta~_i = sum_j l_ij x^_j for the collaborative protocol).  Fixed-step
// classical Runge-Kutta keeps runs deterministic and cheap to reproduce.

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "synchrony/ctrl.hpp"
#include "synchrony/graph.hpp"
#include "synchrony/protocol1.hpp"
#include "synchrony/protocol2.hpp"

namespace synchrony::sim {

enum class ProtocolKind { NonCollaborative, Collaborative };

// Initial agent states: explicit vectors when `states` is nonempty, otherwise
// i.i.d. uniform samples from [low, high] drawn from a fixed-seed generator
// (same seed => bitwise identical states on every run).
struct InitSpec {
  std::vector<Eigen::VectorXd> states;
  std::uint64_t seed = 1;
  double low = -2.0;
  double high = 2.0;
};

struct ScenarioConfig {
  ctrl::LinearAgent agent;
  graph::DirectedWeightedGraph graph;
  ProtocolKind protocol = ProtocolKind::NonCollaborative;
  double horizon = 50.0;       // simulated seconds
  double step = 1e-3;          // RK4 step size
  int record_stride = 50;      // keep every record_stride-th step (plus first/last)
  InitSpec init;               // agent state initialization
  double rho0 = 0.0;           // initial adaptive gain, all agents
  // Optional explicit observer initial states (size n-m or n per protocol);
  // empty means zeros.
  std::vector<Eigen::VectorXd> observer0;
};

// Recorded samples, one stacked matrix per record with one column per agent.
struct Trajectory {
  int agent_count = 0;
  int n = 0, m = 0, p = 0;
  ProtocolKind protocol = ProtocolKind::NonCollaborative;

  std::vector<double> times;
  std::vector<Eigen::MatrixXd> x;          // n x N agent states
  std::vector<Eigen::MatrixXd> observer;   // (n-m) x N or n x N protocol states
  std::vector<Eigen::VectorXd> rho;        // N adaptive gains
  std::vector<Eigen::MatrixXd> y;          // p x N outputs
  std::vector<Eigen::MatrixXd> zeta;       // p x N network output signals
  std::vector<Eigen::MatrixXd> zeta_tilde; // n x N exchanged-estimate signals (collaborative)
  std::vector<Eigen::MatrixXd> u;          // m x N controls

  std::size_t record_count() const { return times.size(); }
};

// Applies the Laplacian across agents: column i of the result is
// sum_j l_ij values.col(j).  Identical columns map to (numerically) zero.
Eigen::MatrixXd network_signals(const Eigen::MatrixXd& L,
                                const Eigen::MatrixXd& values);

// Realized initial agent states for a config (explicit list or seeded draw).
std::vector<Eigen::VectorXd> initial_states(const ScenarioConfig& config);

// Integrate the closed loop under the matching protocol design.  Throws
// ErrorKind::NonFiniteState (reporting time and agent) if any state component
// leaves [-1e9, 1e9] or becomes non-finite.  Deterministic: identical inputs
// produce bitwise identical trajectories.
Trajectory integrate(const ScenarioConfig& config,
                     const protocol1::NcDesign& design);
Trajectory integrate(const ScenarioConfig& config,
                     const protocol2::ColDesign& design);

}  // namespace synchrony::sim
