#pragma once

// Post-run verification: turns a recorded trajectory plus the graph structure
// into quantitative synchronization metrics and a verdict.  All metrics are
// time averages over the trailing 10% of the recorded window so that a single
// late oscillation cannot fake convergence.

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "synchrony/graph.hpp"
#include "synchrony/sim.hpp"

namespace synchrony::verify {

struct Thresholds {
  double disagreement = 1e-2;   // max output spread inside a bicomponent
  double beta_residual = 5e-2;  // non-basic output vs convex combination
  double zeta = 1e-2;           // network signal norms
  double rho_slope = 1e-3;      // residual growth rate of adaptive gains
};

enum class Verdict {
  ClassicalSync,  // single basic bicomponent and a globally shared output
  WeakSync,       // per-bicomponent agreement + convex-combination tracking
  NotStabilized,  // network signals failed to settle
};

const char* to_string(Verdict v) noexcept;

struct SyncReport {
  Verdict verdict = Verdict::NotStabilized;
  // max_i of the windowed average of ||zeta_i(t)||.
  double terminal_zeta_norm = 0.0;
  // Same for ||zeta^_i(t)|| recomputed from the exchanged estimates
  // (collaborative runs only).
  std::optional<double> terminal_zeta_hat_norm;
  // Windowed average of the max pairwise output distance, per basic
  // bicomponent and globally.
  std::vector<double> per_bicomponent_disagreement;
  double global_disagreement = 0.0;
  // Windowed average distance of each non-basic output from its convex
  // combination of bicomponent mean outputs (decomposition row order).
  std::vector<double> beta_residuals;
  Eigen::VectorXd rho_final;           // rho_i at the last record
  Eigen::VectorXd rho_terminal_slope;  // mean drho/dt over the window
};

// Computes the report; throws ErrorKind::Mismatch when the trajectory and
// decomposition disagree about the number of agents.  The beta table must
// come from beta_coefficients(d) (or an equivalent fit).
SyncReport analyze(const sim::Trajectory& traj,
                   const graph::LaplacianDecomposition& d,
                   const graph::ConvexCombinationTable& beta,
                   const Thresholds& thresholds);

// Least-squares estimate of the convex-combination table straight from the
// trajectory: regresses each non-basic agent's windowed outputs on the
// per-bicomponent mean outputs.  Independent of beta_coefficients, which
// makes it a useful cross-check of the closed-form table.
graph::ConvexCombinationTable fit_beta(const sim::Trajectory& traj,
                                       const graph::LaplacianDecomposition& d);

}  // namespace synchrony::verify
