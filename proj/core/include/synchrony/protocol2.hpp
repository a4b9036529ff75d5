#pragma once

// Collaborative adaptive protocol.  Agents exchange their internal estimates
// x^_j over the same graph as the output measurements, so each agent can form
// zeta~_i = sum_j l_ij x^_j and correct its observer with the innovation
// C zeta~_i - zeta_i.  Works for any stabilizable and observable agent (no
// minimum-phase or rank condition), again with a graph-independent design.

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "synchrony/ctrl.hpp"

namespace synchrony::protocol2 {

struct ColDesign {
  Eigen::MatrixXd Q;  // stabilizing solution of A Q + Q A^T - Q C^T C Q + I = 0
  Eigen::MatrixXd F;  // state feedback, A + B F Hurwitz
  // Non-fatal deviations from the nominal assumptions (e.g. the output pair
  // is detectable but not observable); empty when everything holds.
  std::vector<std::string> warnings;
};

// Throws ErrorKind::AssumptionViolated when (A, B) is not stabilizable or
// (C, A) is not detectable.  A detectable-but-not-observable pair still
// yields a valid design but records a warning, since the nominal requirement
// is observability.
ColDesign design_col(const ctrl::LinearAgent& agent);

// Same, with F placed at the given closed-loop poles instead of the Riccati
// default (single-input agents only).
ColDesign design_col(const ctrl::LinearAgent& agent,
                     const std::vector<std::complex<double>>& feedback_poles);

// Per-agent protocol state: full-order estimate and adaptive gain.
struct ColState {
  Eigen::VectorXd x_hat;  // size n
  double rho = 0.0;
};

struct ColDerivative {
  Eigen::VectorXd dx_hat;
  double drho = 0.0;
};

// Control is a static feedback on the agent's own estimate.
Eigen::VectorXd col_control(const ColState& state, const ColDesign& design);

// Observer update given the network signals zeta_i (outputs) and zeta~_i
// (exchanged estimates) and the control u_i currently applied:
//   dx^ = A x^ + B u - rho Q C^T (C zeta~ - zeta),   drho = ||C zeta~ - zeta||^2.
ColDerivative col_step(const ColState& state, const ctrl::LinearAgent& agent,
                       const Eigen::VectorXd& zeta,
                       const Eigen::VectorXd& zeta_tilde,
                       const Eigen::VectorXd& u, const ColDesign& design);

}  // namespace synchrony::protocol2
