#pragma once

// Non-collaborative adaptive protocol.  Each agent sees only the diffusive
// network signal zeta_i = sum_j l_ij y_j, estimates the unmeasured part of
// that signal with a reduced-order observer, and applies u_i = -rho_i B~^T P
// xi^_i with an adaptive gain rho_i that integrates the squared feedback
// signal.  The design needs the agent to be uniform rank one and minimum
// phase on top of stabilizable + detectable; nothing about the graph enters
// the design, which is what makes the protocol scale-free.

#include <Eigen/Dense>

#include "synchrony/ctrl.hpp"

namespace synchrony::protocol1 {

// Coordinates in which the input and output split cleanly: S x = [x1; x2]
// with S B = [0; B2] (B2 invertible), and T y = [y1; y2] with
// T C S^{-1} = [C1, 0; 0, I_m].  The A~ = S A S^{-1} blocks are stored with
// x1 of size n - m and x2 of size m.
struct RankOneForm {
  Eigen::MatrixXd S;    // n x n state change of basis
  Eigen::MatrixXd T;    // p x p output change of basis
  Eigen::MatrixXd A11;  // (n-m) x (n-m)
  Eigen::MatrixXd A12;  // (n-m) x m
  Eigen::MatrixXd A21;  // m x (n-m)
  Eigen::MatrixXd A22;  // m x m
  Eigen::MatrixXd B2;   // m x m, invertible
  Eigen::MatrixXd C1;   // (p-m) x (n-m)

  int n() const { return static_cast<int>(S.rows()); }
  int m() const { return static_cast<int>(B2.rows()); }
  int p() const { return static_cast<int>(T.rows()); }

  Eigen::MatrixXd a_tilde() const;  // assembled S A S^{-1}
  Eigen::MatrixXd b_tilde() const;  // assembled S B = [0; B2]
};

// Constructs S and T from scratch (orthonormal complement of B plus a
// pseudoinverse of C B).  Throws ErrorKind::AssumptionViolated, listing the
// failed properties, unless the agent is stabilizable, detectable, uniform
// rank one, and minimum phase.
RankOneForm transform_form(const ctrl::LinearAgent& agent);

// Same decomposition for caller-supplied invertible S and T; throws
// ErrorKind::Mismatch when they do not produce the required block structure.
RankOneForm validate_form(const ctrl::LinearAgent& agent,
                          const Eigen::MatrixXd& S, const Eigen::MatrixXd& T);

// Everything an agent needs at runtime.  Independent of the network: two
// designs for the same agent are identical no matter which graph they later
// run on.
struct NcDesign {
  RankOneForm form;
  Eigen::MatrixXd H1;      // (n-m) x (p-m) observer gain, A11 + H1 C1 Hurwitz
  Eigen::MatrixXd P;       // stabilizing Riccati solution for (A~, B~)
  Eigen::MatrixXd K;       // B~^T P, cached feedback row block
};

NcDesign design_nc(const ctrl::LinearAgent& agent);
NcDesign design_nc(const ctrl::LinearAgent& agent, const RankOneForm& form);

// Per-agent protocol state: reduced-order observer estimate and adaptive gain.
struct NcState {
  Eigen::VectorXd xi1_hat;  // size n - m
  double rho = 0.0;
};

struct NcDerivative {
  Eigen::VectorXd dxi1_hat;
  double drho = 0.0;
  Eigen::VectorXd u;  // control produced at this state, size m
};

// Right-hand side of the protocol given the current network signal zeta_i.
// rho enters only through u; drho = ||K xi^||^2 is nonnegative by
// construction, so rho never decreases along trajectories.
NcDerivative nc_step(const NcState& state, const Eigen::VectorXd& zeta,
                     const NcDesign& design);

}  // namespace synchrony::protocol1
