#pragma once

// Linear time-invariant agent models and the control-theoretic primitives the
// protocol designs are built from: structural analysis (stabilizability,
// detectability, invariant zeros), continuous-time algebraic Riccati solves,
// and stabilizing state-feedback / observer gains.

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace synchrony::ctrl {

// Agent dynamics dx/dt = A x + B u, y = C x with B of full column rank and
// C of full row rank (validated on construction).
class LinearAgent {
 public:
  LinearAgent(Eigen::MatrixXd A, Eigen::MatrixXd B, Eigen::MatrixXd C);

  const Eigen::MatrixXd& A() const { return A_; }
  const Eigen::MatrixXd& B() const { return B_; }
  const Eigen::MatrixXd& C() const { return C_; }

  int n() const { return static_cast<int>(A_.rows()); }  // states
  int m() const { return static_cast<int>(B_.cols()); }  // inputs
  int p() const { return static_cast<int>(C_.rows()); }  // outputs

 private:
  Eigen::MatrixXd A_, B_, C_;
};

// Structural facts about an agent that decide which protocol designs apply.
struct StructuralReport {
  bool stabilizable = false;
  bool detectable = false;
  bool observable = false;
  // Full normal column rank of the system pencil [A - sI, B; C, 0].
  bool left_invertible = false;
  // Left invertible with rank(C B) = m: relative degree one in every channel.
  bool uniform_rank_one = false;
  // All invariant zeros strictly in the open left half plane (vacuously true
  // when there are none).
  bool minimum_phase = false;
  std::vector<std::complex<double>> invariant_zeros;
  std::vector<std::complex<double>> open_loop_eigenvalues;
};

// Eigenvalue tests use a PBH rank criterion; invariant zeros come from a
// row-compressed generalized eigenproblem of the system pencil, with every
// candidate confirmed by an explicit rank drop of the pencil itself.
StructuralReport analyze_structure(const LinearAgent& agent);

// Largest real part over the spectrum of M.
double spectral_abscissa(const Eigen::MatrixXd& M);

bool is_stabilizable(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);
bool is_detectable(const Eigen::MatrixXd& A, const Eigen::MatrixXd& C);
bool is_observable(const Eigen::MatrixXd& A, const Eigen::MatrixXd& C);

// Unique stabilizing solution P = P^T > 0 of
//   A^T P + P A - P B B^T P + I = 0.
// Newton iteration with guaranteed-stabilizing initialization; the result
// satisfies ||residual||_F <= 1e-8 * (1 + ||P||_F^2) or the solver throws
// ErrorKind::SolverDivergence.  Throws ErrorKind::NotStabilizable when no
// stabilizing solution exists.
Eigen::MatrixXd solve_care(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);

// Solves M^T X + X M + W = 0 for X given M Hurwitz (dense Kronecker route;
// intended for the small state dimensions used here).
Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& M, const Eigen::MatrixXd& W);

// F with A + B F Hurwitz.  Default: F = -B^T P from solve_care.
Eigen::MatrixXd stabilizing_gain(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);

// Single-input pole placement (Ackermann); poles must be closed under
// conjugation and the pair controllable.
Eigen::MatrixXd stabilizing_gain(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                 const std::vector<std::complex<double>>& poles);

// H with A + H C Hurwitz, via the dual Riccati design.
Eigen::MatrixXd observer_gain(const Eigen::MatrixXd& A, const Eigen::MatrixXd& C);

}  // namespace synchrony::ctrl
