#include "synchrony/protocol1.hpp"

#include <algorithm>
#include <string>
#include <vector>

#include "synchrony/errors.hpp"

namespace synchrony::protocol1 {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

void require_rank_one_assumptions(const ctrl::LinearAgent& agent) {
  const ctrl::StructuralReport report = ctrl::analyze_structure(agent);
  std::vector<std::string> failed;
  if (!report.stabilizable) failed.push_back("stabilizable");
  if (!report.detectable) failed.push_back("detectable");
  if (!report.left_invertible) failed.push_back("left invertible");
  if (!report.uniform_rank_one) failed.push_back("uniform rank one (rank C B = m)");
  if (!report.minimum_phase) failed.push_back("minimum phase");
  if (!failed.empty()) {
    std::string msg = "agent violates the non-collaborative design assumptions: not ";
    for (std::size_t i = 0; i < failed.size(); ++i) {
      if (i) msg += ", not ";
      msg += failed[i];
    }
    throw Error(ErrorKind::AssumptionViolated, msg);
  }
}

// Shared block extraction: checks that S and T actually produce the split
// S B = [0; B2], T C S^{-1} = [C1, 0; 0, I] and fills in the blocks.
RankOneForm build_form(const ctrl::LinearAgent& agent, const MatrixXd& S, const MatrixXd& T) {
  const int n = agent.n(), m = agent.m(), p = agent.p();
  if (S.rows() != n || S.cols() != n) {
    throw Error(ErrorKind::DimensionMismatch, "S must be n x n");
  }
  if (T.rows() != p || T.cols() != p) {
    throw Error(ErrorKind::DimensionMismatch, "T must be p x p");
  }

  Eigen::FullPivLU<MatrixXd> luS(S);
  if (!luS.isInvertible()) throw Error(ErrorKind::Mismatch, "S is singular");
  Eigen::FullPivLU<MatrixXd> luT(T);
  if (!luT.isInvertible()) throw Error(ErrorKind::Mismatch, "T is singular");
  const MatrixXd Sinv = luS.inverse();

  const MatrixXd SB = S * agent.B();
  const double b_scale = std::max(agent.B().norm(), 1.0);
  if (SB.topRows(n - m).norm() > 1e-10 * b_scale) {
    throw Error(ErrorKind::Mismatch, "S does not zero the upper block of S B");
  }
  const MatrixXd B2 = SB.bottomRows(m);
  Eigen::JacobiSVD<MatrixXd> svdB2(B2);
  if (svdB2.singularValues()(m - 1) <= 1e-10 * std::max(svdB2.singularValues()(0), 1.0)) {
    throw Error(ErrorKind::Mismatch, "lower block B2 of S B is singular");
  }

  const MatrixXd Ct = T * agent.C() * Sinv;
  const double c_scale = std::max(Ct.norm(), 1.0);
  if (Ct.topRightCorner(p - m, m).norm() > 1e-10 * c_scale) {
    throw Error(ErrorKind::Mismatch, "T C S^{-1} has a nonzero upper-right block");
  }
  if (Ct.bottomLeftCorner(m, n - m).norm() > 1e-10 * c_scale) {
    throw Error(ErrorKind::Mismatch, "T C S^{-1} has a nonzero lower-left block");
  }
  if ((Ct.bottomRightCorner(m, m) - MatrixXd::Identity(m, m)).norm() > 1e-10 * c_scale) {
    throw Error(ErrorKind::Mismatch, "lower-right block of T C S^{-1} is not the identity");
  }

  const MatrixXd At = S * agent.A() * Sinv;
  RankOneForm form;
  form.S = S;
  form.T = T;
  form.A11 = At.topLeftCorner(n - m, n - m);
  form.A12 = At.topRightCorner(n - m, m);
  form.A21 = At.bottomLeftCorner(m, n - m);
  form.A22 = At.bottomRightCorner(m, m);
  form.B2 = B2;
  form.C1 = Ct.topLeftCorner(p - m, n - m);
  return form;
}

}  // namespace

MatrixXd RankOneForm::a_tilde() const {
  const int q = static_cast<int>(A11.rows());
  const int mm = static_cast<int>(A22.rows());
  MatrixXd At(q + mm, q + mm);
  At.topLeftCorner(q, q) = A11;
  At.topRightCorner(q, mm) = A12;
  At.bottomLeftCorner(mm, q) = A21;
  At.bottomRightCorner(mm, mm) = A22;
  return At;
}

MatrixXd RankOneForm::b_tilde() const {
  const int q = static_cast<int>(A11.rows());
  const int mm = static_cast<int>(B2.rows());
  MatrixXd Bt = MatrixXd::Zero(q + mm, mm);
  Bt.bottomRows(mm) = B2;
  return Bt;
}

RankOneForm transform_form(const ctrl::LinearAgent& agent) {
  require_rank_one_assumptions(agent);
  const int n = agent.n(), m = agent.m(), p = agent.p();

  // x1 coordinates: orthonormal complement of the input directions.
  Eigen::JacobiSVD<MatrixXd> svdB(agent.B(), Eigen::ComputeFullU);
  const MatrixXd N = svdB.matrixU().rightCols(n - m).transpose();

  // y2 = T2 y recovers the rank-m part of the output; CB has full column
  // rank m under the assumptions, so its pseudoinverse is a left inverse.
  const MatrixXd CB = agent.C() * agent.B();
  Eigen::JacobiSVD<MatrixXd> svdCB(CB, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const MatrixXd T2 = svdCB.matrixV() *
                      svdCB.singularValues().head(m).cwiseInverse().asDiagonal() *
                      svdCB.matrixU().leftCols(m).transpose();
  const MatrixXd T1 = svdCB.matrixU().rightCols(p - m).transpose();

  MatrixXd T(p, p);
  T.topRows(p - m) = T1;
  T.bottomRows(m) = T2;
  MatrixXd S(n, n);
  S.topRows(n - m) = N;
  S.bottomRows(m) = T2 * agent.C();

  return build_form(agent, S, T);
}

RankOneForm validate_form(const ctrl::LinearAgent& agent, const MatrixXd& S, const MatrixXd& T) {
  return build_form(agent, S, T);
}

NcDesign design_nc(const ctrl::LinearAgent& agent) {
  return design_nc(agent, transform_form(agent));
}

NcDesign design_nc(const ctrl::LinearAgent& agent, const RankOneForm& form) {
  require_rank_one_assumptions(agent);
  if (form.n() != agent.n() || form.m() != agent.m() || form.p() != agent.p()) {
    throw Error(ErrorKind::Mismatch, "form dimensions do not match the agent");
  }
  NcDesign design;
  design.form = form;
  const int q = agent.n() - agent.m();
  if (q == 0) {
    design.H1 = MatrixXd::Zero(0, agent.p() - agent.m());
  } else if (agent.p() == agent.m()) {
    // No measured y1 channel: the observer runs open loop, which is fine
    // exactly when A11 is Hurwitz (equivalently, the agent is minimum phase).
    if (ctrl::spectral_abscissa(form.A11) >= 0.0) {
      throw Error(ErrorKind::NotDetectable, "A11 is not Hurwitz and no y1 channel is measured");
    }
    design.H1 = MatrixXd::Zero(q, 0);
  } else {
    design.H1 = ctrl::observer_gain(form.A11, form.C1);
  }
  design.P = ctrl::solve_care(form.a_tilde(), form.b_tilde());
  design.K = form.b_tilde().transpose() * design.P;
  return design;
}

NcDerivative nc_step(const NcState& state, const VectorXd& zeta, const NcDesign& design) {
  const int n = design.form.n(), m = design.form.m(), p = design.form.p();
  const int q = n - m;
  if (state.xi1_hat.size() != q) {
    throw Error(ErrorKind::DimensionMismatch, "observer state must have size n - m");
  }
  if (zeta.size() != p) {
    throw Error(ErrorKind::DimensionMismatch, "zeta must have size p");
  }

  const VectorXd zt = design.form.T * zeta;
  const VectorXd z1 = zt.head(p - m);
  const VectorXd z2 = zt.tail(m);

  VectorXd xi(n);
  xi << state.xi1_hat, z2;

  NcDerivative out;
  out.u = design.K * xi;
  out.drho = out.u.squaredNorm();
  out.u *= -state.rho;
  out.dxi1_hat = design.form.A11 * state.xi1_hat + design.form.A12 * z2 +
                 design.H1 * (design.form.C1 * state.xi1_hat - z1);
  return out;
}

}  // namespace synchrony::protocol1
