#include "synchrony/protocol2.hpp"

#include <string>
#include <vector>

#include "synchrony/errors.hpp"

namespace synchrony::protocol2 {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Gate shared by both design entry points; returns the structural report so
// the observability warning can be attached when needed.
ctrl::StructuralReport require_collaborative_assumptions(const ctrl::LinearAgent& agent) {
  const ctrl::StructuralReport report = ctrl::analyze_structure(agent);
  std::vector<std::string> failed;
  if (!report.stabilizable) failed.push_back("stabilizable");
  if (!report.detectable) failed.push_back("detectable");
  if (!failed.empty()) {
    std::string msg = "agent violates the collaborative design assumptions: not ";
    for (std::size_t i = 0; i < failed.size(); ++i) {
      if (i) msg += ", not ";
      msg += failed[i];
    }
    throw Error(ErrorKind::AssumptionViolated, msg);
  }
  return report;
}

ColDesign finish_design(const ctrl::LinearAgent& agent, const ctrl::StructuralReport& report,
                        MatrixXd F) {
  ColDesign design;
  if (!report.observable) {
    design.warnings.push_back(
        "output pair is detectable but not observable; the nominal design requires an "
        "observable pair, proceeding because the dual Riccati design only needs detectability");
  }
  design.Q = ctrl::solve_care(agent.A().transpose(), agent.C().transpose());
  design.F = std::move(F);
  return design;
}

}  // namespace

ColDesign design_col(const ctrl::LinearAgent& agent) {
  const auto report = require_collaborative_assumptions(agent);
  return finish_design(agent, report, ctrl::stabilizing_gain(agent.A(), agent.B()));
}

ColDesign design_col(const ctrl::LinearAgent& agent,
                     const std::vector<std::complex<double>>& feedback_poles) {
  const auto report = require_collaborative_assumptions(agent);
  return finish_design(agent, report,
                       ctrl::stabilizing_gain(agent.A(), agent.B(), feedback_poles));
}

VectorXd col_control(const ColState& state, const ColDesign& design) {
  if (state.x_hat.size() != design.F.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "estimate must have size n");
  }
  return design.F * state.x_hat;
}

ColDerivative col_step(const ColState& state, const ctrl::LinearAgent& agent,
                       const VectorXd& zeta, const VectorXd& zeta_tilde, const VectorXd& u,
                       const ColDesign& design) {
  const int n = agent.n(), m = agent.m(), p = agent.p();
  if (state.x_hat.size() != n || zeta_tilde.size() != n) {
    throw Error(ErrorKind::DimensionMismatch, "estimate and zeta~ must have size n");
  }
  if (zeta.size() != p) {
    throw Error(ErrorKind::DimensionMismatch, "zeta must have size p");
  }
  if (u.size() != m) {
    throw Error(ErrorKind::DimensionMismatch, "control must have size m");
  }

  const VectorXd innovation = agent.C() * zeta_tilde - zeta;
  ColDerivative out;
  out.dx_hat = agent.A() * state.x_hat + agent.B() * u -
               state.rho * (design.Q * (agent.C().transpose() * innovation));
  out.drho = innovation.squaredNorm();
  return out;
}

}  // namespace synchrony::protocol2
