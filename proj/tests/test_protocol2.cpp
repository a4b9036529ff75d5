#include <random>
#include <string>

#include "doctest.h"
#include "support.hpp"
#include "synchrony/errors.hpp"
#include "synchrony/protocol2.hpp"

using namespace synchrony;
using testsupport::mat;
using testsupport::max_abs_diff;
using testsupport::vec;

TEST_CASE("collaborative design matches the frozen triple integrator reference") {
  const auto agent = testsupport::triple_integrator_agent();
  const auto design = protocol2::design_col(agent);
  CHECK(max_abs_diff(design.Q, testsupport::triple_integrator_reference_Q()) <= 1e-3);
  CHECK(ctrl::spectral_abscissa(agent.A() + agent.B() * design.F) < 0.0);
  CHECK(design.warnings.empty());

  // Q solves A Q + Q A^T - Q C^T C Q + I = 0.
  const Eigen::MatrixXd res = agent.A() * design.Q + design.Q * agent.A().transpose() -
                              design.Q * agent.C().transpose() * agent.C() * design.Q +
                              Eigen::MatrixXd::Identity(3, 3);
  CHECK(res.norm() <= 1e-8 * (1.0 + design.Q.squaredNorm()));
}

TEST_CASE("pole-placed feedback reproduces the frozen gain row") {
  const auto agent = testsupport::triple_integrator_agent();
  const auto design = protocol2::design_col(agent, {{-1, 0}, {-2, 0}, {-3, 0}});
  CHECK(max_abs_diff(design.F, testsupport::triple_integrator_reference_F()) <= 1e-9);
  CHECK(max_abs_diff(design.Q, testsupport::triple_integrator_reference_Q()) <= 1e-3);
}

TEST_CASE("collaborative design reports failed assumptions by name") {
  try {
    protocol2::design_col(ctrl::LinearAgent(mat({{1, 0}, {0, 2}}),
                                            Eigen::MatrixXd::Identity(2, 2), mat({{1, 0}})));
    FAIL_CHECK("expected AssumptionViolated");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::AssumptionViolated);
    CHECK(std::string(e.what()).find("detectable") != std::string::npos);
  }

  try {
    protocol2::design_col(ctrl::LinearAgent(mat({{1, 0}, {0, 2}}), mat({{1}, {0}}),
                                            Eigen::MatrixXd::Identity(2, 2)));
    FAIL_CHECK("expected AssumptionViolated");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::AssumptionViolated);
    CHECK(std::string(e.what()).find("stabilizable") != std::string::npos);
  }
}

TEST_CASE("detectable but unobservable pairs succeed with a warning") {
  const ctrl::LinearAgent agent(mat({{-1, 0}, {0, -2}}), mat({{1}, {1}}), mat({{1, 0}}));
  const auto design = protocol2::design_col(agent);
  REQUIRE(design.warnings.size() == 1);
  CHECK(design.warnings[0].find("observable") != std::string::npos);
  CHECK(ctrl::spectral_abscissa(agent.A() + agent.B() * design.F) < 0.0);
  Eigen::LLT<Eigen::MatrixXd> llt(design.Q);
  CHECK(llt.info() == Eigen::Success);
}

TEST_CASE("observer derivative matches a hand-computed point") {
  const auto agent = testsupport::triple_integrator_agent();
  protocol2::ColDesign design;
  design.Q = testsupport::triple_integrator_reference_Q();
  design.F = testsupport::triple_integrator_reference_F();

  protocol2::ColState state;
  state.x_hat = vec({1, 0, 0});
  state.rho = 1.0;
  const Eigen::VectorXd u = protocol2::col_control(state, design);
  REQUIRE(u.size() == 1);
  CHECK(u(0) == doctest::Approx(-6.0).epsilon(1e-12));

  // zeta~ = 0 and zeta = 1 give innovation -1, so the correction adds the
  // first column of Q on top of B u.
  const auto d = protocol2::col_step(state, agent, vec({1}), Eigen::VectorXd::Zero(3), u,
                                     design);
  CHECK(max_abs_diff(d.dx_hat, vec({2.4142, 2.4142, -5.0})) <= 1e-9);
  CHECK(d.drho == doctest::Approx(1.0).epsilon(1e-12));

  // rho scales the correction term only.
  state.rho = 2.0;
  const auto d2 = protocol2::col_step(state, agent, vec({1}), Eigen::VectorXd::Zero(3), u,
                                      design);
  CHECK(max_abs_diff(d2.dx_hat, vec({4.8284, 4.8284, -4.0})) <= 1e-9);
  CHECK(d2.drho == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("control is linear in the estimate") {
  const auto design = protocol2::design_col(testsupport::triple_integrator_agent());
  std::mt19937_64 rng(227);
  for (int trial = 0; trial < 20; ++trial) {
    protocol2::ColState a, b, sum;
    a.x_hat = testsupport::random_matrix(rng, 3, 1).col(0);
    b.x_hat = testsupport::random_matrix(rng, 3, 1).col(0);
    sum.x_hat = 2.0 * a.x_hat - 3.0 * b.x_hat;
    const Eigen::VectorXd ua = protocol2::col_control(a, design);
    const Eigen::VectorXd ub = protocol2::col_control(b, design);
    const Eigen::VectorXd us = protocol2::col_control(sum, design);
    CHECK((us - (2.0 * ua - 3.0 * ub)).norm() <= 1e-12 * (1.0 + us.norm()));
  }
}

TEST_CASE("adaptation rate is a squared norm") {
  const auto agent = testsupport::triple_integrator_agent();
  const auto design = protocol2::design_col(agent);
  std::mt19937_64 rng(229);
  for (int trial = 0; trial < 30; ++trial) {
    protocol2::ColState state;
    state.x_hat = testsupport::random_matrix(rng, 3, 1).col(0) * 5.0;
    state.rho = static_cast<double>(rng() % 7);
    const Eigen::VectorXd zeta = testsupport::random_matrix(rng, 1, 1).col(0);
    const Eigen::VectorXd ztil = testsupport::random_matrix(rng, 3, 1).col(0);
    const auto d = protocol2::col_step(state, agent, zeta, ztil,
                                       protocol2::col_control(state, design), design);
    const double expected = (agent.C() * ztil - zeta).squaredNorm();
    CHECK(d.drho == doctest::Approx(expected));
    CHECK(d.drho >= 0.0);
  }
}

TEST_CASE("shape mismatches are rejected") {
  const auto agent = testsupport::triple_integrator_agent();
  const auto design = protocol2::design_col(agent);
  protocol2::ColState state;
  state.x_hat = Eigen::VectorXd::Zero(3);
  const Eigen::VectorXd u = vec({0});
  CHECK_THROWS_AS(protocol2::col_step(state, agent, vec({0, 0}), Eigen::VectorXd::Zero(3),
                                      u, design),
                  Error);
  CHECK_THROWS_AS(protocol2::col_step(state, agent, vec({0}), Eigen::VectorXd::Zero(2), u,
                                      design),
                  Error);
  CHECK_THROWS_AS(protocol2::col_step(state, agent, vec({0}), Eigen::VectorXd::Zero(3),
                                      vec({0, 0}), design),
                  Error);
}

TEST_CASE("collaborative designs are deterministic") {
  const auto agent = testsupport::triple_integrator_agent();
  const auto d1 = protocol2::design_col(agent);
  const auto d2 = protocol2::design_col(agent);
  CHECK(max_abs_diff(d1.Q, d2.Q) == 0.0);
  CHECK(max_abs_diff(d1.F, d2.F) == 0.0);
}
