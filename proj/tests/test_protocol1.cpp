#include <random>
#include <string>

#include "doctest.h"
#include "support.hpp"
#include "synchrony/errors.hpp"
#include "synchrony/protocol1.hpp"

using namespace synchrony;
using testsupport::mat;
using testsupport::max_abs_diff;
using testsupport::vec;

TEST_CASE("identity transforms validate on the oscillator agent") {
  const auto agent = testsupport::oscillator_agent();
  const auto form = protocol1::validate_form(agent, Eigen::MatrixXd::Identity(3, 3),
                                             Eigen::MatrixXd::Identity(2, 2));
  CHECK(max_abs_diff(form.A11, mat({{0, 1}, {-1, 0}})) == 0.0);
  CHECK(max_abs_diff(form.A12, mat({{1}, {1}})) == 0.0);
  CHECK(max_abs_diff(form.A21, mat({{0, 0}})) == 0.0);
  CHECK(max_abs_diff(form.A22, mat({{0}})) == 0.0);
  CHECK(max_abs_diff(form.B2, mat({{1}})) == 0.0);
  CHECK(max_abs_diff(form.C1, mat({{1, 0}})) == 0.0);
  CHECK(max_abs_diff(form.a_tilde(), agent.A()) == 0.0);
  CHECK(max_abs_diff(form.b_tilde(), agent.B()) == 0.0);
}

TEST_CASE("validate_form rejects transforms that break the block structure") {
  const auto agent = testsupport::oscillator_agent();
  // Swapping the outputs puts the identity block in the wrong corner.
  const Eigen::MatrixXd Tswap = mat({{0, 1}, {1, 0}});
  try {
    protocol1::validate_form(agent, Eigen::MatrixXd::Identity(3, 3), Tswap);
    FAIL_CHECK("expected Mismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Mismatch);
  }
  // Singular S cannot be a change of basis.
  CHECK_THROWS_AS(protocol1::validate_form(agent, Eigen::MatrixXd::Zero(3, 3),
                                           Eigen::MatrixXd::Identity(2, 2)),
                  Error);
}

TEST_CASE("constructed forms satisfy their defining identities") {
  std::mt19937_64 rng(211);
  int built = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int m = 1 + static_cast<int>(rng() % 2);
    const int n = m + 1 + static_cast<int>(rng() % 3);
    const int extra = std::min(n - m, static_cast<int>(rng() % 3));
    const auto agent = testsupport::random_rank_one_min_phase(rng, n, m, extra);
    const int p = agent.p();
    protocol1::RankOneForm form;
    try {
      form = protocol1::transform_form(agent);
    } catch (const Error&) {
      continue;  // rare numerically marginal draw
    }
    ++built;

    const double scale = 1.0 + agent.B().norm() + agent.C().norm();
    const Eigen::MatrixXd SB = form.S * agent.B();
    CHECK(SB.topRows(n - m).norm() <= 1e-9 * scale);
    CHECK(max_abs_diff(SB.bottomRows(m), form.B2) <= 1e-12 * scale);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(form.B2);
    CHECK(svd.singularValues()(m - 1) > 1e-9 * scale);

    const Eigen::MatrixXd M = form.T * agent.C() * form.S.inverse();
    CHECK(M.topRightCorner(p - m, m).norm() <= 1e-8 * scale);
    CHECK(M.bottomLeftCorner(m, n - m).norm() <= 1e-8 * scale);
    CHECK(max_abs_diff(M.bottomRightCorner(m, m), Eigen::MatrixXd::Identity(m, m)) <= 1e-8);
    CHECK(max_abs_diff(M.topLeftCorner(p - m, n - m), form.C1) <= 1e-8 * scale);

    const Eigen::MatrixXd At = form.S * agent.A() * form.S.inverse();
    CHECK(max_abs_diff(form.a_tilde(), At) <= 1e-7 * (1.0 + At.norm()));
  }
  CHECK(built >= 90);
}

TEST_CASE("assumption failures are reported by name") {
  const Eigen::MatrixXd A = mat({{0, 1}, {0, 0}});
  const Eigen::MatrixXd B = mat({{0}, {1}});

  try {
    protocol1::transform_form(ctrl::LinearAgent(A, B, mat({{1, 0}})));
    FAIL_CHECK("expected AssumptionViolated");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::AssumptionViolated);
    CHECK(std::string(e.what()).find("uniform rank one") != std::string::npos);
  }

  try {
    protocol1::transform_form(ctrl::LinearAgent(A, B, mat({{-1, 1}})));
    FAIL_CHECK("expected AssumptionViolated");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::AssumptionViolated);
    CHECK(std::string(e.what()).find("minimum phase") != std::string::npos);
  }
}

TEST_CASE("identity-coordinate design matches the frozen references") {
  const auto agent = testsupport::oscillator_agent();
  const auto form = protocol1::validate_form(agent, Eigen::MatrixXd::Identity(3, 3),
                                             Eigen::MatrixXd::Identity(2, 2));
  const auto design = protocol1::design_nc(agent, form);

  CHECK(max_abs_diff(design.P, testsupport::oscillator_reference_P()) <= 1e-3);
  CHECK(max_abs_diff(design.K, testsupport::oscillator_reference_P().row(2)) <= 1e-3);
  REQUIRE(design.H1.rows() == 2);
  REQUIRE(design.H1.cols() == 1);
  CHECK(ctrl::spectral_abscissa(form.A11 + design.H1 * form.C1) < 0.0);
}

TEST_CASE("protocol derivative matches a hand-computed point") {
  const auto agent = testsupport::oscillator_agent();
  protocol1::NcDesign design;
  design.form = protocol1::validate_form(agent, Eigen::MatrixXd::Identity(3, 3),
                                         Eigen::MatrixXd::Identity(2, 2));
  design.H1 = testsupport::oscillator_reference_H1();
  design.P = testsupport::oscillator_reference_P();
  design.K = design.form.b_tilde().transpose() * design.P;

  protocol1::NcState state;
  state.xi1_hat = vec({1, 0});
  state.rho = 1.0;
  const auto d = protocol1::nc_step(state, vec({1, 1}), design);

  // s = K [xi^1; zeta_2] = 0.7321 + 2.2100; the observer innovation vanishes
  // because C1 xi^1 equals zeta_1 here.
  CHECK(max_abs_diff(d.dxi1_hat, vec({1, 0})) <= 1e-12);
  CHECK(d.drho == doctest::Approx(8.65595241).epsilon(1e-9));
  REQUIRE(d.u.size() == 1);
  CHECK(d.u(0) == doctest::Approx(-2.9421).epsilon(1e-9));

  // Doubling rho scales the control but not the adaptation rate.
  state.rho = 2.0;
  const auto d2 = protocol1::nc_step(state, vec({1, 1}), design);
  CHECK(d2.u(0) == doctest::Approx(2.0 * d.u(0)));
  CHECK(d2.drho == doctest::Approx(d.drho));
}

TEST_CASE("zero state and zero signal sit still") {
  const auto design = protocol1::design_nc(testsupport::oscillator_agent());
  protocol1::NcState state;
  state.xi1_hat = Eigen::VectorXd::Zero(2);
  state.rho = 5.0;
  const auto d = protocol1::nc_step(state, Eigen::VectorXd::Zero(2), design);
  CHECK(d.dxi1_hat.norm() == 0.0);
  CHECK(d.drho == 0.0);
  CHECK(d.u.norm() == 0.0);
}

TEST_CASE("adaptive gain derivative is never negative") {
  std::mt19937_64 rng(223);
  const auto design = protocol1::design_nc(testsupport::oscillator_agent());
  for (int trial = 0; trial < 50; ++trial) {
    protocol1::NcState state;
    state.xi1_hat = testsupport::random_matrix(rng, 2, 1).col(0) * 10.0;
    state.rho = 3.0 * static_cast<double>(rng() % 5);
    const auto d = protocol1::nc_step(
        state, testsupport::random_matrix(rng, 2, 1).col(0) * 10.0, design);
    CHECK(d.drho >= 0.0);
  }
}

TEST_CASE("square agents with n == m degenerate cleanly") {
  const ctrl::LinearAgent agent(mat({{0}}), mat({{1}}), mat({{1}}));
  const auto design = protocol1::design_nc(agent);
  CHECK(design.form.C1.rows() == 0);
  CHECK(design.H1.rows() == 0);
  CHECK(design.P(0, 0) == doctest::Approx(1.0).epsilon(1e-10));

  protocol1::NcState state;
  state.xi1_hat = Eigen::VectorXd::Zero(0);
  state.rho = 0.5;
  const auto d = protocol1::nc_step(state, vec({2}), design);
  CHECK(d.dxi1_hat.size() == 0);
  CHECK(d.u(0) == doctest::Approx(-1.0).epsilon(1e-10));
  CHECK(d.drho == doctest::Approx(4.0).epsilon(1e-10));
}

TEST_CASE("single-output minimum-phase agents use the zero-dynamics observer") {
  // p == m leaves nothing to estimate beyond the zero dynamics, which the
  // minimum-phase assumption makes stable on its own.
  const ctrl::LinearAgent agent(mat({{0, 1}, {0, 0}}), mat({{0}, {1}}), mat({{1, 1}}));
  const auto design = protocol1::design_nc(agent);
  CHECK(design.H1.rows() == 1);
  CHECK(design.H1.cols() == 0);
  CHECK(ctrl::spectral_abscissa(design.form.A11) < 0.0);
}

TEST_CASE("designs are deterministic") {
  const auto agent = testsupport::oscillator_agent();
  const auto d1 = protocol1::design_nc(agent);
  const auto d2 = protocol1::design_nc(agent);
  CHECK(max_abs_diff(d1.P, d2.P) == 0.0);
  CHECK(max_abs_diff(d1.H1, d2.H1) == 0.0);
  CHECK(max_abs_diff(d1.K, d2.K) == 0.0);
  CHECK(max_abs_diff(d1.form.S, d2.form.S) == 0.0);
  CHECK(max_abs_diff(d1.form.T, d2.form.T) == 0.0);
}
