#include "synchrony/sim.hpp"

#include <cmath>
#include <random>
#include <string>

#include "synchrony/errors.hpp"

namespace synchrony::sim {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Divergence guard: any state component outside this box aborts the run.
constexpr double kStateBound = 1e9;

long long step_count(double horizon, double step) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw Error(ErrorKind::InvalidArgument, "horizon must be positive and finite");
  }
  if (!(step > 0.0) || !std::isfinite(step)) {
    throw Error(ErrorKind::InvalidArgument, "step must be positive and finite");
  }
  long long steps = std::llround(horizon / step);
  return steps < 1 ? 1 : steps;
}

void check_config(const ScenarioConfig& config, int observer_dim) {
  if (config.record_stride < 1) {
    throw Error(ErrorKind::InvalidArgument, "record_stride must be at least 1");
  }
  if (!(config.rho0 >= 0.0) || !std::isfinite(config.rho0)) {
    throw Error(ErrorKind::InvalidArgument, "rho0 must be nonnegative and finite");
  }
  const int N = config.graph.node_count();
  if (!config.observer0.empty()) {
    if (static_cast<int>(config.observer0.size()) != N) {
      throw Error(ErrorKind::DimensionMismatch,
                  "observer0 must contain one vector per agent (" + std::to_string(N) + ")");
    }
    for (const auto& v : config.observer0) {
      if (v.size() != observer_dim) {
        throw Error(ErrorKind::DimensionMismatch,
                    "observer0 vectors must have size " + std::to_string(observer_dim));
      }
    }
  }
}

void check_finite(const VectorXd& X, double t, int stride) {
  for (Eigen::Index i = 0; i < X.size(); ++i) {
    if (!(std::abs(X(i)) <= kStateBound)) {
      const long long agent = i / stride;
      throw Error(ErrorKind::NonFiniteState,
                  "state of agent " + std::to_string(agent) + " became non-finite or left [-1e9, 1e9] at t = " +
                      std::to_string(t));
    }
  }
}

// Classical fixed-step RK4 over the stacked network state.  System must
// provide stride(), deriv(X, dX), and record(t, X, traj).
template <class System>
Trajectory run_rk4(System& sys, VectorXd X, const ScenarioConfig& config) {
  const long long steps = step_count(config.horizon, config.step);
  const double h = config.step;

  Trajectory traj = sys.make_trajectory();
  const std::size_t expected = 2 + static_cast<std::size_t>(steps / config.record_stride);
  traj.times.reserve(expected);
  traj.x.reserve(expected);
  traj.observer.reserve(expected);
  traj.rho.reserve(expected);
  traj.y.reserve(expected);
  traj.zeta.reserve(expected);
  traj.u.reserve(expected);

  sys.record(0.0, X, traj);
  const Eigen::Index dim = X.size();
  VectorXd k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);
  for (long long k = 0; k < steps; ++k) {
    sys.deriv(X, k1);
    tmp = X + (0.5 * h) * k1;
    sys.deriv(tmp, k2);
    tmp = X + (0.5 * h) * k2;
    sys.deriv(tmp, k3);
    tmp = X + h * k3;
    sys.deriv(tmp, k4);
    X += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

    const double t = static_cast<double>(k + 1) * h;
    check_finite(X, t, sys.stride());
    if ((k + 1) % config.record_stride == 0 || k + 1 == steps) sys.record(t, X, traj);
  }
  return traj;
}

// Stacked closed loop for the non-collaborative protocol.  Per-agent layout:
// [x (n); xi1_hat (n - m); rho].
struct P1System {
  const ctrl::LinearAgent& agent;
  const protocol1::NcDesign& design;
  MatrixXd Lt;
  int N, n, m, p, q;

  // Scratch buffers so the hot loop stays allocation-free.
  MatrixXd Y, Z;
  VectorXd zt, xi, s, bs, e1;

  P1System(const ScenarioConfig& config, const protocol1::NcDesign& d)
      : agent(config.agent),
        design(d),
        Lt(graph::laplacian(config.graph).transpose()),
        N(config.graph.node_count()),
        n(agent.n()),
        m(agent.m()),
        p(agent.p()),
        q(agent.n() - agent.m()) {
    Y.resize(p, N);
    Z.resize(p, N);
    zt.resize(p);
    xi.resize(n);
    s.resize(m);
    bs.resize(n);
    e1.resize(p - m);
  }

  int stride() const { return n + q + 1; }

  void signals(const VectorXd& X) {
    for (int i = 0; i < N; ++i) {
      Y.col(i).noalias() = agent.C() * X.segment(static_cast<Eigen::Index>(i) * stride(), n);
    }
    Z.noalias() = Y * Lt;
  }

  void deriv(const VectorXd& X, VectorXd& dX) {
    signals(X);
    const auto& f = design.form;
    for (int i = 0; i < N; ++i) {
      const Eigen::Index off = static_cast<Eigen::Index>(i) * stride();
      const auto x = X.segment(off, n);
      const auto xi1 = X.segment(off + n, q);
      const double rho = X(off + n + q);

      zt.noalias() = f.T * Z.col(i);
      xi.head(q) = xi1;
      xi.tail(m) = zt.tail(m);
      s.noalias() = design.K * xi;

      bs.noalias() = agent.B() * s;
      dX.segment(off, n).noalias() = agent.A() * x;
      dX.segment(off, n) -= rho * bs;

      dX.segment(off + n, q).noalias() = f.A11 * xi1;
      dX.segment(off + n, q).noalias() += f.A12 * zt.tail(m);
      if (q > 0 && p > m) {
        e1.noalias() = f.C1 * xi1;
        e1 -= zt.head(p - m);
        dX.segment(off + n, q).noalias() += design.H1 * e1;
      }
      dX(off + n + q) = s.squaredNorm();
    }
  }

  Trajectory make_trajectory() const {
    Trajectory traj;
    traj.agent_count = N;
    traj.n = n;
    traj.m = m;
    traj.p = p;
    traj.protocol = ProtocolKind::NonCollaborative;
    return traj;
  }

  void record(double t, const VectorXd& X, Trajectory& traj) {
    signals(X);
    MatrixXd xs(n, N), obs(q, N), us(m, N);
    VectorXd rhos(N);
    for (int i = 0; i < N; ++i) {
      const Eigen::Index off = static_cast<Eigen::Index>(i) * stride();
      xs.col(i) = X.segment(off, n);
      obs.col(i) = X.segment(off + n, q);
      rhos(i) = X(off + n + q);
      zt.noalias() = design.form.T * Z.col(i);
      xi.head(q) = obs.col(i);
      xi.tail(m) = zt.tail(m);
      us.col(i).noalias() = design.K * xi;
      us.col(i) *= -rhos(i);
    }
    traj.times.push_back(t);
    traj.x.push_back(std::move(xs));
    traj.observer.push_back(std::move(obs));
    traj.rho.push_back(std::move(rhos));
    traj.y.push_back(Y);
    traj.zeta.push_back(Z);
    traj.u.push_back(std::move(us));
  }
};

// Stacked closed loop for the collaborative protocol.  Per-agent layout:
// [x (n); x_hat (n); rho].
struct P2System {
  const ctrl::LinearAgent& agent;
  const protocol2::ColDesign& design;
  MatrixXd Lt, QCt;
  int N, n, m, p;

  MatrixXd Y, Z, Xh, Ztil;
  VectorXd u, e, corr;

  P2System(const ScenarioConfig& config, const protocol2::ColDesign& d)
      : agent(config.agent),
        design(d),
        Lt(graph::laplacian(config.graph).transpose()),
        QCt(d.Q * config.agent.C().transpose()),
        N(config.graph.node_count()),
        n(agent.n()),
        m(agent.m()),
        p(agent.p()) {
    Y.resize(p, N);
    Z.resize(p, N);
    Xh.resize(n, N);
    Ztil.resize(n, N);
    u.resize(m);
    e.resize(p);
    corr.resize(n);
  }

  int stride() const { return 2 * n + 1; }

  void signals(const VectorXd& X) {
    for (int i = 0; i < N; ++i) {
      const Eigen::Index off = static_cast<Eigen::Index>(i) * stride();
      Y.col(i).noalias() = agent.C() * X.segment(off, n);
      Xh.col(i) = X.segment(off + n, n);
    }
    Z.noalias() = Y * Lt;
    Ztil.noalias() = Xh * Lt;
  }

  void deriv(const VectorXd& X, VectorXd& dX) {
    signals(X);
    for (int i = 0; i < N; ++i) {
      const Eigen::Index off = static_cast<Eigen::Index>(i) * stride();
      const auto x = X.segment(off, n);
      const auto xh = X.segment(off + n, n);
      const double rho = X(off + 2 * n);

      u.noalias() = design.F * xh;
      e.noalias() = agent.C() * Ztil.col(i);
      e -= Z.col(i);

      dX.segment(off, n).noalias() = agent.A() * x;
      dX.segment(off, n).noalias() += agent.B() * u;
      dX.segment(off + n, n).noalias() = agent.A() * xh;
      dX.segment(off + n, n).noalias() += agent.B() * u;
      corr.noalias() = QCt * e;
      dX.segment(off + n, n) -= rho * corr;
      dX(off + 2 * n) = e.squaredNorm();
    }
  }

  Trajectory make_trajectory() const {
    Trajectory traj;
    traj.agent_count = N;
    traj.n = n;
    traj.m = m;
    traj.p = p;
    traj.protocol = ProtocolKind::Collaborative;
    return traj;
  }

  void record(double t, const VectorXd& X, Trajectory& traj) {
    signals(X);
    MatrixXd xs(n, N), us(m, N);
    VectorXd rhos(N);
    for (int i = 0; i < N; ++i) {
      const Eigen::Index off = static_cast<Eigen::Index>(i) * stride();
      xs.col(i) = X.segment(off, n);
      rhos(i) = X(off + 2 * n);
      us.col(i).noalias() = design.F * Xh.col(i);
    }
    traj.times.push_back(t);
    traj.x.push_back(std::move(xs));
    traj.observer.push_back(Xh);
    traj.rho.push_back(std::move(rhos));
    traj.y.push_back(Y);
    traj.zeta.push_back(Z);
    traj.zeta_tilde.push_back(Ztil);
    traj.u.push_back(std::move(us));
  }
};

}  // namespace

Eigen::MatrixXd network_signals(const Eigen::MatrixXd& L, const Eigen::MatrixXd& values) {
  if (L.rows() != L.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "Laplacian must be square");
  }
  if (values.cols() != L.rows()) {
    throw Error(ErrorKind::DimensionMismatch,
                "values must have one column per node of the Laplacian");
  }
  return values * L.transpose();
}

std::vector<VectorXd> initial_states(const ScenarioConfig& config) {
  const int N = config.graph.node_count();
  const int n = config.agent.n();
  if (!config.init.states.empty()) {
    if (static_cast<int>(config.init.states.size()) != N) {
      throw Error(ErrorKind::DimensionMismatch,
                  "init.states must contain one vector per agent (" + std::to_string(N) + ")");
    }
    for (const auto& v : config.init.states) {
      if (v.size() != n) {
        throw Error(ErrorKind::DimensionMismatch,
                    "init.states vectors must have size " + std::to_string(n));
      }
    }
    return config.init.states;
  }
  if (!(config.init.high >= config.init.low) || !std::isfinite(config.init.low) ||
      !std::isfinite(config.init.high)) {
    throw Error(ErrorKind::InvalidArgument, "init range [low, high] is invalid");
  }
  std::mt19937_64 rng(config.init.seed);
  const double span = config.init.high - config.init.low;
  std::vector<VectorXd> states(N, VectorXd(n));
  for (int i = 0; i < N; ++i) {
    for (int c = 0; c < n; ++c) {
      // Explicit 53-bit mapping so the draw is stable across standard
      // library implementations.
      const double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      states[i](c) = config.init.low + span * unit;
    }
  }
  return states;
}

Trajectory integrate(const ScenarioConfig& config, const protocol1::NcDesign& design) {
  if (config.protocol != ProtocolKind::NonCollaborative) {
    throw Error(ErrorKind::Mismatch,
                "scenario requests the collaborative protocol but a non-collaborative design was given");
  }
  const int n = config.agent.n(), m = config.agent.m(), p = config.agent.p();
  if (design.form.n() != n || design.form.m() != m || design.form.p() != p) {
    throw Error(ErrorKind::Mismatch, "design dimensions do not match the scenario agent");
  }
  const int q = n - m;
  check_config(config, q);

  const int N = config.graph.node_count();
  const auto x0 = initial_states(config);
  const int stride = n + q + 1;
  VectorXd X(static_cast<Eigen::Index>(N) * stride);
  for (int i = 0; i < N; ++i) {
    const Eigen::Index off = static_cast<Eigen::Index>(i) * stride;
    X.segment(off, n) = x0[i];
    X.segment(off + n, q) =
        config.observer0.empty() ? VectorXd::Zero(q) : config.observer0[i];
    X(off + n + q) = config.rho0;
  }

  P1System sys(config, design);
  return run_rk4(sys, std::move(X), config);
}

Trajectory integrate(const ScenarioConfig& config, const protocol2::ColDesign& design) {
  if (config.protocol != ProtocolKind::Collaborative) {
    throw Error(ErrorKind::Mismatch,
                "scenario requests the non-collaborative protocol but a collaborative design was given");
  }
  const int n = config.agent.n(), m = config.agent.m(), p = config.agent.p();
  if (design.Q.rows() != n || design.Q.cols() != n || design.F.rows() != m ||
      design.F.cols() != n) {
    throw Error(ErrorKind::Mismatch, "design dimensions do not match the scenario agent");
  }
  check_config(config, n);

  const int N = config.graph.node_count();
  const auto x0 = initial_states(config);
  const int stride = 2 * n + 1;
  VectorXd X(static_cast<Eigen::Index>(N) * stride);
  for (int i = 0; i < N; ++i) {
    const Eigen::Index off = static_cast<Eigen::Index>(i) * stride;
    X.segment(off, n) = x0[i];
    X.segment(off + n, n) =
        config.observer0.empty() ? VectorXd::Zero(n) : config.observer0[i];
    X(off + 2 * n) = config.rho0;
  }

  P2System sys(config, design);
  return run_rk4(sys, std::move(X), config);
}

}  // namespace synchrony::sim
