#include "synchrony/verify.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "synchrony/errors.hpp"

namespace synchrony::verify {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// First record index of the trailing-10% time window (always leaves at least
// two samples in the window).
std::size_t window_start(const std::vector<double>& times) {
  const double t_begin = times.front();
  const double t_end = times.back();
  const double cut = t_end - 0.1 * (t_end - t_begin);
  std::size_t i0 = 0;
  while (i0 + 2 < times.size() && times[i0] < cut) ++i0;
  return i0;
}

// The permuted blocks carry every entry of the Laplacian (basic rows have no
// entries outside their own block), so the original matrix can be rebuilt.
MatrixXd assemble_laplacian(const graph::LaplacianDecomposition& d) {
  const int n = static_cast<int>(d.permutation.size());
  const int nb = static_cast<int>(d.nonbasic_nodes.size());
  MatrixXd Lp = MatrixXd::Zero(n, n);
  Lp.topLeftCorner(nb, nb) = d.grounded;
  int off = nb;
  for (std::size_t b = 0; b < d.basic.size(); ++b) {
    const int size = static_cast<int>(d.basic[b].nodes.size());
    Lp.block(0, off, nb, size) = d.couplings[b];
    Lp.block(off, off, size, size) = d.basic[b].laplacian;
    off += size;
  }
  MatrixXd L(n, n);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) L(d.permutation[a], d.permutation[b]) = Lp(a, b);
  }
  return L;
}

// Mean output of one basic bicomponent at one record.
VectorXd block_mean(const MatrixXd& y, const std::vector<int>& nodes) {
  VectorXd mean = VectorXd::Zero(y.rows());
  for (int v : nodes) mean += y.col(v);
  return mean / static_cast<double>(nodes.size());
}

}  // namespace

const char* to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::ClassicalSync: return "classical_sync";
    case Verdict::WeakSync: return "weak_sync";
    case Verdict::NotStabilized: return "not_stabilized";
  }
  return "unknown";
}

SyncReport analyze(const sim::Trajectory& traj, const graph::LaplacianDecomposition& d,
                   const graph::ConvexCombinationTable& beta, const Thresholds& thresholds) {
  const int N = traj.agent_count;
  if (static_cast<int>(d.permutation.size()) != N) {
    throw Error(ErrorKind::Mismatch,
                "trajectory has " + std::to_string(N) + " agents but the decomposition covers " +
                    std::to_string(d.permutation.size()) + " nodes");
  }
  const int nb = static_cast<int>(d.nonbasic_nodes.size());
  const int k = static_cast<int>(d.basic.size());
  if (beta.values.rows() != nb || beta.values.cols() != k ||
      beta.row_nodes != d.nonbasic_nodes) {
    throw Error(ErrorKind::Mismatch, "beta table does not match the decomposition");
  }
  if (traj.record_count() < 2) {
    throw Error(ErrorKind::InvalidArgument, "trajectory needs at least two records");
  }

  const std::size_t count = traj.record_count();
  const std::size_t i0 = window_start(traj.times);
  const double window = static_cast<double>(count - i0);

  SyncReport report;

  // Network signal norms, averaged over the window per agent.
  VectorXd zeta_avg = VectorXd::Zero(N);
  for (std::size_t r = i0; r < count; ++r) {
    for (int i = 0; i < N; ++i) zeta_avg(i) += traj.zeta[r].col(i).norm();
  }
  zeta_avg /= window;
  report.terminal_zeta_norm = zeta_avg.maxCoeff();

  if (traj.protocol == sim::ProtocolKind::Collaborative) {
    // Recompute the exchanged-estimate signal from the recorded estimates
    // rather than trusting the trajectory's own zeta_tilde copies.
    const MatrixXd L = assemble_laplacian(d);
    VectorXd zh_avg = VectorXd::Zero(N);
    for (std::size_t r = i0; r < count; ++r) {
      const MatrixXd Zh = sim::network_signals(L, traj.observer[r]);
      for (int i = 0; i < N; ++i) zh_avg(i) += Zh.col(i).norm();
    }
    zh_avg /= window;
    report.terminal_zeta_hat_norm = zh_avg.maxCoeff();
  }

  // Output disagreement inside each basic bicomponent and globally.
  report.per_bicomponent_disagreement.assign(k, 0.0);
  for (std::size_t r = i0; r < count; ++r) {
    const MatrixXd& y = traj.y[r];
    for (int b = 0; b < k; ++b) {
      const auto& nodes = d.basic[b].nodes;
      double spread = 0.0;
      for (std::size_t a = 0; a < nodes.size(); ++a) {
        for (std::size_t c = a + 1; c < nodes.size(); ++c) {
          spread = std::max(spread, (y.col(nodes[a]) - y.col(nodes[c])).norm());
        }
      }
      report.per_bicomponent_disagreement[b] += spread;
    }
    double global = 0.0;
    for (int a = 0; a < N; ++a) {
      for (int c = a + 1; c < N; ++c) {
        global = std::max(global, (y.col(a) - y.col(c)).norm());
      }
    }
    report.global_disagreement += global;
  }
  for (double& v : report.per_bicomponent_disagreement) v /= window;
  report.global_disagreement /= window;

  // Non-basic outputs against their convex combinations of bicomponent means.
  report.beta_residuals.assign(nb, 0.0);
  for (std::size_t r = i0; r < count; ++r) {
    const MatrixXd& y = traj.y[r];
    std::vector<VectorXd> means(k);
    for (int b = 0; b < k; ++b) means[b] = block_mean(y, d.basic[b].nodes);
    for (int j = 0; j < nb; ++j) {
      VectorXd target = VectorXd::Zero(traj.p);
      for (int b = 0; b < k; ++b) target += beta.values(j, b) * means[b];
      report.beta_residuals[j] += (y.col(d.nonbasic_nodes[j]) - target).norm();
    }
  }
  for (double& v : report.beta_residuals) v /= window;

  // Adaptive gains: final values and residual slope over the window.
  report.rho_final = traj.rho.back();
  const double dt = traj.times.back() - traj.times[i0];
  report.rho_terminal_slope =
      (traj.rho.back() - traj.rho[i0]) / (dt > 0.0 ? dt : 1.0);

  const bool zeta_ok =
      report.terminal_zeta_norm <= thresholds.zeta &&
      (!report.terminal_zeta_hat_norm || *report.terminal_zeta_hat_norm <= thresholds.zeta);
  const bool blocks_ok =
      std::all_of(report.per_bicomponent_disagreement.begin(),
                  report.per_bicomponent_disagreement.end(),
                  [&](double v) { return v <= thresholds.disagreement; });
  const bool beta_ok = std::all_of(report.beta_residuals.begin(), report.beta_residuals.end(),
                                   [&](double v) { return v <= thresholds.beta_residual; });

  if (zeta_ok && d.has_spanning_tree && report.global_disagreement <= thresholds.disagreement) {
    report.verdict = Verdict::ClassicalSync;
  } else if (zeta_ok && blocks_ok && beta_ok) {
    report.verdict = Verdict::WeakSync;
  } else {
    report.verdict = Verdict::NotStabilized;
  }
  return report;
}

graph::ConvexCombinationTable fit_beta(const sim::Trajectory& traj,
                                       const graph::LaplacianDecomposition& d) {
  const int N = traj.agent_count;
  if (static_cast<int>(d.permutation.size()) != N) {
    throw Error(ErrorKind::Mismatch, "trajectory and decomposition disagree on the agent count");
  }
  if (traj.record_count() < 2) {
    throw Error(ErrorKind::InvalidArgument, "trajectory needs at least two records");
  }
  const int nb = static_cast<int>(d.nonbasic_nodes.size());
  const int k = static_cast<int>(d.basic.size());
  const std::size_t count = traj.record_count();
  const std::size_t i0 = window_start(traj.times);
  const std::size_t rows_per_agent = (count - i0) * static_cast<std::size_t>(traj.p);

  graph::ConvexCombinationTable table;
  table.row_nodes = d.nonbasic_nodes;
  table.values.resize(nb, k);
  if (nb == 0) return table;

  MatrixXd design(rows_per_agent, k);
  {
    std::size_t row = 0;
    for (std::size_t r = i0; r < count; ++r) {
      std::vector<VectorXd> means(k);
      for (int b = 0; b < k; ++b) means[b] = block_mean(traj.y[r], d.basic[b].nodes);
      for (int c = 0; c < traj.p; ++c) {
        for (int b = 0; b < k; ++b) design(row, b) = means[b](c);
        ++row;
      }
    }
  }
  Eigen::ColPivHouseholderQR<MatrixXd> qr(design);
  for (int j = 0; j < nb; ++j) {
    VectorXd rhs(rows_per_agent);
    std::size_t row = 0;
    for (std::size_t r = i0; r < count; ++r) {
      for (int c = 0; c < traj.p; ++c) rhs(row++) = traj.y[r](c, d.nonbasic_nodes[j]);
    }
    table.values.row(j) = qr.solve(rhs).transpose();
  }
  return table;
}

}  // namespace synchrony::verify
