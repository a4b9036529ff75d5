#include "synchrony/ctrl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>

#include "synchrony/errors.hpp"

namespace synchrony::ctrl {

namespace {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

constexpr double kRankTol = 1e-8;

int numeric_rank(const MatrixXcd& M) {
  if (M.rows() == 0 || M.cols() == 0) return 0;
  Eigen::JacobiSVD<MatrixXcd> svd(M);
  const auto& sv = svd.singularValues();
  if (sv(0) <= 0.0) return 0;
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > kRankTol * sv(0)) ++rank;
  }
  return rank;
}

int numeric_rank(const MatrixXd& M) { return numeric_rank(MatrixXcd(M.cast<std::complex<double>>())); }

// Smallest singular value of [A - lambda I, B] relative to the largest; the
// PBH pair (A, B) controls lambda iff this matrix has full row rank.
bool pbh_full_rank(const MatrixXd& A, const MatrixXd& B, std::complex<double> lambda) {
  const int n = static_cast<int>(A.rows());
  MatrixXcd M(n, n + B.cols());
  M.leftCols(n) = A.cast<std::complex<double>>();
  M.leftCols(n).diagonal().array() -= lambda;
  M.rightCols(B.cols()) = B.cast<std::complex<double>>();
  return numeric_rank(M) == n;
}

std::vector<std::complex<double>> sorted_eigenvalues(const MatrixXd& A) {
  Eigen::EigenSolver<MatrixXd> es(A, /*computeEigenvectors=*/false);
  std::vector<std::complex<double>> lam(es.eigenvalues().data(),
                                        es.eigenvalues().data() + es.eigenvalues().size());
  std::sort(lam.begin(), lam.end(), [](auto a, auto b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  return lam;
}

MatrixXd kron(const MatrixXd& A, const MatrixXd& B) {
  MatrixXd K(A.rows() * B.rows(), A.cols() * B.cols());
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
      K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    }
  }
  return K;
}

// Stable-subspace construction from the Hamiltonian matrix.  This is the
// primary seed for the Newton refinement; it fails (returns nullopt) only for
// defective eigenvector bases, where the Gramian-based seed takes over.
std::optional<MatrixXd> care_via_hamiltonian(const MatrixXd& A, const MatrixXd& B) {
  const int n = static_cast<int>(A.rows());
  MatrixXd H(2 * n, 2 * n);
  H.topLeftCorner(n, n) = A;
  H.topRightCorner(n, n) = -B * B.transpose();
  H.bottomLeftCorner(n, n) = -MatrixXd::Identity(n, n);
  H.bottomRightCorner(n, n) = -A.transpose();

  Eigen::EigenSolver<MatrixXd> es(H);
  if (es.info() != Eigen::Success) return std::nullopt;

  MatrixXcd U(2 * n, n);
  int found = 0;
  for (int i = 0; i < 2 * n && found < n; ++i) {
    if (es.eigenvalues()(i).real() < 0.0) {
      U.col(found++) = es.eigenvectors().col(i);
    }
  }
  if (found != n) return std::nullopt;

  const MatrixXcd U1 = U.topRows(n);
  const MatrixXcd U2 = U.bottomRows(n);
  Eigen::FullPivLU<MatrixXcd> lu(U1);
  if (!lu.isInvertible()) return std::nullopt;
  const MatrixXd P = (U2 * lu.inverse()).real();
  return MatrixXd(0.5 * (P + P.transpose()));
}

}  // namespace

LinearAgent::LinearAgent(MatrixXd A, MatrixXd B, MatrixXd C)
    : A_(std::move(A)), B_(std::move(B)), C_(std::move(C)) {
  if (A_.rows() != A_.cols() || A_.rows() < 1) {
    throw Error(ErrorKind::DimensionMismatch, "A must be square and non-empty");
  }
  const auto n = A_.rows();
  if (B_.rows() != n || B_.cols() < 1) {
    throw Error(ErrorKind::DimensionMismatch, "B must have as many rows as A and at least one column");
  }
  if (C_.cols() != n || C_.rows() < 1) {
    throw Error(ErrorKind::DimensionMismatch, "C must have as many columns as A and at least one row");
  }
  if (!A_.allFinite() || !B_.allFinite() || !C_.allFinite()) {
    throw Error(ErrorKind::InvalidArgument, "agent matrices must be finite");
  }
  if (numeric_rank(B_) != B_.cols()) {
    throw Error(ErrorKind::InvalidArgument, "B must have full column rank");
  }
  if (numeric_rank(C_) != C_.rows()) {
    throw Error(ErrorKind::InvalidArgument, "C must have full row rank");
  }
}

double spectral_abscissa(const MatrixXd& M) {
  if (M.rows() == 0) return -std::numeric_limits<double>::infinity();
  Eigen::EigenSolver<MatrixXd> es(M, /*computeEigenvectors=*/false);
  return es.eigenvalues().real().maxCoeff();
}

bool is_stabilizable(const MatrixXd& A, const MatrixXd& B) {
  for (const auto& lam : sorted_eigenvalues(A)) {
    if (lam.real() >= -1e-9 && !pbh_full_rank(A, B, lam)) return false;
  }
  return true;
}

bool is_detectable(const MatrixXd& A, const MatrixXd& C) {
  return is_stabilizable(A.transpose(), C.transpose());
}

bool is_observable(const MatrixXd& A, const MatrixXd& C) {
  const MatrixXd At = A.transpose();
  const MatrixXd Ct = C.transpose();
  for (const auto& lam : sorted_eigenvalues(A)) {
    if (!pbh_full_rank(At, Ct, std::conj(lam))) return false;
  }
  return true;
}

MatrixXd solve_lyapunov(const MatrixXd& M, const MatrixXd& W) {
  const int n = static_cast<int>(M.rows());
  if (M.cols() != n || W.rows() != n || W.cols() != n) {
    throw Error(ErrorKind::DimensionMismatch, "Lyapunov solve needs square M and W of equal size");
  }
  if (n == 0) return MatrixXd(0, 0);
  const MatrixXd Mt = M.transpose();
  const MatrixXd I = MatrixXd::Identity(n, n);
  const MatrixXd K = kron(I, Mt) + kron(Mt, I);
  const Eigen::Map<const VectorXd> w(W.data(), n * n);
  Eigen::PartialPivLU<MatrixXd> lu(K);
  const VectorXd x = lu.solve(-w);
  if (!x.allFinite()) {
    throw Error(ErrorKind::SolverDivergence, "Lyapunov solve produced non-finite values");
  }
  return Eigen::Map<const MatrixXd>(x.data(), n, n);
}

namespace {

// Gramian-based stabilizing gain: solve As W + W As^T = 2 B B^T with
// As = A + beta I shifted into the open right half plane, then K0 = B^T W^{-1}.
std::optional<MatrixXd> gramian_seed_gain(const MatrixXd& A, const MatrixXd& B) {
  const int n = static_cast<int>(A.rows());
  if (spectral_abscissa(A) < -1e-9) {
    return MatrixXd::Zero(static_cast<int>(B.cols()), n);
  }
  const double beta = A.norm() + 1.0;
  const MatrixXd As = A + beta * MatrixXd::Identity(n, n);
  try {
    const MatrixXd W = solve_lyapunov(As.transpose(), -2.0 * B * B.transpose());
    const MatrixXd Wsym = 0.5 * (W + W.transpose());
    Eigen::LLT<MatrixXd> llt(Wsym);
    if (llt.info() != Eigen::Success) return std::nullopt;
    MatrixXd K0 = llt.solve(B).transpose();  // B^T W^{-1}
    if (!K0.allFinite()) return std::nullopt;
    return K0;
  } catch (const Error&) {
    return std::nullopt;
  }
}

// Newton refinement from a stabilizing gain.  Each step solves a Lyapunov
// equation for the current closed loop; the iterate with the smallest relative
// Riccati residual (among those whose implied closed loop is stable) wins.
std::optional<MatrixXd> newton_refine(const MatrixXd& A, const MatrixXd& B, MatrixXd K) {
  const int n = static_cast<int>(A.rows());
  const MatrixXd I = MatrixXd::Identity(n, n);
  std::optional<MatrixXd> best;
  double best_rel = std::numeric_limits<double>::infinity();
  double prev_rel = std::numeric_limits<double>::infinity();
  int stalled = 0;

  for (int it = 0; it < 60; ++it) {
    const MatrixXd Acl = A - B * K;
    if (spectral_abscissa(Acl) >= 0.0) break;
    MatrixXd X;
    try {
      X = solve_lyapunov(Acl, I + K.transpose() * K);
    } catch (const Error&) {
      break;
    }
    X = 0.5 * (X + X.transpose());

    const MatrixXd res = A.transpose() * X + X * A - X * B * B.transpose() * X + I;
    const double rel = res.norm() / (1.0 + X.squaredNorm());
    if (rel < best_rel && spectral_abscissa(A - B * B.transpose() * X) < 0.0) {
      best_rel = rel;
      best = X;
    }
    if (rel <= 1e-14) break;
    if (rel >= 0.9 * prev_rel) {
      // Progress has flattened out; allow a few plateau steps before giving
      // up, since convergence from a distant seed starts slowly.
      if (++stalled >= 3 || rel <= 1e-10) break;
    } else {
      stalled = 0;
    }
    prev_rel = rel;
    K = B.transpose() * X;
  }
  return best;
}

}  // namespace

MatrixXd solve_care(const MatrixXd& A, const MatrixXd& B) {
  const int n = static_cast<int>(A.rows());
  if (A.cols() != n || B.rows() != n) {
    throw Error(ErrorKind::DimensionMismatch, "Riccati solve needs square A and matching B");
  }
  if (n == 0) return MatrixXd(0, 0);
  if (!is_stabilizable(A, B)) {
    throw Error(ErrorKind::NotStabilizable,
                "pair (A, B) has an uncontrollable mode with nonnegative real part");
  }

  std::vector<MatrixXd> seeds;
  if (auto P0 = care_via_hamiltonian(A, B)) {
    MatrixXd K0 = B.transpose() * (*P0);
    if (K0.allFinite() && spectral_abscissa(A - B * K0) < 0.0) seeds.push_back(std::move(K0));
  }
  if (auto K0 = gramian_seed_gain(A, B)) {
    if (spectral_abscissa(A - B * (*K0)) < 0.0) seeds.push_back(std::move(*K0));
  }
  if (seeds.empty()) {
    throw Error(ErrorKind::SolverDivergence,
                "failed to construct a stabilizing initial gain for the Riccati iteration");
  }

  const MatrixXd I = MatrixXd::Identity(n, n);
  for (const MatrixXd& K0 : seeds) {
    const auto X = newton_refine(A, B, K0);
    if (!X) continue;
    const MatrixXd res = A.transpose() * (*X) + (*X) * A - (*X) * B * B.transpose() * (*X) + I;
    if (!(res.norm() <= 1e-8 * (1.0 + X->squaredNorm()))) continue;
    Eigen::LLT<MatrixXd> llt(*X);
    if (llt.info() != Eigen::Success) continue;
    if (spectral_abscissa(A - B * B.transpose() * (*X)) >= 0.0) continue;
    return *X;
  }
  throw Error(ErrorKind::SolverDivergence,
              "Riccati iteration did not converge to a stabilizing solution");
}

MatrixXd stabilizing_gain(const MatrixXd& A, const MatrixXd& B) {
  const MatrixXd P = solve_care(A, B);
  return -B.transpose() * P;
}

MatrixXd stabilizing_gain(const MatrixXd& A, const MatrixXd& B,
                          const std::vector<std::complex<double>>& poles) {
  const int n = static_cast<int>(A.rows());
  if (A.cols() != n || B.rows() != n) {
    throw Error(ErrorKind::DimensionMismatch, "pole placement needs square A and matching B");
  }
  if (B.cols() != 1) {
    throw Error(ErrorKind::InvalidArgument, "pole placement is implemented for single-input pairs");
  }
  if (static_cast<int>(poles.size()) != n) {
    throw Error(ErrorKind::InvalidArgument,
                "need exactly " + std::to_string(n) + " closed-loop poles");
  }

  // Characteristic polynomial of the requested spectrum; conjugate pairing is
  // implied by the requirement that the coefficients come out real.
  std::vector<std::complex<double>> coeff{1.0};
  for (const auto& pole : poles) {
    std::vector<std::complex<double>> next(coeff.size() + 1, 0.0);
    for (std::size_t i = 0; i < coeff.size(); ++i) {
      next[i] += coeff[i];
      next[i + 1] -= coeff[i] * pole;
    }
    coeff = std::move(next);
  }
  double scale = 0.0;
  for (const auto& c : coeff) scale = std::max(scale, std::abs(c));
  for (const auto& c : coeff) {
    if (std::abs(c.imag()) > 1e-9 * std::max(scale, 1.0)) {
      throw Error(ErrorKind::InvalidArgument, "poles must be closed under conjugation");
    }
  }

  MatrixXd ctrb(n, n);
  ctrb.col(0) = B.col(0);
  for (int i = 1; i < n; ++i) ctrb.col(i) = A * ctrb.col(i - 1);
  Eigen::FullPivLU<MatrixXd> lu(ctrb);
  if (!lu.isInvertible()) {
    throw Error(ErrorKind::NotStabilizable, "pole placement requires a controllable pair");
  }

  // phi(A) by Horner's rule over the real coefficients.
  MatrixXd phi = MatrixXd::Identity(n, n) * coeff[0].real();
  for (std::size_t i = 1; i < coeff.size(); ++i) {
    phi = phi * A + coeff[i].real() * MatrixXd::Identity(n, n);
  }

  Eigen::RowVectorXd last_row = lu.inverse().row(n - 1);
  MatrixXd F = -(last_row * phi);

  // Defensive check that the placement succeeded numerically.
  auto target = poles;
  auto got = sorted_eigenvalues(A + B * F);
  std::sort(target.begin(), target.end(), [](auto a, auto b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  for (int i = 0; i < n; ++i) {
    if (std::abs(got[i] - target[i]) > 1e-6 * (1.0 + std::abs(target[i]))) {
      throw Error(ErrorKind::SolverDivergence, "pole placement failed to reach the target spectrum");
    }
  }
  return F;
}

MatrixXd observer_gain(const MatrixXd& A, const MatrixXd& C) {
  try {
    const MatrixXd P = solve_care(A.transpose(), C.transpose());
    return -P * C.transpose();
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::NotStabilizable) {
      throw Error(ErrorKind::NotDetectable,
                  "pair (C, A) has an unobservable mode with nonnegative real part");
    }
    throw;
  }
}

namespace {

// Deterministic probe points for the normal rank of the system pencil; spread
// out and irrational-ish so they cannot coincide with structured zeros.
const std::complex<double> kProbes[3] = {
    {0.9134172371, 1.2357310867},
    {-1.4601356927, 0.5173205081},
    {2.1132503124, -1.7320508076},
};

MatrixXcd system_pencil(const LinearAgent& agent, std::complex<double> lambda) {
  const int n = agent.n(), m = agent.m(), p = agent.p();
  MatrixXcd M(n + p, n + m);
  M.setZero();
  M.topLeftCorner(n, n) = agent.A().cast<std::complex<double>>();
  M.topLeftCorner(n, n).diagonal().array() -= lambda;
  M.topRightCorner(n, m) = agent.B().cast<std::complex<double>>();
  M.bottomLeftCorner(p, n) = agent.C().cast<std::complex<double>>();
  return M;
}

// Invariant zeros: eigenvalues of a randomly row-compressed square pencil,
// each confirmed by an explicit rank drop of the rectangular pencil itself.
std::vector<std::complex<double>> invariant_zeros(const LinearAgent& agent, int normal_rank) {
  const int n = agent.n(), m = agent.m(), p = agent.p();
  MatrixXd M(n + p, n + m), N(n + p, n + m);
  M.setZero();
  N.setZero();
  M.topLeftCorner(n, n) = agent.A();
  M.topRightCorner(n, m) = agent.B();
  M.bottomLeftCorner(p, n) = agent.C();
  N.topLeftCorner(n, n).setIdentity();

  std::mt19937_64 rng(0x2f6e2b1ull);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::vector<std::complex<double>> zeros;

  for (int attempt = 0; attempt < 2 && zeros.empty(); ++attempt) {
    MatrixXd Wc(n + m, n + p);
    for (Eigen::Index i = 0; i < Wc.rows(); ++i) {
      for (Eigen::Index j = 0; j < Wc.cols(); ++j) Wc(i, j) = unif(rng);
    }
    const MatrixXd Mq = Wc * M;
    const MatrixXd Nq = Wc * N;
    Eigen::GeneralizedEigenSolver<MatrixXd> ges;
    ges.compute(Mq, Nq, /*computeEigenvectors=*/false);

    std::vector<std::complex<double>> candidates;
    for (Eigen::Index i = 0; i < ges.alphas().size(); ++i) {
      const std::complex<double> alpha = ges.alphas()(i);
      const double beta = ges.betas()(i);
      if (!std::isfinite(alpha.real()) || !std::isfinite(alpha.imag()) || !std::isfinite(beta)) {
        continue;
      }
      if (std::abs(beta) <= 1e-10 * (1.0 + std::abs(alpha))) continue;  // infinite eigenvalue
      const std::complex<double> lam = alpha / beta;
      if (std::abs(lam) > 1e8) continue;
      candidates.push_back(lam);
    }
    for (auto lam : candidates) {
      if (std::abs(lam.imag()) <= 1e-7 * (1.0 + std::abs(lam))) lam.imag(0.0);
      if (numeric_rank(system_pencil(agent, lam)) < normal_rank) zeros.push_back(lam);
    }
  }

  std::sort(zeros.begin(), zeros.end(), [](auto a, auto b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  return zeros;
}

}  // namespace

StructuralReport analyze_structure(const LinearAgent& agent) {
  StructuralReport report;
  report.open_loop_eigenvalues = sorted_eigenvalues(agent.A());
  report.stabilizable = is_stabilizable(agent.A(), agent.B());
  report.detectable = is_detectable(agent.A(), agent.C());
  report.observable = is_observable(agent.A(), agent.C());

  int normal_rank = 0;
  for (const auto& probe : kProbes) {
    normal_rank = std::max(normal_rank, numeric_rank(system_pencil(agent, probe)));
  }
  report.left_invertible = (normal_rank == agent.n() + agent.m());
  report.uniform_rank_one =
      report.left_invertible && numeric_rank(MatrixXd(agent.C() * agent.B())) == agent.m();

  report.invariant_zeros = invariant_zeros(agent, normal_rank);
  report.minimum_phase = std::all_of(
      report.invariant_zeros.begin(), report.invariant_zeros.end(),
      [](const std::complex<double>& z) { return z.real() < -1e-9; });
  return report;
}

}  // namespace synchrony::ctrl
