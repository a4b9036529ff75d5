#pragma once

// Shared fixtures for the test suites: canonical agents, frozen reference
// design values, deterministic random generators for agents and graphs, and
// small matrix helpers.

#include <Eigen/Dense>
#include <complex>
#include <initializer_list>
#include <limits>
#include <random>
#include <tuple>
#include <vector>

#include "synchrony/ctrl.hpp"
#include "synchrony/graph.hpp"

namespace testsupport {

using Eigen::MatrixXd;
using Eigen::VectorXd;

inline MatrixXd mat(std::initializer_list<std::initializer_list<double>> rows) {
  const int r = static_cast<int>(rows.size());
  const int c = static_cast<int>(rows.begin()->size());
  MatrixXd M(r, c);
  int i = 0;
  for (const auto& row : rows) {
    int j = 0;
    for (double v : row) M(i, j++) = v;
    ++i;
  }
  return M;
}

inline VectorXd vec(std::initializer_list<double> values) {
  VectorXd v(static_cast<int>(values.size()));
  int i = 0;
  for (double x : values) v(i++) = x;
  return v;
}

inline double max_abs_diff(const MatrixXd& A, const MatrixXd& B) {
  if (A.rows() != B.rows() || A.cols() != B.cols()) {
    return std::numeric_limits<double>::infinity();
  }
  if (A.size() == 0) return 0.0;
  return (A - B).cwiseAbs().maxCoeff();
}

// Neutrally stable agent: a harmonic oscillator pair plus an integrator,
// with two measured outputs.  Uniform rank one and minimum phase (no
// invariant zeros at all), so it qualifies for both protocols' benchmarks.
inline synchrony::ctrl::LinearAgent oscillator_agent() {
  return synchrony::ctrl::LinearAgent(
      mat({{0, 1, 1}, {-1, 0, 1}, {0, 0, 0}}), mat({{0}, {0}, {1}}),
      mat({{1, 0, 0}, {0, 0, 1}}));
}

// Triple integrator with position output: observable and stabilizable but
// rank(C B) = 0, so only the collaborative design applies.
inline synchrony::ctrl::LinearAgent triple_integrator_agent() {
  return synchrony::ctrl::LinearAgent(
      mat({{0, 1, 0}, {0, 0, 1}, {0, 0, 0}}), mat({{0}, {0}, {1}}),
      mat({{1, 0, 0}}));
}

// Reference design values for the canonical agents, computed independently
// and frozen here (loose 1e-3 comparisons absorb their printed precision).
inline MatrixXd oscillator_reference_P() {
  return mat({{2.5958, 0.2321, 0.7321},
              {0.2321, 1.7100, 1.2100},
              {0.7321, 1.2100, 2.2100}});
}

inline MatrixXd oscillator_reference_H1() { return mat({{-3}, {-1}}); }

inline MatrixXd triple_integrator_reference_Q() {
  return mat({{2.4142, 2.4142, 1.0},
              {2.4142, 4.8284, 2.4142},
              {1.0, 2.4142, 2.4142}});
}

inline MatrixXd triple_integrator_reference_F() { return mat({{-6, -11, -6}}); }

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  const double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * unit;
}

inline MatrixXd random_matrix(std::mt19937_64& rng, int r, int c, double lo = -1.0,
                              double hi = 1.0) {
  MatrixXd M(r, c);
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < c; ++j) M(i, j) = uniform(rng, lo, hi);
  }
  return M;
}

inline MatrixXd random_invertible(std::mt19937_64& rng, int n) {
  for (;;) {
    MatrixXd M = random_matrix(rng, n, n);
    Eigen::JacobiSVD<MatrixXd> svd(M);
    if (svd.singularValues()(n - 1) > 0.05 * svd.singularValues()(0)) return M;
  }
}

inline MatrixXd kron(const MatrixXd& A, const MatrixXd& B) {
  MatrixXd K(A.rows() * B.rows(), A.cols() * B.cols());
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
      K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    }
  }
  return K;
}

// Monic polynomial with the given roots, highest power first.
inline std::vector<double> poly_from_roots(const std::vector<double>& roots) {
  std::vector<double> c{1.0};
  for (double r : roots) {
    std::vector<double> next(c.size() + 1, 0.0);
    for (std::size_t i = 0; i < c.size(); ++i) {
      next[i] += c[i];
      next[i + 1] -= c[i] * r;
    }
    c = std::move(next);
  }
  return c;
}

// Single chain in controllable canonical form whose transfer function is
// num(s)/den(s) with deg num = n - 1: relative degree one, zeros = num roots.
inline void siso_chain(std::mt19937_64& rng, int n, MatrixXd& A, MatrixXd& B, MatrixXd& C) {
  std::vector<double> zero_roots(n - 1), pole_roots(n);
  for (auto& r : zero_roots) r = uniform(rng, -2.5, -0.3);  // strictly stable zeros
  for (auto& r : pole_roots) r = uniform(rng, -1.5, 0.8);   // poles on either side
  const auto den = poly_from_roots(pole_roots);
  const auto num = poly_from_roots(zero_roots);

  A = MatrixXd::Zero(n, n);
  A.topRightCorner(n - 1, n - 1).setIdentity();
  for (int j = 0; j < n; ++j) A(n - 1, j) = -den[n - j];
  B = MatrixXd::Zero(n, 1);
  B(n - 1, 0) = 1.0;
  C = MatrixXd::Zero(1, n);
  for (int j = 0; j < n; ++j) C(0, j) = num[n - 1 - j];
}

// Random agent satisfying the non-collaborative design assumptions: block
// diagonal minimum-phase chains (one per input), optional extra output rows,
// then a random change of state and output basis.
inline synchrony::ctrl::LinearAgent random_rank_one_min_phase(std::mt19937_64& rng, int n,
                                                              int m, int extra_outputs) {
  // Split n states across m chains, each of size >= 1.
  std::vector<int> sizes(m, 1);
  for (int left = n - m; left > 0; --left) sizes[rng() % m]++;

  MatrixXd A = MatrixXd::Zero(n, n);
  MatrixXd B = MatrixXd::Zero(n, m);
  MatrixXd C0 = MatrixXd::Zero(m, n);
  int off = 0;
  for (int b = 0; b < m; ++b) {
    MatrixXd Ab, Bb, Cb;
    siso_chain(rng, sizes[b], Ab, Bb, Cb);
    A.block(off, off, sizes[b], sizes[b]) = Ab;
    B.block(off, b, sizes[b], 1) = Bb;
    C0.block(b, off, 1, sizes[b]) = Cb;
    off += sizes[b];
  }

  const int p = m + extra_outputs;
  MatrixXd C(p, n);
  C.topRows(m) = C0;
  // Extra measurements can only remove invariant zeros, never add them, so
  // the assumptions survive.
  if (extra_outputs > 0) C.bottomRows(extra_outputs) = random_matrix(rng, extra_outputs, n);

  const MatrixXd G = random_invertible(rng, n);
  const MatrixXd H = random_invertible(rng, p);
  const MatrixXd Ginv = G.inverse();
  return synchrony::ctrl::LinearAgent(G * A * Ginv, G * B, H * C * Ginv);
}

// Generic random agent; almost surely controllable and observable.
inline synchrony::ctrl::LinearAgent random_generic_agent(std::mt19937_64& rng, int n, int m,
                                                         int p) {
  for (;;) {
    MatrixXd A = random_matrix(rng, n, n);
    MatrixXd B = random_matrix(rng, n, m);
    MatrixXd C = random_matrix(rng, p, n);
    if (synchrony::ctrl::is_stabilizable(A, B) && synchrony::ctrl::is_observable(A, C)) {
      return synchrony::ctrl::LinearAgent(std::move(A), std::move(B), std::move(C));
    }
  }
}

// Random digraph that contains a directed spanning tree rooted at node 0:
// a random parent tree plus extra random edges.
inline synchrony::graph::DirectedWeightedGraph random_spanning_tree_graph(std::mt19937_64& rng,
                                                                          int N) {
  std::vector<std::tuple<int, int, double>> edges;
  std::vector<std::vector<char>> used(N, std::vector<char>(N, 0));
  for (int v = 1; v < N; ++v) {
    const int parent = static_cast<int>(rng() % v);
    edges.emplace_back(parent, v, uniform(rng, 0.5, 1.5));
    used[parent][v] = 1;
  }
  const int extra = N;
  for (int e = 0; e < extra; ++e) {
    const int a = static_cast<int>(rng() % N);
    const int b = static_cast<int>(rng() % N);
    if (a == b || used[a][b]) continue;
    used[a][b] = 1;
    edges.emplace_back(a, b, uniform(rng, 0.5, 1.5));
  }
  return synchrony::graph::DirectedWeightedGraph::from_edges(N, edges);
}

// Random digraph with exactly two basic bicomponents (two directed cycles)
// feeding a pool of non-basic nodes, every one of them reachable.
inline synchrony::graph::DirectedWeightedGraph random_two_basic_graph(std::mt19937_64& rng,
                                                                      int c1, int c2,
                                                                      int followers) {
  const int N = c1 + c2 + followers;
  std::vector<std::tuple<int, int, double>> edges;
  std::vector<std::vector<char>> used(N, std::vector<char>(N, 0));
  auto add = [&](int a, int b, double w) {
    if (!used[a][b]) {
      used[a][b] = 1;
      edges.emplace_back(a, b, w);
    }
  };
  for (int v = 0; v < c1; ++v) add(v, (v + 1) % c1, uniform(rng, 0.5, 1.5));
  for (int v = 0; v < c2; ++v) add(c1 + v, c1 + (v + 1) % c2, uniform(rng, 0.5, 1.5));
  // Followers receive from both cycles (directly or through earlier
  // followers), and never feed back into the cycles.
  for (int v = c1 + c2; v < N; ++v) {
    const int from_c1 = static_cast<int>(rng() % c1);
    const int from_c2 = c1 + static_cast<int>(rng() % c2);
    add(from_c1, v, uniform(rng, 0.5, 1.5));
    add(from_c2, v, uniform(rng, 0.5, 1.5));
    if (v > c1 + c2 && (rng() % 2) == 0) {
      const int prev = c1 + c2 + static_cast<int>(rng() % (v - c1 - c2));
      add(prev, v, uniform(rng, 0.5, 1.5));
    }
  }
  return synchrony::graph::DirectedWeightedGraph::from_edges(N, edges);
}

}  // namespace testsupport
