#include "synchrony/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "synchrony/errors.hpp"

namespace synchrony::graph {

namespace {

// Keeps dense adjacency storage within a sane memory budget.
constexpr long long kMaxNodes = 2000;

void check_entry(double w, int i, int j) {
  if (!std::isfinite(w)) {
    throw Error(ErrorKind::InvalidArgument,
                "adjacency entry (" + std::to_string(i) + ", " + std::to_string(j) +
                    ") is not finite");
  }
  if (w < 0.0) {
    throw Error(ErrorKind::InvalidArgument,
                "adjacency entry (" + std::to_string(i) + ", " + std::to_string(j) +
                    ") is negative");
  }
}

}  // namespace

DirectedWeightedGraph::DirectedWeightedGraph(Eigen::MatrixXd adjacency)
    : adjacency_(std::move(adjacency)) {
  if (adjacency_.rows() != adjacency_.cols() || adjacency_.rows() < 1) {
    throw Error(ErrorKind::DimensionMismatch, "adjacency matrix must be square and non-empty");
  }
  const int n = static_cast<int>(adjacency_.rows());
  for (int i = 0; i < n; ++i) {
    if (adjacency_(i, i) != 0.0) {
      throw Error(ErrorKind::InvalidArgument,
                  "self-loop at node " + std::to_string(i) + " is not allowed");
    }
    for (int j = 0; j < n; ++j) check_entry(adjacency_(i, j), i, j);
  }
}

DirectedWeightedGraph DirectedWeightedGraph::from_edges(
    int node_count, const std::vector<std::tuple<int, int, double>>& edges) {
  if (node_count < 1 || node_count > kMaxNodes) {
    throw Error(ErrorKind::InvalidArgument,
                "node count must be in [1, " + std::to_string(kMaxNodes) + "]");
  }
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(node_count, node_count);
  std::vector<char> seen(static_cast<std::size_t>(node_count) * node_count, 0);
  for (const auto& [src, dst, w] : edges) {
    if (src < 0 || src >= node_count || dst < 0 || dst >= node_count) {
      throw Error(ErrorKind::InvalidArgument,
                  "edge endpoint out of range: (" + std::to_string(src) + ", " +
                      std::to_string(dst) + ")");
    }
    if (src == dst) {
      throw Error(ErrorKind::InvalidArgument,
                  "self-loop at node " + std::to_string(src) + " is not allowed");
    }
    char& mark = seen[static_cast<std::size_t>(dst) * node_count + src];
    if (mark) {
      throw Error(ErrorKind::InvalidArgument,
                  "duplicate edge (" + std::to_string(src) + ", " + std::to_string(dst) + ")");
    }
    mark = 1;
    check_entry(w, dst, src);
    W(dst, src) = w;  // edge src -> dst feeds node dst
  }
  return DirectedWeightedGraph(std::move(W));
}

DirectedWeightedGraph parse_edge_list(std::istream& in) {
  std::string line;
  int lineno = 0;
  long long n = -1;
  Eigen::MatrixXd W;
  std::vector<char> seen;

  auto fail = [&](const std::string& msg) -> void {
    throw Error(ErrorKind::ParseError, "line " + std::to_string(lineno) + ": " + msg);
  };

  while (std::getline(in, line)) {
    ++lineno;
    if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
    std::istringstream tokens(line);
    if (n < 0) {
      std::string keyword;
      if (!(tokens >> keyword)) continue;  // blank line before header
      if (keyword != "nodes") fail("expected header 'nodes N', got '" + keyword + "'");
      if (!(tokens >> n) || n < 1) fail("node count must be a positive integer");
      if (n > kMaxNodes) fail("node count exceeds supported maximum of " + std::to_string(kMaxNodes));
      std::string extra;
      if (tokens >> extra) fail("unexpected token '" + extra + "' after node count");
      W = Eigen::MatrixXd::Zero(n, n);
      seen.assign(static_cast<std::size_t>(n) * n, 0);
      continue;
    }
    std::string first;
    if (!(tokens >> first)) continue;  // blank line
    long long src = 0, dst = 0;
    double w = 0.0;
    std::istringstream head(first);
    if (!(head >> src) || head.peek() != EOF || !(tokens >> dst >> w)) {
      fail("expected 'src dst weight'");
    }
    std::string extra;
    if (tokens >> extra) fail("unexpected token '" + extra + "' after edge triple");
    if (src < 1 || src > n) fail("source index " + std::to_string(src) + " out of range [1, " + std::to_string(n) + "]");
    if (dst < 1 || dst > n) fail("destination index " + std::to_string(dst) + " out of range [1, " + std::to_string(n) + "]");
    if (src == dst) fail("self-loop at node " + std::to_string(src));
    if (!std::isfinite(w)) fail("edge weight must be finite");
    if (w < 0.0) fail("edge weight must be nonnegative");
    char& mark = seen[static_cast<std::size_t>(dst - 1) * n + (src - 1)];
    if (mark) fail("duplicate edge " + std::to_string(src) + " -> " + std::to_string(dst));
    mark = 1;
    W(dst - 1, src - 1) = w;
  }
  if (n < 0) {
    throw Error(ErrorKind::ParseError, "missing 'nodes N' header");
  }
  return DirectedWeightedGraph(std::move(W));
}

DirectedWeightedGraph load_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorKind::ParseError, "cannot open edge list '" + path + "'");
  }
  try {
    return parse_edge_list(in);
  } catch (const Error& e) {
    throw Error(e.kind(), path + ": " + e.what());
  }
}

void write_edge_list(std::ostream& out, const DirectedWeightedGraph& g) {
  const int n = g.node_count();
  const Eigen::MatrixXd& W = g.adjacency();
  out << "nodes " << n << "\n";
  out.precision(17);
  for (int src = 0; src < n; ++src) {
    for (int dst = 0; dst < n; ++dst) {
      if (W(dst, src) != 0.0) {
        out << (src + 1) << " " << (dst + 1) << " " << W(dst, src) << "\n";
      }
    }
  }
}

Eigen::MatrixXd laplacian(const DirectedWeightedGraph& g) {
  const Eigen::MatrixXd& W = g.adjacency();
  Eigen::MatrixXd L = -W;
  L.diagonal() = W.rowwise().sum();
  return L;
}

namespace {

// Iterative Tarjan.  Components are emitted in reverse topological order of
// the condensation (a component appears after everything it can reach).
std::vector<std::vector<int>> strongly_connected_components(const Eigen::MatrixXd& W) {
  const int n = static_cast<int>(W.rows());
  std::vector<std::vector<int>> succ(n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      if (W(i, j) > 0.0) succ[j].push_back(i);
    }
  }

  std::vector<int> index(n, -1), low(n, 0);
  std::vector<char> on_stack(n, 0);
  std::vector<int> stack;
  std::vector<std::vector<int>> comps;
  int next_index = 0;

  struct Frame {
    int v;
    std::size_t child;
  };
  std::vector<Frame> call;

  for (int root = 0; root < n; ++root) {
    if (index[root] != -1) continue;
    index[root] = low[root] = next_index++;
    stack.push_back(root);
    on_stack[root] = 1;
    call.push_back({root, 0});
    while (!call.empty()) {
      Frame& frame = call.back();
      const int v = frame.v;
      if (frame.child < succ[v].size()) {
        const int w = succ[v][frame.child++];
        if (index[w] == -1) {
          index[w] = low[w] = next_index++;
          stack.push_back(w);
          on_stack[w] = 1;
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
      } else {
        if (low[v] == index[v]) {
          comps.emplace_back();
          int w = -1;
          do {
            w = stack.back();
            stack.pop_back();
            on_stack[w] = 0;
            comps.back().push_back(w);
          } while (w != v);
        }
        call.pop_back();
        if (!call.empty()) {
          low[call.back().v] = std::min(low[call.back().v], low[v]);
        }
      }
    }
  }
  return comps;
}

}  // namespace

LaplacianDecomposition condense(const DirectedWeightedGraph& g) {
  const Eigen::MatrixXd& W = g.adjacency();
  const int n = g.node_count();

  std::vector<std::vector<int>> comps = strongly_connected_components(W);
  // Topological order of the condensation: sources (unfed components) first.
  std::reverse(comps.begin(), comps.end());

  std::vector<int> comp_of(n, -1);
  for (std::size_t c = 0; c < comps.size(); ++c) {
    std::sort(comps[c].begin(), comps[c].end());
    for (int v : comps[c]) comp_of[v] = static_cast<int>(c);
  }

  // A component is basic when it has no incoming edge from another component.
  std::vector<char> is_basic(comps.size(), 1);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      if (W(i, j) > 0.0 && comp_of[i] != comp_of[j]) is_basic[comp_of[i]] = 0;
    }
  }

  LaplacianDecomposition d;
  std::vector<std::size_t> basic_ids, nonbasic_ids;
  for (std::size_t c = 0; c < comps.size(); ++c) {
    (is_basic[c] ? basic_ids : nonbasic_ids).push_back(c);
  }
  // Basic blocks ordered by their smallest original node index.
  std::sort(basic_ids.begin(), basic_ids.end(),
            [&](std::size_t a, std::size_t b) { return comps[a][0] < comps[b][0]; });

  for (std::size_t c : nonbasic_ids) {
    for (int v : comps[c]) d.nonbasic_nodes.push_back(v);
  }
  d.permutation = d.nonbasic_nodes;
  for (std::size_t c : basic_ids) {
    BasicBicomponent block;
    block.nodes = comps[c];
    d.basic.push_back(std::move(block));
    d.permutation.insert(d.permutation.end(), comps[c].begin(), comps[c].end());
  }
  d.has_spanning_tree = (d.basic.size() == 1);

  const Eigen::MatrixXd L = laplacian(g);
  Eigen::MatrixXd Lp(n, n);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) Lp(a, b) = L(d.permutation[a], d.permutation[b]);
  }

  const int nb = static_cast<int>(d.nonbasic_nodes.size());
  d.grounded = Lp.topLeftCorner(nb, nb);
  int offset = nb;
  for (auto& block : d.basic) {
    const int size = static_cast<int>(block.nodes.size());
    block.laplacian = Lp.block(offset, offset, size, size);
    d.couplings.push_back(Lp.block(0, offset, nb, size));
    offset += size;
  }
  return d;
}

ConvexCombinationTable beta_coefficients(const LaplacianDecomposition& d) {
  const int nb = static_cast<int>(d.nonbasic_nodes.size());
  const int k = static_cast<int>(d.basic.size());
  ConvexCombinationTable table;
  table.row_nodes = d.nonbasic_nodes;
  table.values.resize(nb, k);
  if (nb == 0) return table;

  Eigen::MatrixXd rhs(nb, k);
  for (int b = 0; b < k; ++b) {
    rhs.col(b) = -d.couplings[b] * Eigen::VectorXd::Ones(d.couplings[b].cols());
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(d.grounded);
  if (!lu.isInvertible()) {
    throw Error(ErrorKind::InvalidArgument,
                "grounded Laplacian block is singular; decomposition is inconsistent");
  }
  table.values = lu.solve(rhs);
  return table;
}

HScaling h_scaling(const Eigen::MatrixXd& L) {
  if (L.rows() != L.cols() || L.rows() < 1) {
    throw Error(ErrorKind::DimensionMismatch, "Laplacian must be square and non-empty");
  }
  const int n = static_cast<int>(L.rows());
  HScaling result;
  if (n == 1) {
    result.h = Eigen::VectorXd::Ones(1);
    result.gamma = 1.0;  // certificate is 0 >= 0; any positive value works
    return result;
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(L, Eigen::ComputeFullU);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double smax = sv(0);
  const double tol = 1e-8 * std::max(smax, 1e-300);
  if (sv(n - 2) <= tol || sv(n - 1) > tol) {
    throw Error(ErrorKind::NotStronglyConnected,
                "Laplacian null space is not one-dimensional; graph is not strongly connected");
  }

  Eigen::VectorXd h = svd.matrixU().col(n - 1);  // left null vector of L
  if (h.sum() < 0.0) h = -h;
  const double hmax = h.maxCoeff();
  if (h.minCoeff() <= 1e-9 * hmax) {
    throw Error(ErrorKind::NotStronglyConnected,
                "left null vector of the Laplacian is not strictly positive");
  }
  h /= hmax;

  const Eigen::MatrixXd HL = h.asDiagonal() * L;
  const Eigen::MatrixXd sym = HL + HL.transpose();
  const Eigen::MatrixXd gram = L.transpose() * L;
  const double floor = -1e-10 * smax * smax;
  auto certified = [&](double gamma) {
    Eigen::MatrixXd M = sym - 2.0 * gamma * gram;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (M + M.transpose()),
                                                      Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff() >= floor;
  };

  double lo = 0.0, hi = smax;
  if (certified(hi)) {
    result.gamma = hi;
  } else {
    for (int it = 0; it < 40; ++it) {
      const double mid = 0.5 * (lo + hi);
      (certified(mid) ? lo : hi) = mid;
    }
    result.gamma = lo;
  }
  result.h = std::move(h);
  return result;
}

Eigen::MatrixXd q_rho(const Eigen::VectorXd& h, const Eigen::VectorXd& rho) {
  if (h.size() != rho.size() || h.size() < 1) {
    throw Error(ErrorKind::DimensionMismatch, "h and rho must be non-empty and equally sized");
  }
  for (Eigen::Index i = 0; i < h.size(); ++i) {
    if (!(h(i) > 0.0) || !std::isfinite(h(i))) {
      throw Error(ErrorKind::NonPositiveInput, "h(" + std::to_string(i) + ") must be positive");
    }
    if (!(rho(i) > 0.0) || !std::isfinite(rho(i))) {
      throw Error(ErrorKind::NonPositiveInput, "rho(" + std::to_string(i) + ") must be positive");
    }
  }
  const Eigen::VectorXd w = h.cwiseQuotient(rho);
  Eigen::MatrixXd Q = Eigen::MatrixXd(w.asDiagonal());
  Q.noalias() -= (w * w.transpose()) / w.sum();
  return Q;
}

}  // namespace synchrony::graph
