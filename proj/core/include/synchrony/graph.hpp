#pragma once

// Directed weighted graphs, Laplacians, and the bicomponent structure that
// determines which agents of a network can reach agreement.  A *basic*
// bicomponent is a strongly connected component with no incoming edge from
// the rest of the graph; every other node is driven, directly or through
// intermediate nodes, by one or more basic bicomponents.

#include <Eigen/Dense>
#include <iosfwd>
#include <string>
#include <vector>

namespace synchrony::graph {

// Simple directed graph with nonnegative edge weights and no self-loops.
// adjacency()(i, j) is the weight of the edge j -> i (information flows from
// j into i), matching the convention used by diffusive couplings.
class DirectedWeightedGraph {
 public:
  // Validates shape, nonnegativity, and a zero diagonal.
  explicit DirectedWeightedGraph(Eigen::MatrixXd adjacency);

  // Builds an N-node graph from (src, dst, weight) triples with 0-based
  // endpoints; src == dst or a repeated (src, dst) pair is rejected.
  static DirectedWeightedGraph from_edges(
      int node_count,
      const std::vector<std::tuple<int, int, double>>& edges);

  int node_count() const { return static_cast<int>(adjacency_.rows()); }
  const Eigen::MatrixXd& adjacency() const { return adjacency_; }

 private:
  Eigen::MatrixXd adjacency_;
};

// Reads the edge-list format: a header line "nodes N" followed by one
// "src dst weight" triple per line with 1-based node indices.  Blank lines
// are skipped and '#' starts a comment (full-line or trailing).  Throws
// ErrorKind::ParseError with the offending line number in the message.
DirectedWeightedGraph parse_edge_list(std::istream& in);
DirectedWeightedGraph load_edge_list(const std::string& path);

// Writes the same format; the inverse of parse_edge_list.
void write_edge_list(std::ostream& out, const DirectedWeightedGraph& g);

// In-degree Laplacian L = diag(row sums of adjacency) - adjacency.  Row sums
// of L vanish, and all eigenvalues lie in the closed right half plane.
Eigen::MatrixXd laplacian(const DirectedWeightedGraph& g);

// One strongly connected component that receives no edges from outside
// itself, together with its diagonal Laplacian block.
struct BasicBicomponent {
  std::vector<int> nodes;      // original node indices, ascending
  Eigen::MatrixXd laplacian;   // diagonal block of the permuted Laplacian
};

// Result of permuting the Laplacian into block upper-triangular-like form:
// non-basic nodes first (grounded block), then one diagonal block per basic
// bicomponent.  Rows of basic blocks have no entries outside their block.
struct LaplacianDecomposition {
  // permutation[k] = original index of the node in permuted position k.
  std::vector<int> permutation;
  std::vector<int> nonbasic_nodes;             // original indices, permuted order
  std::vector<BasicBicomponent> basic;         // k >= 1 blocks
  Eigen::MatrixXd grounded;                    // square block over nonbasic_nodes
  std::vector<Eigen::MatrixXd> couplings;      // nonbasic rows vs each basic block
  bool has_spanning_tree = false;              // true iff exactly one basic block
};

// Tarjan condensation of g classified into basic/non-basic bicomponents.
// Deterministic: the same graph always yields the same ordering.
LaplacianDecomposition condense(const DirectedWeightedGraph& g);

// Asymptotic mixing weights of the non-basic agents.  values(r, b) is the
// weight that non-basic agent row_nodes[r] places on basic bicomponent b;
// every row is a convex combination (nonnegative, sums to one).
struct ConvexCombinationTable {
  std::vector<int> row_nodes;  // original indices, same order as decomposition
  Eigen::MatrixXd values;      // |row_nodes| x k
};

ConvexCombinationTable beta_coefficients(const LaplacianDecomposition& d);

// Left scaling of a strongly connected Laplacian: h > 0 with h^T L = 0 and
// max_i h_i = 1, together with the largest gamma in [0, ||L||] certified by
// H L + L^T H >= 2 gamma L^T L with H = diag(h) (positive semidefinite).
struct HScaling {
  Eigen::VectorXd h;
  double gamma = 0.0;
};

// Throws ErrorKind::NotStronglyConnected when the null space of L^T is not
// one-dimensional and strictly signed.
HScaling h_scaling(const Eigen::MatrixXd& L);

// Weighted disagreement form Q = diag(h_i/rho_i) - w w^T / sum_i(h_i/rho_i)
// with w = h./rho: symmetric, positive semidefinite, Q*1 = 0, and entrywise
// monotone non-increasing in every rho_i (as a quadratic form).  Both inputs
// must be strictly positive.
Eigen::MatrixXd q_rho(const Eigen::VectorXd& h, const Eigen::VectorXd& rho);

}  // namespace synchrony::graph
