#include <benchmark/benchmark.h>

#include <Eigen/Dense>
#include <random>
#include <tuple>
#include <vector>

#include "synchrony/ctrl.hpp"
#include "synchrony/graph.hpp"
#include "synchrony/protocol2.hpp"
#include "synchrony/sim.hpp"

namespace {

using synchrony::ctrl::LinearAgent;
using synchrony::graph::DirectedWeightedGraph;

// Deterministic stabilizable pair: companion A with mixed-sign spectrum.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> companion_pair(int n) {
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  A.topRightCorner(n - 1, n - 1).setIdentity();
  for (int j = 0; j < n; ++j) A(n - 1, j) = ((j % 2) ? 0.5 : -0.5) / (j + 1);
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n, 1);
  B(n - 1, 0) = 1.0;
  return {A, B};
}

LinearAgent harmonic_agent() {
  Eigen::MatrixXd A(3, 3), B(3, 1), C(2, 3);
  A << 0, 1, 1, -1, 0, 1, 0, 0, 0;
  B << 0, 0, 1;
  C << 1, 0, 0, 0, 0, 1;
  return LinearAgent(A, B, C);
}

// Directed ring over N nodes: strongly connected, one basic bicomponent.
DirectedWeightedGraph ring(int nodes) {
  std::vector<std::tuple<int, int, double>> edges;
  edges.reserve(nodes);
  for (int i = 0; i < nodes; ++i) edges.emplace_back(i, (i + 1) % nodes, 1.0);
  return DirectedWeightedGraph::from_edges(nodes, edges);
}

void CareSolve(benchmark::State& state) {
  const auto [A, B] = companion_pair(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    Eigen::MatrixXd P = synchrony::ctrl::solve_care(A, B);
    benchmark::DoNotOptimize(P.data());
  }
}
BENCHMARK(CareSolve)->Arg(3)->Arg(8);

void StructuralAnalysis(benchmark::State& state) {
  const LinearAgent agent = harmonic_agent();
  for (auto _ : state) {
    auto report = synchrony::ctrl::analyze_structure(agent);
    benchmark::DoNotOptimize(report.minimum_phase);
  }
}
BENCHMARK(StructuralAnalysis);

void GraphCondense(benchmark::State& state) {
  const DirectedWeightedGraph g = ring(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto d = synchrony::graph::condense(g);
    benchmark::DoNotOptimize(d.permutation.data());
  }
}
BENCHMARK(GraphCondense)->Arg(60)->Arg(240);

void NetworkSignals(benchmark::State& state) {
  const int nodes = static_cast<int>(state.range(0));
  const Eigen::MatrixXd L = synchrony::graph::laplacian(ring(nodes));
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Eigen::MatrixXd values(2, nodes);
  for (int i = 0; i < values.size(); ++i) values(i) = dist(rng);
  for (auto _ : state) {
    Eigen::MatrixXd Z = synchrony::sim::network_signals(L, values);
    benchmark::DoNotOptimize(Z.data());
  }
}
BENCHMARK(NetworkSignals)->Arg(60)->Arg(240);

void IntegrateCollaborative(benchmark::State& state) {
  synchrony::sim::ScenarioConfig config{harmonic_agent(),
                                        ring(static_cast<int>(state.range(0)))};
  config.protocol = synchrony::sim::ProtocolKind::Collaborative;
  config.horizon = 1.0;
  config.step = 1e-3;
  config.record_stride = 1 << 20;  // first and last records only
  config.init.seed = 11;
  const auto design = synchrony::protocol2::design_col(config.agent);
  for (auto _ : state) {
    auto traj = synchrony::sim::integrate(config, design);
    benchmark::DoNotOptimize(traj.rho.back().data());
  }
}
BENCHMARK(IntegrateCollaborative)->Arg(8)->Arg(30);

}  // namespace

BENCHMARK_MAIN();
