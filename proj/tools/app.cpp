#include "app.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "artifacts.hpp"
#include "scenario.hpp"
#include "svg_plot.hpp"
#include "synchrony/ctrl.hpp"
#include "synchrony/errors.hpp"
#include "synchrony/graph.hpp"
#include "synchrony/protocol1.hpp"
#include "synchrony/protocol2.hpp"
#include "synchrony/sim.hpp"
#include "synchrony/verify.hpp"

namespace synchrony::tools {
namespace {

namespace fs = std::filesystem;

std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3e", v);
  return buf;
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string complex_str(const std::complex<double>& z) {
  if (std::abs(z.imag()) < 1e-9) return num(z.real());
  return num(z.real()) + (z.imag() < 0 ? " - " : " + ") +
         num(std::abs(z.imag())) + "i";
}

std::string complex_list(const std::vector<std::complex<double>>& zs) {
  if (zs.empty()) return "none";
  std::string out;
  for (std::size_t i = 0; i < zs.size(); ++i) {
    if (i > 0) out += ", ";
    out += complex_str(zs[i]);
  }
  return out;
}

// 1-based node list, elided past the first dozen entries.
std::string node_list(const std::vector<int>& nodes) {
  std::string out = "{";
  const std::size_t shown = std::min<std::size_t>(nodes.size(), 12);
  for (std::size_t i = 0; i < shown; ++i) {
    if (i > 0) out += ", ";
    out += std::to_string(nodes[i] + 1);
  }
  if (nodes.size() > shown) out += ", ...";
  out += "}";
  return out;
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) {
    throw Error(ErrorKind::InvalidArgument,
                "cannot open " + path.string() + " for writing");
  }
  out << text;
  if (!out) {
    throw Error(ErrorKind::InvalidArgument, "failed to write " + path.string());
  }
}

void write_json_file(const fs::path& path, const nlohmann::json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

const char* yes_no(bool v) { return v ? "yes" : "no"; }

void print_structure(const ctrl::StructuralReport& report,
                     const ctrl::LinearAgent& agent) {
  std::cout << "agent:                 n=" << agent.n() << " inputs=" << agent.m()
            << " outputs=" << agent.p() << "\n"
            << "stabilizable:          " << yes_no(report.stabilizable) << "\n"
            << "detectable:            " << yes_no(report.detectable) << "\n"
            << "observable:            " << yes_no(report.observable) << "\n"
            << "left invertible:       " << yes_no(report.left_invertible) << "\n"
            << "uniform rank one:      " << yes_no(report.uniform_rank_one) << "\n"
            << "minimum phase:         " << yes_no(report.minimum_phase) << "\n"
            << "open-loop eigenvalues: "
            << complex_list(report.open_loop_eigenvalues) << "\n"
            << "invariant zeros:       " << complex_list(report.invariant_zeros)
            << "\n";
}

struct RunResult {
  sim::Trajectory trajectory;
  nlohmann::json design_json;
};

// Designs the protocol named by the scenario and integrates the closed loop.
RunResult design_and_run(const Scenario& s) {
  const ctrl::StructuralReport report = ctrl::analyze_structure(s.config.agent);
  if (s.config.protocol == sim::ProtocolKind::NonCollaborative) {
    const protocol1::NcDesign design = protocol1::design_nc(s.config.agent);
    return {sim::integrate(s.config, design), design_to_json(report, design)};
  }
  const protocol2::ColDesign design =
      s.feedback_poles.empty()
          ? protocol2::design_col(s.config.agent)
          : protocol2::design_col(s.config.agent, s.feedback_poles);
  for (const std::string& w : design.warnings) {
    std::cout << "warning: " << w << "\n";
  }
  return {sim::integrate(s.config, design), design_to_json(report, design)};
}

}  // namespace

int cmd_analyze(const AnalyzeOptions& options) {
  const bool from_graph = !options.graph_path.empty();
  const bool from_scenario = !options.scenario_path.empty();
  if (from_graph == from_scenario) {
    throw Error(ErrorKind::InvalidArgument,
                "analyze needs exactly one of --graph and --scenario");
  }

  const graph::DirectedWeightedGraph g =
      from_graph ? graph::load_edge_list(options.graph_path)
                 : load_scenario(options.scenario_path).config.graph;
  const graph::LaplacianDecomposition d = graph::condense(g);
  const graph::ConvexCombinationTable beta = graph::beta_coefficients(d);
  const int edges = static_cast<int>((g.adjacency().array() != 0.0).count());

  std::cout << "source:                "
            << (from_graph ? options.graph_path : options.scenario_path) << "\n"
            << "nodes:                 " << g.node_count() << "\n"
            << "edges:                 " << edges << "\n"
            << "spanning tree:         " << yes_no(d.has_spanning_tree) << "\n"
            << "basic bicomponents:    " << d.basic.size() << "\n";

  std::vector<graph::HScaling> scalings;
  scalings.reserve(d.basic.size());
  for (std::size_t b = 0; b < d.basic.size(); ++b) {
    scalings.push_back(graph::h_scaling(d.basic[b].laplacian));
    std::cout << "  block " << b + 1 << ": " << d.basic[b].nodes.size()
              << " node(s) " << node_list(d.basic[b].nodes) << "  gamma "
              << sci(scalings.back().gamma) << "\n";
  }
  std::cout << "non-basic agents:      " << d.nonbasic_nodes.size();
  if (!d.nonbasic_nodes.empty()) std::cout << " " << node_list(d.nonbasic_nodes);
  std::cout << "\n";
  if (beta.values.rows() > 0) {
    std::cout << "convex combinations (rows: non-basic node, columns: block):\n";
    for (int r = 0; r < beta.values.rows(); ++r) {
      std::cout << "  node " << beta.row_nodes[r] + 1 << ":";
      for (int b = 0; b < beta.values.cols(); ++b) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "  %.4f", beta.values(r, b));
        std::cout << buf;
      }
      std::cout << "\n";
    }
  }

  if (!options.out_json.empty()) {
    nlohmann::json blocks = nlohmann::json::array();
    for (std::size_t b = 0; b < d.basic.size(); ++b) {
      nlohmann::json nodes = nlohmann::json::array();
      for (int node : d.basic[b].nodes) nodes.push_back(node + 1);
      blocks.push_back({{"nodes", nodes},
                        {"gamma", scalings[b].gamma},
                        {"h", vector_to_json(scalings[b].h)}});
    }
    nlohmann::json nonbasic = nlohmann::json::array();
    for (int node : d.nonbasic_nodes) nonbasic.push_back(node + 1);
    nlohmann::json beta_rows = nlohmann::json::array();
    for (int node : beta.row_nodes) beta_rows.push_back(node + 1);
    const nlohmann::json j = {
        {"nodes", g.node_count()},
        {"edges", edges},
        {"has_spanning_tree", d.has_spanning_tree},
        {"basic_bicomponents", blocks},
        {"nonbasic_nodes", nonbasic},
        {"beta", {{"rows", beta_rows}, {"values", matrix_to_json(beta.values)}}},
    };
    write_json_file(options.out_json, j);
    std::cout << "analysis written to:   " << options.out_json << "\n";
  }
  return 0;
}

int cmd_design(const DesignOptions& options) {
  const Scenario s = load_scenario(options.scenario_path);
  const ctrl::StructuralReport report = ctrl::analyze_structure(s.config.agent);
  print_structure(report, s.config.agent);

  nlohmann::json design_json;
  if (s.config.protocol == sim::ProtocolKind::NonCollaborative) {
    const protocol1::NcDesign design = protocol1::design_nc(s.config.agent);
    const Eigen::MatrixXd a_tilde = design.form.a_tilde();
    const Eigen::MatrixXd b_tilde = design.form.b_tilde();
    std::cout << "protocol:              noncollaborative\n"
              << "feedback row K:        " << design.K.rows() << " x "
              << design.K.cols() << "\n"
              << "observer gain H1:      " << design.H1.rows() << " x "
              << design.H1.cols() << "\n"
              << "feedback abscissa:     "
              << sci(ctrl::spectral_abscissa(a_tilde - b_tilde * design.K))
              << "\n"
              << "observer abscissa:     "
              << sci(ctrl::spectral_abscissa(design.form.A11 +
                                             design.H1 * design.form.C1))
              << "\n";
    design_json = design_to_json(report, design);
  } else {
    const protocol2::ColDesign design =
        s.feedback_poles.empty()
            ? protocol2::design_col(s.config.agent)
            : protocol2::design_col(s.config.agent, s.feedback_poles);
    const Eigen::MatrixXd& A = s.config.agent.A();
    const Eigen::MatrixXd& B = s.config.agent.B();
    const Eigen::MatrixXd& C = s.config.agent.C();
    std::cout << "protocol:              collaborative\n"
              << "feedback gain F:       " << design.F.rows() << " x "
              << design.F.cols() << "\n"
              << "feedback abscissa:     "
              << sci(ctrl::spectral_abscissa(A + B * design.F)) << "\n"
              << "innovation abscissa:   "
              << sci(ctrl::spectral_abscissa(
                     A - design.Q * C.transpose() * C))
              << "\n";
    for (const std::string& w : design.warnings) {
      std::cout << "warning:               " << w << "\n";
    }
    design_json = design_to_json(report, design);
  }

  if (!options.out_json.empty()) {
    write_json_file(options.out_json, design_json);
    std::cout << "design written to:     " << options.out_json << "\n";
  }
  return 0;
}

int cmd_run(const RunOptions& options) {
  Scenario s = load_scenario(options.scenario_path);
  if (options.seed) {
    if (!s.config.init.states.empty()) {
      throw Error(ErrorKind::InvalidArgument,
                  "--seed cannot override explicit initial states");
    }
    s.config.init.seed = *options.seed;
  }

  const RunResult run = design_and_run(s);
  const graph::LaplacianDecomposition d = graph::condense(s.config.graph);
  const graph::ConvexCombinationTable beta = graph::beta_coefficients(d);
  const verify::SyncReport report =
      verify::analyze(run.trajectory, d, beta, s.thresholds);

  const fs::path out_dir(options.out_dir);
  fs::create_directories(out_dir);
  save_scenario(s, out_dir / "scenario.json");
  write_json_file(out_dir / "design.json", run.design_json);
  write_trajectory_csv(run.trajectory, out_dir / "trajectory.csv");
  write_json_file(out_dir / "report.json", report_to_json(report, s.thresholds));
  const std::string text = report_to_text(report, s.thresholds);
  write_text_file(out_dir / "report.txt", text);

  std::cout << text << "artifacts written to:  " << out_dir.string() << "\n";
  return 0;
}

int cmd_plot(const PlotOptions& options) {
  const fs::path run_dir(options.run_dir);
  const Scenario s = load_scenario(run_dir / "scenario.json");
  const TrajectoryTable table = read_trajectory_csv(run_dir / "trajectory.csv");

  const ctrl::LinearAgent& agent = s.config.agent;
  if (table.agents != s.config.graph.node_count() || table.n != agent.n() ||
      table.p != agent.p() || table.m != agent.m()) {
    throw Error(ErrorKind::Mismatch,
                "trajectory.csv dimensions do not match scenario.json (agents " +
                    std::to_string(table.agents) + ", n " +
                    std::to_string(table.n) + ", p " + std::to_string(table.p) +
                    ", m " + std::to_string(table.m) + ")");
  }

  const graph::LaplacianDecomposition d = graph::condense(s.config.graph);
  const graph::ConvexCombinationTable beta = graph::beta_coefficients(d);
  const fs::path out_dir =
      options.out_dir.empty() ? run_dir / "plots" : fs::path(options.out_dir);
  fs::create_directories(out_dir);

  const std::size_t records = table.times.size();
  const int agents = table.agents;
  std::vector<fs::path> written;

  {
    LinePlot plot("network signal norms", "t", "||zeta_i||", /*log_y=*/true);
    for (int i = 0; i < agents; ++i) {
      plot.add("agent " + std::to_string(i + 1), table.times,
               table.zeta_norm[i]);
    }
    plot.save(out_dir / "zeta.svg");
    written.push_back(out_dir / "zeta.svg");
  }
  {
    LinePlot plot("adaptive gains", "t", "rho_i");
    for (int i = 0; i < agents; ++i) {
      plot.add("agent " + std::to_string(i + 1), table.times, table.rho[i]);
    }
    plot.save(out_dir / "rho.svg");
    written.push_back(out_dir / "rho.svg");
  }

  // Per-record mean output of each basic bicomponent, reused by the output
  // plots and the synchronization-error plot.
  std::vector<std::vector<Eigen::VectorXd>> block_mean(d.basic.size());
  for (std::size_t b = 0; b < d.basic.size(); ++b) {
    block_mean[b].resize(records, Eigen::VectorXd::Zero(table.p));
    for (std::size_t r = 0; r < records; ++r) {
      for (int node : d.basic[b].nodes) block_mean[b][r] += table.y[node][r];
      block_mean[b][r] /= static_cast<double>(d.basic[b].nodes.size());
    }
  }

  auto add_output_series = [&](LinePlot& plot, int node) {
    for (int c = 0; c < table.p; ++c) {
      std::vector<double> ys(records);
      for (std::size_t r = 0; r < records; ++r) ys[r] = table.y[node][r](c);
      std::string label = "agent " + std::to_string(node + 1);
      if (table.p > 1) label += " y" + std::to_string(c + 1);
      plot.add(std::move(label), table.times, std::move(ys));
    }
  };

  for (std::size_t b = 0; b < d.basic.size(); ++b) {
    LinePlot plot("outputs, bicomponent " + std::to_string(b + 1), "t", "y");
    for (int node : d.basic[b].nodes) add_output_series(plot, node);
    const fs::path path = out_dir / ("outputs_block" + std::to_string(b + 1) + ".svg");
    plot.save(path);
    written.push_back(path);
  }
  if (!d.nonbasic_nodes.empty()) {
    LinePlot plot("outputs, non-basic agents", "t", "y");
    for (int node : d.nonbasic_nodes) add_output_series(plot, node);
    plot.save(out_dir / "outputs_nonbasic.svg");
    written.push_back(out_dir / "outputs_nonbasic.svg");
  }

  {
    // Distance of each agent from its own synchronization target: the block
    // mean for basic agents, the convex combination of block means otherwise.
    LinePlot plot("synchronization errors", "t", "||y_i - target_i||",
                  /*log_y=*/true);
    std::vector<int> block_of(agents, -1);
    for (std::size_t b = 0; b < d.basic.size(); ++b) {
      for (int node : d.basic[b].nodes) block_of[node] = static_cast<int>(b);
    }
    std::vector<int> beta_row_of(agents, -1);
    for (std::size_t r = 0; r < beta.row_nodes.size(); ++r) {
      beta_row_of[beta.row_nodes[r]] = static_cast<int>(r);
    }
    for (int i = 0; i < agents; ++i) {
      std::vector<double> ys(records);
      for (std::size_t r = 0; r < records; ++r) {
        Eigen::VectorXd target = Eigen::VectorXd::Zero(table.p);
        if (block_of[i] >= 0) {
          target = block_mean[block_of[i]][r];
        } else {
          for (std::size_t b = 0; b < d.basic.size(); ++b) {
            target += beta.values(beta_row_of[i], static_cast<int>(b)) *
                      block_mean[b][r];
          }
        }
        ys[r] = (table.y[i][r] - target).norm();
      }
      plot.add("agent " + std::to_string(i + 1), table.times, std::move(ys));
    }
    plot.save(out_dir / "sync_errors.svg");
    written.push_back(out_dir / "sync_errors.svg");
  }

  for (const fs::path& path : written) {
    std::cout << "wrote " << path.string() << "\n";
  }
  return 0;
}

}  // namespace synchrony::tools
