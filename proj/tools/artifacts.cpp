#include "artifacts.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "scenario.hpp"
#include "synchrony/errors.hpp"

namespace synchrony::tools {

namespace {

using nlohmann::json;

json complex_list_to_json(const std::vector<std::complex<double>>& zs) {
  json out = json::array();
  for (const auto& z : zs) out.push_back(json::array({z.real(), z.imag()}));
  return out;
}

json structure_to_json(const ctrl::StructuralReport& r) {
  return json{{"stabilizable", r.stabilizable},
              {"detectable", r.detectable},
              {"observable", r.observable},
              {"left_invertible", r.left_invertible},
              {"uniform_rank_one", r.uniform_rank_one},
              {"minimum_phase", r.minimum_phase},
              {"invariant_zeros", complex_list_to_json(r.invariant_zeros)},
              {"open_loop_eigenvalues", complex_list_to_json(r.open_loop_eigenvalues)}};
}

std::string sci(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

void append_field(std::string& line, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  line += ',';
  line += buf;
}

}  // namespace

json design_to_json(const ctrl::StructuralReport& report, const protocol1::NcDesign& d) {
  return json{{"protocol", "noncollaborative"},
              {"structure", structure_to_json(report)},
              {"form",
               {{"S", matrix_to_json(d.form.S)},
                {"T", matrix_to_json(d.form.T)},
                {"A11", matrix_to_json(d.form.A11)},
                {"A12", matrix_to_json(d.form.A12)},
                {"A21", matrix_to_json(d.form.A21)},
                {"A22", matrix_to_json(d.form.A22)},
                {"B2", matrix_to_json(d.form.B2)},
                {"C1", matrix_to_json(d.form.C1)}}},
              {"H1", matrix_to_json(d.H1)},
              {"P", matrix_to_json(d.P)},
              {"K", matrix_to_json(d.K)}};
}

json design_to_json(const ctrl::StructuralReport& report, const protocol2::ColDesign& d) {
  return json{{"protocol", "collaborative"},
              {"structure", structure_to_json(report)},
              {"Q", matrix_to_json(d.Q)},
              {"F", matrix_to_json(d.F)},
              {"warnings", d.warnings}};
}

json report_to_json(const verify::SyncReport& r, const verify::Thresholds& th) {
  json j{{"verdict", verify::to_string(r.verdict)},
         {"terminal_zeta_norm", r.terminal_zeta_norm},
         {"per_bicomponent_disagreement", r.per_bicomponent_disagreement},
         {"global_disagreement", r.global_disagreement},
         {"beta_residuals", r.beta_residuals},
         {"rho_final", vector_to_json(r.rho_final)},
         {"rho_terminal_slope", vector_to_json(r.rho_terminal_slope)},
         {"thresholds",
          {{"disagreement", th.disagreement},
           {"beta_residual", th.beta_residual},
           {"zeta", th.zeta},
           {"rho_slope", th.rho_slope}}}};
  if (r.terminal_zeta_hat_norm) {
    j["terminal_zeta_hat_norm"] = *r.terminal_zeta_hat_norm;
  } else {
    j["terminal_zeta_hat_norm"] = nullptr;
  }
  return j;
}

std::string report_to_text(const verify::SyncReport& r, const verify::Thresholds& th) {
  std::ostringstream out;
  out << "verdict:                 " << verify::to_string(r.verdict) << '\n';
  out << "terminal zeta norm:      " << sci(r.terminal_zeta_norm) << "  (gate " << sci(th.zeta)
      << ")\n";
  if (r.terminal_zeta_hat_norm) {
    out << "estimate signal norm:    " << sci(*r.terminal_zeta_hat_norm) << "  (gate "
        << sci(th.zeta) << ")\n";
  }
  out << "global disagreement:     " << sci(r.global_disagreement) << '\n';
  out << "block disagreements:    ";
  for (double v : r.per_bicomponent_disagreement) out << ' ' << sci(v);
  out << "  (gate " << sci(th.disagreement) << ")\n";
  if (!r.beta_residuals.empty()) {
    double worst = 0.0;
    for (double v : r.beta_residuals) worst = std::max(worst, v);
    out << "max beta residual:       " << sci(worst) << "  (gate " << sci(th.beta_residual)
        << ")\n";
  }
  out << "final rho (max):         " << sci(r.rho_final.size() ? r.rho_final.maxCoeff() : 0.0)
      << '\n';
  out << "rho slope (max):         "
      << sci(r.rho_terminal_slope.size() ? r.rho_terminal_slope.maxCoeff() : 0.0)
      << "  (reference " << sci(th.rho_slope) << ")\n";
  return out.str();
}

void write_trajectory_csv(const sim::Trajectory& traj, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw Error(ErrorKind::InvalidArgument,
                "cannot write trajectory file '" + path.string() + "'");
  }

  std::string line = "t,agent";
  for (int c = 1; c <= traj.n; ++c) line += ",x" + std::to_string(c);
  for (int c = 1; c <= traj.p; ++c) line += ",y" + std::to_string(c);
  line += ",rho,zeta_norm";
  for (int c = 1; c <= traj.m; ++c) line += ",u" + std::to_string(c);
  out << line << '\n';

  for (std::size_t r = 0; r < traj.record_count(); ++r) {
    for (int i = 0; i < traj.agent_count; ++i) {
      line.clear();
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", traj.times[r]);
      line += buf;
      line += ',';
      line += std::to_string(i + 1);
      for (int c = 0; c < traj.n; ++c) append_field(line, traj.x[r](c, i));
      for (int c = 0; c < traj.p; ++c) append_field(line, traj.y[r](c, i));
      append_field(line, traj.rho[r](i));
      append_field(line, traj.zeta[r].col(i).norm());
      for (int c = 0; c < traj.m; ++c) append_field(line, traj.u[r](c, i));
      out << line << '\n';
    }
  }
}

TrajectoryTable read_trajectory_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorKind::ParseError, "cannot open trajectory file '" + path.string() + "'");
  }

  std::string header;
  if (!std::getline(in, header)) {
    throw Error(ErrorKind::ParseError, "trajectory file '" + path.string() + "' is empty");
  }
  std::vector<std::string> names;
  {
    std::istringstream hs(header);
    std::string field;
    while (std::getline(hs, field, ',')) names.push_back(field);
  }
  TrajectoryTable table;
  for (const auto& name : names) {
    if (name.rfind('x', 0) == 0) ++table.n;
    if (name.rfind('y', 0) == 0) ++table.p;
    if (name.rfind('u', 0) == 0) ++table.m;
  }
  if (names.size() < 2 || names[0] != "t" || names[1] != "agent" ||
      names.size() != static_cast<std::size_t>(4 + table.n + table.p + table.m)) {
    throw Error(ErrorKind::ParseError,
                "unexpected trajectory header in '" + path.string() + "'");
  }

  std::string row;
  std::size_t line_no = 1;
  while (std::getline(in, row)) {
    ++line_no;
    if (row.empty()) continue;
    std::istringstream rs(row);
    std::string field;
    std::vector<double> values;
    values.reserve(names.size());
    while (std::getline(rs, field, ',')) {
      try {
        values.push_back(std::stod(field));
      } catch (const std::exception&) {
        throw Error(ErrorKind::ParseError, "trajectory line " + std::to_string(line_no) +
                                               ": '" + field + "' is not a number");
      }
    }
    if (values.size() != names.size()) {
      throw Error(ErrorKind::ParseError, "trajectory line " + std::to_string(line_no) +
                                             ": expected " + std::to_string(names.size()) +
                                             " fields, got " + std::to_string(values.size()));
    }
    const int agent = static_cast<int>(values[1]) - 1;
    if (agent < 0 || agent > 100000) {
      throw Error(ErrorKind::ParseError,
                  "trajectory line " + std::to_string(line_no) + ": bad agent index");
    }
    if (agent >= table.agents) {
      table.agents = agent + 1;
      table.y.resize(table.agents);
      table.rho.resize(table.agents);
      table.zeta_norm.resize(table.agents);
    }
    if (agent == 0) table.times.push_back(values[0]);
    Eigen::VectorXd y(table.p);
    for (int c = 0; c < table.p; ++c) y(c) = values[2 + table.n + c];
    table.y[agent].push_back(std::move(y));
    table.rho[agent].push_back(values[2 + table.n + table.p]);
    table.zeta_norm[agent].push_back(values[3 + table.n + table.p]);
  }
  for (int i = 0; i < table.agents; ++i) {
    if (table.y[i].size() != table.times.size()) {
      throw Error(ErrorKind::ParseError,
                  "trajectory file '" + path.string() + "' has uneven agent records");
    }
  }
  if (table.times.size() < 2) {
    throw Error(ErrorKind::ParseError,
                "trajectory file '" + path.string() + "' needs at least two records");
  }
  return table;
}

}  // namespace synchrony::tools
