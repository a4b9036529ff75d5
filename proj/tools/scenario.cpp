#include "scenario.hpp"

#include <fstream>
#include <tuple>
#include <utility>

#include "synchrony/errors.hpp"

namespace synchrony::tools {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) {
  throw Error(ErrorKind::ParseError, msg);
}

const json& require(const json& j, const char* key, const char* ctx) {
  if (!j.is_object()) fail(std::string(ctx) + " must be a JSON object");
  const auto it = j.find(key);
  if (it == j.end()) fail(std::string(ctx) + " is missing the '" + key + "' key");
  return *it;
}

double number(const json& j, const std::string& what) {
  if (!j.is_number()) fail(what + " must be a number");
  return j.get<double>();
}

int integer(const json& j, const std::string& what) {
  if (!j.is_number_integer()) fail(what + " must be an integer");
  return j.get<int>();
}

std::vector<Eigen::VectorXd> vector_list_from_json(const json& j, const std::string& what) {
  if (!j.is_array()) fail(what + " must be an array of vectors");
  std::vector<Eigen::VectorXd> out;
  out.reserve(j.size());
  for (const auto& row : j) out.push_back(vector_from_json(row, what + " entry"));
  return out;
}

graph::DirectedWeightedGraph graph_from_json(const json& jg, const fs::path& base_dir) {
  if (!jg.is_object()) fail("'graph' must be a JSON object");
  if (jg.contains("file")) {
    if (!jg.at("file").is_string()) fail("graph 'file' must be a string path");
    fs::path p = jg.at("file").get<std::string>();
    if (p.is_relative()) p = base_dir / p;
    return graph::load_edge_list(p.string());
  }
  const int nodes = integer(require(jg, "nodes", "graph"), "graph 'nodes'");
  const json& je = require(jg, "edges", "graph");
  if (!je.is_array()) fail("graph 'edges' must be an array of [src, dst, weight] triples");
  std::vector<std::tuple<int, int, double>> edges;
  edges.reserve(je.size());
  for (const auto& e : je) {
    if (!e.is_array() || e.size() != 3) {
      fail("each graph edge must be a [src, dst, weight] triple");
    }
    const int src = integer(e[0], "edge source");
    const int dst = integer(e[1], "edge target");
    if (src < 1 || src > nodes || dst < 1 || dst > nodes) {
      fail("edge endpoints must lie in 1.." + std::to_string(nodes));
    }
    edges.emplace_back(src - 1, dst - 1, number(e[2], "edge weight"));
  }
  return graph::DirectedWeightedGraph::from_edges(nodes, edges);
}

sim::ProtocolKind kind_from_json(const json& j) {
  if (!j.is_string()) fail("protocol 'kind' must be a string");
  const std::string s = j.get<std::string>();
  if (s == "noncollaborative") return sim::ProtocolKind::NonCollaborative;
  if (s == "collaborative") return sim::ProtocolKind::Collaborative;
  fail("protocol 'kind' must be 'noncollaborative' or 'collaborative', got '" + s + "'");
}

std::vector<std::complex<double>> poles_from_json(const json& j) {
  if (!j.is_array()) fail("'feedback_poles' must be an array");
  std::vector<std::complex<double>> poles;
  poles.reserve(j.size());
  for (const auto& e : j) {
    if (e.is_number()) {
      poles.emplace_back(e.get<double>(), 0.0);
    } else if (e.is_array() && e.size() == 2) {
      poles.emplace_back(number(e[0], "pole real part"), number(e[1], "pole imaginary part"));
    } else {
      fail("each feedback pole must be a number or an [re, im] pair");
    }
  }
  return poles;
}

}  // namespace

Eigen::MatrixXd matrix_from_json(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) fail(what + " must be a non-empty array of rows");
  const auto& first = j.front();
  if (!first.is_array() || first.empty()) fail(what + " rows must be non-empty arrays");
  Eigen::MatrixXd M(static_cast<Eigen::Index>(j.size()),
                    static_cast<Eigen::Index>(first.size()));
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != M.cols()) {
      fail(what + " rows must all have length " + std::to_string(M.cols()));
    }
    for (Eigen::Index c = 0; c < M.cols(); ++c) {
      M(r, c) = number(row[static_cast<std::size_t>(c)], what + " entry");
    }
  }
  return M;
}

Eigen::VectorXd vector_from_json(const json& j, const std::string& what) {
  if (!j.is_array()) fail(what + " must be an array of numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    v(i) = number(j[static_cast<std::size_t>(i)], what + " entry");
  }
  return v;
}

json matrix_to_json(const Eigen::MatrixXd& M) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Scenario scenario_from_json(const json& j, const fs::path& base_dir) {
  const json& ja = require(j, "agent", "scenario");
  ctrl::LinearAgent agent(matrix_from_json(require(ja, "A", "agent"), "agent A"),
                          matrix_from_json(require(ja, "B", "agent"), "agent B"),
                          matrix_from_json(require(ja, "C", "agent"), "agent C"));
  auto g = graph_from_json(require(j, "graph", "scenario"), base_dir);

  Scenario s{
      j.value("name", std::string{}),
      sim::ScenarioConfig{std::move(agent), std::move(g)},
      verify::Thresholds{},
      {},
  };

  const json& jp = require(j, "protocol", "scenario");
  s.config.protocol = kind_from_json(require(jp, "kind", "protocol"));
  if (jp.contains("rho0")) s.config.rho0 = number(jp.at("rho0"), "protocol 'rho0'");
  if (jp.contains("observer_init")) {
    s.config.observer0 = vector_list_from_json(jp.at("observer_init"), "'observer_init'");
  }
  if (jp.contains("feedback_poles")) {
    if (s.config.protocol != sim::ProtocolKind::Collaborative) {
      fail("'feedback_poles' only applies to the collaborative protocol");
    }
    s.feedback_poles = poles_from_json(jp.at("feedback_poles"));
  }

  if (j.contains("sim")) {
    const json& js = j.at("sim");
    if (!js.is_object()) fail("'sim' must be a JSON object");
    if (js.contains("horizon")) s.config.horizon = number(js.at("horizon"), "sim 'horizon'");
    if (js.contains("step")) s.config.step = number(js.at("step"), "sim 'step'");
    if (js.contains("record_stride")) {
      s.config.record_stride = integer(js.at("record_stride"), "sim 'record_stride'");
    }
    if (js.contains("init")) {
      const json& ji = js.at("init");
      if (!ji.is_object()) fail("sim 'init' must be a JSON object");
      if (ji.contains("states")) {
        s.config.init.states = vector_list_from_json(ji.at("states"), "init 'states'");
      } else {
        if (ji.contains("seed")) {
          if (!ji.at("seed").is_number_unsigned() && !ji.at("seed").is_number_integer()) {
            fail("init 'seed' must be a nonnegative integer");
          }
          s.config.init.seed = ji.at("seed").get<std::uint64_t>();
        }
        if (ji.contains("low")) s.config.init.low = number(ji.at("low"), "init 'low'");
        if (ji.contains("high")) s.config.init.high = number(ji.at("high"), "init 'high'");
      }
    }
  }

  if (j.contains("thresholds")) {
    const json& jt = j.at("thresholds");
    if (!jt.is_object()) fail("'thresholds' must be a JSON object");
    if (jt.contains("disagreement")) {
      s.thresholds.disagreement = number(jt.at("disagreement"), "'disagreement'");
    }
    if (jt.contains("beta_residual")) {
      s.thresholds.beta_residual = number(jt.at("beta_residual"), "'beta_residual'");
    }
    if (jt.contains("zeta")) s.thresholds.zeta = number(jt.at("zeta"), "'zeta'");
    if (jt.contains("rho_slope")) {
      s.thresholds.rho_slope = number(jt.at("rho_slope"), "'rho_slope'");
    }
  }
  return s;
}

Scenario load_scenario(const fs::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorKind::ParseError, "cannot open scenario file '" + path.string() + "'");
  }
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError,
                "invalid JSON in '" + path.string() + "': " + e.what());
  }
  return scenario_from_json(j, path.has_parent_path() ? path.parent_path() : fs::path("."));
}

json scenario_to_json(const Scenario& s) {
  json j;
  j["name"] = s.name;
  j["agent"] = {{"A", matrix_to_json(s.config.agent.A())},
                {"B", matrix_to_json(s.config.agent.B())},
                {"C", matrix_to_json(s.config.agent.C())}};

  const Eigen::MatrixXd& W = s.config.graph.adjacency();
  json edges = json::array();
  for (Eigen::Index src = 0; src < W.cols(); ++src) {
    for (Eigen::Index dst = 0; dst < W.rows(); ++dst) {
      if (W(dst, src) != 0.0) {
        edges.push_back(json::array({src + 1, dst + 1, W(dst, src)}));
      }
    }
  }
  j["graph"] = {{"nodes", s.config.graph.node_count()}, {"edges", std::move(edges)}};

  json jp;
  jp["kind"] = s.config.protocol == sim::ProtocolKind::Collaborative ? "collaborative"
                                                                     : "noncollaborative";
  jp["rho0"] = s.config.rho0;
  if (!s.config.observer0.empty()) {
    json list = json::array();
    for (const auto& v : s.config.observer0) list.push_back(vector_to_json(v));
    jp["observer_init"] = std::move(list);
  }
  if (!s.feedback_poles.empty()) {
    json poles = json::array();
    for (const auto& z : s.feedback_poles) {
      poles.push_back(json::array({z.real(), z.imag()}));
    }
    jp["feedback_poles"] = std::move(poles);
  }
  j["protocol"] = std::move(jp);

  json ji;
  if (!s.config.init.states.empty()) {
    json list = json::array();
    for (const auto& v : s.config.init.states) list.push_back(vector_to_json(v));
    ji["states"] = std::move(list);
  } else {
    ji["seed"] = s.config.init.seed;
    ji["low"] = s.config.init.low;
    ji["high"] = s.config.init.high;
  }
  j["sim"] = {{"horizon", s.config.horizon},
              {"step", s.config.step},
              {"record_stride", s.config.record_stride},
              {"init", std::move(ji)}};

  j["thresholds"] = {{"disagreement", s.thresholds.disagreement},
                     {"beta_residual", s.thresholds.beta_residual},
                     {"zeta", s.thresholds.zeta},
                     {"rho_slope", s.thresholds.rho_slope}};
  return j;
}

void save_scenario(const Scenario& s, const fs::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw Error(ErrorKind::InvalidArgument, "cannot write scenario file '" + path.string() + "'");
  }
  out << scenario_to_json(s).dump(2) << '\n';
}

}  // namespace synchrony::tools
