#include "mcp/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace mcp::io {
namespace {

using nlohmann::json;

json vec_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXd vec_from_json(const json& a) {
  Eigen::VectorXd v(a.size());
  for (size_t i = 0; i < a.size(); ++i) v[i] = a[i].get<double>();
  return v;
}

json mat_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd mat_from_json(const json& rows) {
  const size_t nr = rows.size();
  const size_t nc = nr ? rows[0].size() : 0;
  Eigen::MatrixXd m(nr, nc);
  for (size_t i = 0; i < nr; ++i) {
    if (rows[i].size() != nc)
      throw std::invalid_argument("ragged matrix in JSON input");
    for (size_t j = 0; j < nc; ++j) m(i, j) = rows[i][j].get<double>();
  }
  return m;
}

void require_schema(const json& j, const char* type) {
  if (!j.is_object() || j.value("schema_version", -1) != kSchemaVersion)
    throw std::invalid_argument("missing or unsupported schema_version");
  if (j.value("type", std::string()) != type)
    throw std::invalid_argument(std::string("expected document type '") + type + "'");
}

ContractionRow row_from_json(const json& j) {
  ContractionRow row;
  row.two_h = j.at("two_h").get<double>();
  row.u0 = j.at("u0").get<double>();
  row.k1 = j.at("k1").get<double>();
  row.k2 = j.at("k2").get<double>();
  row.measured = j.at("measured").get<std::vector<double>>();
  row.predicted = j.at("predicted").get<std::vector<double>>();
  row.max_abs_deviation = j.at("max_abs_deviation").get<double>();
  row.violations = j.at("violations").get<int>();
  return row;
}

json row_to_json(const ContractionRow& row) {
  return json{{"two_h", row.two_h},
              {"u0", row.u0},
              {"k1", row.k1},
              {"k2", row.k2},
              {"measured", row.measured},
              {"predicted", row.predicted},
              {"max_abs_deviation", row.max_abs_deviation},
              {"violations", row.violations}};
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

CsvWriter::CsvWriter(std::vector<std::string> columns) : columns_(std::move(columns)) {}

void CsvWriter::add_row(const std::vector<double>& values) {
  if (values.size() != columns_.size())
    throw std::invalid_argument("CSV row width does not match the header");
  rows_.push_back(values);
}

std::string CsvWriter::str() const {
  std::ostringstream os;
  for (size_t i = 0; i < columns_.size(); ++i)
    os << (i ? "," : "") << columns_[i];
  os << "\n";
  for (const auto& row : rows_) {
    for (size_t i = 0; i < row.size(); ++i)
      os << (i ? "," : "") << format_double(row[i]);
    os << "\n";
  }
  return os.str();
}

json to_json(const CurvatureMatrix& r) {
  return json{{"schema_version", kSchemaVersion},
              {"type", "curvature_profile"},
              {"half_dim", r.half_dim},
              {"constant", true},
              {"r_bb", r.r_bb},
              {"r_cb", vec_to_json(r.r_cb.transpose())},
              {"r_cc", mat_to_json(r.r_cc)}};
}

CurvatureMatrix curvature_from_json(const json& j) {
  require_schema(j, "curvature_profile");
  CurvatureMatrix r;
  r.half_dim = j.at("half_dim").get<int>();
  r.r_bb = j.at("r_bb").get<double>();
  r.r_cb = vec_from_json(j.at("r_cb")).transpose();
  r.r_cc = mat_from_json(j.at("r_cc"));
  r.validate();
  return r;
}

json to_json(const RiccatiSolution& sol) {
  return json{{"schema_version", kSchemaVersion},
              {"type", "riccati_solution"},
              {"half_dim", sol.half_dim},
              {"grid", sol.grid},
              {"trace_c2s", sol.trace_c2s},
              {"det_b", sol.det_b},
              {"log_det_b", sol.log_det_b},
              {"max_asymmetry", sol.max_asymmetry}};
}

RiccatiSolution riccati_solution_from_json(const json& j) {
  require_schema(j, "riccati_solution");
  RiccatiSolution sol;
  sol.half_dim = j.at("half_dim").get<int>();
  sol.grid = j.at("grid").get<std::vector<double>>();
  sol.trace_c2s = j.at("trace_c2s").get<std::vector<double>>();
  sol.det_b = j.at("det_b").get<std::vector<double>>();
  sol.log_det_b = j.at("log_det_b").get<std::vector<double>>();
  sol.max_asymmetry = j.at("max_asymmetry").get<double>();
  return sol;
}

json to_json(const ModelSpace& space, const GeodesicTrajectory& traj) {
  json states = json::array();
  for (const auto& s : traj.states)
    states.push_back(json{{"x", vec_to_json(s.x)}, {"p", vec_to_json(s.p)}});
  const char* kind = space.kind == SpaceKind::heisenberg  ? "heisenberg"
                     : space.kind == SpaceKind::hopf      ? "hopf"
                                                          : "anti_de_sitter";
  return json{{"schema_version", kSchemaVersion},
              {"type", "trajectory"},
              {"space", kind},
              {"half_dim", space.half_dim},
              {"times", traj.times},
              {"states", states},
              {"hamiltonian", traj.hamiltonian_values},
              {"reeb", traj.reeb_values},
              {"max_hamiltonian_drift", traj.max_hamiltonian_drift},
              {"max_reeb_drift", traj.max_reeb_drift},
              {"max_constraint_drift", traj.max_constraint_drift}};
}

GeodesicTrajectory trajectory_from_json(const json& j) {
  require_schema(j, "trajectory");
  GeodesicTrajectory traj;
  traj.times = j.at("times").get<std::vector<double>>();
  for (const auto& s : j.at("states"))
    traj.states.push_back({vec_from_json(s.at("x")), vec_from_json(s.at("p"))});
  traj.hamiltonian_values = j.at("hamiltonian").get<std::vector<double>>();
  traj.reeb_values = j.at("reeb").get<std::vector<double>>();
  traj.max_hamiltonian_drift = j.at("max_hamiltonian_drift").get<double>();
  traj.max_reeb_drift = j.at("max_reeb_drift").get<double>();
  traj.max_constraint_drift = j.at("max_constraint_drift").get<double>();
  return traj;
}

json to_json(const ContractionReport& report) {
  json rows = json::array();
  for (const auto& row : report.rows) rows.push_back(row_to_json(row));
  return json{{"schema_version", kSchemaVersion},
              {"type", "contraction_report"},
              {"space", report.space},
              {"mode", report.mode},
              {"grid", report.grid},
              {"seed", report.seed},
              {"sample_count", report.sample_count},
              {"rejected", report.rejected},
              {"max_abs_deviation", report.max_abs_deviation},
              {"violations", report.violations},
              {"aggregate_measured", report.aggregate_measured},
              {"aggregate_predicted", report.aggregate_predicted},
              {"max_hamiltonian_drift", report.max_hamiltonian_drift},
              {"max_reeb_drift", report.max_reeb_drift},
              {"max_curvature_drift", report.max_curvature_drift},
              {"rows", rows}};
}

ContractionReport contraction_report_from_json(const json& j) {
  require_schema(j, "contraction_report");
  ContractionReport report;
  report.space = j.at("space").get<std::string>();
  report.mode = j.at("mode").get<std::string>();
  report.grid = j.at("grid").get<std::vector<double>>();
  report.seed = j.at("seed").get<std::uint64_t>();
  report.sample_count = j.at("sample_count").get<int>();
  report.rejected = j.at("rejected").get<int>();
  report.max_abs_deviation = j.at("max_abs_deviation").get<double>();
  report.violations = j.at("violations").get<int>();
  report.aggregate_measured = j.at("aggregate_measured").get<double>();
  report.aggregate_predicted = j.at("aggregate_predicted").get<double>();
  report.max_hamiltonian_drift = j.at("max_hamiltonian_drift").get<double>();
  report.max_reeb_drift = j.at("max_reeb_drift").get<double>();
  report.max_curvature_drift = j.at("max_curvature_drift").get<double>();
  for (const auto& row : j.at("rows")) report.rows.push_back(row_from_json(row));
  return report;
}

json to_json(const DoublingReport& report) {
  return json{{"schema_version", kSchemaVersion},
              {"type", "doubling_report"},
              {"half_dim", report.half_dim},
              {"radius", report.radius},
              {"seed", report.seed},
              {"sample_count", report.sample_count},
              {"vol_r", report.vol_r},
              {"vol_2r", report.vol_2r},
              {"ratio", report.ratio},
              {"expected_ratio", report.expected_ratio},
              {"rel_error", report.rel_error},
              {"mc_rel_std", report.mc_rel_std}};
}

DoublingReport doubling_report_from_json(const json& j) {
  require_schema(j, "doubling_report");
  DoublingReport report;
  report.half_dim = j.at("half_dim").get<int>();
  report.radius = j.at("radius").get<double>();
  report.seed = j.at("seed").get<std::uint64_t>();
  report.sample_count = j.at("sample_count").get<int>();
  report.vol_r = j.at("vol_r").get<double>();
  report.vol_2r = j.at("vol_2r").get<double>();
  report.ratio = j.at("ratio").get<double>();
  report.expected_ratio = j.at("expected_ratio").get<double>();
  report.rel_error = j.at("rel_error").get<double>();
  report.mc_rel_std = j.at("mc_rel_std").get<double>();
  return report;
}

CurvatureProfile load_profile_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open profile file: " + path);
  json j;
  in >> j;
  return CurvatureProfile::make_constant(curvature_from_json(j));
}

void save_json(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot open output file: " + path);
  out << j.dump(2) << "\n";
}

}  // namespace mcp::io
