#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "mcp/models.hpp"
#include "mcp/riccati.hpp"
#include "mcp/verify.hpp"

namespace mcp::io {

inline constexpr int kSchemaVersion = 1;

/// Shortest exact decimal (17 significant digits) for bit-stable CSV diffs.
std::string format_double(double v);

/// Fixed-column CSV assembly; floats printed with 17 significant digits.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> columns);
  void add_row(const std::vector<double>& values);
  std::string str() const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<double>> rows_;
};

nlohmann::json to_json(const CurvatureMatrix& r);
CurvatureMatrix curvature_from_json(const nlohmann::json& j);

nlohmann::json to_json(const RiccatiSolution& sol);
RiccatiSolution riccati_solution_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ModelSpace& space, const GeodesicTrajectory& traj);
GeodesicTrajectory trajectory_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ContractionReport& report);
ContractionReport contraction_report_from_json(const nlohmann::json& j);

nlohmann::json to_json(const DoublingReport& report);
DoublingReport doubling_report_from_json(const nlohmann::json& j);

/// Parses a constant curvature profile file; throws std::invalid_argument
/// on schema or symmetry violations.
CurvatureProfile load_profile_file(const std::string& path);

void save_json(const nlohmann::json& j, const std::string& path);

}  // namespace mcp::io
