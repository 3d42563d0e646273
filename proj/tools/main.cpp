// Command-line surface for the measure-contraction toolkit: comparison
// tables, Riccati solves, geodesic flows, contraction checks, conjugate
// times and the Heisenberg doubling estimate. Data goes to stdout (or
// --output), diagnostics to stderr. Exit codes: 0 pass, 1 violation,
// 2 usage or domain error.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "mcp/io.hpp"
#include "mcp/models.hpp"
#include "mcp/riccati.hpp"
#include "mcp/verify.hpp"

namespace {

using nlohmann::json;

struct OutputOptions {
  std::string format = "json";
  std::string path;
};

void add_output_flags(CLI::App* cmd, OutputOptions& out) {
  cmd->add_option("--format", out.format, "Output format")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
  cmd->add_option("--output,-o", out.path, "Write output to a file instead of stdout");
}

void emit(const OutputOptions& out, const std::string& text) {
  if (out.path.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << "\n";
  } else {
    std::ofstream f(out.path);
    if (!f) throw std::invalid_argument("cannot open output file: " + out.path);
    f << text;
    if (!text.empty() && text.back() != '\n') f << "\n";
  }
}

void emit_json(const OutputOptions& out, const json& j) { emit(out, j.dump(2)); }

struct GridSpec {
  double t_max = 0.99;
  int steps = 100;

  std::vector<double> build() const {
    if (steps < 1) throw std::invalid_argument("need at least one grid step");
    std::vector<double> grid(steps + 1);
    for (int i = 0; i <= steps; ++i) grid[i] = t_max * i / steps;
    return grid;
  }
};

void add_grid_flags(CLI::App* cmd, GridSpec& grid) {
  cmd->add_option("--t-max", grid.t_max, "Last grid time")
      ->check(CLI::Range(0.0, 1.0 - 1e-6))
      ->capture_default_str();
  cmd->add_option("--steps", grid.steps, "Number of uniform grid intervals")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

mcp::ModelSpace make_space(const std::string& kind, int n) {
  if (kind == "heisenberg") return mcp::ModelSpace::heisenberg(n);
  if (kind == "hopf") return mcp::ModelSpace::hopf(n);
  if (kind == "ads" || kind == "anti_de_sitter")
    return mcp::ModelSpace::anti_de_sitter(n);
  throw std::invalid_argument("unknown space kind: " + kind);
}

Eigen::VectorXd canonical_base(const mcp::ModelSpace& space) {
  const int dim = space.chart_dim();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(dim);
  if (space.kind == mcp::SpaceKind::hopf) x[0] = 1.0;
  if (space.kind == mcp::SpaceKind::anti_de_sitter) x[dim - 2] = 1.0;
  return x;
}

mcp::PhaseState build_covector(const mcp::ModelSpace& space, double d, double u0,
                               const std::string& coeffs_csv) {
  const int n = space.half_dim;
  Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(2 * n);
  if (coeffs_csv.empty()) {
    coeffs[0] = d;
  } else {
    std::stringstream ss(coeffs_csv);
    std::string item;
    int i = 0;
    while (std::getline(ss, item, ',')) {
      if (i >= 2 * n) throw std::invalid_argument("too many covector coefficients");
      coeffs[i++] = std::stod(item);
    }
    if (i != 2 * n) throw std::invalid_argument("expected 2n covector coefficients");
  }
  return mcp::covector_state(space, canonical_base(space), coeffs, u0);
}

int run_compare(double k1, double k2, int big_n, double d2, const GridSpec& gs,
                const OutputOptions& out) {
  const mcp::ComparisonParams params{k1, k2, big_n};
  const std::vector<double> grid = gs.build();
  json rows = json::array();
  mcp::io::CsvWriter csv({"t", "d1", "d2", "m1", "m2", "density_factor",
                          "past_first_zero"});
  for (double t : grid) {
    const double s1 = k1 * d2, s2 = k2 * d2;
    const double row[7] = {t,
                           mcp::d_param(s1, t),
                           mcp::d_param(s2, t),
                           mcp::m1(s1, t),
                           mcp::m2(s2, t),
                           mcp::density_factor(params, d2, t),
                           mcp::m1_past_first_zero(s1, t) ? 1.0 : 0.0};
    csv.add_row(std::vector<double>(row, row + 7));
    rows.push_back(json{{"t", row[0]},
                        {"d1", row[1]},
                        {"d2", row[2]},
                        {"m1", row[3]},
                        {"m2", row[4]},
                        {"density_factor", row[5]},
                        {"past_first_zero", row[6] != 0.0}});
  }
  if (out.format == "csv") {
    emit(out, csv.str());
  } else {
    emit_json(out, json{{"schema_version", mcp::io::kSchemaVersion},
                        {"type", "compare_table"},
                        {"k1", k1},
                        {"k2", k2},
                        {"N", big_n},
                        {"dist_sq", d2},
                        {"rows", rows}});
  }
  return 0;
}

int run_riccati(const mcp::CurvatureProfile& profile, int n, const GridSpec& gs,
                const OutputOptions& out) {
  const std::vector<double> grid = gs.build();
  mcp::RiccatiSolution sol = mcp::solve_riccati_terminal(profile, n, grid);
  if (out.format == "csv") {
    mcp::io::CsvWriter csv({"t", "trace_c2s", "det_b"});
    for (size_t i = 0; i < sol.grid.size(); ++i)
      csv.add_row({sol.grid[i], sol.trace_c2s[i], sol.det_b[i]});
    emit(out, csv.str());
  } else {
    emit_json(out, mcp::io::to_json(sol));
  }
  return 0;
}

int run_geodesic(const mcp::ModelSpace& space, const mcp::PhaseState& state,
                 double T, int steps, const std::string& method,
                 const OutputOptions& out) {
  mcp::FlowOptions fopt;
  fopt.num_outputs = steps;
  if (method == "exact") fopt.method = mcp::FlowMethod::exact;
  if (method == "numeric") fopt.method = mcp::FlowMethod::numeric;
  mcp::GeodesicTrajectory traj = mcp::geodesic_flow(space, state, T, fopt);
  if (out.format == "csv") {
    const int dim = space.chart_dim();
    std::vector<std::string> cols{"t"};
    for (int i = 0; i < dim; ++i) cols.push_back("x" + std::to_string(i));
    for (int i = 0; i < dim; ++i) cols.push_back("p" + std::to_string(i));
    cols.push_back("H");
    cols.push_back("u0");
    mcp::io::CsvWriter csv(cols);
    for (size_t i = 0; i < traj.times.size(); ++i) {
      std::vector<double> row{traj.times[i]};
      for (int k = 0; k < dim; ++k) row.push_back(traj.states[i].x[k]);
      for (int k = 0; k < dim; ++k) row.push_back(traj.states[i].p[k]);
      row.push_back(traj.hamiltonian_values[i]);
      row.push_back(traj.reeb_values[i]);
      csv.add_row(row);
    }
    emit(out, csv.str());
  } else {
    emit_json(out, mcp::io::to_json(space, traj));
  }
  return 0;
}

int report_exit(const mcp::ContractionReport& report) {
  return report.violations > 0 ? 1 : 0;
}

void emit_report(const mcp::ContractionReport& report, const OutputOptions& out) {
  if (out.format == "csv") {
    mcp::io::CsvWriter csv({"sample", "t", "measured", "predicted"});
    for (size_t s = 0; s < report.rows.size(); ++s)
      for (size_t i = 0; i < report.grid.size(); ++i)
        csv.add_row({static_cast<double>(s), report.grid[i],
                     report.rows[s].measured[i], report.rows[s].predicted[i]});
    emit(out, csv.str());
  } else {
    emit_json(out, mcp::io::to_json(report));
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Measure-contraction toolkit for sub-Riemannian model spaces"};
  app.require_subcommand(1);
  app.set_config("--config");

  // ---- compare ----
  double k1 = 0.0, k2 = 0.0, d2 = 1.0;
  int big_n = 5;
  GridSpec cmp_grid;
  OutputOptions cmp_out;
  auto* cmd_compare = app.add_subcommand("compare", "Comparison-function table");
  cmd_compare->add_option("--k1", k1, "First curvature bound")->required();
  cmd_compare->add_option("--k2", k2, "Second curvature bound")->required();
  cmd_compare->add_option("--N", big_n, "Topological dimension (odd, >= 3)")->required();
  cmd_compare->add_option("--d2", d2, "Squared distance")->capture_default_str();
  add_grid_flags(cmd_compare, cmp_grid);
  add_output_flags(cmd_compare, cmp_out);

  // ---- riccati ----
  std::string ric_space = "heisenberg", ric_profile_file;
  int ric_n = 1;
  double ric_d = 1.0, ric_u0 = 0.0;
  GridSpec ric_grid;
  OutputOptions ric_out;
  auto* cmd_riccati = app.add_subcommand("riccati", "Terminal-value Riccati solve");
  cmd_riccati->add_option("--space", ric_space, "Model space")
      ->check(CLI::IsMember({"heisenberg", "hopf", "ads"}))
      ->capture_default_str();
  cmd_riccati->add_option("--profile-file", ric_profile_file,
                          "JSON curvature profile instead of a model space");
  cmd_riccati->add_option("--n", ric_n, "Half dimension")->check(CLI::PositiveNumber);
  cmd_riccati->add_option("--d", ric_d, "Geodesic distance |p^h|")->capture_default_str();
  cmd_riccati->add_option("--u0", ric_u0, "Reeb momentum")->capture_default_str();
  add_grid_flags(cmd_riccati, ric_grid);
  add_output_flags(cmd_riccati, ric_out);

  // ---- geodesic ----
  std::string geo_space = "heisenberg", geo_method = "auto", geo_coeffs;
  int geo_n = 1, geo_steps = 64;
  double geo_d = 1.0, geo_u0 = 0.0, geo_T = 1.0;
  OutputOptions geo_out;
  auto* cmd_geodesic = app.add_subcommand("geodesic", "Hamiltonian geodesic flow");
  cmd_geodesic->add_option("--space", geo_space, "Model space")
      ->check(CLI::IsMember({"heisenberg", "hopf", "ads"}))
      ->capture_default_str();
  cmd_geodesic->add_option("--n", geo_n, "Half dimension")->check(CLI::PositiveNumber);
  cmd_geodesic->add_option("--d", geo_d, "Geodesic speed |p^h|")->capture_default_str();
  cmd_geodesic->add_option("--u0", geo_u0, "Reeb momentum")->capture_default_str();
  cmd_geodesic->add_option("--coeffs", geo_coeffs,
                           "Comma-separated horizontal covector coefficients");
  cmd_geodesic->add_option("--T", geo_T, "Flow time")->capture_default_str();
  cmd_geodesic->add_option("--steps", geo_steps, "Output samples")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd_geodesic->add_option("--method", geo_method, "Flow method")
      ->check(CLI::IsMember({"auto", "exact", "numeric"}))
      ->capture_default_str();
  add_output_flags(cmd_geodesic, geo_out);

  // ---- mcp-check ----
  std::string chk_space = "heisenberg", chk_profile_file;
  int chk_n = 1, chk_samples = 100;
  double chk_k1 = 0.0, chk_k2 = 0.0, chk_dmin = 0.2, chk_dmax = 1.0;
  std::uint64_t chk_seed = 0;
  GridSpec chk_grid;
  OutputOptions chk_out;
  auto* cmd_check = app.add_subcommand("mcp-check", "Contraction inequality check");
  cmd_check->add_option("--space", chk_space, "Model space")
      ->check(CLI::IsMember({"heisenberg", "hopf", "ads"}))
      ->capture_default_str();
  cmd_check->add_option("--profile-file", chk_profile_file,
                        "JSON curvature profile instead of a model space");
  cmd_check->add_option("--n", chk_n, "Half dimension")->check(CLI::PositiveNumber);
  cmd_check->add_option("--k1", chk_k1, "Curvature bound k1")->required();
  cmd_check->add_option("--k2", chk_k2, "Curvature bound k2")->required();
  cmd_check->add_option("--samples", chk_samples, "Monte Carlo covector samples")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  auto* chk_seed_opt =
      cmd_check->add_option("--seed", chk_seed, "Deterministic sampling seed");
  cmd_check->add_option("--d-min", chk_dmin, "Minimum distance")->capture_default_str();
  cmd_check->add_option("--d-max", chk_dmax, "Maximum distance")->capture_default_str();
  add_grid_flags(cmd_check, chk_grid);
  add_output_flags(cmd_check, chk_out);

  // ---- conjugate ----
  std::string con_space = "heisenberg", con_profile_file;
  int con_n = 1;
  double con_d = 1.0, con_u0 = 0.0, con_horizon = 1.0;
  OutputOptions con_out;
  auto* cmd_conjugate =
      app.add_subcommand("conjugate", "First conjugate time of the vertical frame");
  cmd_conjugate->add_option("--space", con_space, "Model space")
      ->check(CLI::IsMember({"heisenberg", "hopf", "ads"}))
      ->capture_default_str();
  cmd_conjugate->add_option("--profile-file", con_profile_file,
                            "JSON curvature profile instead of a model space");
  cmd_conjugate->add_option("--n", con_n, "Half dimension")->check(CLI::PositiveNumber);
  cmd_conjugate->add_option("--d", con_d, "Geodesic speed |p^h|")->capture_default_str();
  cmd_conjugate->add_option("--u0", con_u0, "Reeb momentum")->capture_default_str();
  cmd_conjugate->add_option("--horizon", con_horizon, "Search horizon")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  add_output_flags(cmd_conjugate, con_out);

  // ---- doubling ----
  int dbl_n = 1, dbl_samples = 100000, dbl_threads = 0;
  double dbl_r = 1.0, dbl_tol = 0.02;
  std::uint64_t dbl_seed = 0;
  OutputOptions dbl_out;
  auto* cmd_doubling =
      app.add_subcommand("doubling", "Heisenberg volume doubling estimate");
  cmd_doubling->add_option("--R", dbl_r, "Ball radius")->capture_default_str();
  cmd_doubling->add_option("--n", dbl_n, "Half dimension")->check(CLI::PositiveNumber);
  cmd_doubling->add_option("--samples", dbl_samples, "Monte Carlo samples")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  auto* dbl_seed_opt =
      cmd_doubling->add_option("--seed", dbl_seed, "Deterministic sampling seed");
  cmd_doubling->add_option("--threads", dbl_threads, "Worker threads (0 = auto)")
      ->capture_default_str();
  cmd_doubling->add_option("--tolerance", dbl_tol, "Pass threshold on |ratio/expected - 1|")
      ->capture_default_str();
  add_output_flags(cmd_doubling, dbl_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_name() == "CallForHelp" ? 0 : 2;
  }

  try {
    if (cmd_compare->parsed())
      return run_compare(k1, k2, big_n, d2, cmp_grid, cmp_out);

    if (cmd_riccati->parsed()) {
      if (!ric_profile_file.empty()) {
        mcp::CurvatureProfile profile = mcp::io::load_profile_file(ric_profile_file);
        return run_riccati(profile, profile.half_dim, ric_grid, ric_out);
      }
      const mcp::ModelSpace space = make_space(ric_space, ric_n);
      const mcp::PhaseState state = build_covector(space, ric_d, ric_u0, "");
      const auto profile =
          mcp::CurvatureProfile::make_constant(mcp::curvature_matrix(space, state));
      return run_riccati(profile, ric_n, ric_grid, ric_out);
    }

    if (cmd_geodesic->parsed()) {
      const mcp::ModelSpace space = make_space(geo_space, geo_n);
      const mcp::PhaseState state = build_covector(space, geo_d, geo_u0, geo_coeffs);
      return run_geodesic(space, state, geo_T, geo_steps, geo_method, geo_out);
    }

    if (cmd_check->parsed()) {
      mcp::ContractionReport report;
      if (!chk_profile_file.empty()) {
        mcp::CurvatureProfile profile = mcp::io::load_profile_file(chk_profile_file);
        report = mcp::mcp_inequality_check(profile, profile.half_dim, chk_k1,
                                           chk_k2, chk_grid.build());
      } else {
        if (chk_seed_opt->count() == 0)
          throw CLI::RequiredError("--seed (stochastic command)");
        mcp::SweepOptions opt;
        opt.d_min = chk_dmin;
        opt.d_max = chk_dmax;
        report = mcp::mcp_inequality_check(make_space(chk_space, chk_n), chk_k1,
                                           chk_k2, chk_samples, chk_grid.build(),
                                           chk_seed, opt);
      }
      emit_report(report, chk_out);
      return report_exit(report);
    }

    if (cmd_conjugate->parsed()) {
      mcp::CurvatureProfile profile;
      int n = con_n;
      if (!con_profile_file.empty()) {
        profile = mcp::io::load_profile_file(con_profile_file);
        n = profile.half_dim;
      } else {
        const mcp::ModelSpace space = make_space(con_space, con_n);
        const mcp::PhaseState state = build_covector(space, con_d, con_u0, "");
        profile = mcp::CurvatureProfile::make_constant(
            mcp::curvature_matrix(space, state));
      }
      const auto tc = mcp::detect_conjugate_time(profile, n, con_horizon);
      json j{{"schema_version", mcp::io::kSchemaVersion},
             {"type", "conjugate_report"},
             {"horizon", con_horizon},
             {"conjugate_time", tc ? json(*tc) : json(nullptr)}};
      emit_json(con_out, j);
      return 0;
    }

    if (cmd_doubling->parsed()) {
      if (dbl_seed_opt->count() == 0)
        throw CLI::RequiredError("--seed (stochastic command)");
      const auto space = mcp::ModelSpace::heisenberg(dbl_n);
      mcp::DoublingReport report =
          mcp::doubling_check(space, dbl_r, dbl_samples, dbl_seed, dbl_threads);
      if (dbl_out.format == "csv") {
        mcp::io::CsvWriter csv({"radius", "vol_r", "vol_2r", "ratio",
                                "expected_ratio", "rel_error", "mc_rel_std"});
        csv.add_row({report.radius, report.vol_r, report.vol_2r, report.ratio,
                     report.expected_ratio, report.rel_error, report.mc_rel_std});
        emit(dbl_out, csv.str());
      } else {
        emit_json(dbl_out, mcp::io::to_json(report));
      }
      return report.rel_error > dbl_tol ? 1 : 0;
    }
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
