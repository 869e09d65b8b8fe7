#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mabvp/density.hpp"
#include "mabvp/error.hpp"
#include "mabvp/geometry.hpp"
#include "mabvp/serialize.hpp"

namespace mabvp {

inline constexpr int kReportSchemaVersion = 1;

struct LadderConfig {
  double h0 = 0.04;
  int levels = 5;
  double ratio = 4.0;
};

struct OracleConfig {
  enum class Kind { kAffine, kRadial };
  Kind kind = Kind::kAffine;
  double a = 2.0;     // affine
  DensitySpec radial;  // radial density about the origin
};

struct ScenarioConfig {
  std::string name = "scenario";
  std::optional<OracleConfig> oracle;  // replaces source, target and density
  DomainSpec source;
  DomainSpec target;
  DensitySpec density;
  /// Place a Hoelder/Dini anchor at this base point instead of `density.anchor`.
  std::optional<int> anchor_base_point;
  int N = 1024;
  std::uint64_t seed = 1;
  int lloyd = 30;
  double rotation = 0.0;  // rigid rotation of the whole configuration
  LadderConfig ladder;
  int boundary_samples = 256;
  std::vector<double> base_points = {0.125};
  double corner_exclusion = 0.0;

  double solve_tol = 1e-7;
  int solve_max_iterations = 200;
  double centring_tol = 1e-3;
  double dirichlet_tol = 1e-8;

  bool sections = true;
  bool sandwich = true;
  bool regularity = true;
  double hessian_spacing = 0.1;
  double hessian_rho = 0.5;
  double hessian_kappa = 0.0;
  std::vector<double> sobolev_p = {1, 2, 4, 8};
  int holder_bands = 4;

  bool comparison = false;
  LadderConfig comparison_ladder{0.16, 5, 2.0};
  int comparison_nodes = 24;
  bool cascade = false;
  double cascade_h0 = 0.4;
  int cascade_levels = 4;

  /// Relative drift bands for compare_reports, keyed by summary metric.
  std::vector<std::pair<std::string, double>> stability = {{"obliqueness.min", 0.3}};
  std::vector<int> sweep_N;

  Json echo;  // the document the config was read from
};

ScenarioConfig load_config(const Json& j);
Json config_to_json(const ScenarioConfig& c);

struct RunOptions {
  int threads = 1;
  std::optional<std::filesystem::path> csv_dir;
  std::optional<std::filesystem::path> svg_path;
  std::optional<std::filesystem::path> potential_path;  // solved potential as JSON
};

struct StageFailure {
  std::string stage;
  ErrorCode code = ErrorCode::kInvalidSpec;
  std::string message;
  bool required = false;
};

struct ScenarioReport {
  Json json;
  std::vector<StageFailure> failures;
  /// Flat metric -> value view of the report used by compare_reports.
  std::vector<std::pair<std::string, double>> summary;

  bool required_failed() const;
  /// 0 ok, 2 non-convergence, 3 invalid config, 4 other stage failure.
  int exit_code() const;
  double metric(const std::string& key) const;  // NaN when absent
};

/// Solve, then sections and D_h sets at each base point, regularity profiles
/// and the optional comparison stages. Stage errors are recorded, not thrown;
/// a failed solve ends the run.
ScenarioReport run_scenario(const ScenarioConfig& config, const RunOptions& options = {});

struct DriftRow {
  std::string metric;
  std::vector<double> values;
  double drift = 0.0;  // max relative change against the first report
  std::optional<double> band;
  bool pass = true;
};

struct ConvergenceVerdict {
  std::vector<int> N;
  std::vector<DriftRow> rows;
  bool pass = true;
};

/// Reports must share schema version and configuration apart from N;
/// otherwise IncompatibleReport.
ConvergenceVerdict compare_reports(const std::vector<Json>& reports,
                                   const std::vector<std::pair<std::string, double>>& bands);
Json to_json(const ConvergenceVerdict& v);

}  // namespace mabvp
