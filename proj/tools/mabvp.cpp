#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mabvp/harness.hpp"
#include "mabvp/serialize.hpp"
#include "mabvp/transport.hpp"

namespace fs = std::filesystem;
using namespace mabvp;

namespace {

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNonConvergence: return 2;
    case ErrorCode::kInvalidConfig:
    case ErrorCode::kInvalidSpec: return 3;
    default: return 4;
  }
}

void emit(const Json& j, const std::string& out) {
  const std::string text = j.dump(2) + "\n";
  if (out.empty() || out == "-") std::cout << text;
  else write_text(out, text);
}

int default_threads() {
  if (const char* env = std::getenv("MABVP_THREADS")) {
    const int t = std::atoi(env);
    if (t > 0) return t;
  }
  return 1;
}

int finish(const ScenarioReport& rep, const std::string& out) {
  emit(rep.json, out);
  for (const auto& f : rep.failures)
    std::cerr << (f.required ? "error" : "warning") << ": " << f.stage << ": " << to_string(f.code) << ": "
              << f.message << "\n";
  return rep.exit_code();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semi-discrete Monge-Ampere second boundary-value solver and regularity harness"};
  app.require_subcommand(1);

  std::string scenario, out, csv_dir, svg, out_dir;
  int threads = default_threads();

  auto* solve = app.add_subcommand("solve", "Solve the transport problem and write the potential");
  solve->add_option("--scenario", scenario, "Scenario JSON")->required()->check(CLI::ExistingFile);
  solve->add_option("--out", out, "Potential JSON")->required();
  solve->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

  auto* analyze = app.add_subcommand("analyze", "Run every configured stage and write the report");
  analyze->add_option("--scenario", scenario, "Scenario JSON")->required()->check(CLI::ExistingFile);
  analyze->add_option("--out", out, "Report file (default stdout)");
  analyze->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  analyze->add_option("--csv-dir", csv_dir, "Directory for CSV tables");
  analyze->add_option("--svg", svg, "SVG of the first base point's sections");

  std::string oracle_kind = "affine";
  double oracle_a = 2.0;
  int oracle_n = 1024;
  auto* oracle = app.add_subcommand("oracle", "Run an exact-solution scenario");
  oracle->add_option("--kind", oracle_kind, "affine or radial")->check(CLI::IsMember({"affine", "radial"}));
  oracle->add_option("--a", oracle_a, "Affine stretch in [1, 4]");
  oracle->add_option("--N", oracle_n, "Site count");
  oracle->add_option("--out", out, "Report file (default stdout)");
  oracle->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

  std::vector<std::string> inputs;
  std::vector<std::string> bands;
  auto* compare = app.add_subcommand("compare", "Compare reports that differ only in N");
  compare->add_option("reports", inputs, "Report files")->required()->expected(2, -1);
  compare->add_option("--band", bands, "metric=relative_drift (repeatable)");
  compare->add_option("--out", out, "Verdict file (default stdout)");

  auto* sweep = app.add_subcommand("sweep", "Run a scenario at each N of its sweep list and compare");
  sweep->add_option("--scenario", scenario, "Scenario JSON")->required()->check(CLI::ExistingFile);
  sweep->add_option("--out", out_dir, "Output directory")->required();
  sweep->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    RunOptions ro;
    ro.threads = threads;
    if (*solve) {
      ScenarioConfig c = load_config(read_json(scenario));
      c.sections = c.sandwich = c.regularity = c.comparison = c.cascade = false;
      c.base_points.clear();
      ro.potential_path = out;
      const ScenarioReport rep = run_scenario(c, ro);
      for (const auto& f : rep.failures) std::cerr << "error: " << f.stage << ": " << f.message << "\n";
      if (rep.json.contains("solver")) std::cerr << rep.json["solver"].dump() << "\n";
      return rep.exit_code();
    }
    if (*analyze) {
      if (!csv_dir.empty()) ro.csv_dir = csv_dir;
      if (!svg.empty()) ro.svg_path = svg;
      return finish(run_scenario(load_config(read_json(scenario)), ro), out);
    }
    if (*oracle) {
      Json j;
      j["name"] = "oracle-" + oracle_kind;
      if (oracle_kind == "affine") {
        j["oracle"] = {{"kind", "affine"}, {"a", oracle_a}};
        j["corner_exclusion"] = 0.2;
        j["base_points"] = {0.0625};
      } else {
        j["oracle"] = {{"kind", "radial"},
                       {"density", {{"kind", "radial_poly"}, {"coeffs", {2.0 / 3.0, 0.0, 2.0 / 3.0}}}}};
        j["base_points"] = {0.125};
      }
      j["ladder"] = {{"h0", 0.04}, {"levels", 5}, {"ratio", 2.0}};
      j["N"] = oracle_n;
      return finish(run_scenario(load_config(j), ro), out);
    }
    if (*compare) {
      std::vector<Json> reports;
      for (const auto& p : inputs) reports.push_back(read_json(p));
      std::vector<std::pair<std::string, double>> b;
      for (const auto& s : bands) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw Error(ErrorCode::kInvalidConfig, "--band expects metric=value");
        b.emplace_back(s.substr(0, eq), std::stod(s.substr(eq + 1)));
      }
      if (b.empty()) b = ScenarioConfig{}.stability;
      const ConvergenceVerdict v = compare_reports(reports, b);
      emit(to_json(v), out);
      return v.pass ? 0 : 4;
    }
    if (*sweep) {
      const ScenarioConfig base = load_config(read_json(scenario));
      if (base.sweep_N.size() < 2) throw Error(ErrorCode::kInvalidConfig, "sweep needs at least two N values");
      fs::create_directories(out_dir);
      std::vector<Json> reports;
      int code = 0;
      for (int n : base.sweep_N) {
        ScenarioConfig c = base;
        c.N = n;
        const ScenarioReport rep = run_scenario(c, ro);
        const int rc = finish(rep, (fs::path(out_dir) / ("report_N" + std::to_string(n) + ".json")).string());
        if (rc != 0 && code == 0) code = rc;
        reports.push_back(rep.json);
      }
      const ConvergenceVerdict v = compare_reports(reports, base.stability);
      emit(to_json(v), (fs::path(out_dir) / "verdict.json").string());
      if (code == 0 && !v.pass) code = 4;
      return code;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
