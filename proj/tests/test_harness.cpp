#include <filesystem>
#include <fstream>

#include <doctest.h>

#include "mabvp/harness.hpp"

using namespace mabvp;

namespace {

Json small_scenario() {
  return Json::parse(R"({
    "name": "small",
    "source": {"kind": "square", "side": 2.0, "corner_radius": 0.2},
    "target": {"kind": "disk", "radius": 1.0},
    "N": 256,
    "lloyd": 10,
    "base_points": [0.1455],
    "ladder": {"h0": 0.08, "levels": 3, "ratio": 2},
    "regularity": {"spacing": 0.25}
  })");
}

Json strip_timing(Json j) {
  j.erase("wall_time_s");
  return j;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("domain and density specs round-trip through JSON") {
  DomainSpec d;
  d.kind = DomainSpec::Kind::kRoundedPolygon;
  d.vertices = {Vec2(0, 0), Vec2(2, 0), Vec2(1, 1.5)};
  d.corner_radius = 0.1;
  const Json jd = to_json(d);
  CHECK(to_json(domain_spec_from_json(jd)) == jd);

  DensitySpec f;
  f.kind = DensitySpec::Kind::kDini;
  f.table = {{0.0, 0.0}, {0.5, 0.2}, {1.0, 0.3}};
  f.anchor = Vec2(0.3, -1.0);
  const Json jf = to_json(f);
  CHECK(to_json(density_spec_from_json(jf)) == jf);

  CHECK_THROWS_AS(domain_spec_from_json(Json{{"kind", "hexagon"}}), Error);
  CHECK_THROWS_AS(density_spec_from_json(Json{{"kind", "gaussian"}}), Error);
}

TEST_CASE("potential round-trips through JSON") {
  const SemiDiscretePotential u({Vec2(0, 0), Vec2(1, 0.5)}, {1.0, 1.0}, {0.25, 0.0});
  const SemiDiscretePotential v = potential_from_json(to_json(u));
  CHECK(v.sites() == u.sites());
  CHECK(v.weights() == u.weights());
  CHECK(v(Vec2(0.3, 0.2)) == u(Vec2(0.3, 0.2)));
}

TEST_CASE("config loading validates and round-trips") {
  const ScenarioConfig c = load_config(small_scenario());
  CHECK(c.N == 256);
  CHECK(c.ladder.levels == 3);
  CHECK(c.hessian_spacing == 0.25);
  const Json echoed = config_to_json(c);
  CHECK(config_to_json(load_config(echoed)) == echoed);

  Json bad = small_scenario();
  bad["unknown"] = 1;
  CHECK_THROWS_AS(load_config(bad), Error);
  bad = small_scenario();
  bad["N"] = 4;
  CHECK_THROWS_AS(load_config(bad), Error);
  bad = small_scenario();
  bad["oracle"] = {{"kind", "affine"}, {"a", 9.0}};
  CHECK_THROWS_AS(load_config(bad), Error);
  bad = small_scenario();
  bad["N"] = "many";
  try {
    load_config(bad);
    FAIL("expected InvalidConfig");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInvalidConfig);
  }
}

TEST_CASE("scenario report is complete and reproducible") {
  const ScenarioConfig c = load_config(small_scenario());
  const ScenarioReport a = run_scenario(c);
  RunOptions two;
  two.threads = 2;
  const ScenarioReport b = run_scenario(c, two);
  CHECK(a.exit_code() == 0);
  CHECK(a.json["schema_version"] == kReportSchemaVersion);
  for (const char* key : {"config", "solver", "obliqueness", "base_points", "regularity", "constants", "summary"})
    CHECK(a.json.contains(key));
  CHECK(strip_timing(a.json).dump() == strip_timing(b.json).dump());
  CHECK(a.metric("solver.mass_error") <= 1e-5);
  CHECK(std::isnan(a.metric("no.such.metric")));
}

TEST_CASE("compare_reports of identical reports shows zero drift") {
  const ScenarioConfig c = load_config(small_scenario());
  const Json r = run_scenario(c).json;
  const ConvergenceVerdict v = compare_reports({r, r}, {{"obliqueness.min", 0.3}});
  CHECK(v.pass);
  for (const auto& row : v.rows)
    if (std::isfinite(row.drift)) CHECK(row.drift == 0.0);
  CHECK_THROWS_AS(compare_reports({r, r}, {{"not.a.metric", 0.1}}), Error);

  ScenarioConfig other = c;
  other.seed = 2;
  const Json s = run_scenario(other).json;
  CHECK_THROWS_AS(compare_reports({r, s}, {}), Error);
}

TEST_CASE("failed solve maps to exit code 2") {
  Json j = small_scenario();
  j["tolerances"] = {{"solve", 1e-14}, {"solve_max_iterations", 1}};
  const ScenarioReport r = run_scenario(load_config(j));
  CHECK(r.required_failed());
  CHECK(r.exit_code() == 2);
  CHECK(r.json.contains("failures"));
  CHECK_FALSE(r.json.contains("solver"));
}

TEST_CASE("shipped scenario files load") {
  int count = 0;
  for (const auto& e : std::filesystem::directory_iterator(MABVP_SCENARIO_DIR)) {
    if (e.path().extension() != ".json") continue;
    CAPTURE(e.path().string());
    CHECK_NOTHROW(load_config(read_json(e.path())));
    ++count;
  }
  CHECK(count >= 5);
}

TEST_CASE("CSV and SVG side outputs") {
  const auto dir = std::filesystem::temp_directory_path() / "mabvp_harness_test";
  std::filesystem::remove_all(dir);
  RunOptions o;
  o.csv_dir = dir;
  o.svg_path = dir / "sections.svg";
  o.potential_path = dir / "potential.json";
  run_scenario(load_config(small_scenario()), o);
  CHECK(std::filesystem::exists(dir / "obliqueness.csv"));
  CHECK(std::filesystem::exists(dir / "hessian.csv"));
  CHECK(std::filesystem::exists(dir / "sections.svg"));
  const SemiDiscretePotential u = potential_from_json(read_json(dir / "potential.json"));
  CHECK(u.size() == 256);
  std::ifstream csv(dir / "obliqueness.csv");
  std::string header;
  std::getline(csv, header);
  CHECK(header.find("value") != std::string::npos);
  std::filesystem::remove_all(dir);
}

}  // TEST_SUITE
