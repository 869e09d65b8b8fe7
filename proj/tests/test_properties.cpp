#include <doctest.h>

#include "properties.hpp"

using namespace mabvp;

TEST_CASE("John ellipse containment over random polygons") {
  CHECK(props::john_containment_violations(1000, 17) == 0);
}

TEST_CASE("Legendre biconjugation") {
  const props::Solved s = props::solve_example(512);
  CHECK(props::biconjugation_error(s) <= 1e-10);
}

TEST_CASE("cyclical monotonicity of the discrete map") {
  const props::Solved s = props::solve_example(512);
  CHECK(props::monotonicity_violations(s, 1000) == 0);
}

TEST_CASE("rigid rotation covariance") {
  CHECK(props::rotation_covariance_error(512, 0.7) <= 1e-6);
}

TEST_CASE("report reproducibility across runs and thread counts") {
  const Json scenario = Json::parse(R"({
    "name": "repro",
    "source": {"kind": "square", "side": 2.0, "corner_radius": 0.2},
    "target": {"kind": "disk", "radius": 1.0},
    "density": {"kind": "holder", "alpha": 0.5, "amplitude": 0.5},
    "anchor_base_point": 0,
    "N": 256,
    "base_points": [0.1455],
    "ladder": {"h0": 0.08, "levels": 3, "ratio": 2},
    "regularity": {"spacing": 0.25},
    "comparison": {"ladder": {"h0": 0.16, "levels": 3, "ratio": 2}, "nodes_across": 12}
  })");
  CHECK(props::reports_identical(scenario));
}
