// Acceptance run: one PASS/FAIL line per criterion with the measured values.
// Exit status is nonzero when a criterion fails that was not listed with
// --expect-fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mabvp/comparison.hpp"
#include "mabvp/harness.hpp"
#include "mabvp/oracles.hpp"
#include "mabvp/sections.hpp"
#include "properties.hpp"

using namespace mabvp;

namespace {

// Scenario runs are shared between criteria and computed on first use.
class Runs {
 public:
  const ScenarioReport& get(const std::string& key) {
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    const auto t0 = std::chrono::steady_clock::now();
    ScenarioReport r = run_scenario(load_config(scenario(key)));
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("  [run] %-14s %6.1fs%s\n", key.c_str(), s, r.failures.empty() ? "" : "  (stage failures recorded)");
    for (const auto& f : r.failures)
      std::printf("        %s: %s: %s\n", f.stage.c_str(), to_string(f.code), f.message.c_str());
    return cache_.emplace(key, std::move(r)).first->second;
  }

  std::vector<double> mass_errors() const {
    std::vector<double> out;
    for (const auto& [k, r] : cache_) out.push_back(r.metric("solver.mass_error"));
    return out;
  }

 private:
  static Json scenario(const std::string& key) {
    if (key == "affine1024" || key == "affine4096") {
      return {{"name", key},
              {"oracle", {{"kind", "affine"}, {"a", 2.0}}},
              {"N", key == "affine1024" ? 1024 : 4096},
              {"corner_exclusion", 0.2},
              {"base_points", {0.0625}},
              {"ladder", {{"h0", 0.04}, {"levels", 5}, {"ratio", 2.0}}}};
    }
    if (key == "identity4096") {
      return {{"name", key},
              {"source", {{"kind", "square"}, {"side", 2.0}}},
              {"target", {{"kind", "square"}, {"side", 2.0}}},
              {"N", 4096},
              {"corner_exclusion", 0.2},
              {"base_points", {0.0625}},
              {"ladder", {{"h0", 0.04}, {"levels", 5}, {"ratio", 2.0}}},
              {"regularity", false}};
    }
    if (key == "radial4096") {
      return {{"name", key},
              {"oracle",
               {{"kind", "radial"}, {"density", {{"kind", "radial_poly"}, {"coeffs", {2.0 / 3.0, 0.0, 2.0 / 3.0}}}}}},
              {"N", 4096},
              {"base_points", {0.125}},
              {"ladder", {{"h0", 0.04}, {"levels", 5}, {"ratio", 2.0}}}};
    }
    if (key.rfind("rounded", 0) == 0) {
      return {{"name", "rounded-square-to-disk"},
              {"source", {{"kind", "square"}, {"side", 2.0}, {"corner_radius", 0.2}}},
              {"target", {{"kind", "disk"}, {"radius", 1.0}}},
              {"N", std::stoi(key.substr(7))},
              {"base_points", {0.0205, 0.1455}},  // corner-arc midpoint, flat-edge midpoint
              {"ladder", {{"h0", 0.01}, {"levels", 5}, {"ratio", std::sqrt(2.0)}}}};
    }
    if (key == "holder16384" || key == "const16384") {
      const bool holder = key == "holder16384";
      Json j = {{"name", key},
                {"source", {{"kind", "square"}, {"side", 2.0}}},
                {"target", {{"kind", "square"}, {"side", 2.0}}},
                {"density", holder ? Json{{"kind", "holder"}, {"alpha", 0.5}, {"amplitude", 0.5}}
                                   : Json{{"kind", "constant"}}},
                {"N", 16384},
                {"base_points", {0.125}},
                {"sandwich", false},
                {"cascade", {{"h0", 0.4}, {"levels", 4}}}};
      if (holder) {
        j["anchor_base_point"] = 0;
        j["comparison"] = {{"ladder", {{"h0", 0.16}, {"levels", 5}, {"ratio", 2.0}}}, {"nodes_across", 24}};
      } else {
        j["sections"] = false;
        j["regularity"] = false;
      }
      return j;
    }
    throw Error(ErrorCode::kInvalidConfig, "unknown acceptance scenario " + key);
  }

  std::map<std::string, ScenarioReport> cache_;
};

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string num(double v) { return fmt("%.4g", v); }

bool within(double v, double lo, double hi) { return std::isfinite(v) && v >= lo && v <= hi; }

double rel(double a, double b) { return std::abs(a - b) / std::abs(a); }

// Every base point metric with the given suffix.
std::vector<double> per_base_point(const ScenarioReport& r, const std::string& suffix) {
  std::vector<double> out;
  for (const auto& [k, v] : r.summary)
    if (k.rfind("bp", 0) == 0 && k.size() > suffix.size() && k.compare(k.size() - suffix.size(), suffix.size(), suffix) == 0)
      out.push_back(v);
  return out;
}

std::string list(const std::vector<double>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + num(v[i]);
  return s + "]";
}

bool all_within(const std::vector<double>& v, double lo, double hi) {
  if (v.empty()) return false;
  for (double x : v)
    if (!within(x, lo, hi)) return false;
  return true;
}

DensitySpec one_plus_r2() {
  DensitySpec g;
  g.kind = DensitySpec::Kind::kRadialPoly;
  g.coeffs = {2.0 / 3.0, 0.0, 2.0 / 3.0};
  return g;
}

// Decay exponent of the exact radial potential on the grid the report used.
// The disk curves away from the tangent, so this is not exactly 2 at finite t.
double radial_exact_decay(const ScenarioReport& r) {
  const RadialOracle o = oracle_radial(one_plus_r2());
  std::vector<Vec2> slopes;
  std::vector<double> offsets;
  for (double x = -1.25; x <= 1.25; x += 0.004)
    for (double y = -1.25; y <= 1.25; y += 0.004) {
      const Vec2 p(x, y);
      if (p.norm() > 1.2) continue;
      slopes.push_back(o.map(p));
      offsets.push_back(o.map(p).dot(p) - o.potential(p));
    }
  const MaxAffine u(std::move(slopes), std::move(offsets));
  const Json& bp = r.json["base_points"][0];
  const Frame fr = boundary_frame(o.source(), bp["s"].get<double>());
  const auto grid = bp["decay"]["t"].get<std::vector<double>>();
  return decay_profile(u, o.source().polygon(), fr, grid, o.map(fr.origin)).exponent;
}

MaxAffine quadratic_pieces() {
  std::vector<Vec2> s;
  std::vector<double> w;
  for (int i = 0; i <= 200; ++i)
    for (int k = 0; k <= 200; ++k) {
      const Vec2 y(-2.0 + 0.02 * i, -2.0 + 0.02 * k);
      s.push_back(y);
      w.push_back(0.5 * y.squaredNorm());
    }
  return MaxAffine(std::move(s), std::move(w));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::vector<int> expect_fail;
  std::vector<int> only;
  app.add_option("--expect-fail", expect_fail, "Criteria whose failure is documented and tolerated");
  app.add_option("--only", only, "Run only these criteria");
  CLI11_PARSE(app, argc, argv);

  Runs runs;
  std::vector<std::pair<std::string, std::function<Outcome()>>> criteria;

  criteria.emplace_back("affine oracle map error and rate", [&] {
    const double e1 = runs.get("affine1024").metric("oracle.map_rms");
    const double e4 = runs.get("affine4096").metric("oracle.map_rms");
    const double ratio = e4 / e1;
    return Outcome{e4 <= 0.06 && within(ratio, 0.4, 0.7),
                   "rms(4096)=" + num(e4) + " <= 0.06, rms ratio 1024->4096=" + num(ratio) + " in [0.4, 0.7]"};
  });

  criteria.emplace_back("radial oracle map error", [&] {
    const RadialOracle o = oracle_radial(one_plus_r2());
    const double r05 = o.radius(0.5);
    const double e = runs.get("radial4096").metric("oracle.map_rms");
    return Outcome{e <= 0.06 && std::abs(r05 - 0.43301) <= 1e-5,
                   "rms(4096)=" + num(e) + " <= 0.06, R(0.5)=" + fmt("%.6f", r05)};
  });

  criteria.emplace_back("mass conservation", [&] {
    for (const char* k : {"affine1024", "affine4096", "identity4096", "radial4096", "rounded2048", "rounded4096",
                          "rounded8192", "holder16384", "const16384"})
      runs.get(k);
    const auto errs = runs.mass_errors();
    double worst = 0.0;
    for (double e : errs) worst = std::max(worst, std::isfinite(e) ? e : 1.0);
    return Outcome{worst <= 1e-5, "max relative cell-mass error " + num(worst) + " over " +
                                      std::to_string(errs.size()) + " solves <= 1e-5"};
  });

  criteria.emplace_back("obliqueness", [&] {
    const double m2 = runs.get("rounded2048").metric("obliqueness.min");
    const double m8 = runs.get("rounded8192").metric("obliqueness.min");
    const double a = runs.get("affine4096").metric("obliqueness.min");
    const double r = runs.get("radial4096").metric("obliqueness.min");
    const double drift = rel(m2, m8);
    return Outcome{m2 >= 0.05 && m8 >= 0.05 && drift <= 0.3 && a >= 0.98 && r >= 0.98,
                   "rounded min " + num(m2) + " (2048), " + num(m8) + " (8192), drift " + num(drift) +
                       " <= 0.3; oracles " + num(a) + ", " + num(r) + " >= 0.98"};
  });

  criteria.emplace_back("uniform density and volume scaling", [&] {
    const auto& r = runs.get("rounded8192");
    const auto d = per_base_point(r, ".density_ratio_min");
    const auto v = per_base_point(r, ".volume_slope");
    return Outcome{all_within(d, 0.1, 1.0) && all_within(v, 0.85, 1.15),
                   "density ratio min " + list(d) + " >= 0.1; area slopes " + list(v) + " in [0.85, 1.15]"};
  });

  criteria.emplace_back("balance", [&] {
    const auto& r = runs.get("rounded8192");
    auto lo = per_base_point(r, ".balance_min"), hi = per_base_point(r, ".balance_max");
    const auto& a = runs.get("affine4096");
    const double amin = a.metric("bp0.balance_min"), amax = a.metric("bp0.balance_max");
    return Outcome{all_within(lo, 0.1, 10.0) && all_within(hi, 0.1, 10.0) && within(amin, 0.95, 1.05) &&
                       within(amax, 0.95, 1.05),
                   "rounded ratios in [" + num(*std::min_element(lo.begin(), lo.end())) + ", " +
                       num(*std::max_element(hi.begin(), hi.end())) + "] within [0.1, 10]; affine oracle [" +
                       num(amin) + ", " + num(amax) + "] within 1 +- 0.05"};
  });

  criteria.emplace_back("duality pairing", [&] {
    const auto& r = runs.get("rounded8192");
    const auto up = per_base_point(r, ".pairing_upper"), lo = per_base_point(r, ".pairing_lower");
    const MaxAffine q = quadratic_pieces();
    double qmin = 1e300, qmax = 0.0;
    for (double h : {0.01, 0.04}) {
      const PairingStats p = pairing_stats(centred_section(q, Vec2::Zero(), h), centred_section(q, Vec2::Zero(), h));
      qmin = std::min(qmin, p.upper);
      qmax = std::max(qmax, p.upper);
    }
    return Outcome{all_within(up, 0.0, 10.0) && all_within(lo, 0.05, 1e300) && within(qmin, 1.9, 2.1) &&
                       within(qmax, 1.9, 2.1),
                   "upper " + list(up) + " <= 10, lower " + list(lo) + " >= 0.05; quadratic upper in [" + num(qmin) +
                       ", " + num(qmax) + "] within 2 +- 0.1"};
  });

  criteria.emplace_back("D_h roundness", [&] {
    const auto& r = runs.get("rounded8192");
    auto s = per_base_point(r, ".dh_inradius_slope");
    const auto c = per_base_point(r, ".dh_circumradius_slope");
    s.insert(s.end(), c.begin(), c.end());
    const auto& a = runs.get("affine4096");
    const std::vector<double> o = {a.metric("bp0.dh_inradius_slope"), a.metric("bp0.dh_circumradius_slope")};
    return Outcome{all_within(s, 0.4, 0.6) && all_within(o, 0.48, 0.52),
                   "rounded slopes " + list(s) + " in [0.4, 0.6]; affine oracle " + list(o) + " within 0.5 +- 0.02"};
  });

  criteria.emplace_back("boundary decay", [&] {
    const auto d = per_base_point(runs.get("rounded8192"), ".decay_exponent");
    const std::vector<double> flat = {runs.get("affine4096").metric("bp0.decay_exponent"),
                                      runs.get("identity4096").metric("bp0.decay_exponent")};
    const double radial = runs.get("radial4096").metric("bp0.decay_exponent");
    const double exact = radial_exact_decay(runs.get("radial4096"));
    return Outcome{all_within(d, 1.8, 2.3) && all_within(flat, 1.98, 2.02) && std::abs(radial - exact) <= 0.02,
                   "rounded exponents " + list(d) + " in [1.8, 2.3]; flat-edge oracles " + list(flat) +
                       " within 2 +- 0.02; radial " + num(radial) + " within 0.02 of exact-profile " + num(exact)};
  });

  criteria.emplace_back("Dirichlet solver", [&] {
    std::vector<Vec2> v;
    for (int k = 0; k < 128; ++k) v.emplace_back(std::cos(2 * std::numbers::pi * k / 128), std::sin(2 * std::numbers::pi * k / 128));
    const ConvexPolygon disk = ConvexPolygon::from_vertices(v);
    auto zero = [](const Vec2&) { return 0.0; };
    const DirichletSolution w = solve_dirichlet(disk, zero, 1.0, 0.0886, {1e-10});
    double err = 0.0;
    for (std::size_t i = 0; i < w.nodes.size(); ++i)
      err = std::max(err, std::abs(w.values[i] - 0.5 * (w.nodes[i].squaredNorm() - 1.0)));
    const DirichletSolution w4 = solve_dirichlet(disk, zero, 4.0, 0.0886, {1e-12});
    double scale = 0.0;
    for (std::size_t i = 0; i < w.nodes.size(); ++i) scale = std::max(scale, std::abs(w4.values[i] - 2.0 * w.values[i]));
    return Outcome{err <= 0.02 && scale <= 1e-8, "sup error " + num(err) + " <= 0.02 at " +
                                                    std::to_string(w.nodes.size()) + " nodes; scaling identity " +
                                                    num(scale) + " <= 1e-8"};
  });

  criteria.emplace_back("comparison exponent", [&] {
    const Json& g = runs.get("holder16384").json["comparison"];
    int ok = 0;
    for (const auto& l : g["levels"]) ok += l["ok"].get<bool>();
    const double e = g["exponent"].is_number() ? g["exponent"].get<double>() : std::nan("");
    return Outcome{ok >= 4 && e >= 1.1, "fitted exponent " + num(e) + " >= 1.1 over " + std::to_string(ok) + " levels"};
  });

  criteria.emplace_back("cascade", [&] {
    const auto& h = runs.get("holder16384");
    const auto& c = runs.get("const16384");
    const double spread = h.metric("cascade.ratio_spread");
    const double floor = c.metric("cascade.gap_max");
    return Outcome{within(spread, 1.0, 5.0) && within(floor, 0.0, 0.01),
                   "Hoelder gap/omega max/min " + num(spread) + " <= 5 (C=" + num(h.metric("cascade.constant")) +
                       "); constant-f gap max " + num(floor) + " <= 0.01"};
  });

  criteria.emplace_back("Hessian Hoelder quotients", [&] {
    const double spread = runs.get("holder16384").metric("holder.spread");
    const double q1 = runs.get("affine1024").metric("holder.max");
    const double q4 = runs.get("affine4096").metric("holder.max");
    return Outcome{within(spread, 1.0, 3.0) && within(q4 / q1, 0.25, 1.0),
                   "Hoelder-f band max/min " + num(spread) + " <= 3; oracle quotient ratio N->4N " + num(q4 / q1) +
                       " in [0.25, 1]"};
  });

  criteria.emplace_back("W2p norms", [&] {
    const auto& a = runs.get("rounded4096");
    const auto& b = runs.get("rounded8192");
    double worst = 0.0;
    bool finite = true;
    for (int p : {1, 2, 4, 8}) {
      const std::string k = "sobolev.p" + std::to_string(p);
      finite = finite && std::isfinite(a.metric(k)) && std::isfinite(b.metric(k));
      worst = std::max(worst, rel(a.metric(k), b.metric(k)));
    }
    const double p2 = runs.get("affine4096").metric("sobolev.p2");
    return Outcome{finite && worst <= 0.2 && rel(std::sqrt(17.0), p2) <= 0.1,
                   "max drift 4096->8192 " + num(worst) + " <= 0.2; affine p=2 " + num(p2) + " vs sqrt(17)=" +
                       num(std::sqrt(17.0))};
  });

  criteria.emplace_back("property suites", [&] {
    const int john = props::john_containment_violations(1000, 17);
    const props::Solved s = props::solve_example(1024);
    const double bic = props::biconjugation_error(s);
    const int mono = props::monotonicity_violations(s, 1000);
    const double rot = props::rotation_covariance_error(1024, 0.7);
    const bool repro = props::reports_identical(Json::parse(R"({
      "name": "repro", "source": {"kind": "square", "corner_radius": 0.2}, "target": {"kind": "disk"},
      "N": 512, "base_points": [0.1455], "ladder": {"h0": 0.04, "levels": 3, "ratio": 2},
      "regularity": {"spacing": 0.2}})"));
    return Outcome{john == 0 && bic <= 1e-10 && mono == 0 && rot <= 1e-6 && repro,
                   "John violations " + std::to_string(john) + "/1000, biconjugation " + num(bic) +
                       ", monotonicity violations " + std::to_string(mono) + "/1000, rotation " + num(rot) +
                       ", reports " + (repro ? "byte-identical" : "differ")};
  });

  const std::set<int> expected(expect_fail.begin(), expect_fail.end());
  const std::set<int> selected(only.begin(), only.end());
  int unexpected = 0, failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = Outcome{false, std::string("error: ") + e.what()};
    }
    std::printf("%s %2d %s: %s%s\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(), o.detail.c_str(),
                !o.pass && expected.count(id) ? " (expected)" : "");
    std::fflush(stdout);
    if (!o.pass) {
      ++failed;
      if (!expected.count(id)) ++unexpected;
    }
  }
  std::printf("%d criteria failed, %d unexpectedly\n", failed, unexpected);
  return unexpected == 0 ? 0 : 1;
}
