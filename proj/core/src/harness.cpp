#include "mabvp/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <set>

#include <Eigen/Geometry>

#include "mabvp/comparison.hpp"
#include "mabvp/oracles.hpp"
#include "mabvp/regularity.hpp"
#include "mabvp/sections.hpp"
#include "mabvp/transport.hpp"

namespace mabvp {

namespace {

template <typename T>
T field(const Json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("config field '") + key + "': " + e.what());
  }
}

void check_keys(const Json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : j.items()) {
    if (!ok.count(k)) throw Error(ErrorCode::kInvalidConfig, "unknown key '" + k + "' in " + where);
  }
}

LadderConfig ladder_from(const Json& j, LadderConfig d) {
  check_keys(j, {"h0", "levels", "ratio"}, "ladder");
  d.h0 = field(j, "h0", d.h0);
  d.levels = field(j, "levels", d.levels);
  d.ratio = field(j, "ratio", d.ratio);
  if (!(d.h0 > 0.0) || d.levels < 1 || !(d.ratio > 1.0))
    throw Error(ErrorCode::kInvalidConfig, "ladder needs h0 > 0, levels >= 1, ratio > 1");
  return d;
}

Json ladder_json(const LadderConfig& l) { return Json{{"h0", l.h0}, {"levels", l.levels}, {"ratio", l.ratio}}; }

void require(bool ok, const std::string& message) {
  if (!ok) throw Error(ErrorCode::kInvalidConfig, message);
}

}  // namespace

ScenarioConfig load_config(const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kInvalidConfig, "scenario must be a JSON object");
  check_keys(j,
             {"name", "oracle", "source", "target", "density", "anchor_base_point", "N", "seed", "lloyd", "rotation",
              "ladder", "boundary_samples", "base_points", "corner_exclusion", "tolerances", "sections", "sandwich",
              "regularity", "comparison", "cascade", "stability", "sweep"},
             "scenario");
  ScenarioConfig c;
  c.echo = j;
  c.name = field<std::string>(j, "name", c.name);
  if (j.contains("oracle")) {
    const Json& o = j["oracle"];
    check_keys(o, {"kind", "a", "density"}, "oracle");
    OracleConfig oc;
    const std::string kind = field<std::string>(o, "kind", "affine");
    if (kind == "affine") {
      oc.kind = OracleConfig::Kind::kAffine;
      oc.a = field(o, "a", oc.a);
      require(oc.a >= 1.0 && oc.a <= 4.0, "oracle.a must lie in [1, 4]");
    } else if (kind == "radial") {
      oc.kind = OracleConfig::Kind::kRadial;
      oc.radial = o.contains("density") ? density_spec_from_json(o["density"]) : DensitySpec{};
    } else {
      throw Error(ErrorCode::kInvalidConfig, "unknown oracle kind '" + kind + "'");
    }
    c.oracle = oc;
  } else {
    require(j.contains("source") && j.contains("target"), "scenario needs source and target (or an oracle)");
    c.source = domain_spec_from_json(j["source"]);
    c.target = domain_spec_from_json(j["target"]);
    if (j.contains("density")) c.density = density_spec_from_json(j["density"]);
  }
  if (j.contains("anchor_base_point")) c.anchor_base_point = field<int>(j, "anchor_base_point", 0);
  c.N = field(j, "N", c.N);
  c.seed = field(j, "seed", c.seed);
  c.lloyd = field(j, "lloyd", c.lloyd);
  c.rotation = field(j, "rotation", c.rotation);
  if (j.contains("ladder")) c.ladder = ladder_from(j["ladder"], c.ladder);
  c.boundary_samples = field(j, "boundary_samples", c.boundary_samples);
  c.base_points = field(j, "base_points", c.base_points);
  c.corner_exclusion = field(j, "corner_exclusion", c.corner_exclusion);
  if (j.contains("tolerances")) {
    const Json& t = j["tolerances"];
    check_keys(t, {"solve", "solve_max_iterations", "centring", "dirichlet"}, "tolerances");
    c.solve_tol = field(t, "solve", c.solve_tol);
    c.solve_max_iterations = field(t, "solve_max_iterations", c.solve_max_iterations);
    c.centring_tol = field(t, "centring", c.centring_tol);
    c.dirichlet_tol = field(t, "dirichlet", c.dirichlet_tol);
  }
  c.sections = field(j, "sections", c.sections);
  c.sandwich = field(j, "sandwich", c.sandwich);
  if (j.contains("regularity")) {
    const Json& r = j["regularity"];
    if (r.is_boolean()) {
      c.regularity = r.get<bool>();
    } else {
      check_keys(r, {"enabled", "spacing", "rho", "kappa", "sobolev_p", "bands"}, "regularity");
      c.regularity = field(r, "enabled", true);
      c.hessian_spacing = field(r, "spacing", c.hessian_spacing);
      c.hessian_rho = field(r, "rho", c.hessian_rho);
      c.hessian_kappa = field(r, "kappa", c.hessian_kappa);
      c.sobolev_p = field(r, "sobolev_p", c.sobolev_p);
      c.holder_bands = field(r, "bands", c.holder_bands);
    }
  }
  if (j.contains("comparison")) {
    const Json& r = j["comparison"];
    if (r.is_boolean()) {
      c.comparison = r.get<bool>();
    } else {
      check_keys(r, {"enabled", "ladder", "nodes_across"}, "comparison");
      c.comparison = field(r, "enabled", true);
      if (r.contains("ladder")) c.comparison_ladder = ladder_from(r["ladder"], c.comparison_ladder);
      c.comparison_nodes = field(r, "nodes_across", c.comparison_nodes);
    }
  }
  if (j.contains("cascade")) {
    const Json& r = j["cascade"];
    if (r.is_boolean()) {
      c.cascade = r.get<bool>();
    } else {
      check_keys(r, {"enabled", "h0", "levels"}, "cascade");
      c.cascade = field(r, "enabled", true);
      c.cascade_h0 = field(r, "h0", c.cascade_h0);
      c.cascade_levels = field(r, "levels", c.cascade_levels);
    }
  }
  if (j.contains("stability")) {
    c.stability.clear();
    for (const auto& [k, v] : j["stability"].items()) c.stability.emplace_back(k, v.get<double>());
  }
  if (j.contains("sweep")) {
    check_keys(j["sweep"], {"N"}, "sweep");
    c.sweep_N = field(j["sweep"], "N", c.sweep_N);
  }

  require(c.N >= 16, "N must be at least 16");
  require(c.lloyd >= 0, "lloyd must be nonnegative");
  require(c.boundary_samples >= 1, "boundary_samples must be positive");
  require(c.solve_tol > 0.0 && c.centring_tol > 0.0 && c.dirichlet_tol > 0.0, "tolerances must be positive");
  require(c.solve_max_iterations > 0, "solve_max_iterations must be positive");
  require(c.hessian_spacing > 0.0 && c.hessian_rho > 0.0 && c.hessian_kappa >= 0.0, "bad regularity parameters");
  require(c.comparison_nodes >= 10, "comparison.nodes_across must be at least 10");
  require(c.cascade_levels >= 1 && c.cascade_levels <= 6, "cascade.levels must lie in 1..6");
  require(c.cascade_h0 > 0.0, "cascade.h0 must be positive");
  require(c.corner_exclusion >= 0.0, "corner_exclusion must be nonnegative");
  for (double s : c.base_points) require(s >= 0.0 && s < 1.0, "base points are arclength fractions in [0, 1)");
  for (double p : c.sobolev_p) require(p >= 1.0, "sobolev exponents must be >= 1");
  for (const auto& [k, v] : c.stability) require(v > 0.0, "stability bands must be positive");
  if (c.anchor_base_point)
    require(*c.anchor_base_point >= 0 && *c.anchor_base_point < static_cast<int>(c.base_points.size()),
            "anchor_base_point out of range");
  for (int n : c.sweep_N) require(n >= 16, "sweep N must be at least 16");
  return c;
}

Json config_to_json(const ScenarioConfig& c) {
  Json j;
  j["name"] = c.name;
  if (c.oracle) {
    Json o;
    if (c.oracle->kind == OracleConfig::Kind::kAffine) {
      o["kind"] = "affine";
      o["a"] = c.oracle->a;
    } else {
      o["kind"] = "radial";
      o["density"] = to_json(c.oracle->radial);
    }
    j["oracle"] = o;
  } else {
    j["source"] = to_json(c.source);
    j["target"] = to_json(c.target);
    j["density"] = to_json(c.density);
  }
  if (c.anchor_base_point) j["anchor_base_point"] = *c.anchor_base_point;
  j["N"] = c.N;
  j["seed"] = c.seed;
  j["lloyd"] = c.lloyd;
  j["rotation"] = c.rotation;
  j["ladder"] = ladder_json(c.ladder);
  j["boundary_samples"] = c.boundary_samples;
  j["base_points"] = c.base_points;
  j["corner_exclusion"] = c.corner_exclusion;
  j["tolerances"] = {{"solve", c.solve_tol},
                     {"solve_max_iterations", c.solve_max_iterations},
                     {"centring", c.centring_tol},
                     {"dirichlet", c.dirichlet_tol}};
  j["sections"] = c.sections;
  j["sandwich"] = c.sandwich;
  j["regularity"] = {{"enabled", c.regularity}, {"spacing", c.hessian_spacing}, {"rho", c.hessian_rho},
                     {"kappa", c.hessian_kappa}, {"sobolev_p", c.sobolev_p},  {"bands", c.holder_bands}};
  j["comparison"] = {
      {"enabled", c.comparison}, {"ladder", ladder_json(c.comparison_ladder)}, {"nodes_across", c.comparison_nodes}};
  j["cascade"] = {{"enabled", c.cascade}, {"h0", c.cascade_h0}, {"levels", c.cascade_levels}};
  Json st = Json::object();
  for (const auto& [k, v] : c.stability) st[k] = v;
  j["stability"] = st;
  if (!c.sweep_N.empty()) j["sweep"] = {{"N", c.sweep_N}};
  return j;
}

namespace {

struct Setup {
  ConvexDomain source;
  ConvexDomain target;
  DensityField density;
};

Setup build_setup(const ScenarioConfig& c) {
  auto finish = [&](ConvexDomain src, ConvexDomain tgt, DensitySpec spec) {
    src = src.rotated(c.rotation);
    tgt = tgt.rotated(c.rotation);
    DensityField f = DensityField(spec).rotated(c.rotation);
    if (c.anchor_base_point) {
      spec = f.spec();
      spec.anchor = src.point_at(c.base_points[static_cast<std::size_t>(*c.anchor_base_point)]);
      f = DensityField(spec);
    }
    f.normalize(src.polygon(), tgt.area());
    return Setup{std::move(src), std::move(tgt), std::move(f)};
  };
  if (c.oracle && c.oracle->kind == OracleConfig::Kind::kAffine) {
    const AffineOracle o = oracle_affine(c.oracle->a);
    return finish(o.source, o.target, DensitySpec{});
  }
  if (c.oracle) {
    const RadialOracle o = oracle_radial(c.oracle->radial);
    return finish(o.source(), o.target(), c.oracle->radial);
  }
  return finish(make_domain(c.source), make_domain(c.target), c.density);
}

class Recorder {
 public:
  explicit Recorder(ScenarioReport& report) : report_(report) {}

  template <typename F>
  bool run(const std::string& stage, bool required, F&& body) {
    try {
      body();
      return true;
    } catch (const Error& e) {
      report_.failures.push_back({stage, e.code(), e.what(), required});
    } catch (const std::exception& e) {
      report_.failures.push_back({stage, ErrorCode::kConstructionError, e.what(), required});
    }
    return false;
  }

  void metric(const std::string& key, double value) { report_.summary.emplace_back(key, value); }

 private:
  ScenarioReport& report_;
};

Json resolution(int N, const std::vector<double>& ladder) { return Json{{"N", N}, {"ladder", ladder}}; }

double rel_min(const std::vector<double>& v) {
  return v.empty() ? std::numeric_limits<double>::quiet_NaN() : *std::min_element(v.begin(), v.end());
}
double rel_max(const std::vector<double>& v) {
  return v.empty() ? std::numeric_limits<double>::quiet_NaN() : *std::max_element(v.begin(), v.end());
}

}  // namespace

bool ScenarioReport::required_failed() const {
  return std::any_of(failures.begin(), failures.end(), [](const StageFailure& f) { return f.required; });
}

int ScenarioReport::exit_code() const {
  int code = 0;
  for (const auto& f : failures) {
    if (!f.required) continue;
    int c = 4;
    if (f.code == ErrorCode::kNonConvergence) c = 2;
    if (f.code == ErrorCode::kInvalidConfig || f.code == ErrorCode::kInvalidSpec) c = 3;
    if (code == 0 || c < code) code = c;
  }
  return code;
}

double ScenarioReport::metric(const std::string& key) const {
  for (const auto& [k, v] : summary)
    if (k == key) return v;
  return std::numeric_limits<double>::quiet_NaN();
}

namespace {

struct BasePointResult {
  std::vector<double> density_ratios;
  std::vector<double> balance;
  std::vector<double> pairing_upper;
  std::vector<double> pairing_lower;
  std::vector<double> sandwich;
  std::vector<ConvexPolygon> polygons;
};

Json oracle_metrics(const ScenarioConfig& c, const SemiDiscretePotential& u, const LaguerreDiagram& d,
                    const Setup& setup, Recorder& rec) {
  const Mat2 back = Eigen::Rotation2Dd(-c.rotation).toRotationMatrix();
  const Mat2 fwd = back.transpose();
  std::function<Vec2(const Vec2&)> exact;
  if (c.oracle->kind == OracleConfig::Kind::kAffine) {
    const AffineOracle o = oracle_affine(c.oracle->a);
    exact = [o, back, fwd](const Vec2& x) { return Vec2(fwd * o.map(back * x)); };
  } else {
    const RadialOracle o = oracle_radial(c.oracle->radial);
    exact = [o, back, fwd](const Vec2& x) { return Vec2(fwd * o.map(back * x)); };
  }
  double sum = 0.0, worst = 0.0;
  int count = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (d.cells[i].empty()) continue;
    const double e = (u.sites()[i] - exact(d.cells[i].centroid())).norm();
    sum += e * e;
    worst = std::max(worst, e);
    ++count;
  }
  Json j;
  j["kind"] = c.oracle->kind == OracleConfig::Kind::kAffine ? "affine" : "radial";
  j["map_rms"] = std::sqrt(sum / std::max(count, 1));
  j["map_max"] = worst;
  if (c.oracle->kind == OracleConfig::Kind::kAffine) {
    const AffineOracle o = oracle_affine(c.oracle->a);
    Json norms;
    for (double p : c.sobolev_p) norms[std::to_string(static_cast<int>(p))] = o.sobolev_norm(p);
    j["sobolev_exact"] = norms;
  }
  (void)setup;
  rec.metric("oracle.map_rms", j["map_rms"].get<double>());
  rec.metric("oracle.map_max", worst);
  return j;
}

Json base_point_stage(const ScenarioConfig& c, const Setup& setup, const SemiDiscretePotential& u,
                      const DualPotential& v, int index, Recorder& rec, BasePointResult& res) {
  const double s = c.base_points[static_cast<std::size_t>(index)];
  const std::string tag = "bp" + std::to_string(index);
  const Frame frame = boundary_frame(setup.source, s);
  const Vec2 x0 = frame.origin;
  const Vec2 y0 = brenier_map(u, x0);
  const Vec2 slope = setup.target.project(y0).point;
  const std::vector<double> heights = height_ladder(c.ladder.h0, c.ladder.levels, c.ladder.ratio);

  Json j;
  j["s"] = s;
  j["x0"] = to_json(x0);
  j["inner_normal"] = to_json(frame.e2);
  j["image"] = to_json(y0);
  j["boundary_slope"] = to_json(slope);

  SectionOptions opt;
  opt.box_radius = 2.0 * setup.source.diameter();
  opt.centring_tolerance = c.centring_tol;
  opt.with_john = false;
  SectionOptions opt_v = opt;
  opt_v.box_radius = 2.0 * setup.target.diameter();

  if (c.sections) {
    Json ladder = Json::array();
    std::vector<Section> secs;
    std::optional<Vec2> warm, warm_v;
    for (double h : heights) {
      Json lv;
      lv["h"] = h;
      rec.run(tag + ".section", false, [&] {
        const Section sec = centred_section(u.function(), x0, h, opt, warm);
        warm = sec.slope;
        const double dr = density_ratio(sec, setup.source.polygon());
        const BalanceStats b = balance_stats(sec, frame);
        lv["area"] = sec.polygon.area();
        lv["diameter"] = sec.polygon.diameter();
        lv["iterations"] = sec.iterations;
        lv["density_ratio"] = dr;
        lv["balance"] = {{"q1", b.q1}, {"xi1", b.xi1}, {"ratio", b.ratio}};
        res.density_ratios.push_back(dr);
        res.balance.push_back(b.ratio);
        res.polygons.push_back(sec.polygon);
        secs.push_back(sec);
        rec.run(tag + ".pairing", false, [&] {
          const Section sv = centred_section(v.function(), y0, h, opt_v, warm_v);
          warm_v = sv.slope;
          const PairingStats ps = pairing_stats(sec, sv);
          lv["pairing"] = {{"upper", ps.upper}, {"lower", ps.lower}};
          res.pairing_upper.push_back(ps.upper);
          res.pairing_lower.push_back(ps.lower);
        });
      });
      if (c.sandwich) {
        rec.run(tag + ".sandwich", false, [&] {
          const double b = sandwich_constant(u.function(), setup.source.polygon(), x0, h, opt);
          lv["sandwich_b"] = number(b);
          res.sandwich.push_back(b);
        });
      }
      ladder.push_back(lv);
    }
    j["ladder"] = ladder;
    if (secs.size() >= 2) {
      const ScalingFit fit = scaling_fit(secs, frame);
      j["scaling"] = {{"volume", fit.volume}, {"tangential", fit.tangential}, {"normal", fit.normal}};
      rec.metric(tag + ".volume_slope", fit.volume);
    }
    rec.metric(tag + ".density_ratio_min", rel_min(res.density_ratios));
    rec.metric(tag + ".balance_min", rel_min(res.balance));
    rec.metric(tag + ".balance_max", rel_max(res.balance));
    rec.metric(tag + ".pairing_upper", rel_max(res.pairing_upper));
    rec.metric(tag + ".pairing_lower", rel_min(res.pairing_lower));
  }

  // D_h sets share the ladder.
  {
    Json dh = Json::array();
    std::vector<double> hs, inr, circ;
    for (double h : heights) {
      rec.run(tag + ".dh", false, [&] {
        const DhSet d = dh_set(u.function(), setup.source.polygon(), frame, h, 1.0, slope);
        dh.push_back({{"h", h}, {"a", d.a}, {"inradius", d.inradius}, {"circumradius", d.circumradius}});
        hs.push_back(h);
        inr.push_back(d.inradius);
        circ.push_back(d.circumradius);
      });
    }
    j["dh"] = dh;
    if (hs.size() >= 2) {
      j["dh_slopes"] = {{"inradius", loglog_slope(hs, inr)}, {"circumradius", loglog_slope(hs, circ)}};
      rec.metric(tag + ".dh_inradius_slope", loglog_slope(hs, inr));
      rec.metric(tag + ".dh_circumradius_slope", loglog_slope(hs, circ));
    }
  }

  // Decay along the tangent, from a few cells out to a quarter of the domain.
  rec.run(tag + ".decay", false, [&] {
    const double cell = std::sqrt(setup.source.area() / c.N);
    std::vector<double> grid;
    const double t1 = 0.25 * setup.source.diameter();
    for (double t = 4.0 * cell; t <= t1 * (1.0 + 1e-12); t *= std::sqrt(2.0)) grid.push_back(t);
    const DecayProfile dp = decay_profile(u.function(), setup.source.polygon(), frame, grid, slope);
    j["decay"] = {{"t", dp.t}, {"value", dp.value}, {"reflected", dp.reflected}, {"exponent", dp.exponent}};
    rec.metric(tag + ".decay_exponent", dp.exponent);
  });
  return j;
}

}  // namespace

ScenarioReport run_scenario(const ScenarioConfig& c, const RunOptions& options) {
  using Clock = std::chrono::steady_clock;
  const auto t_start = Clock::now();
  ScenarioReport rep;
  Recorder rec(rep);
  Json& j = rep.json;
  j["schema_version"] = kReportSchemaVersion;
  j["name"] = c.name;
  j["config"] = config_to_json(c);
  j["threads_independent"] = true;

  std::optional<Setup> setup;
  rec.run("setup", true, [&] { setup = build_setup(c); });
  std::optional<SemiDiscretePotential> u;
  double solve_seconds = 0.0;
  if (setup) {
    rec.run("solve", true, [&] {
      const auto t0 = Clock::now();
      const TargetSample smp = sample_target(setup->target, c.N, c.seed, c.lloyd, c.rotation);
      SolveOptions so;
      so.tol = c.solve_tol;
      so.max_iterations = c.solve_max_iterations;
      so.threads = options.threads;
      u = solve_potential(setup->source, setup->density, smp.sites, smp.masses, so);
      solve_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    });
    if (u && options.potential_path) {
      rec.run("potential", true, [&] { write_text(*options.potential_path, to_json(*u).dump(2) + "\n"); });
    }
  }
  if (!u) {
    Json f = Json::array();
    for (const auto& x : rep.failures)
      f.push_back({{"stage", x.stage}, {"code", to_string(x.code)}, {"message", x.message}, {"required", x.required}});
    j["failures"] = f;
    j["wall_time_s"] = {{"solve", solve_seconds},
                        {"total", std::chrono::duration<double>(Clock::now() - t_start).count()}};
    return rep;
  }

  const LaguerreDiagram diagram = laguerre_diagram(*u, setup->source, options.threads);
  {
    double mass_err = 0.0;
    for (std::size_t i = 0; i < u->size(); ++i) {
      const double m = setup->density.integrate(diagram.cells[i]);
      mass_err = std::max(mass_err, std::abs(m - u->masses()[i]) / u->masses()[i]);
    }
    j["solver"] = {{"N", c.N}, {"iterations", u->iterations}, {"residual", u->residual}, {"mass_error", mass_err}};
    rec.metric("solver.mass_error", mass_err);
  }
  if (c.oracle) rec.run("oracle", true, [&] { j["oracle"] = oracle_metrics(c, *u, diagram, *setup, rec); });

  std::optional<ObliquenessProfile> obl;
  // Corner sources need an exclusion zone; default to a few cell widths.
  const double exclusion = c.corner_exclusion > 0.0 || !setup->source.has_corners()
                               ? c.corner_exclusion
                               : 4.0 * std::sqrt(setup->source.area() / c.N);
  rec.run("obliqueness", true, [&] {
    obl = obliqueness_profile(*u, setup->source, setup->target, c.boundary_samples, exclusion);
    j["obliqueness"] = to_json(*obl, false);
    rec.metric("obliqueness.min", obl->min);
    rec.metric("obliqueness.p5", obl->p5);
  });

  const DualPotential v = legendre_dual(*u, diagram);
  Json bps = Json::array();
  BasePointResult all;
  for (int b = 0; b < static_cast<int>(c.base_points.size()); ++b) {
    BasePointResult res;
    rec.run("bp" + std::to_string(b), true, [&] { bps.push_back(base_point_stage(c, *setup, *u, v, b, rec, res)); });
    auto merge = [](std::vector<double>& dst, const std::vector<double>& src) {
      dst.insert(dst.end(), src.begin(), src.end());
    };
    merge(all.density_ratios, res.density_ratios);
    merge(all.balance, res.balance);
    merge(all.pairing_upper, res.pairing_upper);
    merge(all.pairing_lower, res.pairing_lower);
    merge(all.sandwich, res.sandwich);
    if (b == 0) all.polygons = res.polygons;
  }
  j["base_points"] = bps;

  std::optional<HessianField> field;
  if (c.regularity) {
    rec.run("regularity", true, [&] {
      const std::vector<Vec2> samples =
          lattice_samples(setup->source, c.hessian_spacing, c.rotation, exclusion);
      RadiusPolicy pol;
      pol.rho = c.hessian_rho;
      pol.kappa = c.hessian_kappa;
      field = hessian_field(*u, diagram, setup->source, samples, pol, options.threads);
      Json r;
      r["samples"] = field->samples.size();
      r["dropped"] = field->dropped.size();
      Json norms;
      for (double p : c.sobolev_p) {
        const double n = sobolev_norm(*field, p);
        norms[std::to_string(static_cast<int>(p))] = n;
        rec.metric("sobolev.p" + std::to_string(static_cast<int>(p)), n);
      }
      r["sobolev"] = norms;
      std::vector<double> det;
      double deepest = 0.0;
      for (const auto& h : field->samples) deepest = std::max(deepest, h.boundary_distance);
      for (const auto& h : field->samples)
        if (h.boundary_distance >= 0.25 * deepest) det.push_back(h.hessian.determinant() / setup->density(h.x));
      r["det_over_f"] = {{"count", det.size()}, {"min", number(rel_min(det))}, {"max", number(rel_max(det))}};
      rec.metric("det_over_f.min", rel_min(det));
      rec.metric("det_over_f.max", rel_max(det));

      const double alpha =
          setup->density.spec().kind == DensitySpec::Kind::kHolder ? setup->density.spec().alpha : 1.0;
      const double d0 = std::ldexp(1.01 * c.hessian_spacing, c.holder_bands);
      const Vec2 center = setup->source.point_at(c.base_points.empty() ? 0.0 : c.base_points[0]);
      const auto bands = holder_seminorm(*field, alpha, d0, c.holder_bands, center, d0);
      Json bj = Json::array();
      std::vector<double> maxima;
      for (const auto& q : bands) {
        bj.push_back({{"band", q.band}, {"lo", q.lo}, {"hi", q.hi}, {"max", q.max}, {"pairs", q.pairs}});
        if (q.max > 0.0) maxima.push_back(q.max);
      }
      r["holder"] = {{"alpha", alpha}, {"d0", d0}, {"bands", bj}};
      if (!maxima.empty()) {
        rec.metric("holder.max", rel_max(maxima));
        rec.metric("holder.spread", rel_max(maxima) / rel_min(maxima));
      }
      std::vector<double> radii;
      for (int k = 0; k < 4; ++k) radii.push_back(std::ldexp(c.hessian_spacing * 1.01, k));
      const ModulusReport m = modulus_report(*field, setup->density, radii);
      r["modulus"] = {{"r", m.r}, {"omega", m.omega}, {"dini", m.dini}, {"trend_exponent", m.trend_exponent},
                      {"decreasing", m.decreasing}};
      j["regularity"] = r;
    });
  }

  if ((c.comparison || c.cascade) && !c.base_points.empty()) {
    const Frame frame = boundary_frame(setup->source, c.base_points[0]);
    ComparisonOptions co;
    co.nodes_across = c.comparison_nodes;
    co.tol = c.dirichlet_tol;
    co.slope = setup->target.project(brenier_map(*u, frame.origin)).point;
    if (c.comparison) {
      rec.run("comparison", true, [&] {
        const auto heights =
            height_ladder(c.comparison_ladder.h0, c.comparison_ladder.levels, c.comparison_ladder.ratio);
        const ComparisonGap g =
            comparison_gap(u->function(), setup->source.polygon(), frame, heights, setup->density(frame.origin), co);
        j["comparison"] = to_json(g);
        if (g.fitted) rec.metric("comparison.exponent", g.exponent);
        if (options.csv_dir) write_text(*options.csv_dir / "gap.csv", gap_csv(g));
      });
    }
    if (c.cascade) {
      rec.run("cascade", true, [&] {
        const CascadeReport cr = cascade_report(u->function(), setup->source.polygon(), frame, setup->density,
                                                c.cascade_h0, c.cascade_levels, co);
        j["cascade"] = to_json(cr);
        rec.metric("cascade.constant", cr.constant);
        rec.metric("cascade.ratio_spread", cr.ratio_spread);
        rec.metric("cascade.gap_max", [&] {
          double g = 0.0;
          for (std::size_t k = 0; k + 1 < cr.levels.size(); ++k) g = std::max(g, cr.levels[k].gap);
          return g;
        }());
        if (options.csv_dir) write_text(*options.csv_dir / "cascade.csv", cascade_csv(cr));
        if (cr.truncated) throw Error(ErrorCode::kNonConvergence, "cascade truncated: " + cr.error);
      });
    }
  }

  // Measured constants, each with the resolution it was measured at.
  {
    const auto ladder = height_ladder(c.ladder.h0, c.ladder.levels, c.ladder.ratio);
    Json k;
    k["delta0"] = {{"value", number(rel_min(all.density_ratios))}, {"resolution", resolution(c.N, ladder)}};
    if (obl)
      k["mu"] = {{"value", obl->min}, {"resolution", {{"N", c.N}, {"boundary_samples", c.boundary_samples}}}};
    k["b"] = {{"value", number(rel_max(all.sandwich))}, {"resolution", resolution(c.N, ladder)}};
    k["pairing"] = {{"upper", number(rel_max(all.pairing_upper))},
                    {"lower", number(rel_min(all.pairing_lower))},
                    {"resolution", resolution(c.N, ladder)}};
    j["constants"] = k;
  }

  if (options.csv_dir) {
    rec.run("csv", false, [&] {
      if (obl) write_text(*options.csv_dir / "obliqueness.csv", obliqueness_csv(*obl));
      if (field) write_text(*options.csv_dir / "hessian.csv", hessian_csv(*field));
    });
  }
  if (options.svg_path) {
    rec.run("svg", false, [&] {
      std::vector<ConvexPolygon> polys{setup->source.polygon()};
      polys.insert(polys.end(), all.polygons.begin(), all.polygons.end());
      write_text(*options.svg_path, to_svg(polys));
    });
  }

  Json summary = Json::object();
  for (const auto& [key, value] : rep.summary) summary[key] = number(value);
  j["summary"] = summary;
  Json f = Json::array();
  for (const auto& x : rep.failures)
    f.push_back({{"stage", x.stage}, {"code", to_string(x.code)}, {"message", x.message}, {"required", x.required}});
  j["failures"] = f;
  j["wall_time_s"] = {{"solve", solve_seconds},
                      {"total", std::chrono::duration<double>(Clock::now() - t_start).count()}};
  return rep;
}

ConvergenceVerdict compare_reports(const std::vector<Json>& reports,
                                   const std::vector<std::pair<std::string, double>>& bands) {
  if (reports.size() < 2) throw Error(ErrorCode::kIncompatibleReport, "compare_reports: need at least two reports");
  auto stripped = [](Json cfg) {
    cfg.erase("N");
    cfg.erase("sweep");
    return cfg;
  };
  const Json& first = reports.front();
  for (const auto& r : reports) {
    if (!r.contains("schema_version") || r["schema_version"] != first["schema_version"])
      throw Error(ErrorCode::kIncompatibleReport, "compare_reports: schema version mismatch");
    if (!r.contains("config") || stripped(r["config"]) != stripped(first["config"]))
      throw Error(ErrorCode::kIncompatibleReport, "compare_reports: configurations differ beyond N");
    if (!r.contains("summary")) throw Error(ErrorCode::kIncompatibleReport, "compare_reports: report has no summary");
  }
  ConvergenceVerdict out;
  for (const auto& r : reports) out.N.push_back(r["config"]["N"].get<int>());
  for (const auto& [key, value] : first["summary"].items()) {
    DriftRow row;
    row.metric = key;
    bool finite = true;
    for (const auto& r : reports) {
      const Json& s = r["summary"];
      const double x = s.contains(key) && s[key].is_number() ? s[key].get<double>()
                                                             : std::numeric_limits<double>::quiet_NaN();
      finite = finite && std::isfinite(x);
      row.values.push_back(x);
    }
    const double base = row.values.front();
    for (double x : row.values)
      row.drift = std::max(row.drift, std::abs(x - base) / std::max(std::abs(base), 1e-300));
    if (!finite) row.drift = std::numeric_limits<double>::infinity();
    for (const auto& [bk, bv] : bands) {
      if (bk == key) row.band = bv;
    }
    if (row.band) row.pass = row.drift <= *row.band;
    out.pass = out.pass && row.pass;
    out.rows.push_back(row);
  }
  for (const auto& [bk, bv] : bands) {
    if (!first["summary"].contains(bk))
      throw Error(ErrorCode::kIncompatibleReport, "compare_reports: no metric '" + bk + "' in the reports");
  }
  return out;
}

Json to_json(const ConvergenceVerdict& v) {
  Json rows = Json::array();
  for (const auto& r : v.rows) {
    Json values = Json::array();
    for (double x : r.values) values.push_back(number(x));
    Json row{{"metric", r.metric}, {"values", values}, {"drift", number(r.drift)}};
    row["band"] = r.band ? Json(*r.band) : Json(nullptr);
    row["pass"] = r.pass;
    rows.push_back(row);
  }
  return Json{{"N", v.N}, {"rows", rows}, {"pass", v.pass}};
}

}  // namespace mabvp
