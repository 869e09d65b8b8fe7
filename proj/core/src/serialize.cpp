#include "mabvp/serialize.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "mabvp/error.hpp"

namespace mabvp {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidSpec: return "InvalidSpec";
    case ErrorCode::kAmbiguousNormal: return "AmbiguousNormal";
    case ErrorCode::kNormalizationFailure: return "NormalizationFailure";
    case ErrorCode::kSingularMap: return "SingularMap";
    case ErrorCode::kNonConvergence: return "NonConvergence";
    case ErrorCode::kDegenerateConfiguration: return "DegenerateConfiguration";
    case ErrorCode::kHeightTooLarge: return "HeightTooLarge";
    case ErrorCode::kCentringFailure: return "CentringFailure";
    case ErrorCode::kDegenerateSection: return "DegenerateSection";
    case ErrorCode::kInsufficientData: return "InsufficientData";
    case ErrorCode::kConstructionError: return "ConstructionError";
    case ErrorCode::kIncompatibleReport: return "IncompatibleReport";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json to_json(const Vec2& v) { return Json::array({v.x(), v.y()}); }

Vec2 vec2_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 2) throw Error(ErrorCode::kInvalidConfig, "expected a point [x, y]");
  return Vec2(j[0].get<double>(), j[1].get<double>());
}

Json to_json(const Mat2& m) { return Json::array({Json::array({m(0, 0), m(0, 1)}), Json::array({m(1, 0), m(1, 1)})}); }

Json to_json(const ConvexPolygon& p) {
  Json v = Json::array();
  for (const auto& x : p.vertices()) v.push_back(to_json(x));
  return v;
}

namespace {

const char* domain_kind_name(DomainSpec::Kind k) {
  switch (k) {
    case DomainSpec::Kind::kSquare: return "square";
    case DomainSpec::Kind::kRectangle: return "rectangle";
    case DomainSpec::Kind::kDisk: return "disk";
    case DomainSpec::Kind::kRoundedPolygon: return "rounded_polygon";
    case DomainSpec::Kind::kSuperellipse: return "superellipse";
  }
  return "square";
}

const char* density_kind_name(DensitySpec::Kind k) {
  switch (k) {
    case DensitySpec::Kind::kConstant: return "constant";
    case DensitySpec::Kind::kHolder: return "holder";
    case DensitySpec::Kind::kDini: return "dini";
    case DensitySpec::Kind::kRadialPoly: return "radial_poly";
  }
  return "constant";
}

template <typename T>
T get_or(const Json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("field '") + key + "': " + e.what());
  }
}

}  // namespace

Json to_json(const DomainSpec& s) {
  Json j;
  j["kind"] = domain_kind_name(s.kind);
  switch (s.kind) {
    case DomainSpec::Kind::kSquare:
      j["side"] = s.side;
      break;
    case DomainSpec::Kind::kRectangle:
      j["width"] = s.width;
      j["height"] = s.height;
      break;
    case DomainSpec::Kind::kDisk:
      j["radius"] = s.radius;
      j["arcs_per_quadrant"] = s.arcs_per_quadrant;
      break;
    case DomainSpec::Kind::kRoundedPolygon: {
      Json v = Json::array();
      for (const auto& x : s.vertices) v.push_back(to_json(x));
      j["vertices"] = v;
      j["corner_radius"] = s.corner_radius;
      j["arcs_per_quadrant"] = s.arcs_per_quadrant;
      break;
    }
    case DomainSpec::Kind::kSuperellipse:
      j["a"] = s.a;
      j["b"] = s.b;
      j["power"] = s.power;
      j["arcs_per_quadrant"] = s.arcs_per_quadrant;
      break;
  }
  j["center"] = to_json(s.center);
  return j;
}

DomainSpec domain_spec_from_json(const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kInvalidConfig, "domain must be an object");
  DomainSpec s;
  const std::string kind = get_or<std::string>(j, "kind", "");
  if (kind == "square") s.kind = DomainSpec::Kind::kSquare;
  else if (kind == "rectangle") s.kind = DomainSpec::Kind::kRectangle;
  else if (kind == "disk") s.kind = DomainSpec::Kind::kDisk;
  else if (kind == "rounded_polygon") s.kind = DomainSpec::Kind::kRoundedPolygon;
  else if (kind == "superellipse") s.kind = DomainSpec::Kind::kSuperellipse;
  else throw Error(ErrorCode::kInvalidConfig, "unknown domain kind '" + kind + "'");
  s.side = get_or(j, "side", s.side);
  s.width = get_or(j, "width", s.width);
  s.height = get_or(j, "height", s.height);
  s.radius = get_or(j, "radius", s.radius);
  s.corner_radius = get_or(j, "corner_radius", s.corner_radius);
  s.a = get_or(j, "a", s.a);
  s.b = get_or(j, "b", s.b);
  s.power = get_or(j, "power", s.power);
  s.arcs_per_quadrant = get_or(j, "arcs_per_quadrant", s.arcs_per_quadrant);
  if (j.contains("center")) s.center = vec2_from_json(j["center"]);
  if (j.contains("vertices"))
    for (const auto& v : j["vertices"]) s.vertices.push_back(vec2_from_json(v));
  return s;
}

Json to_json(const DensitySpec& s) {
  Json j;
  j["kind"] = density_kind_name(s.kind);
  switch (s.kind) {
    case DensitySpec::Kind::kConstant:
      j["value"] = s.value;
      break;
    case DensitySpec::Kind::kHolder:
      j["alpha"] = s.alpha;
      j["amplitude"] = s.amplitude;
      j["anchor"] = to_json(s.anchor);
      break;
    case DensitySpec::Kind::kDini: {
      Json t = Json::array();
      for (const auto& [r, w] : s.table) t.push_back(Json::array({r, w}));
      j["amplitude"] = s.amplitude;
      j["anchor"] = to_json(s.anchor);
      j["table"] = t;
      break;
    }
    case DensitySpec::Kind::kRadialPoly:
      j["coeffs"] = s.coeffs;
      j["anchor"] = to_json(s.anchor);
      break;
  }
  return j;
}

DensitySpec density_spec_from_json(const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kInvalidConfig, "density must be an object");
  DensitySpec s;
  const std::string kind = get_or<std::string>(j, "kind", "constant");
  if (kind == "constant") s.kind = DensitySpec::Kind::kConstant;
  else if (kind == "holder") s.kind = DensitySpec::Kind::kHolder;
  else if (kind == "dini") s.kind = DensitySpec::Kind::kDini;
  else if (kind == "radial_poly") s.kind = DensitySpec::Kind::kRadialPoly;
  else throw Error(ErrorCode::kInvalidConfig, "unknown density kind '" + kind + "'");
  s.value = get_or(j, "value", s.value);
  s.alpha = get_or(j, "alpha", s.alpha);
  s.amplitude = get_or(j, "amplitude", s.amplitude);
  if (j.contains("anchor") && j["anchor"].is_array()) s.anchor = vec2_from_json(j["anchor"]);
  if (j.contains("table"))
    for (const auto& row : j["table"]) s.table.emplace_back(row.at(0).get<double>(), row.at(1).get<double>());
  s.coeffs = get_or(j, "coeffs", s.coeffs);
  return s;
}

Json to_json(const SemiDiscretePotential& u) {
  Json sites = Json::array();
  for (const auto& y : u.sites()) sites.push_back(to_json(y));
  Json j;
  j["sites"] = sites;
  j["masses"] = u.masses();
  j["weights"] = u.weights();
  j["gauge"] = u.gauge();
  j["residual"] = u.residual;
  j["iterations"] = u.iterations;
  return j;
}

SemiDiscretePotential potential_from_json(const Json& j) {
  std::vector<Vec2> sites;
  for (const auto& y : j.at("sites")) sites.push_back(vec2_from_json(y));
  SemiDiscretePotential u(std::move(sites), j.at("masses").get<std::vector<double>>(),
                          j.at("weights").get<std::vector<double>>());
  u.residual = get_or(j, "residual", 0.0);
  u.iterations = get_or(j, "iterations", 0);
  return u;
}

Json to_json(const Section& s) {
  Json j;
  j["kind"] = s.kind == SectionKind::kPlain ? "plain" : "centred";
  j["x0"] = to_json(s.x0);
  j["h"] = s.h;
  j["slope"] = to_json(s.slope);
  j["offset"] = s.offset;
  j["area"] = s.polygon.area();
  j["centroid"] = to_json(s.centroid);
  j["iterations"] = s.iterations;
  if (s.john) {
    j["john"] = {{"center", to_json(s.john->ellipse.center)}, {"shape", to_json(s.john->ellipse.shape)}};
  }
  j["polygon"] = to_json(s.polygon);
  return j;
}

Json to_json(const DirichletSolution& w) {
  Json nodes = Json::array();
  for (const auto& x : w.nodes) nodes.push_back(to_json(x));
  Json j;
  j["rhs"] = w.rhs;
  j["dx"] = w.dx;
  j["nodes"] = nodes;
  j["values"] = w.values;
  j["measures"] = w.measures;
  j["residual"] = w.residual;
  j["iterations"] = w.iterations;
  return j;
}

Json to_json(const ComparisonGap& g) {
  Json levels = Json::array();
  for (const auto& l : g.levels) {
    Json e;
    e["h"] = l.h;
    e["a"] = l.a;
    e["ok"] = l.ok;
    e["sup_inside"] = l.sup_inside;
    e["sup_all"] = l.sup_all;
    e["nodes"] = l.nodes;
    if (!l.error.empty()) e["error"] = l.error;
    levels.push_back(e);
  }
  Json j;
  j["levels"] = levels;
  j["fitted"] = g.fitted;
  j["exponent"] = g.exponent;
  j["exponent_all"] = g.exponent_all;
  return j;
}

Json to_json(const CascadeReport& c) {
  Json levels = Json::array();
  for (const auto& l : c.levels) {
    Json e;
    e["k"] = l.k;
    e["h"] = l.h;
    e["f_inf"] = l.f_inf;
    e["omega"] = l.omega;
    e["center"] = to_json(l.center);
    e["hessian"] = to_json(l.hessian_self);
    e["gap"] = l.gap;
    e["nodes"] = l.nodes;
    e["residual"] = l.residual;
    levels.push_back(e);
  }
  Json j;
  j["levels"] = levels;
  j["constant"] = number(c.constant);
  j["ratio_spread"] = number(c.ratio_spread);
  j["gap_sum"] = c.gap_sum;
  j["omega_sum"] = c.omega_sum;
  j["truncated"] = c.truncated;
  if (!c.error.empty()) j["error"] = c.error;
  return j;
}

Json to_json(const ObliquenessProfile& o, bool with_samples) {
  Json j;
  j["min"] = o.min;
  j["p5"] = o.p5;
  j["p25"] = o.p25;
  j["p50"] = o.p50;
  j["unreliable"] = o.unreliable;
  j["count"] = o.samples.size();
  if (with_samples) {
    Json s = Json::array();
    for (const auto& x : o.samples) s.push_back(Json::array({x.s, x.value, x.projection_distance, x.reliable}));
    j["samples"] = s;
  }
  return j;
}

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

std::string gap_csv(const ComparisonGap& g) {
  std::string out = "h,a,sup_inside,sup_all,nodes,ok\n";
  for (const auto& l : g.levels)
    out += fmt(l.h) + "," + fmt(l.a) + "," + fmt(l.sup_inside) + "," + fmt(l.sup_all) + "," +
           std::to_string(l.nodes) + "," + (l.ok ? "1" : "0") + "\n";
  out += "# exponent," + fmt(g.exponent) + ",exponent_all," + fmt(g.exponent_all) + "\n";
  return out;
}

std::string cascade_csv(const CascadeReport& c) {
  std::string out = "k,h,f_inf,omega,gap,gap_over_omega\n";
  for (const auto& l : c.levels)
    out += std::to_string(l.k) + "," + fmt(l.h) + "," + fmt(l.f_inf) + "," + fmt(l.omega) + "," + fmt(l.gap) + "," +
           (l.omega > 0.0 ? fmt(l.gap / l.omega) : std::string("")) + "\n";
  return out;
}

std::string obliqueness_csv(const ObliquenessProfile& o) {
  std::string out = "s,x,y,value,projection_distance,reliable\n";
  for (const auto& x : o.samples)
    out += fmt(x.s) + "," + fmt(x.x.x()) + "," + fmt(x.x.y()) + "," + fmt(x.value) + "," +
           fmt(x.projection_distance) + "," + (x.reliable ? "1" : "0") + "\n";
  return out;
}

std::string hessian_csv(const HessianField& field) {
  std::string out = "x,y,h11,h12,h22,radius,residual,boundary_distance,weight,cells\n";
  for (const auto& s : field.samples)
    out += fmt(s.x.x()) + "," + fmt(s.x.y()) + "," + fmt(s.hessian(0, 0)) + "," + fmt(s.hessian(0, 1)) + "," +
           fmt(s.hessian(1, 1)) + "," + fmt(s.radius) + "," + fmt(s.residual) + "," + fmt(s.boundary_distance) + "," +
           fmt(s.weight) + "," + std::to_string(s.cells) + "\n";
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::kInvalidConfig, "cannot write " + path.string());
  os << text;
}

Json read_json(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::kInvalidConfig, "cannot read " + path.string());
  try {
    return Json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, path.string() + ": " + e.what());
  }
}

}  // namespace mabvp
