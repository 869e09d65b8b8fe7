#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "mabvp/comparison.hpp"
#include "mabvp/density.hpp"
#include "mabvp/geometry.hpp"
#include "mabvp/regularity.hpp"
#include "mabvp/sections.hpp"
#include "mabvp/transport.hpp"

namespace mabvp {

/// Key order is insertion order so reports are byte-stable.
using Json = nlohmann::ordered_json;

Json to_json(const Vec2& v);
Vec2 vec2_from_json(const Json& j);
Json to_json(const Mat2& m);
/// Doubles that are not finite become null.
Json number(double v);

Json to_json(const ConvexPolygon& p);

/// {"kind": "square" | "rectangle" | "disk" | "rounded_polygon" | "superellipse", ...}
Json to_json(const DomainSpec& s);
DomainSpec domain_spec_from_json(const Json& j);

/// {"kind": "constant" | "holder" | "dini" | "radial_poly", ...}
Json to_json(const DensitySpec& s);
DensitySpec density_spec_from_json(const Json& j);

/// {"sites": [[x, y], ...], "masses": [...], "weights": [...], "gauge", "residual", "iterations"}
Json to_json(const SemiDiscretePotential& u);
SemiDiscretePotential potential_from_json(const Json& j);

Json to_json(const Section& s);
Json to_json(const DirichletSolution& w);
Json to_json(const ComparisonGap& g);
Json to_json(const CascadeReport& c);
Json to_json(const ObliquenessProfile& o, bool with_samples);

/// CSV tables with a header row; one row per level or sample.
std::string gap_csv(const ComparisonGap& g);
std::string cascade_csv(const CascadeReport& c);
std::string obliqueness_csv(const ObliquenessProfile& o);
std::string hessian_csv(const HessianField& field);

void write_text(const std::filesystem::path& path, const std::string& text);
Json read_json(const std::filesystem::path& path);

}  // namespace mabvp
