#include "homolab/surface_io.hpp"

#include <fstream>

namespace homolab {

namespace {

using nlohmann::json;

Rational rational_of(const json& j) {
  if (j.is_string()) return parse_rational(j.get<std::string>());
  if (j.is_number_integer()) return Rational(j.get<long long>());
  if (j.is_number()) return exact_from_double(j.get<double>());
  throw GeometryError("expected a rational number, got " + j.dump());
}

QuadraticSurd surd_of(const json& j) {
  if (j.is_object()) return {rational_of(j.at("a")), j.contains("b") ? rational_of(j.at("b")) : Rational(0)};
  return {rational_of(j), Rational(0)};
}

bool exact_coordinates(const json& vertices) {
  for (const auto& v : vertices)
    for (const auto& c : v)
      if (c.is_string() || c.is_object()) return true;
  return false;
}

Vec2 vec2(const json& j) {
  if (!j.is_array() || j.size() != 2) throw GeometryError("expected a 2-vector, got " + j.dump());
  return {j[0].get<double>(), j[1].get<double>()};
}

SurfaceChart base_surface(const json& spec) {
  const std::string type = spec.at("type").get<std::string>();
  if (type == "circle")
    return SurfaceChart::circle(spec.value("radius", 1.0), spec.contains("center") ? vec2(spec["center"]) : Vec2::Zero());
  if (type == "ellipse")
    return SurfaceChart::ellipse(spec.at("a").get<double>(), spec.at("b").get<double>(),
                                 spec.contains("center") ? vec2(spec["center"]) : Vec2::Zero());
  if (type == "square") {
    const Rational side = spec.contains("side") ? rational_of(spec["side"]) : Rational(1);
    Rational ox(0), oy(0);
    if (spec.contains("origin")) {
      ox = rational_of(spec["origin"].at(0));
      oy = rational_of(spec["origin"].at(1));
    }
    std::vector<std::array<QuadraticSurd, 2>> v = {
        {{{ox, 0}, {oy, 0}}}, {{{ox + side, 0}, {oy, 0}}}, {{{ox + side, 0}, {oy + side, 0}}}, {{{ox, 0}, {oy + side, 0}}}};
    return SurfaceChart::polygon_exact(v, 0);
  }
  if (type == "polygon") {
    const json& vs = spec.at("vertices");
    if (exact_coordinates(vs) || spec.contains("radicand")) {
      std::vector<std::array<QuadraticSurd, 2>> v;
      for (const auto& p : vs) v.push_back({surd_of(p.at(0)), surd_of(p.at(1))});
      return SurfaceChart::polygon_exact(v, spec.value("radicand", 0L));
    }
    std::vector<Vec2> v;
    for (const auto& p : vs) v.push_back(vec2(p));
    return SurfaceChart::polygon(v);
  }
  if (type == "superellipse")
    return SurfaceChart::superellipse(spec.value("a", 1.0), spec.value("b", 1.0), spec.at("p").get<double>());
  if (type == "sphere") return SurfaceChart::sphere(spec.value("radius", 1.0));
  if (type == "ellipsoid") {
    const auto& ax = spec.at("axes");
    return SurfaceChart::ellipsoid(ax.at(0).get<double>(), ax.at(1).get<double>(), ax.at(2).get<double>());
  }
  if (type == "revolution") {
    std::vector<std::shared_ptr<const CurvePiece>> profile;
    const json& pts = spec.at("profile");
    if (pts.size() < 3) throw GeometryError("revolution profile needs at least three points");
    for (std::size_t i = 0; i + 1 < pts.size(); ++i)
      profile.push_back(std::make_shared<Segment>(vec2(pts[i]), vec2(pts[i + 1])));
    return SurfaceChart::revolution(std::move(profile));
  }
  throw GeometryError("unknown surface type '" + type + "'");
}

}  // namespace

SurfaceChart surface_from_json(const json& spec) {
  if (!spec.is_object() || !spec.contains("type")) throw GeometryError("surface specification needs a 'type'");
  SurfaceChart s = base_surface(spec);
  if (spec.contains("rotate")) s = s.rotated(spec["rotate"].get<double>());
  if (spec.contains("translate")) {
    const auto shift = spec["translate"].get<std::vector<double>>();
    s = s.translated(shift);
  }
  return s;
}

SurfaceChart load_surface(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw GeometryError("cannot open surface file " + path.string());
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw GeometryError("invalid surface file " + path.string() + ": " + e.what());
  }
  return surface_from_json(j);
}

}  // namespace homolab
