#include "homolab/surface.hpp"
#include "homolab/surface_io.hpp"

#include <doctest.h>

#include <cmath>

using namespace homolab;

namespace {
const double pi = std::acos(-1.0);

nlohmann::json irrational_parallelogram() {
  // Edges along (sqrt2, -1) and (1, sqrt2).
  auto s = [](const char* a, const char* b) { return nlohmann::json{{"a", a}, {"b", b}}; };
  return {{"type", "polygon"},
          {"radicand", 2},
          {"vertices",
           {{s("0", "0"), s("0", "0")}, {s("0", "1"), s("-1", "0")}, {s("1", "1"), s("-1", "1")}, {s("1", "0"), s("0", "1")}}}};
}
}  // namespace

TEST_CASE("circle measures and normals") {
  const auto c = SurfaceChart::circle(1.0);
  CHECK(c.measure() == doctest::Approx(2 * pi).epsilon(1e-13));
  CHECK(c.enclosed_measure() == doctest::Approx(pi).epsilon(1e-13));
  double len = 0;
  for (const auto& q : c.quadrature(64)) {
    len += q.w;
    CHECK(q.n.dot(q.x) == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(len == doctest::Approx(2 * pi).epsilon(1e-13));
  const double t[1] = {0.3};
  CHECK(c.curvature_at(0, t)[0] == doctest::Approx(1.0));
}

TEST_CASE("distance to a circle and a square") {
  const auto c = SurfaceChart::circle(1.0);
  CHECK(c.distance(Vec2(0.25, 0)) == doctest::Approx(0.75).epsilon(1e-12));
  const auto sq = SurfaceChart::polygon({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
  CHECK(sq.distance(Vec2(0.5, 0.2)) == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(sq.enclosed_measure() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(sq.measure() == doctest::Approx(4.0).epsilon(1e-14));
}

TEST_CASE("ellipse perimeter") {
  // Ramanujan II, accurate to ~1e-10 at this aspect ratio.
  const double a = 2, b = 1, h = (a - b) * (a - b) / ((a + b) * (a + b));
  const double p = pi * (a + b) * (1 + 3 * h / (10 + std::sqrt(4 - 3 * h)));
  CHECK(SurfaceChart::ellipse(a, b).measure() == doctest::Approx(p).epsilon(1e-9));
}

TEST_CASE("sphere and ellipsoid") {
  const auto s = SurfaceChart::sphere(1.0);
  CHECK(s.dimension() == 3);
  CHECK(s.measure() == doctest::Approx(4 * pi).epsilon(1e-10));
  CHECK(s.enclosed_measure() == doctest::Approx(4 * pi / 3).epsilon(1e-10));
  CHECK(SurfaceChart::ellipsoid(1, 2, 3).enclosed_measure() == doctest::Approx(8 * pi).epsilon(1e-10));
}

TEST_CASE("cylinder as a surface of revolution") {
  const auto cyl = surface_from_json({{"type", "revolution"}, {"profile", {{0, -1}, {1, -1}, {1, 1}, {0, 1}}}});
  CHECK(cyl.measure() == doctest::Approx(2 * pi + 4 * pi).epsilon(1e-10));
  CHECK(cyl.enclosed_measure() == doctest::Approx(2 * pi).epsilon(1e-10));
}

TEST_CASE("non-resonance decisions") {
  CHECK(check_non_resonance(SurfaceChart::circle(1)).satisfies);
  CHECK(check_non_resonance(SurfaceChart::sphere(1)).satisfies);

  const auto sq = surface_from_json({{"type", "square"}, {"side", "1"}});
  const auto v = check_non_resonance(sq);
  CHECK_FALSE(v.satisfies);
  CHECK(v.offending.size() == 4);
  CHECK(v.rational_measure == doctest::Approx(4.0));

  const auto par = surface_from_json(irrational_parallelogram());
  CHECK(par.piece_count() == 4);
  CHECK(par.enclosed_measure() == doctest::Approx(3.0).epsilon(1e-13));
  const auto pv = check_non_resonance(par);
  CHECK(pv.satisfies);
  CHECK(pv.rational_measure == 0.0);

  // A rotated lattice makes the square admissible direction resonant again.
  const auto lv = check_non_resonance(sq, {{1, 1}, {1, -1}});
  CHECK_FALSE(lv.satisfies);
}

TEST_CASE("cylinder is resonant on its flat caps") {
  const auto cyl = surface_from_json({{"type", "revolution"}, {"profile", {{0, -1}, {1, -1}, {1, 1}, {0, 1}}}});
  const auto v = check_non_resonance(cyl);
  CHECK_FALSE(v.satisfies);
  CHECK(v.rational_measure == doctest::Approx(2 * pi).epsilon(1e-10));
}

TEST_CASE("translate and rotate") {
  auto spec = nlohmann::json{{"type", "circle"}, {"radius", 0.5}, {"translate", {1, 2}}};
  const auto c = surface_from_json(spec);
  CHECK(c.distance(Vec2(1, 2)) == doctest::Approx(0.5));
  const auto r = SurfaceChart::polygon({{0, 0}, {1, 0}, {1, 1}, {0, 1}}).rotated(pi / 4);
  CHECK(r.enclosed_measure() == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("malformed surfaces are rejected") {
  CHECK_THROWS_AS(surface_from_json({{"type", "torus"}}), GeometryError);
  CHECK_THROWS_AS(surface_from_json({{"type", "circle"}, {"radius", -1}}), GeometryError);
  CHECK_THROWS_AS(surface_from_json({{"type", "polygon"}, {"vertices", {{0, 0}, {1, 0}}}}), GeometryError);
}
