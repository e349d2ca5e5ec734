#include "homolab/mesh.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <map>

using namespace homolab;

TEST_CASE("disk mesh quality") {
  const auto c = SurfaceChart::circle(1.0);
  const auto m = mesh_domain(c, 0.05);
  CHECK(m.min_signed_area() > 0);
  CHECK(m.max_edge() <= 0.05 * 1.5);
  CHECK(m.min_angle_degrees() >= 20.0);
  // Polygonal area with boundary nodes on the circle.
  CHECK(std::fabs(m.area() - std::acos(-1.0)) <= 0.01);
  for (const auto& e : m.boundary) {
    CHECK(std::fabs(m.vertices[e.a].norm() - 1.0) <= 1e-12);
  }
}

TEST_CASE("every interior edge is shared by two triangles") {
  const auto m = mesh_domain(SurfaceChart::ellipse(1.5, 1.0), 0.1);
  std::map<std::pair<int, int>, int> count;
  for (const auto& t : m.triangles)
    for (int k = 0; k < 3; ++k) {
      int a = t[k], b = t[(k + 1) % 3];
      if (a > b) std::swap(a, b);
      ++count[{a, b}];
    }
  std::size_t single = 0;
  for (const auto& [e, n] : count) {
    CHECK(n <= 2);
    single += n == 1;
  }
  CHECK(single == m.boundary.size());
  // Euler characteristic of a disk.
  const long chi = static_cast<long>(m.vertex_count()) - static_cast<long>(count.size()) +
                   static_cast<long>(m.triangles.size());
  CHECK(chi == 1);
}

TEST_CASE("graded mesh is fine near the boundary only") {
  MeshOptions opt;
  opt.boundary_band = 0.1;
  opt.coarse_h = 0.1;
  const auto fine = mesh_domain(SurfaceChart::circle(1.0), 0.01, opt);
  const auto uniform = mesh_domain(SurfaceChart::circle(1.0), 0.01);
  CHECK(fine.vertex_count() < uniform.vertex_count() / 2);
  for (const auto& e : fine.boundary) CHECK((fine.vertices[e.a] - fine.vertices[e.b]).norm() <= 0.0125);
  CHECK(fine.min_signed_area() > 0);
}

TEST_CASE("polygon meshes keep their corners") {
  const auto sq = SurfaceChart::polygon({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
  const auto m = mesh_domain(sq, 0.05);
  CHECK(m.area() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m.min_signed_area() > 0);
}

TEST_CASE("mesh file round trip") {
  const auto m = mesh_domain(SurfaceChart::circle(1.0), 0.2);
  const auto path = std::filesystem::temp_directory_path() / "homolab_mesh_test.txt";
  write_mesh(path, m);
  const auto r = read_mesh(path);
  CHECK(r.vertex_count() == m.vertex_count());
  CHECK(r.triangles == m.triangles);
  CHECK(r.boundary.size() == m.boundary.size());
  CHECK(r.area() == doctest::Approx(m.area()).epsilon(1e-15));
}

TEST_CASE("invalid mesh requests") {
  CHECK_THROWS_AS(mesh_domain(SurfaceChart::circle(1.0), -1.0), MeshError);
  CHECK_THROWS_AS(mesh_domain(SurfaceChart::sphere(1.0), 0.1), MeshError);
}
