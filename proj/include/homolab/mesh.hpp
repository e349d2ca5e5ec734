#pragma once

#include "homolab/surface.hpp"

#include <array>
#include <filesystem>
#include <vector>

namespace homolab {

/// Mesh edge on the boundary, running counter-clockwise from vertex a to b
/// along piece `piece` between parameters ta and tb.
struct BoundaryEdge {
  int a = 0;
  int b = 0;
  int piece = 0;
  double ta = 0.0;
  double tb = 0.0;
};

/// Conforming triangulation of a planar domain. Triangles are
/// counter-clockwise; boundary vertices lie on the exact curve.
struct TriMesh {
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<BoundaryEdge> boundary;
  /// Nominal mesh size the mesh was generated for.
  double h = 0.0;

  std::size_t vertex_count() const { return vertices.size(); }
  double area() const;
  double min_angle_degrees() const;
  double max_edge() const;
  double min_signed_area() const;
};

struct MeshOptions {
  /// Width of the band along the boundary meshed at the full resolution h;
  /// zero meshes the whole domain uniformly.
  double boundary_band = 0.0;
  /// Largest element size away from the band (graded meshes only).
  double coarse_h = 0.0;
  /// Size increase per unit distance beyond the band.
  double grading = 0.25;
  int smoothing_sweeps = 4;
  std::size_t max_vertices = 8'000'000;
};

class MeshError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Triangulates the interior of a planar curve that is star-shaped about its
/// centroid. Nested scaled copies of the boundary are stitched together, then
/// improved by edge flips and Laplacian smoothing.
TriMesh mesh_domain(const SurfaceChart& surface, double h, const MeshOptions& options = {});

/// Text format:
///   homolab-mesh 1
///   h <h>
///   vertices <n>      then n lines "x y"
///   triangles <t>     then t lines "i j k"
///   boundary <e>      then e lines "a b piece ta tb"
void write_mesh(const std::filesystem::path& path, const TriMesh& mesh);
TriMesh read_mesh(const std::filesystem::path& path);

}  // namespace homolab
