#include "homolab/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>

namespace homolab {

namespace {

constexpr double kPi = std::numbers::pi;

double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x()));
}

// > 0 when d lies inside the circumcircle of the counter-clockwise triangle abc.
double incircle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  const double adx = a.x() - d.x(), ady = a.y() - d.y();
  const double bdx = b.x() - d.x(), bdy = b.y() - d.y();
  const double cdx = c.x() - d.x(), cdy = c.y() - d.y();
  const double ad = adx * adx + ady * ady;
  const double bd = bdx * bdx + bdy * bdy;
  const double cd = cdx * cdx + cdy * cdy;
  return adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx);
}

int local_of(const std::array<int, 3>& tri, int vertex) {
  for (int k = 0; k < 3; ++k)
    if (tri[k] == vertex) return k;
  return -1;
}

// Closed boundary polyline sampled by arc fraction.
struct BoundaryTable {
  std::vector<double> tau;
  std::vector<Vec2> point;

  Vec2 at(double t) const {
    t -= std::floor(t);
    const auto it = std::upper_bound(tau.begin(), tau.end(), t);
    const std::size_t hi = static_cast<std::size_t>(it - tau.begin());
    const std::size_t lo = hi - 1;
    const Vec2& q = hi < point.size() ? point[hi] : point.front();
    const double t_hi = hi < tau.size() ? tau[hi] : 1.0;
    const double w = (t - tau[lo]) / (t_hi - tau[lo]);
    return (1.0 - w) * point[lo] + w * q;
  }
};

struct Ring {
  std::vector<int> ids;
  std::vector<double> tau;  // increasing, in [0, 1)
};

// Triangulates the annulus between two rings by merging them in tau order.
void stitch(const Ring& outer, const Ring& inner, std::vector<std::array<int, 3>>& tris) {
  const std::size_t no = outer.ids.size();
  const std::size_t ni = inner.ids.size();
  std::size_t j0 = 0;
  double best = 2.0;
  for (std::size_t j = 0; j < ni; ++j) {
    double dt = std::fabs(inner.tau[j] - outer.tau[0]);
    dt = std::min(dt, 1.0 - dt);
    if (dt < best) {
      best = dt;
      j0 = j;
    }
  }
  // Unwrapped tau along each ring, inner shifted so it starts next to outer[0].
  double shift = 0.0;
  if (inner.tau[j0] - outer.tau[0] > 0.5) shift = -1.0;
  if (inner.tau[j0] - outer.tau[0] < -0.5) shift = 1.0;
  auto tau_o = [&](std::size_t i) { return outer.tau[i % no] + static_cast<double>(i / no); };
  auto tau_i = [&](std::size_t j) {
    const std::size_t k = j0 + j;
    return inner.tau[k % ni] + static_cast<double>(k / ni) + shift;
  };
  std::size_t i = 0, j = 0;
  while (i < no || j < ni) {
    const bool advance_outer = j == ni || (i < no && tau_o(i + 1) <= tau_i(j + 1));
    const int o0 = outer.ids[i % no];
    const int i0 = inner.ids[(j0 + j) % ni];
    if (advance_outer) {
      tris.push_back({o0, outer.ids[(i + 1) % no], i0});
      ++i;
    } else {
      tris.push_back({o0, inner.ids[(j0 + j + 1) % ni], i0});
      ++j;
    }
  }
}

// adj[t][e]: triangle across the edge opposite local vertex e, or -1.
using Adjacency = std::vector<std::array<int, 3>>;

Adjacency build_adjacency(const std::vector<std::array<int, 3>>& tris) {
  struct HalfEdge {
    std::int64_t key;
    int tri;
    int local;
  };
  std::vector<HalfEdge> edges;
  edges.reserve(tris.size() * 3);
  for (int t = 0; t < static_cast<int>(tris.size()); ++t)
    for (int e = 0; e < 3; ++e) {
      const std::int64_t a = tris[t][(e + 1) % 3], b = tris[t][(e + 2) % 3];
      edges.push_back({std::min(a, b) * (std::int64_t(1) << 32) + std::max(a, b), t, e});
    }
  std::sort(edges.begin(), edges.end(), [](const HalfEdge& x, const HalfEdge& y) { return x.key < y.key; });
  Adjacency adj(tris.size(), {-1, -1, -1});
  for (std::size_t k = 0; k < edges.size();) {
    std::size_t m = k + 1;
    while (m < edges.size() && edges[m].key == edges[k].key) ++m;
    if (m - k > 2) throw MeshError("non-manifold edge in triangulation");
    if (m - k == 2) {
      adj[edges[k].tri][edges[k].local] = edges[k + 1].tri;
      adj[edges[k + 1].tri][edges[k + 1].local] = edges[k].tri;
    }
    k = m;
  }
  return adj;
}

int slot_of(const Adjacency& adj, int t, int nb) {
  for (int e = 0; e < 3; ++e)
    if (adj[t][e] == nb) return e;
  return -1;
}

// Lawson flips towards the Delaunay triangulation. Boundary edges have no
// neighbour and are never flipped.
void lawson_flips(const std::vector<Vec2>& v, std::vector<std::array<int, 3>>& tris) {
  Adjacency adj = build_adjacency(tris);
  for (int pass = 0; pass < 200; ++pass) {
    std::size_t flips = 0;
    for (int t = 0; t < static_cast<int>(tris.size()); ++t) {
      for (int e = 0; e < 3; ++e) {
        const int u = adj[t][e];
        if (u < 0) continue;
        const int a = tris[t][e], b = tris[t][(e + 1) % 3], c = tris[t][(e + 2) % 3];
        const int d = tris[u][slot_of(adj, u, t)];
        const double s = (v[b] - v[c]).squaredNorm();
        if (incircle(v[a], v[b], v[c], v[d]) <= 1e-10 * s * s) continue;
        if (signed_area(v[a], v[b], v[d]) <= 0 || signed_area(v[a], v[d], v[c]) <= 0) continue;
        const int n_bd = adj[u][local_of(tris[u], c)];
        const int n_dc = adj[u][local_of(tris[u], b)];
        const int n_ca = adj[t][(e + 1) % 3];
        const int n_ab = adj[t][(e + 2) % 3];
        tris[t] = {a, b, d};
        tris[u] = {a, d, c};
        adj[t] = {n_bd, u, n_ab};
        adj[u] = {n_dc, n_ca, t};
        if (n_bd >= 0) adj[n_bd][slot_of(adj, n_bd, u)] = t;
        if (n_ca >= 0) adj[n_ca][slot_of(adj, n_ca, t)] = u;
        ++flips;
        break;
      }
    }
    if (flips == 0) return;
  }
}

void laplacian_smoothing(std::vector<Vec2>& v, const std::vector<std::array<int, 3>>& tris, std::size_t first_interior,
                         int sweeps) {
  const std::size_t n = v.size();
  std::vector<std::vector<int>> nbrs(n), incident(n);
  for (int t = 0; t < static_cast<int>(tris.size()); ++t)
    for (int k = 0; k < 3; ++k) {
      incident[tris[t][k]].push_back(t);
      nbrs[tris[t][k]].push_back(tris[t][(k + 1) % 3]);
      nbrs[tris[t][k]].push_back(tris[t][(k + 2) % 3]);
    }
  for (auto& l : nbrs) {
    std::sort(l.begin(), l.end());
    l.erase(std::unique(l.begin(), l.end()), l.end());
  }
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    for (std::size_t p = first_interior; p < n; ++p) {
      if (nbrs[p].empty()) continue;
      Vec2 avg = Vec2::Zero();
      for (int q : nbrs[p]) avg += v[q];
      avg /= static_cast<double>(nbrs[p].size());
      const Vec2 old = v[p];
      v[p] = avg;
      bool ok = true;
      for (int t : incident[p])
        if (signed_area(v[tris[t][0]], v[tris[t][1]], v[tris[t][2]]) <= 0.0) {
          ok = false;
          break;
        }
      if (!ok) v[p] = old;
    }
  }
}

}  // namespace

TriMesh mesh_domain(const SurfaceChart& surface, double h, const MeshOptions& options) {
  if (surface.dimension() != 2) throw MeshError("mesh_domain needs a planar curve");
  if (!(h > 0)) throw MeshError("mesh size must be positive");
  const double hb = 0.8 * h;
  const bool graded = options.boundary_band > 0.0;
  const double coarse = graded ? std::max(options.coarse_h, hb) : hb;
  auto hloc = [&](double dist) {
    if (!graded || dist <= options.boundary_band) return hb;
    return std::min(coarse, hb + options.grading * (dist - options.boundary_band));
  };

  const double perimeter = surface.measure();
  const double area_guess = std::fabs(surface.enclosed_measure());
  const double est = 1.3 * area_guess / (0.433 * hb * hb) + perimeter / hb;
  if (!graded && est > static_cast<double>(options.max_vertices))
    throw MeshError("mesh with h=" + std::to_string(h) + " needs about " + std::to_string(static_cast<long long>(est)) +
                    " vertices, budget is " + std::to_string(options.max_vertices));

  TriMesh mesh;
  mesh.h = h;

  // Boundary vertices, equally spaced in arc length on each piece.
  const auto& pieces = surface.curves();
  std::vector<double> tau_b;
  double acc = 0.0;
  std::vector<std::pair<int, double>> bparam;
  for (int p = 0; p < static_cast<int>(pieces.size()); ++p) {
    const auto& c = *pieces[p];
    const double len = c.arc_length(c.t0(), c.t1());
    int n = std::max(1, static_cast<int>(std::ceil(len / hb - 1e-9)));
    if (pieces.size() == 1) n = std::max(n, 6);
    for (int j = 0; j < n; ++j) {
      const double t = j == 0 ? c.t0() : c.param_at_arc_length(len * j / n);
      mesh.vertices.push_back(c.position(t));
      bparam.emplace_back(p, t);
      tau_b.push_back((acc + len * j / n) / perimeter);
    }
    acc += len;
  }
  const int nb = static_cast<int>(mesh.vertices.size());
  for (int j = 0; j < nb; ++j) {
    const int k = (j + 1) % nb;
    BoundaryEdge e;
    e.a = j;
    e.b = k;
    e.piece = bparam[j].first;
    e.ta = bparam[j].second;
    e.tb = bparam[k].first == e.piece && bparam[k].second > e.ta ? bparam[k].second : pieces[e.piece]->t1();
    mesh.boundary.push_back(e);
  }

  // Dense boundary polyline for the interior rings.
  BoundaryTable table;
  {
    const int sub = 8;
    std::vector<double> len;
    std::vector<Vec2> pts;
    for (const auto& e : mesh.boundary) {
      const auto& c = *pieces[e.piece];
      for (int s = 0; s < sub; ++s) pts.push_back(c.position(e.ta + (e.tb - e.ta) * s / sub));
    }
    double total = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      table.tau.push_back(total);
      total += (pts[(i + 1) % pts.size()] - pts[i]).norm();
    }
    for (auto& t : table.tau) t /= total;
    table.point = std::move(pts);
  }

  const Vec2 center = surface.centroid2();
  double rmin = std::numeric_limits<double>::infinity(), rsum = 0.0;
  double winding = 0.0;
  for (std::size_t i = 0; i < table.point.size(); ++i) {
    const Vec2 a = table.point[i] - center;
    const Vec2 b = table.point[(i + 1) % table.point.size()] - center;
    const double cross = a.x() * b.y() - a.y() * b.x();
    if (!(cross > 0)) throw MeshError("domain is not star-shaped about its centroid");
    winding += std::atan2(cross, a.dot(b));
    rmin = std::min(rmin, a.norm());
    rsum += a.norm();
  }
  if (std::fabs(winding - 2 * kPi) > 1e-6) throw MeshError("boundary does not wind once around the centroid");
  const double rmean = rsum / static_cast<double>(table.point.size());

  // Interior rings.
  std::vector<Ring> rings;
  {
    Ring r;
    for (int j = 0; j < nb; ++j) {
      r.ids.push_back(j);
      r.tau.push_back(tau_b[j]);
    }
    rings.push_back(std::move(r));
  }
  double s = 1.0;
  for (int k = 1;; ++k) {
    const double step = 0.866 * hloc((1.0 - s) * rmin) / rmean;
    const double sn = s - step;
    const double hn = hloc((1.0 - sn) * rmin);
    if (sn * rmean < 0.6 * hn) break;
    s = sn;
    const int n = std::max(6, static_cast<int>(std::lround(s * perimeter / hn)));
    Ring r;
    const double offset = (k % 2) * 0.5;
    for (int j = 0; j < n; ++j) {
      const double t = (j + offset) / n;
      r.ids.push_back(static_cast<int>(mesh.vertices.size()));
      r.tau.push_back(t);
      mesh.vertices.push_back(center + s * (table.at(t) - center));
    }
    rings.push_back(std::move(r));
    if (mesh.vertices.size() > options.max_vertices)
      throw MeshError("mesh exceeds the vertex budget of " + std::to_string(options.max_vertices));
  }
  for (std::size_t k = 0; k + 1 < rings.size(); ++k) stitch(rings[k], rings[k + 1], mesh.triangles);
  const int c_id = static_cast<int>(mesh.vertices.size());
  mesh.vertices.push_back(center);
  const Ring& last = rings.back();
  for (std::size_t j = 0; j < last.ids.size(); ++j)
    mesh.triangles.push_back({c_id, last.ids[j], last.ids[(j + 1) % last.ids.size()]});

  if (!(mesh.min_signed_area() > 0)) throw MeshError("ring stitching produced an inverted element");
  lawson_flips(mesh.vertices, mesh.triangles);
  laplacian_smoothing(mesh.vertices, mesh.triangles, nb, options.smoothing_sweeps);
  lawson_flips(mesh.vertices, mesh.triangles);
  if (!(mesh.min_signed_area() > 0)) throw MeshError("mesh improvement produced an inverted element");
  return mesh;
}

double TriMesh::area() const {
  double s = 0.0;
  for (const auto& t : triangles) s += signed_area(vertices[t[0]], vertices[t[1]], vertices[t[2]]);
  return s;
}

double TriMesh::min_signed_area() const {
  double s = std::numeric_limits<double>::infinity();
  for (const auto& t : triangles) s = std::min(s, signed_area(vertices[t[0]], vertices[t[1]], vertices[t[2]]));
  return s;
}

double TriMesh::min_angle_degrees() const {
  double worst = 180.0;
  for (const auto& t : triangles)
    for (int k = 0; k < 3; ++k) {
      const Vec2 u = vertices[t[(k + 1) % 3]] - vertices[t[k]];
      const Vec2 w = vertices[t[(k + 2) % 3]] - vertices[t[k]];
      worst = std::min(worst, std::atan2(std::fabs(u.x() * w.y() - u.y() * w.x()), u.dot(w)) * 180.0 / kPi);
    }
  return worst;
}

double TriMesh::max_edge() const {
  double m = 0.0;
  for (const auto& t : triangles)
    for (int k = 0; k < 3; ++k) m = std::max(m, (vertices[t[k]] - vertices[t[(k + 1) % 3]]).norm());
  return m;
}

void write_mesh(const std::filesystem::path& path, const TriMesh& mesh) {
  std::ofstream out(path);
  if (!out) throw MeshError("cannot write " + path.string());
  out.precision(17);
  out << "homolab-mesh 1\n";
  out << "h " << mesh.h << "\n";
  out << "vertices " << mesh.vertices.size() << "\n";
  for (const auto& v : mesh.vertices) out << v.x() << ' ' << v.y() << '\n';
  out << "triangles " << mesh.triangles.size() << "\n";
  for (const auto& t : mesh.triangles) out << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  out << "boundary " << mesh.boundary.size() << "\n";
  for (const auto& e : mesh.boundary) out << e.a << ' ' << e.b << ' ' << e.piece << ' ' << e.ta << ' ' << e.tb << '\n';
}

TriMesh read_mesh(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MeshError("cannot open " + path.string());
  std::string tag;
  int version = 0;
  in >> tag >> version;
  if (tag != "homolab-mesh" || version != 1) throw MeshError(path.string() + " is not a homolab-mesh 1 file");
  TriMesh mesh;
  std::size_t n = 0;
  auto expect = [&](const char* name) {
    in >> tag;
    if (tag != name) throw MeshError(std::string("mesh file: expected '") + name + "'");
  };
  expect("h");
  in >> mesh.h;
  expect("vertices");
  in >> n;
  mesh.vertices.resize(n);
  for (auto& v : mesh.vertices) in >> v.x() >> v.y();
  expect("triangles");
  in >> n;
  mesh.triangles.resize(n);
  for (auto& t : mesh.triangles) in >> t[0] >> t[1] >> t[2];
  expect("boundary");
  in >> n;
  mesh.boundary.resize(n);
  for (auto& e : mesh.boundary) in >> e.a >> e.b >> e.piece >> e.ta >> e.tb;
  if (!in) throw MeshError("mesh file " + path.string() + " is truncated");
  const auto nv = static_cast<int>(mesh.vertices.size());
  for (const auto& t : mesh.triangles)
    for (int k : t)
      if (k < 0 || k >= nv) throw MeshError("mesh file: vertex index out of range");
  return mesh;
}

}  // namespace homolab
