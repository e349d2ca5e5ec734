#include "homolab/fem.hpp"
#include "homolab/fft.hpp"

#include <algorithm>
#include <cmath>

namespace homolab {

namespace {

int fft_size(int n) {
  for (int s = std::max(n, 8);; ++s) {
    int r = s;
    for (int p : {2, 3, 5})
      while (r % p == 0) r /= p;
    if (r == 1) return s;
  }
}

}  // namespace

double boundary_cutoff(double dist, double eps) {
  const double s = std::clamp((dist - eps) / eps, 0.0, 1.0);
  return s * s * (3.0 - 2.0 * s);
}

FieldOnMesh first_order_expansion(const FieldOnMesh& u_eps, const FieldOnMesh& u0, const CorrectorSet& chi,
                                  double eps, const SurfaceChart& surface, const ExpansionOptions& options) {
  if (!u_eps.mesh || u_eps.mesh != u0.mesh || u_eps.m != u0.m) throw FemError("u_eps and u0 must share a mesh");
  const TriMesh& mesh = *u0.mesh;
  const int m = u0.m;
  if (chi.d != 2 || chi.m != m) throw FemError("corrector set does not match the system");
  if (!(eps > 0)) throw FemError("eps must be positive");
  if (eps < 2.0 * mesh.h)
    throw FemError("eps = " + std::to_string(eps) + " < 2h = " + std::to_string(2.0 * mesh.h) +
                   ": cannot resolve the boundary layer");

  const double radius = options.mollifier_radius * eps;
  const double hg = options.grid_spacing > 0 ? options.grid_spacing : std::min(mesh.h, eps / 8.0);
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& v : mesh.vertices) {
    xmin = std::min(xmin, v.x());
    xmax = std::max(xmax, v.x());
    ymin = std::min(ymin, v.y());
    ymax = std::max(ymax, v.y());
  }
  const double extent = std::max(xmax - xmin, ymax - ymin) + 2.0 * radius + 4.0 * hg;
  const int n = fft_size(static_cast<int>(std::ceil(extent / hg)) + 1);
  const double x0 = xmin - radius - 2.0 * hg;
  const double y0 = ymin - radius - 2.0 * hg;
  const std::size_t npts = static_cast<std::size_t>(n) * n;
  const int nc = 2 * m;

  // Rasterize eta * grad u0 (constant per element) on the grid; row index is y.
  std::vector<int> owner(npts, -1);
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    const Vec2 a = mesh.vertices[tri[0]], b = mesh.vertices[tri[1]], c = mesh.vertices[tri[2]];
    const double det = (b - a).x() * (c - a).y() - (b - a).y() * (c - a).x();
    const int i0 = std::max(0, static_cast<int>(std::floor((std::min({a.x(), b.x(), c.x()}) - x0) / hg)));
    const int i1 = std::min(n - 1, static_cast<int>(std::ceil((std::max({a.x(), b.x(), c.x()}) - x0) / hg)));
    const int j0 = std::max(0, static_cast<int>(std::floor((std::min({a.y(), b.y(), c.y()}) - y0) / hg)));
    const int j1 = std::min(n - 1, static_cast<int>(std::ceil((std::max({a.y(), b.y(), c.y()}) - y0) / hg)));
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i) {
        const Vec2 p(x0 + i * hg, y0 + j * hg);
        const double l1 = ((p - a).x() * (c - a).y() - (p - a).y() * (c - a).x()) / det;
        const double l2 = ((b - a).x() * (p - a).y() - (b - a).y() * (p - a).x()) / det;
        const double tol = -1e-12;
        if (l1 >= tol && l2 >= tol && 1.0 - l1 - l2 >= tol) owner[static_cast<std::size_t>(j) * n + i] = static_cast<int>(t);
      }
  }

  std::vector<std::vector<double>> data(nc, std::vector<double>(npts, 0.0));
#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t p = 0; p < static_cast<std::ptrdiff_t>(npts); ++p) {
    const int t = owner[p];
    if (t < 0) continue;
    const Vec2 x(x0 + (p % n) * hg, y0 + (p / n) * hg);
    const double eta = boundary_cutoff(surface.distance(x), eps);
    if (eta == 0.0) continue;
    const auto& tri = mesh.triangles[t];
    const Vec2 a = mesh.vertices[tri[0]], b = mesh.vertices[tri[1]], c = mesh.vertices[tri[2]];
    const double det = (b - a).x() * (c - a).y() - (b - a).y() * (c - a).x();
    const Vec2 g[3] = {Vec2(b.y() - c.y(), c.x() - b.x()) / det, Vec2(c.y() - a.y(), a.x() - c.x()) / det,
                       Vec2(a.y() - b.y(), b.x() - a.x()) / det};
    for (int be = 0; be < m; ++be)
      for (int j = 0; j < 2; ++j) {
        double s = 0.0;
        for (int k = 0; k < 3; ++k) s += u0.at(tri[k], be) * g[k][j];
        data[be * 2 + j][p] = eta * s;
      }
  }

  // Unit-mass bump of the given radius, centred at index 0 with wrap-around.
  std::vector<double> kernel(npts, 0.0);
  double mass = 0.0;
  const int reach = static_cast<int>(std::ceil(radius / hg));
  for (int dj = -reach; dj <= reach; ++dj)
    for (int di = -reach; di <= reach; ++di) {
      const double r2 = (di * di + dj * dj) * hg * hg / (radius * radius);
      if (r2 >= 1.0) continue;
      const double v = std::exp(-1.0 / (1.0 - r2));
      kernel[static_cast<std::size_t>((dj + n) % n) * n + (di + n) % n] = v;
      mass += v;
    }
  for (double& v : kernel) v /= mass;

  const RealFft fft(2, n);
  std::vector<Complex> khat(fft.spectral_size()), dhat(fft.spectral_size());
  fft.forward(kernel, khat);
  for (auto& comp : data) {
    fft.forward(comp, dhat);
    for (std::size_t i = 0; i < dhat.size(); ++i) dhat[i] *= khat[i];
    fft.backward(dhat, comp);
  }

  FieldOnMesh w = u_eps.minus(u0);
  std::vector<double> smooth(nc);
  for (std::size_t v = 0; v < mesh.vertex_count(); ++v) {
    const Vec2& x = mesh.vertices[v];
    const double sx = (x.x() - x0) / hg, sy = (x.y() - y0) / hg;
    const int i = std::clamp(static_cast<int>(std::floor(sx)), 0, n - 2);
    const int j = std::clamp(static_cast<int>(std::floor(sy)), 0, n - 2);
    const double tx = sx - i, ty = sy - j;
    for (int c = 0; c < nc; ++c) {
      const auto& d = data[c];
      const std::size_t p = static_cast<std::size_t>(j) * n + i;
      smooth[c] = (1 - tx) * (1 - ty) * d[p] + tx * (1 - ty) * d[p + 1] + (1 - tx) * ty * d[p + n] + tx * ty * d[p + n + 1];
    }
    const double y[2] = {x.x() / eps, x.y() / eps};
    for (int al = 0; al < m; ++al) {
      double s = 0.0;
      for (int j2 = 0; j2 < 2; ++j2)
        for (int be = 0; be < m; ++be) s += chi.interpolate(j2, be, al, y) * smooth[be * 2 + j2];
      w.values[v * m + al] -= eps * s;
    }
  }
  return w;
}

}  // namespace homolab
