#include "homolab/fem.hpp"
#include "homolab/oscillatory.hpp"

#include <doctest.h>

#include <cmath>
#include <memory>

using namespace homolab;

namespace {
const double pi = std::acos(-1.0);

std::shared_ptr<const TriMesh> disk_mesh(double h, double band = 0, double coarse = 0) {
  MeshOptions opt;
  opt.boundary_band = band;
  opt.coarse_h = coarse;
  return std::make_shared<const TriMesh>(mesh_domain(SurfaceChart::circle(1.0), h, opt));
}

Coefficient one() { return Coefficient::constant(FieldKind::scalar, 1, {1.0}); }

// u = x1^2 + x2 on the unit disk with A = I, b = 1.
void manufactured(const Vec2& x, std::span<double> v, std::span<double> g) {
  v[0] = x.x() * x.x() + x.y();
  g[0] = 2 * x.x();
  g[1] = 1;
}

RobinSystem manufactured_system(std::shared_ptr<const TriMesh> mesh, Exec exec = Exec::parallel) {
  const auto f = Coefficient::constant(FieldKind::scalar, 1, {-2.0});
  const auto g = Coefficient::function(FieldKind::scalar, 1, [](const Vec2& x, std::span<double> o) {
    o[0] = 2 * x.x() * x.x() + x.y() + x.x() * x.x() + x.y();
  });
  AssemblyOptions opt;
  opt.exec = exec;
  return assemble_robin(mesh, SurfaceChart::circle(1.0), one(), one(), f, g, opt);
}
}  // namespace

TEST_CASE("norms of simple fields") {
  const auto disk = SurfaceChart::circle(1.0);
  const auto mesh = disk_mesh(0.05);
  const auto u1 = FieldOnMesh::interpolate(mesh, 1, [](const Vec2&, std::span<double> o) { o[0] = 1; });
  const auto x1 = FieldOnMesh::interpolate(mesh, 1, [](const Vec2& x, std::span<double> o) { o[0] = x.x(); });
  CHECK(norm(u1, Norm::L2) == doctest::Approx(std::sqrt(mesh->area())).epsilon(1e-12));
  CHECK(norm(x1, Norm::H1_semi) == doctest::Approx(std::sqrt(mesh->area())).epsilon(1e-12));
  NormOptions b;
  b.surface = &disk;
  CHECK(norm(u1, Norm::L2_boundary, b) == doctest::Approx(std::sqrt(2 * pi)).epsilon(1e-12));
  CHECK(norm(x1, Norm::Linf) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(boundary_integral(x1, disk)[0] == doctest::Approx(0.0));
}

TEST_CASE("manufactured Robin solution converges at second order") {
  double prev = 0;
  for (double h : {0.1, 0.05, 0.025}) {
    const auto sys = manufactured_system(disk_mesh(h));
    const auto r = solve(sys);
    CHECK(r.direct);
    CHECK(variational_residual(sys, r.field) <= 1e-12);
    NormOptions ref;
    ref.reference = manufactured;
    const double e = norm(r.field, Norm::L2, ref);
    if (prev > 0) CHECK(std::log2(prev / e) >= 1.8);
    prev = e;
  }
  CHECK(prev < 5e-4);
}

TEST_CASE("iterative and direct solves agree") {
  const auto sys = manufactured_system(disk_mesh(0.05));
  const auto d = solve(sys);
  SolveOptions opt;
  opt.force_iterative = true;
  const auto it = solve(sys, opt);
  CHECK_FALSE(it.direct);
  CHECK(it.iterations > 0);
  CHECK(norm(it.field.minus(d.field), Norm::Linf) <= 1e-8);
}

TEST_CASE("serial and parallel assembly are identical") {
  const auto mesh = disk_mesh(0.05);
  const auto s = manufactured_system(mesh, Exec::serial), p = manufactured_system(mesh, Exec::parallel);
  CHECK((s.stiffness - p.stiffness).norm() == 0.0);
  CHECK((s.boundary_mass - p.boundary_mass).norm() == 0.0);
  CHECK((s.load - p.load).norm() == 0.0);
}

TEST_CASE("operator is symmetric") {
  const auto sys = manufactured_system(disk_mesh(0.1));
  const Eigen::SparseMatrix<double> k = sys.stiffness + sys.boundary_mass;
  const Eigen::SparseMatrix<double> kt = k.transpose();
  CHECK((k - kt).norm() <= 1e-14 * k.norm());
}

TEST_CASE("constant Robin data gives the constant solution") {
  const auto mesh = disk_mesh(0.1);
  const auto sys = assemble_robin(mesh, SurfaceChart::circle(1.0), one(), one(), std::nullopt, one());
  const auto r = solve(sys);
  for (double v : r.field.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("zero data gives zero") {
  const auto mesh = disk_mesh(0.1);
  const auto r = solve(assemble_robin(mesh, SurfaceChart::circle(1.0), one(), one()));
  for (double v : r.field.values) CHECK(v == 0.0);
}

TEST_CASE("pure Neumann needs a constraint") {
  const auto mesh = disk_mesh(0.05);
  const auto zero = Coefficient::constant(FieldKind::scalar, 1, {0.0});
  const auto g = Coefficient::function(FieldKind::scalar, 1, [](const Vec2& x, std::span<double> o) { o[0] = x.x(); });
  const auto sys = assemble_robin(mesh, SurfaceChart::circle(1.0), one(), zero, std::nullopt, g);
  CHECK(sys.pure_neumann());
  CHECK_THROWS_AS(solve(sys), SolverError);
  SolveOptions opt;
  opt.mean_constraint = true;
  const auto r = solve(sys, opt);
  NormOptions ref;
  ref.reference = [](const Vec2& x, std::span<double> v, std::span<double> gr) {
    v[0] = x.x();
    gr[0] = 1;
    gr[1] = 0;
  };
  CHECK(norm(r.field, Norm::L2, ref) <= 1e-3);
  CHECK(std::fabs(boundary_integral(r.field, SurfaceChart::circle(1.0))[0]) <= 1e-10);
}

TEST_CASE("under-resolved oscillating coefficients are rejected") {
  const auto mesh = disk_mesh(0.1);
  const auto a = PeriodicField::fourier(FieldKind::scalar, 2, 1,
                                        {FourierMode{{0, 0}, {Complex(2, 0)}}, FourierMode{{1, 0}, {Complex(0, -0.5)}}});
  CHECK_THROWS_AS(assemble_robin(mesh, SurfaceChart::circle(1.0), Coefficient::oscillating(a, 0.1), one()), FemError);
}

TEST_CASE("constant fields need no oscillation resolution") {
  const auto mesh = disk_mesh(0.1);
  const auto c = PeriodicField::constant(FieldKind::scalar, 2, 1, {2.0});
  const auto u1 = solve(assemble_robin(mesh, SurfaceChart::circle(1.0), Coefficient::oscillating(c, 0.01),
                                       Coefficient::oscillating(c, 0.01), std::nullopt, one()));
  for (double v : u1.field.values) CHECK(v == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("non-elliptic coefficients are rejected") {
  const auto mesh = disk_mesh(0.2);
  const auto bad = Coefficient::constant(FieldKind::scalar, 1, {-1.0});
  CHECK_THROWS_AS(assemble_robin(mesh, SurfaceChart::circle(1.0), bad, one()), FemError);
  CHECK_THROWS_AS(assemble_robin(mesh, SurfaceChart::circle(1.0), one(), bad), FemError);
}

TEST_CASE("auxiliary Neumann problem matches the Bessel series solution") {
  // v = sum_n (-1)^n J_2n(lam) / n r^2n cos(2n theta), lam = 2 pi / eps, for f = cos(2 pi y1).
  const double eps = 0.125, lam = 2 * pi / eps;
  const auto mesh = disk_mesh(eps / 8, 4 * eps, 0.05);
  const auto f = PeriodicField::fourier(FieldKind::scalar, 2, 1, {FourierMode{{1, 0}, {Complex(0.5, 0)}}});
  HomogenizedTensor id;
  id.a_hat = {1, 0, 0, 1};
  const auto r = solve_neumann_aux(mesh, SurfaceChart::circle(1.0), id, f, eps);
  CHECK(r.m_eps[0] == doctest::Approx(std::cyl_bessel_j(0.0, lam)).epsilon(1e-10));
  CHECK(std::fabs(boundary_integral(r.v, SurfaceChart::circle(1.0))[0]) <= 1e-10);
  NormOptions ref;
  ref.reference = [lam](const Vec2& x, std::span<double> v, std::span<double> g) {
    const double rr = x.norm(), th = std::atan2(x.y(), x.x());
    double s = 0, dr = 0, dth = 0;
    for (int n = 1; n < 80; ++n) {
      const double c = (n % 2 ? -1.0 : 1.0) * std::cyl_bessel_j(2.0 * n, lam) / n;
      s += c * std::pow(rr, 2 * n) * std::cos(2 * n * th);
      dr += c * 2 * n * std::pow(rr, 2 * n - 1) * std::cos(2 * n * th);
      dth -= c * 2 * n * std::pow(rr, 2 * n) * std::sin(2 * n * th);
    }
    v[0] = s;
    const double ct = rr > 0 ? std::cos(th) : 1, st = rr > 0 ? std::sin(th) : 0;
    const double inv = rr > 0 ? 1 / rr : 0;
    g[0] = dr * ct - dth * inv * st;
    g[1] = dr * st + dth * inv * ct;
  };
  const double scale = norm(r.v, Norm::L2);
  CHECK(norm(r.v, Norm::L2, ref) <= 0.02 * scale);
  CHECK(norm(r.v, Norm::Linf) == doctest::Approx(0.21353).epsilon(0.01));
}

TEST_CASE("duality identity") {
  const double eps = 0.125;
  const auto mesh = disk_mesh(1.0 / 64);
  const auto f = PeriodicField::fourier(FieldKind::scalar, 2, 1, {FourierMode{{1, 0}, {Complex(0.5, 0)}}});
  HomogenizedTensor id;
  id.a_hat = {1, 0, 0, 1};
  const FieldFunction phi = [](const Vec2& x, std::span<double> v, std::span<double> g) {
    v[0] = x.x();
    g[0] = 1;
    g[1] = 0;
  };
  const auto d = duality_check(mesh, SurfaceChart::circle(1.0), id, f, phi, 1, eps);
  CHECK(d.gap <= 1e-3 * std::max(1.0, std::fabs(d.lhs)));
  CHECK(d.rhs == doctest::Approx(d.volume_term + d.boundary_term));
}

TEST_CASE("expansion with zero correctors is the plain difference") {
  const auto mesh = disk_mesh(0.05);
  const auto u = FieldOnMesh::interpolate(mesh, 1, [](const Vec2& x, std::span<double> o) { o[0] = x.x() * x.y(); });
  const auto u0 = FieldOnMesh::interpolate(mesh, 1, [](const Vec2& x, std::span<double> o) { o[0] = x.x(); });
  const auto chi = CorrectorSet::zero(2, 1, 16, CellDiscretization::spectral);
  const auto w = first_order_expansion(u, u0, chi, 0.25, SurfaceChart::circle(1.0));
  const auto diff = u.minus(u0);
  for (std::size_t i = 0; i < w.values.size(); ++i) CHECK(w.values[i] == diff.values[i]);
  CHECK_THROWS_AS(first_order_expansion(u, u0, chi, 0.05, SurfaceChart::circle(1.0)), FemError);
}

TEST_CASE("boundary cutoff") {
  CHECK(boundary_cutoff(0.0, 0.1) == 0.0);
  CHECK(boundary_cutoff(0.1, 0.1) == 0.0);
  CHECK(boundary_cutoff(0.15, 0.1) == doctest::Approx(0.5));
  CHECK(boundary_cutoff(0.3, 0.1) == 1.0);
}
