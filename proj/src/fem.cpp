#include "homolab/fem.hpp"

#include "homolab/oscillatory.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

namespace homolab {

namespace {

// Six-point degree-4 rule on the reference triangle, barycentric coordinates.
struct TriRule {
  std::array<std::array<double, 3>, 6> bary;
  std::array<double, 6> w;
};

const TriRule& tri_rule() {
  static const TriRule rule = [] {
    TriRule r;
    const double a1 = 0.445948490915965, w1 = 0.223381589678011;
    const double a2 = 0.091576213509771, w2 = 0.109951743655322;
    r.bary = {{{a1, a1, 1 - 2 * a1}, {a1, 1 - 2 * a1, a1}, {1 - 2 * a1, a1, a1},
               {a2, a2, 1 - 2 * a2}, {a2, 1 - 2 * a2, a2}, {1 - 2 * a2, a2, a2}}};
    r.w = {w1, w1, w1, w2, w2, w2};
    return r;
  }();
  return rule;
}

struct Element {
  Vec2 p[3];
  double area;
  Vec2 grad[3];  // gradients of the barycentric functions
};

Element element(const TriMesh& mesh, int t) {
  Element e;
  const auto& tri = mesh.triangles[t];
  for (int k = 0; k < 3; ++k) e.p[k] = mesh.vertices[tri[k]];
  const Vec2 d1 = e.p[1] - e.p[0];
  const Vec2 d2 = e.p[2] - e.p[0];
  const double det = d1.x() * d2.y() - d1.y() * d2.x();
  e.area = 0.5 * det;
  // grad lambda_k = rot(opposite edge) / det
  for (int k = 0; k < 3; ++k) {
    const Vec2 a = e.p[(k + 1) % 3];
    const Vec2 b = e.p[(k + 2) % 3];
    e.grad[k] = Vec2(a.y() - b.y(), b.x() - a.x()) / det;
  }
  return e;
}

Vec2 point(const Element& e, const std::array<double, 3>& l) { return l[0] * e.p[0] + l[1] * e.p[1] + l[2] * e.p[2]; }

// Expands a coefficient value into an m x m matrix (scalar -> s I).
void as_matrix(const Coefficient& c, std::span<const double> v, int m, std::span<double> out) {
  if (c.kind == FieldKind::scalar) {
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) out[a * m + b] = a == b ? v[0] : 0.0;
  } else {
    std::copy(v.begin(), v.begin() + m * m, out.begin());
  }
}

// Expands into a_ij^{ab} (scalar -> s delta_ij delta^{ab}).
void as_tensor(const Coefficient& c, std::span<const double> v, int m, std::span<double> out) {
  if (c.kind == FieldKind::scalar) {
    std::fill(out.begin(), out.end(), 0.0);
    for (int a = 0; a < m; ++a)
      for (int i = 0; i < 2; ++i) out[tensor_index(a, a, i, i, 2, m)] = v[0];
  } else {
    std::copy(v.begin(), v.end(), out.begin());
  }
}

void as_vector(const Coefficient& c, std::span<const double> v, int m, std::span<double> out) {
  if (c.kind == FieldKind::scalar)
    std::fill(out.begin(), out.end(), v[0]);
  else
    std::copy(v.begin(), v.begin() + m, out.begin());
}

double legendre_min_eigenvalue(std::span<const double> a, int m) {
  const int n = 2 * m;
  Eigen::MatrixXd l(n, n);
  for (int al = 0; al < m; ++al)
    for (int be = 0; be < m; ++be)
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) l(al * 2 + i, be * 2 + j) = a[tensor_index(al, be, i, j, 2, m)];
  const Eigen::MatrixXd s = 0.5 * (l + l.transpose());
  if (n == 2) {
    const double tr = s(0, 0) + s(1, 1);
    const double det = s(0, 0) * s(1, 1) - s(0, 1) * s(1, 0);
    return 0.5 * tr - std::sqrt(std::max(0.0, 0.25 * tr * tr - det));
  }
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(s, Eigen::EigenvaluesOnly).eigenvalues()(0);
}

void check_kind(const Coefficient& c, int m, std::initializer_list<FieldKind> allowed, const char* what) {
  if (!c.eval) throw FemError(std::string(what) + ": coefficient has no evaluator");
  if (std::find(allowed.begin(), allowed.end(), c.kind) == allowed.end())
    throw FemError(std::string(what) + ": unsupported coefficient kind " + to_string(c.kind));
  if (c.kind != FieldKind::scalar && c.m != m)
    throw FemError(std::string(what) + ": system size " + std::to_string(c.m) + " differs from " + std::to_string(m));
}

int system_size(const Coefficient& a, const Coefficient& b) {
  if (a.kind != FieldKind::scalar) return a.m;
  if (b.kind != FieldKind::scalar) return b.m;
  return 1;
}

double boundary_edge_chord(const TriMesh& mesh) {
  double hb = 0.0;
  for (const auto& e : mesh.boundary) hb = std::max(hb, (mesh.vertices[e.a] - mesh.vertices[e.b]).norm());
  return hb;
}

// Visits the 8 Gauss points of every boundary edge along the exact curve:
// fn(edge, x, psi_a, psi_b, ds).
template <class Fn>
void for_boundary_points(const TriMesh& mesh, const SurfaceChart& surface, Fn&& fn) {
  if (surface.dimension() != 2) throw FemError("boundary integrals need a planar surface");
  const auto& gx = gauss8_nodes();
  const auto& gw = gauss8_weights();
  for (const auto& e : mesh.boundary) {
    if (e.piece < 0 || e.piece >= surface.piece_count())
      throw FemError("boundary edge references piece " + std::to_string(e.piece) + " outside the surface");
    const auto& c = *surface.curves()[e.piece];
    const double half = 0.5 * (e.tb - e.ta);
    const double mid = 0.5 * (e.tb + e.ta);
    for (int q = 0; q < 8; ++q) {
      const double t = mid + half * gx[q];
      const double s = 0.5 * (1.0 + gx[q]);
      fn(e, c.position(t), 1.0 - s, s, std::fabs(half) * gw[q] * c.speed(t));
    }
  }
}

}  // namespace

// ---------------------------------------------------------------------------

Coefficient Coefficient::oscillating(const PeriodicField& field, double eps) {
  if (field.dimension() != 2) throw FemError("coefficient fields must be two-dimensional");
  if (!(eps > 0)) throw FemError("eps must be positive");
  Coefficient c;
  c.kind = field.kind();
  c.m = field.system_size();
  c.oscillation = field.max_frequency() == 0 ? 0.0 : eps;
  c.eval = [field, eps](const Vec2& x, std::span<double> out) {
    const double y[2] = {x.x() / eps, x.y() / eps};
    field.evaluate_into(y, out);
  };
  return c;
}

Coefficient Coefficient::constant(FieldKind kind, int m, std::vector<double> value) {
  if (static_cast<int>(value.size()) != component_count(kind, 2, m))
    throw FemError("constant coefficient has " + std::to_string(value.size()) + " entries, expected " +
                   std::to_string(component_count(kind, 2, m)));
  Coefficient c;
  c.kind = kind;
  c.m = m;
  c.eval = [value = std::move(value)](const Vec2&, std::span<double> out) {
    std::copy(value.begin(), value.end(), out.begin());
  };
  return c;
}

Coefficient Coefficient::function(FieldKind kind, int m, std::function<void(const Vec2&, std::span<double>)> fn) {
  Coefficient c;
  c.kind = kind;
  c.m = m;
  c.eval = std::move(fn);
  return c;
}

Coefficient Coefficient::tensor(const HomogenizedTensor& t) {
  if (t.d != 2) throw FemError("homogenized tensor must be two-dimensional");
  return constant(FieldKind::tensor4, t.m, t.a_hat);
}

FieldOnMesh FieldOnMesh::zeros(std::shared_ptr<const TriMesh> mesh, int m) {
  FieldOnMesh u;
  u.m = m;
  u.values.assign(mesh->vertex_count() * m, 0.0);
  u.mesh = std::move(mesh);
  return u;
}

FieldOnMesh FieldOnMesh::interpolate(std::shared_ptr<const TriMesh> mesh, int m,
                                     const std::function<void(const Vec2&, std::span<double>)>& fn) {
  FieldOnMesh u = zeros(std::move(mesh), m);
  for (std::size_t v = 0; v < u.mesh->vertex_count(); ++v)
    fn(u.mesh->vertices[v], std::span<double>(u.values).subspan(v * m, m));
  return u;
}

FieldOnMesh FieldOnMesh::minus(const FieldOnMesh& other) const {
  if (other.mesh != mesh || other.m != m) throw FemError("fields live on different meshes");
  FieldOnMesh out = *this;
  for (std::size_t i = 0; i < values.size(); ++i) out.values[i] -= other.values[i];
  return out;
}

// ---------------------------------------------------------------------------

Eigen::VectorXd boundary_weights(const TriMesh& mesh, const SurfaceChart& surface) {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh.vertex_count()));
  for_boundary_points(mesh, surface, [&](const BoundaryEdge& e, const Vec2&, double pa, double pb, double ds) {
    w[e.a] += pa * ds;
    w[e.b] += pb * ds;
  });
  return w;
}

RobinSystem assemble_robin(std::shared_ptr<const TriMesh> mesh_ptr, const SurfaceChart& surface, const Coefficient& a,
                           const Coefficient& b, const std::optional<Coefficient>& f,
                           const std::optional<Coefficient>& g, const AssemblyOptions& options) {
  if (!mesh_ptr) throw FemError("no mesh");
  const TriMesh& mesh = *mesh_ptr;
  const int m = system_size(a, b);
  check_kind(a, m, {FieldKind::scalar, FieldKind::tensor4}, "A");
  check_kind(b, m, {FieldKind::scalar, FieldKind::matrix}, "b");
  if (f) check_kind(*f, m, {FieldKind::scalar, FieldKind::vector}, "F");
  if (g) check_kind(*g, m, {FieldKind::scalar, FieldKind::vector}, "g");

  const double h_vol = mesh.max_edge();
  const double h_bdry = boundary_edge_chord(mesh);
  auto require = [&](const Coefficient& c, double h, const char* what) {
    if (c.oscillation > 0 && h > c.oscillation / options.resolution * (1 + 1e-12))
      throw FemError(std::string("under-resolved oscillation in ") + what + ": element size " + std::to_string(h) +
                     " exceeds eps/" + std::to_string(options.resolution) + " = " +
                     std::to_string(c.oscillation / options.resolution));
  };
  require(a, h_vol, "A");
  if (f) require(*f, h_vol, "F");
  require(b, h_bdry, "b");
  if (g) require(*g, h_bdry, "g");

  const auto& rule = tri_rule();
  const int nt = static_cast<int>(mesh.triangles.size());
  const int nloc = 3 * m;
  const std::size_t per = static_cast<std::size_t>(nloc) * nloc;
  const int ntens = component_count(FieldKind::tensor4, 2, m);
  const Eigen::Index ndof = static_cast<Eigen::Index>(mesh.vertex_count()) * m;

  std::vector<Eigen::Triplet<double>> trip(static_cast<std::size_t>(nt) * per);
  std::vector<double> load_loc(f ? static_cast<std::size_t>(nt) * nloc : 0, 0.0);
  bool failed = false;
  std::string failure;

#pragma omp parallel if (options.exec == Exec::parallel)
  {
    std::vector<double> av(a.components()), at(ntens), abar(ntens), fv(f ? f->components() : 0), fvec(m);
#pragma omp for schedule(static)
    for (int t = 0; t < nt; ++t) {
      if (failed) continue;
      const Element e = element(mesh, t);
      std::fill(abar.begin(), abar.end(), 0.0);
      for (int q = 0; q < 6; ++q) {
        const Vec2 x = point(e, rule.bary[q]);
        a.eval(x, av);
        as_tensor(a, av, m, at);
        if (options.check_ellipticity) {
          const double mu = a.kind == FieldKind::scalar ? av[0] : legendre_min_eigenvalue(at, m);
          if (!(mu > 0)) {
#pragma omp critical(homolab_fem_fail)
            {
              if (!failed) {
                std::ostringstream os;
                os << "non-elliptic coefficient A at (" << x.x() << ", " << x.y() << "): Legendre minimum " << mu;
                failure = os.str();
              }
              failed = true;
            }
            break;
          }
        }
        for (int c = 0; c < ntens; ++c) abar[c] += rule.w[q] * at[c];
        if (f) {
          f->eval(x, fv);
          as_vector(*f, fv, m, fvec);
          for (int k = 0; k < 3; ++k)
            for (int al = 0; al < m; ++al)
              load_loc[static_cast<std::size_t>(t) * nloc + k * m + al] += rule.w[q] * e.area * fvec[al] * rule.bary[q][k];
        }
      }
      const auto& tri = mesh.triangles[t];
      std::size_t slot = static_cast<std::size_t>(t) * per;
      for (int ki = 0; ki < 3; ++ki)
        for (int al = 0; al < m; ++al)
          for (int kj = 0; kj < 3; ++kj)
            for (int be = 0; be < m; ++be) {
              double s = 0.0;
              for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j)
                  s += abar[tensor_index(al, be, i, j, 2, m)] * e.grad[kj][j] * e.grad[ki][i];
              trip[slot++] = Eigen::Triplet<double>(tri[ki] * m + al, tri[kj] * m + be, e.area * s);
            }
    }
  }
  if (failed) throw FemError(failure);

  RobinSystem sys;
  sys.mesh = mesh_ptr;
  sys.m = m;
  sys.stiffness.resize(ndof, ndof);
  sys.stiffness.setFromTriplets(trip.begin(), trip.end());
  trip.clear();
  trip.shrink_to_fit();

  sys.load = Eigen::VectorXd::Zero(ndof);
  if (f)
    for (int t = 0; t < nt; ++t)
      for (int k = 0; k < 3; ++k)
        for (int al = 0; al < m; ++al)
          sys.load[mesh.triangles[t][k] * m + al] += load_loc[static_cast<std::size_t>(t) * nloc + k * m + al];

  std::vector<Eigen::Triplet<double>> btrip;
  btrip.reserve(mesh.boundary.size() * 4 * m * m);
  std::vector<double> bv(b.components()), bm(m * m), gv(g ? g->components() : 0), gvec(m);
  sys.boundary_weights = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh.vertex_count()));
  bool b_zero = true;
  for_boundary_points(mesh, surface, [&](const BoundaryEdge& e, const Vec2& x, double pa, double pb, double ds) {
    b.eval(x, bv);
    as_matrix(b, bv, m, bm);
    if (options.check_ellipticity) {
      Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> bmat(bm.data(), m, m);
      const Eigen::MatrixXd sym = 0.5 * (bmat + bmat.transpose());
      const double mu = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(sym, Eigen::EigenvaluesOnly).eigenvalues()(0);
      if (mu < -1e-14) {
        std::ostringstream os;
        os << "non-elliptic boundary coefficient b at (" << x.x() << ", " << x.y() << "): symmetric-part minimum " << mu;
        throw FemError(os.str());
      }
    }
    const int vs[2] = {e.a, e.b};
    const double ps[2] = {pa, pb};
    sys.boundary_weights[e.a] += pa * ds;
    sys.boundary_weights[e.b] += pb * ds;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int al = 0; al < m; ++al)
          for (int be = 0; be < m; ++be) {
            const double v = bm[al * m + be] * ps[j] * ps[i] * ds;
            if (v != 0.0) {
              b_zero = false;
              btrip.emplace_back(vs[i] * m + al, vs[j] * m + be, v);
            }
          }
    if (g) {
      g->eval(x, gv);
      as_vector(*g, gv, m, gvec);
      for (int i = 0; i < 2; ++i)
        for (int al = 0; al < m; ++al) sys.load[vs[i] * m + al] += gvec[al] * ps[i] * ds;
    }
  });
  sys.boundary_mass.resize(ndof, ndof);
  if (!b_zero) sys.boundary_mass.setFromTriplets(btrip.begin(), btrip.end());
  return sys;
}

// ---------------------------------------------------------------------------

namespace {

struct Csr {
  std::vector<std::int64_t> row_ptr;
  std::vector<std::int32_t> col;
  std::vector<double> val;
  CsrView view() const { return {row_ptr, col, val}; }
};

Csr to_csr(const Eigen::SparseMatrix<double, Eigen::RowMajor>& a) {
  Csr c;
  c.row_ptr.resize(a.rows() + 1);
  for (Eigen::Index i = 0; i <= a.rows(); ++i) c.row_ptr[i] = a.outerIndexPtr()[i];
  c.col.assign(a.innerIndexPtr(), a.innerIndexPtr() + a.nonZeros());
  c.val.assign(a.valuePtr(), a.valuePtr() + a.nonZeros());
  return c;
}

Eigen::SparseMatrix<double, Eigen::RowMajor> system_matrix(const RobinSystem& s) {
  Eigen::SparseMatrix<double, Eigen::RowMajor> k = s.stiffness;
  if (s.boundary_mass.nonZeros() > 0) k += s.boundary_mass;
  k.makeCompressed();
  return k;
}

}  // namespace

SolveResult solve(const RobinSystem& system, const SolveOptions& options) {
  const int n = system.size();
  const int m = system.m;
  const bool neumann = system.pure_neumann();
  if (neumann && !options.mean_constraint)
    throw SolverError("singular system: pure Neumann block without mean constraint");

  SolveResult out;
  out.field = FieldOnMesh::zeros(system.mesh, m);
  const auto a = system_matrix(system);
  std::span<double> x(out.field.values);

  Eigen::VectorXd rhs = system.load;
  // w_alpha: boundary weights on component alpha.
  const Eigen::VectorXd& bw = system.boundary_weights;
  if (options.mean_constraint) {
    const double wsum = bw.sum();
    if (!(wsum > 0)) throw SolverError("mean constraint needs boundary weights");
    for (int al = 0; al < m; ++al) {
      double s = 0.0;
      for (Eigen::Index v = 0; v < bw.size(); ++v) s += rhs[v * m + al];
      for (Eigen::Index v = 0; v < bw.size(); ++v) rhs[v * m + al] -= s / wsum * bw[v];
    }
  }
  if (rhs.lpNorm<Eigen::Infinity>() == 0.0) return out;

  const bool direct = !options.mean_constraint && !options.force_iterative &&
                      static_cast<std::size_t>(n) <= options.direct_limit;
  if (direct) {
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
    ldlt.compute(Eigen::SparseMatrix<double>(a));
    if (ldlt.info() != Eigen::Success) throw SolverError("sparse factorization failed (matrix not positive definite?)");
    Eigen::VectorXd sol = ldlt.solve(rhs);
    if (ldlt.info() != Eigen::Success || !sol.allFinite()) throw SolverError("sparse solve failed");
    Eigen::Map<Eigen::VectorXd>(x.data(), n) = sol;
    out.direct = true;
    out.relative_residual = (rhs - a * sol).norm() / rhs.norm();
    return out;
  }

  const Csr csr = to_csr(a);
  double c_aug = 0.0;
  Eigen::SparseMatrix<double> pmat(a);
  if (options.mean_constraint) {
    // Rank-one term c w w^T per component; c w.w matches the mean diagonal.
    const double ww = bw.squaredNorm();
    c_aug = a.diagonal().mean() / ww;
    const double tau = c_aug * bw.sum();
    for (Eigen::Index v = 0; v < bw.size(); ++v)
      if (bw[v] != 0.0)
        for (int al = 0; al < m; ++al) pmat.coeffRef(v * m + al, v * m + al) += tau * bw[v];
  }
  Eigen::IncompleteCholesky<double, Eigen::Lower, Eigen::AMDOrdering<int>> ic;
  ic.compute(pmat);
  if (ic.info() != Eigen::Success) throw SolverError("incomplete Cholesky preconditioner failed");

  const Exec e = options.exec;
  LinearOperator apply = [&](std::span<const double> in, std::span<double> y) {
    kernels::matvec(e, csr.view(), in, y);
    if (options.mean_constraint)
      for (int al = 0; al < m; ++al) {
        double s = 0.0;
        for (Eigen::Index v = 0; v < bw.size(); ++v) s += bw[v] * in[v * m + al];
        s *= c_aug;
        for (Eigen::Index v = 0; v < bw.size(); ++v) y[v * m + al] += s * bw[v];
      }
  };
  LinearOperator precondition = [&](std::span<const double> in, std::span<double> y) {
    Eigen::Map<Eigen::VectorXd>(y.data(), n) = ic.solve(Eigen::Map<const Eigen::VectorXd>(in.data(), n));
  };
  PcgOptions po;
  po.rel_tol = options.rel_tol;
  po.max_iterations = options.max_iterations;
  po.exec = e;
  const PcgResult r = pcg(apply, precondition, std::span<const double>(rhs.data(), n), x, po);
  out.iterations = r.iterations;
  out.relative_residual = r.relative_residual;
  if (!r.converged)
    throw SolverError("conjugate gradients did not converge: relative residual " +
                      std::to_string(r.relative_residual) + " after " + std::to_string(r.iterations) + " iterations");
  for (double v : out.field.values)
    if (!std::isfinite(v)) throw SolverError("non-finite solution");
  return out;
}

double variational_residual(const RobinSystem& system, const FieldOnMesh& u) {
  const auto a = system_matrix(system);
  const Eigen::Map<const Eigen::VectorXd> x(u.values.data(), static_cast<Eigen::Index>(u.values.size()));
  const Eigen::VectorXd r = system.load - a * x;
  return r.lpNorm<Eigen::Infinity>() / std::max(1.0, system.load.lpNorm<Eigen::Infinity>());
}

// ---------------------------------------------------------------------------

double norm(const FieldOnMesh& u, Norm which, const NormOptions& options) {
  if (!u.mesh) throw FemError("field has no mesh");
  const TriMesh& mesh = *u.mesh;
  const int m = u.m;
  const double p = which == Norm::L2 || which == Norm::H1 || which == Norm::H1_semi || which == Norm::L2_boundary
                       ? 2.0
                       : options.p;
  if (!(p >= 1.0)) throw FemError("norm exponent must be at least 1");
  std::vector<double> rv(m, 0.0), rg(2 * m, 0.0), val(m), grad(2 * m);
  auto reference = [&](const Vec2& x) {
    if (options.reference) options.reference(x, rv, rg);
  };
  auto mag = [](std::span<const double> v) {
    double s = 0.0;
    for (double c : v) s += c * c;
    return std::sqrt(s);
  };

  if (which == Norm::L2_boundary || which == Norm::Lp_boundary) {
    if (!options.surface) throw FemError("boundary norms need the surface");
    double acc = 0.0, sup = 0.0;
    for_boundary_points(mesh, *options.surface, [&](const BoundaryEdge& e, const Vec2& x, double pa, double pb,
                                                     double ds) {
      reference(x);
      for (int al = 0; al < m; ++al) val[al] = pa * u.at(e.a, al) + pb * u.at(e.b, al) - rv[al];
      const double r = mag(val);
      sup = std::max(sup, r);
      acc += std::pow(r, p) * ds;
    });
    return std::isinf(p) ? sup : std::pow(acc, 1.0 / p);
  }

  if (which == Norm::Linf) {
    double sup = 0.0;
    for (std::size_t v = 0; v < mesh.vertex_count(); ++v) {
      reference(mesh.vertices[v]);
      for (int al = 0; al < m; ++al) val[al] = u.at(static_cast<int>(v), al) - rv[al];
      sup = std::max(sup, mag(val));
    }
    if (options.reference) {
      const auto& rule = tri_rule();
      for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const Element e = element(mesh, static_cast<int>(t));
        const auto& tri = mesh.triangles[t];
        for (int q = 0; q < 6; ++q) {
          reference(point(e, rule.bary[q]));
          for (int al = 0; al < m; ++al) {
            val[al] = -rv[al];
            for (int k = 0; k < 3; ++k) val[al] += rule.bary[q][k] * u.at(tri[k], al);
          }
          sup = std::max(sup, mag(val));
        }
      }
    }
    return sup;
  }

  const bool want_value = which == Norm::L2 || which == Norm::H1 || which == Norm::Lp;
  const bool want_grad = which == Norm::H1 || which == Norm::H1_semi || which == Norm::W1p_semi;
  const auto& rule = tri_rule();
  double acc_v = 0.0, acc_g = 0.0;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const Element e = element(mesh, static_cast<int>(t));
    const auto& tri = mesh.triangles[t];
    std::vector<double> gh(2 * m, 0.0);
    for (int al = 0; al < m; ++al)
      for (int k = 0; k < 3; ++k)
        for (int i = 0; i < 2; ++i) gh[al * 2 + i] += u.at(tri[k], al) * e.grad[k][i];
    for (int q = 0; q < 6; ++q) {
      reference(point(e, rule.bary[q]));
      const double w = rule.w[q] * e.area;
      if (want_value) {
        for (int al = 0; al < m; ++al) {
          val[al] = -rv[al];
          for (int k = 0; k < 3; ++k) val[al] += rule.bary[q][k] * u.at(tri[k], al);
        }
        acc_v += w * std::pow(mag(val), p);
      }
      if (want_grad) {
        for (int c = 0; c < 2 * m; ++c) grad[c] = gh[c] - rg[c];
        acc_g += w * std::pow(mag(grad), p);
      }
    }
  }
  switch (which) {
    case Norm::L2:
      return std::sqrt(acc_v);
    case Norm::H1:
      return std::sqrt(acc_v + acc_g);
    case Norm::H1_semi:
      return std::sqrt(acc_g);
    case Norm::Lp:
      return std::pow(acc_v, 1.0 / p);
    case Norm::W1p_semi:
      return std::pow(acc_g, 1.0 / p);
    default:
      return 0.0;
  }
}

std::vector<double> boundary_integral(const FieldOnMesh& u, const SurfaceChart& surface) {
  std::vector<double> out(u.m, 0.0);
  for_boundary_points(*u.mesh, surface, [&](const BoundaryEdge& e, const Vec2&, double pa, double pb, double ds) {
    for (int al = 0; al < u.m; ++al) out[al] += (pa * u.at(e.a, al) + pb * u.at(e.b, al)) * ds;
  });
  return out;
}

// ---------------------------------------------------------------------------

NeumannAuxResult solve_neumann_aux(std::shared_ptr<const TriMesh> mesh, const SurfaceChart& surface,
                                   const HomogenizedTensor& a_hat, const PeriodicField& f, double eps,
                                   const SolveOptions& options, double compatibility_tol) {
  const int m = a_hat.m;
  if (f.dimension() != 2) throw FemError("f must be two-dimensional");
  if (!(f.kind() == FieldKind::scalar && m == 1) && !(f.kind() == FieldKind::vector && f.system_size() == m))
    throw FemError("f must be a vector field with " + std::to_string(m) + " components");

  NeumannAuxResult out;
  out.m_eps.assign(m, 0.0);
  if (f.kind() == FieldKind::scalar) {
    // M_eps(f) = mean(f) - boundary average of f(x/eps).
    const MEpsilon me = m_epsilon(surface, f, eps);
    out.m_eps[0] = f.mean()[0] - me.value(0, 0);
    out.m_eps_est_error = me.est_error;
  } else {
    const auto v = oscillatory_integral_components(surface, f, unit_weight, eps);
    const double meas = surface.measure();
    for (int al = 0; al < m; ++al) out.m_eps[al] = v.value[al].real() / meas;
    out.m_eps_est_error = v.est_error / meas;
  }

  const std::vector<double> shift = out.m_eps;
  Coefficient g = Coefficient::oscillating(f, eps);
  auto raw = g.eval;
  g.kind = FieldKind::vector;
  g.m = m;
  g.eval = [raw, shift](const Vec2& x, std::span<double> o) {
    raw(x, o);
    for (std::size_t al = 0; al < shift.size(); ++al) o[al] -= shift[al];
  };
  const Coefficient b = Coefficient::constant(FieldKind::matrix, m, std::vector<double>(m * m, 0.0));
  const RobinSystem sys = assemble_robin(mesh, surface, Coefficient::tensor(a_hat), b, std::nullopt, g);

  for (int al = 0; al < m; ++al) {
    double s = 0.0;
    for (Eigen::Index v = 0; v < sys.boundary_weights.size(); ++v) s += sys.load[v * m + al];
    out.compatibility = std::max(out.compatibility, std::fabs(s));
  }
  if (out.compatibility > compatibility_tol) {
    std::ostringstream os;
    os << "compatibility violation: assembled Neumann load sums to " << out.compatibility << " > "
       << compatibility_tol << " after subtracting M_eps (quadrature mismatch?)";
    throw FemError(os.str());
  }
  SolveOptions so = options;
  so.mean_constraint = true;
  out.solve = solve(sys, so);
  out.v = out.solve.field;
  return out;
}

DualityResult duality_check(std::shared_ptr<const TriMesh> mesh, const SurfaceChart& surface,
                            const HomogenizedTensor& a_hat, const PeriodicField& f, const FieldFunction& phi, int m,
                            double eps, const SolveOptions& options) {
  if (m != a_hat.m) throw FemError("phi and a_hat disagree on the system size");
  DualityResult out;
  std::vector<double> pv(m), pg(2 * m);
  for (int al = 0; al < m; ++al) {
    const SurfaceWeight w = [&, al](const QuadratureNode& node) {
      std::vector<double> v(m), gr(2 * m);
      phi(Vec2(node.x.x(), node.x.y()), v, gr);
      return v[al];
    };
    out.lhs += oscillatory_integral_components(surface, f, w, eps).value[al].real();
  }
  out.aux = solve_neumann_aux(mesh, surface, a_hat, f, eps, options);
  const FieldOnMesh& v = out.aux.v;

  const auto& rule = tri_rule();
  for (std::size_t t = 0; t < mesh->triangles.size(); ++t) {
    const Element e = element(*mesh, static_cast<int>(t));
    const auto& tri = mesh->triangles[t];
    std::vector<double> gv(2 * m, 0.0);
    for (int al = 0; al < m; ++al)
      for (int k = 0; k < 3; ++k)
        for (int i = 0; i < 2; ++i) gv[al * 2 + i] += v.at(tri[k], al) * e.grad[k][i];
    for (int q = 0; q < 6; ++q) {
      phi(point(e, rule.bary[q]), pv, pg);
      double s = 0.0;
      for (int al = 0; al < m; ++al)
        for (int be = 0; be < m; ++be)
          for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) s += a_hat(al, be, i, j) * gv[be * 2 + j] * pg[al * 2 + i];
      out.volume_term += rule.w[q] * e.area * s;
    }
  }
  const double density = std::max(64.0, 16.0 / mesh->h);
  for (const auto& node : surface.quadrature(density)) {
    phi(Vec2(node.x.x(), node.x.y()), pv, pg);
    for (int al = 0; al < m; ++al) out.boundary_term += out.aux.m_eps[al] * pv[al] * node.w;
  }
  out.rhs = out.volume_term + out.boundary_term;
  out.gap = std::fabs(out.lhs - out.rhs);
  return out;
}

void write_field(const std::filesystem::path& stem, const FieldOnMesh& u, const nlohmann::json& meta) {
  auto bin = stem;
  bin += ".bin";
  std::ofstream os(bin, std::ios::binary);
  if (!os) throw FemError("cannot write " + bin.string());
  static_assert(std::numeric_limits<double>::is_iec559);
  os.write(reinterpret_cast<const char*>(u.values.data()), static_cast<std::streamsize>(u.values.size() * sizeof(double)));
  nlohmann::json j = meta.is_object() ? meta : nlohmann::json::object();
  j["format"] = "homolab-field 1";
  j["m"] = u.m;
  j["vertices"] = u.mesh ? u.mesh->vertex_count() : 0;
  j["layout"] = "vertex-major, component fastest, little-endian float64";
  auto js = stem;
  js += ".json";
  std::ofstream jo(js);
  if (!jo) throw FemError("cannot write " + js.string());
  jo << j.dump(2) << "\n";
}

}  // namespace homolab
