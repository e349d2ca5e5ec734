#pragma once

#include "homolab/cell_homogenizer.hpp"
#include "homolab/kernels.hpp"
#include "homolab/mesh.hpp"
#include "homolab/periodic_field.hpp"
#include "homolab/surface.hpp"

#include <Eigen/Sparse>
#include <json.hpp>

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace homolab {

class FemError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Coefficient on the physical domain, x -> values in the layout of `kind`
/// (tensor4 a_ij^{ab}, matrix m x m, vector m, or scalar).
struct Coefficient {
  FieldKind kind = FieldKind::scalar;
  int m = 1;
  std::function<void(const Vec2&, std::span<double>)> eval;
  /// Period scale eps of an oscillating coefficient, 0 for a smooth one.
  double oscillation = 0.0;

  int components() const { return component_count(kind, 2, m); }

  /// x -> field(x / eps).
  static Coefficient oscillating(const PeriodicField& field, double eps);
  static Coefficient constant(FieldKind kind, int m, std::vector<double> value);
  static Coefficient function(FieldKind kind, int m, std::function<void(const Vec2&, std::span<double>)> fn);
  /// Constant homogenized tensor a_hat.
  static Coefficient tensor(const HomogenizedTensor& t);
};

/// Point function with gradient: value[alpha], grad[alpha * 2 + i].
using FieldFunction = std::function<void(const Vec2& x, std::span<double> value, std::span<double> grad)>;

/// P1 nodal field, value of component alpha at vertex v stored at v * m + alpha.
struct FieldOnMesh {
  std::shared_ptr<const TriMesh> mesh;
  int m = 1;
  std::vector<double> values;

  double at(int vertex, int alpha = 0) const { return values[static_cast<std::size_t>(vertex) * m + alpha]; }

  static FieldOnMesh zeros(std::shared_ptr<const TriMesh> mesh, int m);
  static FieldOnMesh interpolate(std::shared_ptr<const TriMesh> mesh, int m,
                                 const std::function<void(const Vec2&, std::span<double>)>& fn);
  /// this - other on the same mesh.
  FieldOnMesh minus(const FieldOnMesh& other) const;
};

/// Discretization of the variational form
///   int A grad u . grad phi + int_bdry b u . phi = int F . phi + int_bdry g . phi
/// with dof index vertex * m + alpha.
struct RobinSystem {
  std::shared_ptr<const TriMesh> mesh;
  int m = 1;
  Eigen::SparseMatrix<double, Eigen::RowMajor> stiffness;
  Eigen::SparseMatrix<double, Eigen::RowMajor> boundary_mass;
  Eigen::VectorXd load;
  /// int_bdry psi_v dsigma per vertex.
  Eigen::VectorXd boundary_weights;

  int dof(int vertex, int alpha) const { return vertex * m + alpha; }
  int size() const { return static_cast<int>(load.size()); }
  bool pure_neumann() const { return boundary_mass.nonZeros() == 0 || boundary_mass.norm() == 0.0; }
};

struct AssemblyOptions {
  /// Oscillating coefficients require element edges of at most eps / resolution.
  double resolution = 4.0;
  bool check_ellipticity = true;
  Exec exec = Exec::parallel;
};

/// Element integrals use a six-point degree-4 rule; boundary
/// integrals an 8-point Gauss rule per edge along the exact curve, with the
/// trace basis linear in the curve parameter.
RobinSystem assemble_robin(std::shared_ptr<const TriMesh> mesh, const SurfaceChart& surface, const Coefficient& a,
                           const Coefficient& b, const std::optional<Coefficient>& f = std::nullopt,
                           const std::optional<Coefficient>& g = std::nullopt, const AssemblyOptions& options = {});

/// int_bdry psi_v dsigma for every vertex.
Eigen::VectorXd boundary_weights(const TriMesh& mesh, const SurfaceChart& surface);

struct SolveOptions {
  double rel_tol = 1e-10;
  int max_iterations = 50000;
  /// Sparse LDL^T below this many unknowns, preconditioned CG above.
  std::size_t direct_limit = 200000;
  bool force_iterative = false;
  /// Pure Neumann mode: enforce int_bdry u^alpha = 0 by rank-one augmentation.
  bool mean_constraint = false;
  Exec exec = Exec::serial;
};

struct SolveResult {
  FieldOnMesh field;
  bool direct = false;
  int iterations = 0;
  double relative_residual = 0.0;
};

SolveResult solve(const RobinSystem& system, const SolveOptions& options = {});

/// max_i |load_i - ((K + B) u)_i| / max(1, max_i |load_i|).
double variational_residual(const RobinSystem& system, const FieldOnMesh& u);

enum class Norm { L2, H1, H1_semi, Lp, W1p_semi, L2_boundary, Lp_boundary, Linf };

struct NormOptions {
  double p = 2.0;
  /// Subtracted from the field before taking the norm.
  FieldFunction reference;
  /// Required for boundary norms: integrals follow the exact curve.
  const SurfaceChart* surface = nullptr;
};

/// Element-wise quadrature of |u|^p (and |grad u|^p). Gradient norms use the
/// Frobenius norm over components. Linf is the largest nodal value, which is
/// the supremum of a P1 field (with a reference: the largest value at
/// vertices and element quadrature points).
double norm(const FieldOnMesh& u, Norm which, const NormOptions& options = {});

/// int_bdry u dsigma per component.
std::vector<double> boundary_integral(const FieldOnMesh& u, const SurfaceChart& surface);

struct NeumannAuxResult {
  FieldOnMesh v;
  /// Compatibility constant: boundary average of f(x / eps), per component.
  std::vector<double> m_eps;
  /// Sum of the assembled load after subtracting m_eps.
  double compatibility = 0.0;
  double m_eps_est_error = 0.0;
  SolveResult solve;
};

/// -div(a_hat grad v) = 0 in the domain, n . a_hat grad v = f(x/eps) - M on the
/// boundary, int_bdry v = 0. M comes from the surface oscillatory quadrature.
NeumannAuxResult solve_neumann_aux(std::shared_ptr<const TriMesh> mesh, const SurfaceChart& surface,
                                   const HomogenizedTensor& a_hat, const PeriodicField& f, double eps,
                                   const SolveOptions& options = {}, double compatibility_tol = 1e-10);

struct DualityResult {
  double lhs = 0.0;
  double rhs = 0.0;
  double gap = 0.0;
  double volume_term = 0.0;
  double boundary_term = 0.0;
  NeumannAuxResult aux;
};

/// lhs = int_bdry f(x/eps) . phi, rhs = int a_hat grad v . grad phi + M . int_bdry phi.
DualityResult duality_check(std::shared_ptr<const TriMesh> mesh, const SurfaceChart& surface,
                            const HomogenizedTensor& a_hat, const PeriodicField& f, const FieldFunction& phi, int m,
                            double eps, const SolveOptions& options = {});

struct ExpansionOptions {
  /// Mollifier radius as a multiple of eps.
  double mollifier_radius = 1.0;
  /// Auxiliary grid spacing; 0 picks min(h, eps / 8).
  double grid_spacing = 0.0;
};

/// w = u_eps - u0 - eps chi(x/eps) S_eps(eta_eps grad u0). S_eps convolves
/// with the unit-mass bump exp(-1/(1-|x|^2)) scaled to the mollifier radius;
/// eta_eps is a smoothstep in the exact distance to the boundary, 0 below eps
/// and 1 beyond 2 eps.
FieldOnMesh first_order_expansion(const FieldOnMesh& u_eps, const FieldOnMesh& u0, const CorrectorSet& chi,
                                  double eps, const SurfaceChart& surface, const ExpansionOptions& options = {});

/// The cutoff eta_eps at distance `dist` from the boundary.
double boundary_cutoff(double dist, double eps);

/// Writes values as little-endian float64 to `<stem>.bin` and the metadata
/// (m, vertex count, plus `meta`) to `<stem>.json`.
void write_field(const std::filesystem::path& stem, const FieldOnMesh& u, const nlohmann::json& meta = {});

}  // namespace homolab
