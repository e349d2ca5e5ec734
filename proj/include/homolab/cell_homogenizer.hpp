#pragma once

#include "homolab/kernels.hpp"
#include "homolab/periodic_field.hpp"

#include <span>
#include <vector>

namespace homolab {

enum class CellDiscretization {
  /// Fourier Galerkin with pseudo-spectral products, 2/3-rule truncation.
  spectral,
  /// Nodal finite differences with cell-constant coefficients.
  finite_difference,
};

/// Periodic correctors chi_j^b on an N^d torus grid.
///
/// chi(j, b) holds m grid functions (component g = chi_j^{g b}) stacked
/// component-major, each N^d row-major. Every corrector has zero mean.
struct CorrectorSet {
  int d = 2;
  int m = 1;
  int n = 0;
  CellDiscretization discretization = CellDiscretization::spectral;
  std::vector<std::vector<double>> chi;  // index j*m + b
  std::vector<int> iterations;
  std::vector<double> residuals;  // relative solver residuals

  std::size_t points() const;
  std::span<const double> corrector(int j, int beta) const { return chi.at(j * m + beta); }
  std::span<const double> component(int j, int beta, int gamma) const {
    return corrector(j, beta).subspan(gamma * points(), points());
  }
  /// Multilinear periodic interpolation of chi_j^{g b} at y.
  double interpolate(int j, int beta, int gamma, std::span<const double> y) const;

  static CorrectorSet zero(int d, int m, int n, CellDiscretization disc);
};

struct HomogenizedTensor {
  int d = 2;
  int m = 1;
  std::vector<double> a_hat;  // tensor_index layout
  std::vector<double> b_bar;  // m x m row-major, empty when no b was given

  double operator()(int alpha, int beta, int i, int j) const {
    return a_hat[tensor_index(alpha, beta, i, j, d, m)];
  }
  /// Smallest eigenvalue of the symmetric part of the Legendre form.
  double min_eigenvalue() const;
  double max_asymmetry() const;
};

struct CellOptions {
  double rel_tol = 1e-10;
  int max_iterations = 10000;
  Exec exec = Exec::serial;
  /// Use the finite-difference path even for Fourier coefficients.
  bool force_finite_difference = false;
};

class CellError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Solves L_1(chi_j^b + P_j^b) = 0 on T^d for all (j, b). Fourier A uses the
/// spectral path, grid A the finite-difference path. Scalar A is taken as
/// a(y) I. N must be a power of two.
CorrectorSet solve_correctors(const PeriodicField& a, int n, const CellOptions& options = {});

/// a_hat_ij^{ab} = mean of a_ij^{ab} + a_ik^{ag} d_k chi_j^{gb}, evaluated with
/// the same discrete gradient as the solve.
HomogenizedTensor homogenize(const PeriodicField& a, const CorrectorSet& chi);

/// Attaches b_bar = mean(b) to an existing tensor.
void attach_effective_robin(HomogenizedTensor& tensor, const PeriodicField& b);

/// Largest discrete L2 norm over (j, b) of div(A(grad chi_j^b + e_j e^b)).
double cell_residual(const PeriodicField& a, const CorrectorSet& chi);

/// Discrete gradient component d_l chi_j^{g b} on the grid (spectral
/// derivative, or the cell-averaged difference for the FD path).
std::vector<double> corrector_gradient(const CorrectorSet& chi, int j, int beta, int gamma, int l);

}  // namespace homolab
