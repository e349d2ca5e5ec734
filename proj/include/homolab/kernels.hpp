#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace homolab {

/// Selects the OpenMP kernels or the serial reference loops.
enum class Exec { serial, parallel };

/// Compressed sparse row view; does not own its arrays.
struct CsrView {
  std::span<const std::int64_t> row_ptr;
  std::span<const std::int32_t> col;
  std::span<const double> val;
  std::size_t rows() const { return row_ptr.empty() ? 0 : row_ptr.size() - 1; }
};

namespace kernels {

// Serial reference implementations.
namespace serial {
double dot(std::span<const double> x, std::span<const double> y);
void axpy(double a, std::span<const double> x, std::span<double> y);
void xpby(std::span<const double> x, double b, std::span<double> y);
void matvec(const CsrView& a, std::span<const double> x, std::span<double> y);
std::complex<double> weighted_sum(std::span<const double> w, std::span<const std::complex<double>> v);
}  // namespace serial

// OpenMP implementations. Reductions sum fixed-size blocks in parallel and
// combine the block partials in index order, so results do not depend on the
// thread count.
namespace parallel {
double dot(std::span<const double> x, std::span<const double> y);
void axpy(double a, std::span<const double> x, std::span<double> y);
void xpby(std::span<const double> x, double b, std::span<double> y);
void matvec(const CsrView& a, std::span<const double> x, std::span<double> y);
std::complex<double> weighted_sum(std::span<const double> w, std::span<const std::complex<double>> v);
}  // namespace parallel

double dot(Exec e, std::span<const double> x, std::span<const double> y);
void axpy(Exec e, double a, std::span<const double> x, std::span<double> y);
/// y = x + b*y
void xpby(Exec e, std::span<const double> x, double b, std::span<double> y);
void matvec(Exec e, const CsrView& a, std::span<const double> x, std::span<double> y);
std::complex<double> weighted_sum(Exec e, std::span<const double> w,
                                  std::span<const std::complex<double>> v);

}  // namespace kernels

struct PcgResult {
  bool converged = false;
  int iterations = 0;
  double relative_residual = 0.0;
};

struct PcgOptions {
  double rel_tol = 1e-10;
  int max_iterations = 10000;
  Exec exec = Exec::serial;
  /// Applied to iterates and search directions each step (e.g. mean removal).
  std::function<void(std::span<double>)> project;
};

using LinearOperator = std::function<void(std::span<const double>, std::span<double>)>;

/// Preconditioned conjugate gradients for a symmetric positive (semi)definite
/// operator. x holds the initial guess on entry.
PcgResult pcg(const LinearOperator& apply, const LinearOperator& precondition,
              std::span<const double> rhs, std::span<double> x, const PcgOptions& options);

}  // namespace homolab
