#include "homolab/kernels.hpp"

#include <omp.h>

#include <cmath>
#include <stdexcept>

namespace homolab {
namespace kernels {

namespace {
constexpr std::size_t kBlock = 4096;

std::size_t block_count(std::size_t n) { return (n + kBlock - 1) / kBlock; }
}  // namespace

namespace serial {

double dot(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

void xpby(std::span<const double> x, double b, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] + b * y[i];
}

void matvec(const CsrView& a, std::span<const double> x, std::span<double> y) {
  const std::size_t rows = a.rows();
  for (std::size_t r = 0; r < rows; ++r) {
    double s = 0.0;
    for (std::int64_t p = a.row_ptr[r]; p < a.row_ptr[r + 1]; ++p) s += a.val[p] * x[a.col[p]];
    y[r] = s;
  }
}

std::complex<double> weighted_sum(std::span<const double> w, std::span<const std::complex<double>> v) {
  std::complex<double> s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * v[i];
  return s;
}

}  // namespace serial

namespace parallel {

double dot(std::span<const double> x, std::span<const double> y) {
  const std::size_t nb = block_count(x.size());
  std::vector<double> partial(nb, 0.0);
#pragma omp parallel for schedule(static)
  for (std::size_t b = 0; b < nb; ++b) {
    const std::size_t lo = b * kBlock;
    const std::size_t hi = std::min(x.size(), lo + kBlock);
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += x[i] * y[i];
    partial[b] = s;
  }
  double s = 0.0;
  for (double p : partial) s += p;
  return s;
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
  const std::int64_t n = static_cast<std::int64_t>(x.size());
#pragma omp parallel for simd schedule(static)
  for (std::int64_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void xpby(std::span<const double> x, double b, std::span<double> y) {
  const std::int64_t n = static_cast<std::int64_t>(x.size());
#pragma omp parallel for simd schedule(static)
  for (std::int64_t i = 0; i < n; ++i) y[i] = x[i] + b * y[i];
}

void matvec(const CsrView& a, std::span<const double> x, std::span<double> y) {
  const std::int64_t rows = static_cast<std::int64_t>(a.rows());
#pragma omp parallel for schedule(static)
  for (std::int64_t r = 0; r < rows; ++r) {
    double s = 0.0;
    for (std::int64_t p = a.row_ptr[r]; p < a.row_ptr[r + 1]; ++p) s += a.val[p] * x[a.col[p]];
    y[r] = s;
  }
}

std::complex<double> weighted_sum(std::span<const double> w, std::span<const std::complex<double>> v) {
  const std::size_t nb = block_count(w.size());
  std::vector<std::complex<double>> partial(nb, 0.0);
#pragma omp parallel for schedule(static)
  for (std::size_t b = 0; b < nb; ++b) {
    const std::size_t lo = b * kBlock;
    const std::size_t hi = std::min(w.size(), lo + kBlock);
    std::complex<double> s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += w[i] * v[i];
    partial[b] = s;
  }
  std::complex<double> s = 0.0;
  for (const auto& p : partial) s += p;
  return s;
}

}  // namespace parallel

double dot(Exec e, std::span<const double> x, std::span<const double> y) {
  return e == Exec::parallel ? parallel::dot(x, y) : serial::dot(x, y);
}
void axpy(Exec e, double a, std::span<const double> x, std::span<double> y) {
  e == Exec::parallel ? parallel::axpy(a, x, y) : serial::axpy(a, x, y);
}
void xpby(Exec e, std::span<const double> x, double b, std::span<double> y) {
  e == Exec::parallel ? parallel::xpby(x, b, y) : serial::xpby(x, b, y);
}
void matvec(Exec e, const CsrView& a, std::span<const double> x, std::span<double> y) {
  e == Exec::parallel ? parallel::matvec(a, x, y) : serial::matvec(a, x, y);
}
std::complex<double> weighted_sum(Exec e, std::span<const double> w,
                                  std::span<const std::complex<double>> v) {
  return e == Exec::parallel ? parallel::weighted_sum(w, v) : serial::weighted_sum(w, v);
}

}  // namespace kernels

PcgResult pcg(const LinearOperator& apply, const LinearOperator& precondition,
              std::span<const double> rhs, std::span<double> x, const PcgOptions& options) {
  using namespace kernels;
  const Exec e = options.exec;
  const std::size_t n = rhs.size();
  if (x.size() != n) throw std::invalid_argument("pcg: size mismatch");
  std::vector<double> r(n), z(n), p(n), q(n);

  PcgResult result;
  const double rhs_norm = std::sqrt(dot(e, rhs, rhs));
  if (rhs_norm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    result.converged = true;
    return result;
  }
  if (options.project) options.project(x);
  apply(x, q);
  for (std::size_t i = 0; i < n; ++i) r[i] = rhs[i] - q[i];
  if (options.project) options.project(r);
  double rnorm = std::sqrt(dot(e, r, r));
  if (rnorm <= options.rel_tol * rhs_norm) {
    result.converged = true;
    result.relative_residual = rnorm / rhs_norm;
    return result;
  }
  precondition(r, z);
  if (options.project) options.project(z);
  std::copy(z.begin(), z.end(), p.begin());
  double rz = dot(e, r, z);

  for (int it = 1; it <= options.max_iterations; ++it) {
    apply(p, q);
    if (options.project) options.project(q);
    const double pq = dot(e, p, q);
    if (!(pq > 0.0)) {
      result.iterations = it;
      result.relative_residual = rnorm / rhs_norm;
      return result;
    }
    const double alpha = rz / pq;
    axpy(e, alpha, p, x);
    axpy(e, -alpha, q, r);
    rnorm = std::sqrt(dot(e, r, r));
    result.iterations = it;
    result.relative_residual = rnorm / rhs_norm;
    if (rnorm <= options.rel_tol * rhs_norm) {
      result.converged = true;
      break;
    }
    precondition(r, z);
    if (options.project) options.project(z);
    const double rz_new = dot(e, r, z);
    xpby(e, z, rz_new / rz, p);
    rz = rz_new;
  }
  if (options.project) options.project(x);
  return result;
}

}  // namespace homolab
