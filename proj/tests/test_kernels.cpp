#include "homolab/kernels.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace homolab;

namespace {
std::vector<double> random_vector(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

struct Tridiagonal {
  std::vector<std::int64_t> row_ptr{0};
  std::vector<std::int32_t> col;
  std::vector<double> val;
  explicit Tridiagonal(int n) {
    for (int i = 0; i < n; ++i) {
      if (i > 0) col.push_back(i - 1), val.push_back(-1);
      col.push_back(i), val.push_back(2.5);
      if (i + 1 < n) col.push_back(i + 1), val.push_back(-1);
      row_ptr.push_back(static_cast<std::int64_t>(col.size()));
    }
  }
  CsrView view() const { return {row_ptr, col, val}; }
};
}  // namespace

TEST_CASE("parallel kernels agree with the serial reference") {
  const std::size_t n = 100003;
  const auto x = random_vector(n, 1), y = random_vector(n, 2);
  CHECK(kernels::parallel::dot(x, y) == doctest::Approx(kernels::serial::dot(x, y)).epsilon(1e-12));

  auto ys = y, yp = y;
  kernels::serial::axpy(0.3, x, ys);
  kernels::parallel::axpy(0.3, x, yp);
  CHECK(ys == yp);
  kernels::serial::xpby(x, -0.7, ys);
  kernels::parallel::xpby(x, -0.7, yp);
  CHECK(ys == yp);

  const Tridiagonal a(static_cast<int>(n));
  std::vector<double> ms(n), mp(n);
  kernels::serial::matvec(a.view(), x, ms);
  kernels::parallel::matvec(a.view(), x, mp);
  CHECK(ms == mp);

  std::vector<std::complex<double>> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = std::polar(1.0, 0.001 * static_cast<double>(i));
  const auto ws = kernels::serial::weighted_sum(x, v), wp = kernels::parallel::weighted_sum(x, v);
  CHECK(std::abs(ws - wp) <= 1e-10 * (1 + std::abs(ws)));
}

TEST_CASE("parallel reductions are deterministic") {
  const auto x = random_vector(1 << 20, 5);
  const double first = kernels::parallel::dot(x, x);
  for (int k = 0; k < 3; ++k) CHECK(kernels::parallel::dot(x, x) == first);
}

TEST_CASE("pcg solves a tridiagonal system") {
  const int n = 500;
  const Tridiagonal a(n);
  const auto b = random_vector(n, 9);
  for (Exec e : {Exec::serial, Exec::parallel}) {
    std::vector<double> x(n, 0.0);
    PcgOptions opt;
    opt.exec = e;
    const auto apply = [&](std::span<const double> in, std::span<double> out) { kernels::matvec(e, a.view(), in, out); };
    const auto jacobi = [](std::span<const double> in, std::span<double> out) {
      for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i] / 2.5;
    };
    const auto r = pcg(apply, jacobi, b, x, opt);
    CHECK(r.converged);
    std::vector<double> ax(n);
    kernels::serial::matvec(a.view(), x, ax);
    double err = 0;
    for (int i = 0; i < n; ++i) err = std::max(err, std::fabs(ax[i] - b[i]));
    CHECK(err < 1e-8);
  }
}

TEST_CASE("pcg with zero right-hand side returns zero") {
  const Tridiagonal a(10);
  std::vector<double> b(10, 0.0), x(10, 1.0);
  const auto apply = [&](std::span<const double> in, std::span<double> out) {
    kernels::serial::matvec(a.view(), in, out);
  };
  const auto id = [](std::span<const double> in, std::span<double> out) { std::copy(in.begin(), in.end(), out.begin()); };
  const auto r = pcg(apply, id, b, x, {});
  CHECK(r.converged);
  for (double v : x) CHECK(v == 0.0);
}
