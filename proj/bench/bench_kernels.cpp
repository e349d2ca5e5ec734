#include "homolab/cell_homogenizer.hpp"
#include "homolab/fem.hpp"
#include "homolab/kernels.hpp"
#include "homolab/oscillatory.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <memory>
#include <random>

using namespace homolab;

namespace {

Exec exec_of(const benchmark::State& s) { return s.range(1) ? Exec::parallel : Exec::serial; }

std::vector<double> random_vector(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

// 5-point Laplacian on an n x n grid.
struct Laplacian {
  std::vector<std::int64_t> row_ptr{0};
  std::vector<std::int32_t> col;
  std::vector<double> val;
  explicit Laplacian(int n) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        auto add = [&](int ii, int jj, double v) {
          if (ii >= 0 && ii < n && jj >= 0 && jj < n) {
            col.push_back(ii * n + jj);
            val.push_back(v);
          }
        };
        add(i - 1, j, -1);
        add(i, j - 1, -1);
        add(i, j, 4);
        add(i, j + 1, -1);
        add(i + 1, j, -1);
        row_ptr.push_back(static_cast<std::int64_t>(col.size()));
      }
  }
  CsrView view() const { return {row_ptr, col, val}; }
};

void BM_dot(benchmark::State& s) {
  const auto x = random_vector(s.range(0), 1), y = random_vector(s.range(0), 2);
  for (auto _ : s) benchmark::DoNotOptimize(kernels::dot(exec_of(s), x, y));
  s.SetItemsProcessed(s.iterations() * s.range(0));
}

void BM_axpy(benchmark::State& s) {
  const auto x = random_vector(s.range(0), 1);
  auto y = random_vector(s.range(0), 2);
  for (auto _ : s) {
    kernels::axpy(exec_of(s), 1e-3, x, y);
    benchmark::ClobberMemory();
  }
  s.SetItemsProcessed(s.iterations() * s.range(0));
}

void BM_matvec(benchmark::State& s) {
  const Laplacian a(static_cast<int>(s.range(0)));
  const auto x = random_vector(a.row_ptr.size() - 1, 3);
  std::vector<double> y(x.size());
  for (auto _ : s) {
    kernels::matvec(exec_of(s), a.view(), x, y);
    benchmark::ClobberMemory();
  }
  s.SetItemsProcessed(s.iterations() * static_cast<long>(a.val.size()));
}

void BM_weighted_sum(benchmark::State& s) {
  const auto w = random_vector(s.range(0), 4);
  std::vector<std::complex<double>> v(s.range(0));
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::polar(1.0, 0.01 * static_cast<double>(i));
  for (auto _ : s) benchmark::DoNotOptimize(kernels::weighted_sum(exec_of(s), w, v));
  s.SetItemsProcessed(s.iterations() * s.range(0));
}

void BM_cell_solve(benchmark::State& s) {
  const auto a = PeriodicField::fourier(FieldKind::scalar, 2, 1,
                                        {FourierMode{{0, 0}, {Complex(2, 0)}}, FourierMode{{1, 1}, {Complex(0, -0.5)}}});
  CellOptions opt;
  opt.exec = exec_of(s);
  for (auto _ : s) benchmark::DoNotOptimize(solve_correctors(a, static_cast<int>(s.range(0)), opt));
}

void BM_oscillatory(benchmark::State& s) {
  const auto circle = SurfaceChart::circle(1.0);
  const auto f = PeriodicField::fourier(FieldKind::scalar, 2, 1, {FourierMode{{1, 0}, {Complex(0.5, 0)}}});
  OscillatoryOptions opt;
  opt.exec = exec_of(s);
  const double eps = std::ldexp(1.0, -static_cast<int>(s.range(0)));
  for (auto _ : s) benchmark::DoNotOptimize(oscillatory_integral(circle, f, unit_weight, eps, opt));
}

void BM_assembly(benchmark::State& s) {
  const auto disk = SurfaceChart::circle(1.0);
  const auto mesh = std::make_shared<const TriMesh>(mesh_domain(disk, 1.0 / static_cast<double>(s.range(0))));
  const auto a = PeriodicField::fourier(FieldKind::scalar, 2, 1,
                                        {FourierMode{{0, 0}, {Complex(2, 0)}}, FourierMode{{1, 0}, {Complex(0, -0.5)}}});
  AssemblyOptions opt;
  opt.exec = exec_of(s);
  const auto b = Coefficient::constant(FieldKind::scalar, 1, {1.0});
  for (auto _ : s)
    benchmark::DoNotOptimize(assemble_robin(mesh, disk, Coefficient::oscillating(a, 0.125), b, std::nullopt, std::nullopt, opt));
  s.SetItemsProcessed(s.iterations() * static_cast<long>(mesh->triangles.size()));
}

}  // namespace

BENCHMARK(BM_dot)->ArgsProduct({{1 << 16, 1 << 22}, {0, 1}});
BENCHMARK(BM_axpy)->ArgsProduct({{1 << 16, 1 << 22}, {0, 1}});
BENCHMARK(BM_matvec)->ArgsProduct({{256, 1024}, {0, 1}});
BENCHMARK(BM_weighted_sum)->ArgsProduct({{1 << 16, 1 << 20}, {0, 1}});
BENCHMARK(BM_cell_solve)->ArgsProduct({{64, 256}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_oscillatory)->ArgsProduct({{6, 9}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_assembly)->ArgsProduct({{64, 128}, {0, 1}})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
