#include "homolab/cell_homogenizer.hpp"
#include "homolab/field_io.hpp"

#include <boost/math/quadrature/trapezoidal.hpp>
#include <doctest.h>

#include <cmath>
#include <numeric>

using namespace homolab;

namespace {
const double pi = std::acos(-1.0);

PeriodicField laminate() {
  return PeriodicField::fourier(FieldKind::scalar, 2, 1,
                                {FourierMode{{0, 0}, {Complex(2, 0)}}, FourierMode{{1, 0}, {Complex(0, -0.5)}}});
}

// Harmonic mean of 2 + sin(2 pi y) by periodic trapezoidal quadrature.
double harmonic_mean_oracle() {
  const double inv = boost::math::quadrature::trapezoidal([](double y) { return 1.0 / (2.0 + std::sin(2 * pi * y)); },
                                                          0.0, 1.0, 1e-15);
  return 1.0 / inv;
}
}  // namespace

TEST_CASE("harmonic mean oracle is sqrt(3)") {
  CHECK(harmonic_mean_oracle() == doctest::Approx(std::sqrt(3.0)).epsilon(1e-13));
}

TEST_CASE("laminate: harmonic mean across, arithmetic mean along") {
  const auto a = laminate();
  const auto chi = solve_correctors(a, 256);
  const auto t = homogenize(a, chi);
  CHECK(std::fabs(t(0, 0, 0, 0) - harmonic_mean_oracle()) <= 1e-6);
  CHECK(std::fabs(t(0, 0, 1, 1) - 2.0) <= 1e-10);
  CHECK(std::fabs(t(0, 0, 0, 1)) <= 1e-10);
  CHECK(t.max_asymmetry() <= 1e-12);
  CHECK(cell_residual(a, chi) <= 1e-8);
}

TEST_CASE("corrector invariants") {
  const auto a = laminate();
  const auto chi = solve_correctors(a, 64);
  for (const auto& v : chi.chi) {
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    CHECK(std::fabs(mean) <= 1e-10);
  }
  // chi_2 vanishes for a laminate in y_1.
  for (double v : chi.corrector(1, 0)) CHECK(std::fabs(v) <= 1e-10);
}

TEST_CASE("identity coefficient gives zero correctors exactly") {
  const auto id = PeriodicField::constant(FieldKind::scalar, 2, 1, {1.0});
  for (bool fd : {false, true}) {
    CellOptions opt;
    opt.force_finite_difference = fd;
    const auto chi = solve_correctors(id, 32, opt);
    for (const auto& v : chi.chi)
      for (double x : v) CHECK(x == 0.0);
    const auto t = homogenize(id, chi);
    CHECK(t(0, 0, 0, 0) == 1.0);
    CHECK(t(0, 0, 1, 1) == 1.0);
  }
}

TEST_CASE("checkerboard converges to the geometric mean") {
  double prev = 1e9;
  for (int n : {64, 128, 256}) {
    const auto cb = checkerboard(n, 1, 4);
    const auto t = homogenize(cb, solve_correctors(cb, n));
    const double gap = std::max(std::fabs(t(0, 0, 0, 0) - 2), std::fabs(t(0, 0, 1, 1) - 2));
    CHECK(gap < prev);
    prev = gap;
  }
  CHECK(prev < 5e-2);
}

TEST_CASE("finite differences approach the spectral value") {
  const auto a = laminate();
  CellOptions opt;
  opt.force_finite_difference = true;
  double prev = 1e9;
  for (int n : {16, 32, 64}) {
    const auto t = homogenize(a, solve_correctors(a, n, opt));
    const double err = std::fabs(t(0, 0, 0, 0) - std::sqrt(3.0));
    CHECK(err < prev);
    prev = err;
  }
  CHECK(prev < 1e-3);
}

TEST_CASE("serial and parallel cell solves agree") {
  const auto a = PeriodicField::fourier(FieldKind::scalar, 2, 1,
                                        {FourierMode{{0, 0}, {Complex(2, 0)}}, FourierMode{{1, 2}, {Complex(0.3, 0.2)}}});
  CellOptions s, p;
  p.exec = Exec::parallel;
  const auto ts = homogenize(a, solve_correctors(a, 64, s));
  const auto tp = homogenize(a, solve_correctors(a, 64, p));
  for (std::size_t i = 0; i < ts.a_hat.size(); ++i) CHECK(ts.a_hat[i] == doctest::Approx(tp.a_hat[i]).epsilon(1e-12));
}

TEST_CASE("decoupled system reproduces the scalar tensor per component") {
  const auto scalar = homogenize(laminate(), solve_correctors(laminate(), 64));
  const auto sys = laminate().as_tensor4(2);
  const auto t = homogenize(sys, solve_correctors(sys, 64));
  for (int a = 0; a < 2; ++a) {
    CHECK(t(a, a, 0, 0) == doctest::Approx(scalar(0, 0, 0, 0)).epsilon(1e-10));
    CHECK(t(a, a, 1, 1) == doctest::Approx(scalar(0, 0, 1, 1)).epsilon(1e-10));
  }
  CHECK(std::fabs(t(0, 1, 0, 0)) <= 1e-12);
}

TEST_CASE("effective Robin coefficient is the mean") {
  auto t = homogenize(laminate(), solve_correctors(laminate(), 16));
  const auto b = PeriodicField::fourier(FieldKind::scalar, 2, 1,
                                        {FourierMode{{0, 0}, {Complex(2, 0)}}, FourierMode{{1, 1}, {Complex(0.25, 0)}}});
  attach_effective_robin(t, b);
  REQUIRE(t.b_bar.size() == 1);
  CHECK(t.b_bar[0] == 2.0);
}

TEST_CASE("grid sizes must be powers of two") {
  CHECK_THROWS_AS(solve_correctors(laminate(), 48), CellError);
}
