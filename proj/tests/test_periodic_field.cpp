#include "homolab/field_io.hpp"
#include "homolab/periodic_field.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>

using namespace homolab;

namespace {
const double pi = std::acos(-1.0);

PeriodicField laminate() {
  return PeriodicField::fourier(FieldKind::scalar, 2, 1,
                                {FourierMode{{0, 0}, {Complex(2, 0)}}, FourierMode{{1, 0}, {Complex(0, -0.5)}}});
}
}  // namespace

TEST_CASE("real Fourier field evaluates a_0 + 2 Re sum") {
  const auto a = laminate();
  for (double y1 : {0.0, 0.1, 0.25, 0.7}) {
    const double y[2] = {y1, 0.3};
    CHECK(a.evaluate(y)[0] == doctest::Approx(2 + std::sin(2 * pi * y1)).epsilon(1e-14));
  }
  CHECK(a.mean()[0] == 2.0);
  CHECK(a.max_frequency() == 1);
}

TEST_CASE("periodicity") {
  const auto a = laminate();
  const double y[2] = {0.37, -0.2}, z[2] = {1.37, 2.8};
  CHECK(a.evaluate(y)[0] == doctest::Approx(a.evaluate(z)[0]).epsilon(1e-13));
}

TEST_CASE("power-of-two grids interpolate band-limited data exactly") {
  const auto g = PeriodicField::sampled(FieldKind::scalar, 2, 1, 16, [](std::span<const double> y, std::span<double> o) {
    o[0] = 1 + std::cos(2 * pi * (y[0] + 2 * y[1]));
  });
  for (double t : {0.013, 0.41, 0.77}) {
    const double y[2] = {t, 1 - t};
    CHECK(g.evaluate(y)[0] == doctest::Approx(1 + std::cos(2 * pi * (y[0] + 2 * y[1]))).epsilon(1e-12));
  }
  CHECK(g.mean()[0] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("scalar promotes to an isotropic tensor") {
  const auto t = laminate().as_tensor4(2);
  CHECK(t.kind() == FieldKind::tensor4);
  const double y[2] = {0.25, 0.0};
  const auto v = t.evaluate(y);
  CHECK(v[tensor_index(1, 1, 0, 0, 2, 2)] == doctest::Approx(3.0));
  CHECK(v[tensor_index(0, 1, 0, 0, 2, 2)] == 0.0);
  CHECK(v[tensor_index(0, 0, 0, 1, 2, 2)] == 0.0);
}

TEST_CASE("ellipticity bounds of the laminate") {
  const auto r = check_ellipticity(laminate(), 2048, 7);
  CHECK(r.mu_lower >= 1.0 - 1e-6);
  CHECK(r.mu_upper <= 3.0 + 1e-6);
  CHECK(r.mu_lower < 1.01);
}

TEST_CASE("JSON round trip") {
  const auto a = laminate();
  const auto b = field_from_json(field_to_json(a));
  const double y[2] = {0.31, 0.9};
  CHECK(b.evaluate(y)[0] == a.evaluate(y)[0]);
}

TEST_CASE("grid files resolve relative to the document") {
  const auto dir = std::filesystem::temp_directory_path() / "homolab_field_test";
  std::filesystem::create_directories(dir);
  std::vector<double> s(8 * 8);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = 1.0 + 0.01 * static_cast<double>(i);
  write_binary_grid(dir / "a.bin", s);
  nlohmann::json spec = {{"kind", "scalar"}, {"d", 2}, {"grid", {{"N", 8}, {"samples", "a.bin"}}}};
  const auto f = field_from_json(spec, dir);
  CHECK(f.grid_size() == 8);
  CHECK(f.samples() == s);
  CHECK_THROWS_AS(field_from_json(spec, dir / "missing"), FieldError);
}

TEST_CASE("checkerboard mean") {
  const auto c = checkerboard(64, 1, 4);
  CHECK(c.mean()[0] == doctest::Approx(2.5));
}

TEST_CASE("invalid specifications are rejected") {
  CHECK_THROWS_AS(field_from_json(nlohmann::json{{"kind", "bogus"}, {"d", 2}}), FieldError);
  CHECK_THROWS_AS(PeriodicField::constant(FieldKind::matrix, 2, 2, {1, 0, 0}), FieldError);
}
