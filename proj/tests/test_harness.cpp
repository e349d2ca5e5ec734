#include "homolab/harness.hpp"

#include <doctest.h>

#include <cmath>

using namespace homolab;
using nlohmann::json;

namespace {
json circle() { return {{"type", "circle"}, {"radius", 1}}; }
json cos_mode() { return {{"kind", "scalar"}, {"d", 2}, {"modes", {{{"k", {1, 0}}, {"re", 0.5}}}}}; }
json laminate() {
  return {{"kind", "scalar"}, {"d", 2}, {"modes", {{{"k", {0, 0}}, {"re", 2}}, {{"k", {1, 0}}, {"re", 0}, {"im", -0.5}}}}};
}
}  // namespace

TEST_CASE("eps lists") {
  const auto a = parse_eps_list("2^-3..2^-9");
  REQUIRE(a.size() == 7);
  CHECK(a.front() == 0.125);
  CHECK(a.back() == std::ldexp(1.0, -9));
  const auto b = parse_eps_list("1/8..1/11");
  REQUIRE(b.size() == 4);
  CHECK(b[3] == doctest::Approx(1.0 / 11));
  const auto c = parse_eps_list("0.5, 1/4, 2^-4");
  CHECK(c == std::vector<double>{0.5, 0.25, 0.0625});
  CHECK(parse_eps_list("1/4, 1/2") == std::vector<double>{0.5, 0.25});
  CHECK_THROWS_AS(parse_eps_list("1/4, 0.25"), ConfigError);
  CHECK_THROWS_AS(parse_eps_list("abc"), ConfigError);
  CHECK_THROWS_AS(parse_eps_list("-0.1"), ConfigError);
}

TEST_CASE("compare_to_theory is one-sided") {
  SlopeFit f;
  f.slope = 0.45;
  CHECK(compare_to_theory(f, 0.5, 0.1).pass);
  f.slope = 1.3;
  CHECK(compare_to_theory(f, 0.5, 0.1).pass);
  f.slope = 0.35;
  CHECK_FALSE(compare_to_theory(f, 0.5, 0.1).pass);
  f.exact = true;
  CHECK(compare_to_theory(f, 0.5, 0.1).pass);
}

TEST_CASE("polynomials") {
  const auto p = Polynomial::from_json(json{{1, 0, 0}, {2, 1, 0}, {0.5, 0, 2}});
  const Vec2 x(0.5, 2.0);
  CHECK(p.value(x) == doctest::Approx(1 + 1 + 2));
  CHECK(p.gradient(x).x() == doctest::Approx(2));
  CHECK(p.gradient(x).y() == doctest::Approx(2));
  CHECK(Polynomial::from_json(json(3.0)).value(x) == 3.0);
}

TEST_CASE("configuration errors") {
  CHECK_THROWS_AS(parse_config(json{{"kind", "weyl"}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"kind", "nonsense"}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"kind", "cell"}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"kind", "cell"}, {"fields", {{"A", laminate()}}}, {"grid", 48}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"kind", "weyl"},
                                    {"surface", circle()},
                                    {"fields", {{"f", cos_mode()}}},
                                    {"eps", {0.1, 0.2}}}),
                  ConfigError);
  // The mesh must resolve the smallest eps.
  CHECK_THROWS_AS(parse_config(json{{"kind", "robin-rate"},
                                    {"surface", circle()},
                                    {"fields", {{"A", laminate()}, {"b", laminate()}}},
                                    {"data", {{"g", 1.0}}},
                                    {"eps", "2^-2..2^-4"},
                                    {"mesh", {{"h", 0.01}}}}),
                  ConfigError);
  CHECK_NOTHROW(parse_config(json{{"kind", "robin-rate"},
                                  {"surface", circle()},
                                  {"fields", {{"A", laminate()}, {"b", laminate()}}},
                                  {"data", {{"g", 1.0}}},
                                  {"eps", "2^-2..2^-4"},
                                  {"mesh", {{"h", "1/128"}}}}));
  CHECK_THROWS_AS(parse_config(json{{"kind", "cell"}, {"fields", {{"A", {{"kind", "scalar"}}}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"kind", "duality"},
                                    {"surface", circle()},
                                    {"fields", {{"f", cos_mode()}}},
                                    {"eps", "2^-3..2^-4"}}),
                  ConfigError);
}

TEST_CASE("weyl experiment on the circle") {
  const auto cfg = parse_config(json{{"kind", "weyl"},
                                     {"surface", circle()},
                                     {"fields", {{"f", cos_mode()}}},
                                     {"eps", "2^-3..2^-9"},
                                     {"slopes", {{{"name", "d"}, {"column", "defect"}, {"target", 0.5}}}},
                                     {"checks", {{{"quantity", "slope:d"}, {"min", 0.4}}}}});
  const auto r = run(cfg);
  CHECK(r.columns == std::vector<std::string>{"eps", "value_re", "value_im", "defect", "est_quad_err"});
  REQUIRE(r.rows.size() == 7);
  const double pi = std::acos(-1.0);
  for (const auto& row : r.rows)
    CHECK(std::fabs(row[3] - 2 * pi * std::fabs(std::cyl_bessel_j(0.0, 2 * pi / row[0]))) <= 1e-10);
  REQUIRE(r.slope("d"));
  CHECK(r.slope("d")->fit.slope == doctest::Approx(0.5).epsilon(0.05));
  CHECK(r.flag("non_resonant").value());
  CHECK(r.passed());
}

TEST_CASE("square: no convergence is flagged") {
  const auto cfg = parse_config(json{{"kind", "weyl"},
                                     {"surface", {{"type", "square"}, {"side", "1"}}},
                                     {"fields", {{"f", cos_mode()}}},
                                     {"eps", "2^-3..2^-6"}});
  const auto r = run(cfg);
  CHECK(r.flag("no_convergence").value());
  CHECK_FALSE(r.flag("non_resonant").value());
  CHECK(r.scalar("rational_measure").value() == doctest::Approx(4.0));
}

TEST_CASE("failing checks fail the report") {
  const auto cfg = parse_config(json{{"kind", "cell"},
                                     {"fields", {{"A", laminate()}}},
                                     {"grid", 32},
                                     {"checks", {{{"quantity", "a_hat(0,0,0,0)"}, {"value", 1.0}, {"tol", 1e-3}}}}});
  const auto r = run(cfg);
  CHECK_FALSE(r.passed());
  CHECK(r.scalar("a_hat(0,0,0,0)").value() == doctest::Approx(std::sqrt(3.0)).epsilon(1e-6));
  CHECK_THROWS_AS(run(parse_config(json{{"kind", "cell"},
                                        {"fields", {{"A", laminate()}}},
                                        {"grid", 32},
                                        {"checks", {{{"quantity", "nope"}, {"max", 1.0}}}}})),
                  ConfigError);
}

TEST_CASE("reports are deterministic") {
  const auto cfg = parse_config(json{{"kind", "m-eps"},
                                     {"surface", circle()},
                                     {"fields", {{"b", laminate()}}},
                                     {"eps", "2^-3..2^-7"}});
  const auto a = run(cfg).to_json().dump(), b = run(cfg).to_json().dump();
  CHECK(a == b);
  const auto j = json::parse(a);
  CHECK(j["schema"] == "homolab-report");
  CHECK(j["schema_version"] == kReportSchemaVersion);
}

TEST_CASE("csv output") {
  const auto cfg = parse_config(json{{"kind", "cell"}, {"fields", {{"A", laminate()}}}, {"grid", 16}});
  const auto csv = run(cfg).to_csv();
  CHECK(csv.rfind("grid,", 0) == 0);
}
