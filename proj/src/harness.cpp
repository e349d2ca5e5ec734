#include "homolab/harness.hpp"

#include "homolab/cell_homogenizer.hpp"
#include "homolab/fem.hpp"
#include "homolab/field_io.hpp"
#include "homolab/mesh.hpp"
#include "homolab/surface_io.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

namespace homolab {

using nlohmann::json;
using nlohmann::ordered_json;

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::cell:
      return "cell";
    case ExperimentKind::weyl:
      return "weyl";
    case ExperimentKind::m_eps:
      return "m-eps";
    case ExperimentKind::neumann_aux:
      return "neumann-aux";
    case ExperimentKind::robin_rate:
      return "robin-rate";
    case ExperimentKind::duality:
      return "duality";
  }
  return "?";
}

ExperimentKind experiment_kind_from_string(const std::string& name) {
  std::string s = name;
  std::replace(s.begin(), s.end(), '_', '-');
  for (auto k : {ExperimentKind::cell, ExperimentKind::weyl, ExperimentKind::m_eps, ExperimentKind::neumann_aux,
                 ExperimentKind::robin_rate, ExperimentKind::duality})
    if (to_string(k) == s) return k;
  throw ConfigError("unknown experiment kind '" + name + "'");
}

double Polynomial::value(const Vec2& x) const {
  double s = 0.0;
  for (const auto& t : terms) s += t[0] * std::pow(x.x(), t[1]) * std::pow(x.y(), t[2]);
  return s;
}

Vec2 Polynomial::gradient(const Vec2& x) const {
  Vec2 g = Vec2::Zero();
  for (const auto& t : terms) {
    if (t[1] > 0) g.x() += t[0] * t[1] * std::pow(x.x(), t[1] - 1) * std::pow(x.y(), t[2]);
    if (t[2] > 0) g.y() += t[0] * t[2] * std::pow(x.x(), t[1]) * std::pow(x.y(), t[2] - 1);
  }
  return g;
}

Polynomial Polynomial::from_json(const json& j) {
  Polynomial p;
  if (j.is_number()) {
    p.terms.push_back({j.get<double>(), 0, 0});
    return p;
  }
  if (!j.is_array()) throw ConfigError("polynomial must be a number or a list of [c, i, j] terms");
  for (const auto& t : j) {
    if (!t.is_array() || t.size() != 3) throw ConfigError("polynomial term must be [c, i, j]: " + t.dump());
    const double i = t[1].get<double>(), k = t[2].get<double>();
    if (i < 0 || k < 0 || i != std::floor(i) || k != std::floor(k))
      throw ConfigError("polynomial exponents must be non-negative integers: " + t.dump());
    p.terms.push_back({t[0].get<double>(), i, k});
  }
  return p;
}

// ---------------------------------------------------------------------------

namespace {

double parse_number(std::string s) {
  s.erase(std::remove_if(s.begin(), s.end(), ::isspace), s.end());
  if (s.empty()) throw ConfigError("empty eps entry");
  try {
    const auto caret = s.find('^');
    if (caret != std::string::npos) return std::pow(std::stod(s.substr(0, caret)), std::stod(s.substr(caret + 1)));
    const auto slash = s.find('/');
    if (slash != std::string::npos) return std::stod(s.substr(0, slash)) / std::stod(s.substr(slash + 1));
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw ConfigError("bad number '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    throw ConfigError("bad number '" + s + "'");
  }
}

void validate_eps(const std::vector<double>& eps) {
  if (eps.empty()) throw ConfigError("eps list is empty");
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!(eps[i] > 0) || !std::isfinite(eps[i])) throw ConfigError("eps values must be positive");
    if (i > 0 && !(eps[i] < eps[i - 1])) throw ConfigError("eps list must be strictly decreasing");
  }
}

}  // namespace

std::vector<double> parse_eps_list(const std::string& text) {
  std::vector<double> out;
  const auto dots = text.find("..");
  if (dots != std::string::npos) {
    const std::string a = text.substr(0, dots), b = text.substr(dots + 2);
    auto exponent = [](const std::string& s) {
      const auto c = s.find('^');
      if (c == std::string::npos || s.substr(0, c) != "2") throw ConfigError("range ends must both be 2^k or 1/n");
      return static_cast<int>(parse_number(s.substr(c + 1)));
    };
    auto denominator = [](const std::string& s) {
      if (s.rfind("1/", 0) != 0) throw ConfigError("range ends must both be 2^k or 1/n");
      return static_cast<int>(parse_number(s.substr(2)));
    };
    if (a.find('^') != std::string::npos) {
      const int k0 = exponent(a), k1 = exponent(b);
      const int step = k1 < k0 ? -1 : 1;
      for (int k = k0;; k += step) {
        out.push_back(std::ldexp(1.0, k));
        if (k == k1) break;
      }
    } else {
      const int n0 = denominator(a), n1 = denominator(b);
      if (n0 <= 0 || n1 <= 0) throw ConfigError("denominators must be positive");
      const int step = n1 < n0 ? -1 : 1;
      for (int n = n0;; n += step) {
        out.push_back(1.0 / n);
        if (n == n1) break;
      }
    }
  } else {
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_number(item));
  }
  std::sort(out.begin(), out.end(), std::greater<>());
  validate_eps(out);
  return out;
}

namespace {

json resolve(const json& j, const std::filesystem::path& base) {
  if (!j.is_string()) return j;
  const std::filesystem::path p = base / j.get<std::string>();
  std::ifstream is(p);
  if (!is) throw ConfigError("referenced file does not exist: " + p.string());
  try {
    json out;
    is >> out;
    return out;
  } catch (const json::exception& e) {
    throw ConfigError("invalid JSON in " + p.string() + ": " + e.what());
  }
}

std::filesystem::path parent_of(const json& j, const std::filesystem::path& base) {
  if (!j.is_string()) return base;
  return (base / j.get<std::string>()).parent_path();
}

std::vector<double> tensor_spec(json j, int m) {
  const int n = component_count(FieldKind::tensor4, 2, m);
  if (j.is_string() && j.get<std::string>() == "identity") j = 1.0;
  if (j.is_number()) {
    std::vector<double> t(n, 0.0);
    for (int a = 0; a < m; ++a)
      for (int i = 0; i < 2; ++i) t[tensor_index(a, a, i, i, 2, m)] = j.get<double>();
    return t;
  }
  auto t = j.get<std::vector<double>>();
  if (static_cast<int>(t.size()) != n)
    throw ConfigError("a_hat needs " + std::to_string(n) + " entries, got " + std::to_string(t.size()));
  return t;
}

}  // namespace

ExperimentConfig parse_config(const json& j, const std::filesystem::path& base_dir) {
  ExperimentConfig c;
  try {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    if (j.contains("schema") && j["schema"].get<int>() != 1)
      throw ConfigError("unsupported config schema " + j["schema"].dump());
    c.base_dir = base_dir;
    c.kind = experiment_kind_from_string(j.at("kind").get<std::string>());
    c.name = j.value("name", to_string(c.kind));
    if (j.contains("surface")) {
      c.surface = resolve(j["surface"], base_dir);
      (void)surface_from_json(c.surface);
    }
    if (j.contains("fields"))
      for (const auto& [key, spec] : j["fields"].items())
        c.fields.emplace(key, field_from_json(resolve(spec, base_dir), parent_of(spec, base_dir)));
    if (j.contains("data"))
      for (const auto& [key, spec] : j["data"].items()) {
        std::vector<Polynomial> comps;
        if (spec.is_object() && spec.contains("components"))
          for (const auto& p : spec["components"]) comps.push_back(Polynomial::from_json(p));
        else
          comps.push_back(Polynomial::from_json(spec));
        c.data.emplace(key, std::move(comps));
      }
    if (j.contains("eps")) {
      if (j["eps"].is_string())
        c.eps = parse_eps_list(j["eps"].get<std::string>());
      else {
        for (const auto& e : j["eps"]) c.eps.push_back(e.is_string() ? parse_number(e.get<std::string>()) : e.get<double>());
        validate_eps(c.eps);
      }
    }
    if (j.contains("grid")) c.grids = {j["grid"].get<int>()};
    if (j.contains("grids")) c.grids = j["grids"].get<std::vector<int>>();
    c.discretization = j.value("discretization", c.discretization);
    if (j.contains("mesh")) {
      const auto& mj = j["mesh"];
      c.h = mj.contains("h") ? (mj["h"].is_string() ? parse_number(mj["h"].get<std::string>()) : mj["h"].get<double>())
                             : 0.0;
      c.h_factor = mj.value("h_factor", c.h_factor);
      c.band = mj.value("band", c.band);
      c.coarse_h = mj.value("coarse_h", c.coarse_h);
    }
    c.m = j.value("m", 1);
    if (j.contains("a_hat")) c.a_hat = tensor_spec(j["a_hat"], c.m);
    const int default_drop = j.value("drop_first", 2);
    if (j.contains("slopes"))
      for (const auto& s : j["slopes"]) {
        SlopeSpec sp;
        sp.column = s.at("column").get<std::string>();
        sp.name = s.value("name", sp.column);
        sp.drop_first = s.value("drop_first", default_drop);
        if (s.contains("target")) sp.target = s["target"].get<double>();
        sp.tolerance = s.value("tolerance", sp.tolerance);
        sp.two_sided = s.value("two_sided", false);
        sp.source = s.value("source", "");
        c.slopes.push_back(sp);
      }
    if (j.contains("checks"))
      for (const auto& s : j["checks"]) {
        CheckSpec cs;
        cs.quantity = s.at("quantity").get<std::string>();
        if (s.contains("value")) cs.value = s["value"].get<double>();
        if (s.contains("tol")) cs.tol = s["tol"].get<double>();
        if (s.contains("min")) cs.min = s["min"].get<double>();
        if (s.contains("max")) cs.max = s["max"].get<double>();
        if (s.contains("equals")) cs.equals = s["equals"].get<bool>();
        if (cs.value && !cs.tol) throw ConfigError("check on " + cs.quantity + " has a value but no tol");
        c.checks.push_back(cs);
      }
    c.no_convergence_threshold = j.value("no_convergence_threshold", c.no_convergence_threshold);
    if (j.contains("lattice")) c.lattice = j["lattice"].get<std::vector<std::vector<int>>>();
    c.max_denominator = j.value("max_denominator", c.max_denominator);
    c.seed = j.value("seed", c.seed);
    if (j.contains("exec")) {
      const auto e = j["exec"].get<std::string>();
      if (e != "serial" && e != "parallel") throw ConfigError("exec must be serial or parallel");
      c.exec = e == "serial" ? Exec::serial : Exec::parallel;
    }
    if (j.contains("output")) {
      if (j["output"].contains("json")) c.out_json = base_dir / j["output"]["json"].get<std::string>();
      if (j["output"].contains("csv")) c.out_csv = base_dir / j["output"]["csv"].get<std::string>();
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const FieldError& e) {
    throw ConfigError(std::string("config field: ") + e.what());
  } catch (const GeometryError& e) {
    throw ConfigError(std::string("config surface: ") + e.what());
  }

  auto need_field = [&](const char* key) {
    if (!c.fields.count(key)) throw ConfigError(to_string(c.kind) + " needs field '" + key + "'");
  };
  auto need_surface = [&] {
    if (c.surface.is_null()) throw ConfigError(to_string(c.kind) + " needs a surface");
  };
  auto need_eps = [&] {
    if (c.eps.empty()) throw ConfigError(to_string(c.kind) + " needs an eps list");
  };
  for (int n : c.grids)
    if (n < 4 || (n & (n - 1)) != 0) throw ConfigError("grid sizes must be powers of two");
  switch (c.kind) {
    case ExperimentKind::cell:
      need_field("A");
      break;
    case ExperimentKind::weyl:
      need_surface();
      need_field("f");
      need_eps();
      break;
    case ExperimentKind::m_eps:
      need_surface();
      need_field("b");
      need_eps();
      break;
    case ExperimentKind::neumann_aux:
    case ExperimentKind::duality:
      need_surface();
      need_field("f");
      need_eps();
      if (c.a_hat.empty()) c.a_hat = tensor_spec(1.0, c.m);
      if (c.kind == ExperimentKind::duality && !c.data.count("phi")) throw ConfigError("duality needs data 'phi'");
      break;
    case ExperimentKind::robin_rate:
      need_surface();
      need_field("A");
      need_field("b");
      need_eps();
      if (!c.data.count("g")) throw ConfigError("robin-rate needs data 'g'");
      if (!(c.h > 0)) throw ConfigError("robin-rate needs a fixed mesh size mesh.h");
      if (c.h > c.eps.back() / 8 * (1 + 1e-12))
        throw ConfigError("mesh constraint violated: h = " + std::to_string(c.h) + " > eps_min / 8 = " +
                          std::to_string(c.eps.back() / 8));
      break;
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw ConfigError("invalid JSON in " + path.string() + ": " + e.what());
  }
  return parse_config(j, path.parent_path());
}

// ---------------------------------------------------------------------------

bool RateReport::passed() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  for (const auto& s : slopes)
    if (s.pass && !*s.pass) return false;
  return true;
}

std::optional<double> RateReport::scalar(const std::string& name) const {
  for (const auto& [k, v] : scalars)
    if (k == name) return v;
  return std::nullopt;
}

std::optional<bool> RateReport::flag(const std::string& name) const {
  for (const auto& [k, v] : flags)
    if (k == name) return v;
  return std::nullopt;
}

std::vector<double> RateReport::column(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) return {};
  const auto c = static_cast<std::size_t>(it - columns.begin());
  std::vector<double> out;
  for (const auto& r : rows) out.push_back(r[c]);
  return out;
}

const SlopeRow* RateReport::slope(const std::string& name) const {
  for (const auto& s : slopes)
    if (s.spec.name == name) return &s;
  return nullptr;
}

namespace {

ordered_json number(double v) {
  if (std::isfinite(v)) return v;
  return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
}

}  // namespace

ordered_json RateReport::to_json() const {
  ordered_json j;
  j["schema"] = "homolab-report";
  j["schema_version"] = kReportSchemaVersion;
  j["kind"] = kind;
  j["name"] = name;
  j["passed"] = passed();
  j["columns"] = columns;
  j["rows"] = ordered_json::array();
  for (const auto& r : rows) {
    ordered_json row = ordered_json::array();
    for (double v : r) row.push_back(number(v));
    j["rows"].push_back(row);
  }
  j["scalars"] = ordered_json::object();
  for (const auto& [k, v] : scalars) j["scalars"][k] = number(v);
  j["flags"] = ordered_json::object();
  for (const auto& [k, v] : flags) j["flags"][k] = v;
  j["slopes"] = ordered_json::array();
  for (const auto& s : slopes) {
    ordered_json o;
    o["name"] = s.spec.name;
    o["column"] = s.spec.column;
    o["drop_first"] = s.fit.drop_first;
    o["used"] = s.fit.used;
    o["slope"] = number(s.fit.slope);
    o["intercept"] = number(s.fit.intercept);
    o["max_residual"] = number(s.fit.max_residual);
    o["exact"] = s.fit.exact;
    if (s.spec.target) {
      o["theory_target"] = {{"exponent", *s.spec.target},
                            {"tolerance", s.spec.tolerance},
                            {"comparison", s.spec.two_sided ? "two-sided" : "one-sided"},
                            {"source", s.spec.source}};
    }
    if (s.pass) o["pass"] = *s.pass;
    j["slopes"].push_back(o);
  }
  j["checks"] = ordered_json::array();
  for (const auto& c : checks)
    j["checks"].push_back({{"rule", c.description}, {"observed", number(c.observed)}, {"pass", c.pass}});
  j["budget"] = budget;
  j["notes"] = notes;
  return j;
}

std::string RateReport::to_csv() const {
  std::ostringstream os;
  os << std::setprecision(17);
  if (rows.empty()) {
    os << "quantity,value\n";
    for (const auto& [k, v] : scalars) os << k << "," << v << "\n";
    return os.str();
  }
  for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
  os << "\n";
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
    os << "\n";
  }
  return os.str();
}

TheoryVerdict compare_to_theory(const SlopeFit& fit, double target, double tolerance) {
  TheoryVerdict v;
  v.slope = fit.slope;
  v.target = target;
  v.tolerance = tolerance;
  v.exact = fit.exact;
  std::ostringstream os;
  if (fit.exact) {
    v.pass = true;
    os << "exact decay (all defects below the zero floor)";
  } else {
    v.pass = fit.slope >= target - tolerance;
    os << "slope " << fit.slope << (v.pass ? " >= " : " < ") << target << " - " << tolerance;
  }
  v.message = os.str();
  return v;
}

TheoryVerdict compare_to_theory(const RateReport& report, const std::string& slope_name, double target,
                                double tolerance) {
  const SlopeRow* s = report.slope(slope_name);
  if (!s) throw std::invalid_argument("report has no fitted slope '" + slope_name + "'");
  return compare_to_theory(s->fit, target, tolerance);
}

// ---------------------------------------------------------------------------

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

template <class Fn>
auto stage(double eps, const char* name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const NumericalError&) {
    throw;
  } catch (const std::exception& e) {
    std::ostringstream os;
    os << "eps = " << eps << ", stage " << name << ": " << e.what();
    throw NumericalError(os.str(), eps, name);
  }
}

// Runs fn(i) for every eps index as an independent job; rethrows the first
// failure in eps order.
template <class Fn>
void sweep(std::size_t count, Fn&& fn) {
  std::vector<std::exception_ptr> errors(count);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(count); ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::string source_label(const SlopeSpec& s, int d) {
  if (!s.source.empty()) return s.source;
  return d >= 3 ? "theory(d>=3)" : "oracle(2D)";
}

void apply_slopes(const ExperimentConfig& c, RateReport& r, int d) {
  for (SlopeSpec spec : c.slopes) {
    const auto y = r.column(spec.column);
    const auto x = r.column("eps");
    if (y.empty()) throw ConfigError("slope column '" + spec.column + "' is not produced by " + r.kind);
    spec.source = source_label(spec, d);
    SlopeRow row;
    row.spec = spec;
    std::vector<double> ay(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) ay[i] = std::fabs(y[i]);
    try {
      row.fit = fit_decay_slope(x, ay, spec.drop_first);
    } catch (const FitError& e) {
      throw ConfigError("slope '" + spec.name + "': " + e.what());
    }
    if (spec.target) {
      if (spec.two_sided && !row.fit.exact)
        row.pass = std::fabs(row.fit.slope - *spec.target) <= spec.tolerance;
      else
        row.pass = compare_to_theory(row.fit, *spec.target, spec.tolerance).pass;
    }
    r.slopes.push_back(row);
  }
}

void apply_checks(const ExperimentConfig& c, RateReport& r) {
  for (const auto& cs : c.checks) {
    auto judge = [&](double v) {
      bool ok = std::isfinite(v) || (cs.min && !cs.max);
      if (cs.value) ok = ok && std::fabs(v - *cs.value) <= *cs.tol;
      if (cs.min) ok = ok && v >= *cs.min;
      if (cs.max) ok = ok && v <= *cs.max;
      return ok;
    };
    std::ostringstream d;
    d << cs.quantity;
    if (cs.value) d << " = " << fmt(*cs.value) << " +- " << fmt(*cs.tol);
    if (cs.min) d << " >= " << fmt(*cs.min);
    if (cs.max) d << " <= " << fmt(*cs.max);
    if (cs.equals) d << " is " << (*cs.equals ? "true" : "false");
    CheckRow row;
    row.description = d.str();
    if (cs.equals) {
      const auto f = r.flag(cs.quantity);
      if (!f) throw ConfigError("check references unknown flag '" + cs.quantity + "'");
      row.observed = *f ? 1.0 : 0.0;
      row.pass = *f == *cs.equals;
    } else if (cs.quantity.rfind("slope:", 0) == 0) {
      const SlopeRow* s = r.slope(cs.quantity.substr(6));
      if (!s) throw ConfigError("check references unknown slope '" + cs.quantity + "'");
      row.observed = s->fit.slope;
      row.pass = s->fit.exact || judge(s->fit.slope);
    } else if (const auto v = r.scalar(cs.quantity)) {
      row.observed = *v;
      row.pass = judge(*v);
    } else {
      const auto col = r.column(cs.quantity);
      if (col.empty()) throw ConfigError("check references unknown quantity '" + cs.quantity + "'");
      row.description += " (every row)";
      row.pass = true;
      // observed: the row farthest from passing
      double worst = col.front(), worst_excess = -1e300;
      for (double v : col) {
        double excess = 0.0;
        if (cs.value) excess = std::fabs(v - *cs.value) - *cs.tol;
        if (cs.min) excess = std::max(excess, *cs.min - v);
        if (cs.max) excess = std::max(excess, v - *cs.max);
        if (excess > worst_excess) {
          worst_excess = excess;
          worst = v;
        }
        row.pass = row.pass && judge(v);
      }
      row.observed = worst;
    }
    r.checks.push_back(row);
  }
}

void add_tensor_scalars(RateReport& r, const HomogenizedTensor& t) {
  for (int a = 0; a < t.m; ++a)
    for (int b = 0; b < t.m; ++b)
      for (int i = 0; i < t.d; ++i)
        for (int j = 0; j < t.d; ++j)
          r.scalars.emplace_back("a_hat(" + std::to_string(a) + "," + std::to_string(b) + "," + std::to_string(i) +
                                     "," + std::to_string(j) + ")",
                                 t(a, b, i, j));
  for (int a = 0; a < t.m && !t.b_bar.empty(); ++a)
    for (int b = 0; b < t.m; ++b)
      r.scalars.emplace_back("b_bar(" + std::to_string(a) + "," + std::to_string(b) + ")", t.b_bar[a * t.m + b]);
}

HomogenizedTensor constant_tensor(const ExperimentConfig& c) {
  HomogenizedTensor t;
  t.d = 2;
  t.m = c.m;
  t.a_hat = c.a_hat;
  return t;
}

FieldFunction polynomial_field(const std::vector<Polynomial>& comps) {
  return [comps](const Vec2& x, std::span<double> v, std::span<double> g) {
    for (std::size_t a = 0; a < comps.size(); ++a) {
      v[a] = comps[a].value(x);
      const Vec2 gr = comps[a].gradient(x);
      g[2 * a] = gr.x();
      g[2 * a + 1] = gr.y();
    }
  };
}

Coefficient polynomial_coefficient(const std::vector<Polynomial>& comps) {
  return Coefficient::function(FieldKind::vector, static_cast<int>(comps.size()),
                               [comps](const Vec2& x, std::span<double> o) {
                                 for (std::size_t a = 0; a < comps.size(); ++a) o[a] = comps[a].value(x);
                               });
}

std::shared_ptr<const TriMesh> make_mesh(const SurfaceChart& s, double h, double band, double coarse_h) {
  MeshOptions mo;
  if (band > 0 && coarse_h > h) {
    mo.boundary_band = band;
    mo.coarse_h = coarse_h;
  }
  return std::make_shared<const TriMesh>(mesh_domain(s, h, mo));
}

double mesh_size(const ExperimentConfig& c, double eps) { return c.h > 0 ? c.h : c.h_factor * eps; }

// --- kinds -----------------------------------------------------------------

RateReport run_cell(const ExperimentConfig& c) {
  RateReport r;
  const PeriodicField& a = c.fields.at("A");
  CellOptions opt;
  opt.exec = c.exec;
  if (c.discretization == "fd" || c.discretization == "finite_difference")
    opt.force_finite_difference = true;
  else if (c.discretization != "spectral")
    throw ConfigError("discretization must be spectral or fd");
  r.columns = {"grid"};
  const int m = a.system_size(), d = a.dimension();
  for (int al = 0; al < m; ++al)
    for (int be = 0; be < m; ++be)
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
          r.columns.push_back("a_hat(" + std::to_string(al) + "," + std::to_string(be) + "," + std::to_string(i) + "," +
                              std::to_string(j) + ")");
  r.columns.insert(r.columns.end(), {"cell_residual", "max_abs_mean_chi"});
  HomogenizedTensor last;
  double residual = 0, mean_chi = 0, solver_res = 0;
  int iters = 0;
  for (int n : c.grids) {
    const CorrectorSet chi = stage(0.0, "cell", [&] { return solve_correctors(a, n, opt); });
    HomogenizedTensor t = homogenize(a, chi);
    residual = cell_residual(a, chi);
    mean_chi = 0;
    for (const auto& v : chi.chi)
      mean_chi = std::max(mean_chi, std::fabs(std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size())));
    iters = *std::max_element(chi.iterations.begin(), chi.iterations.end());
    solver_res = *std::max_element(chi.residuals.begin(), chi.residuals.end());
    std::vector<double> row{static_cast<double>(n)};
    row.insert(row.end(), t.a_hat.begin(), t.a_hat.end());
    row.insert(row.end(), {residual, mean_chi});
    r.rows.push_back(row);
    last = std::move(t);
  }
  if (c.fields.count("b")) attach_effective_robin(last, c.fields.at("b"));
  add_tensor_scalars(r, last);
  r.scalars.emplace_back("cell_residual", residual);
  r.scalars.emplace_back("max_abs_mean_chi", mean_chi);
  r.scalars.emplace_back("min_eigenvalue", last.min_eigenvalue());
  r.scalars.emplace_back("max_asymmetry", last.max_asymmetry());
  r.scalars.emplace_back("max_iterations", iters);
  r.scalars.emplace_back("max_solver_residual", solver_res);
  const auto ell = check_ellipticity(a, 4096, c.seed);
  r.scalars.emplace_back("mu_lower", ell.mu_lower);
  r.scalars.emplace_back("mu_upper", ell.mu_upper);
  r.budget["grid"] = c.grids.back();
  return r;
}

void add_non_resonance(const ExperimentConfig& c, const SurfaceChart& s, RateReport& r) {
  try {
    const auto v = check_non_resonance(s, c.lattice, c.max_denominator);
    r.flags.emplace_back("non_resonant", v.satisfies);
    r.scalars.emplace_back("rational_measure", v.rational_measure);
    for (const auto& o : v.offending) {
      std::ostringstream os;
      os << "piece " << o.piece << " has rational normal direction k = (";
      for (std::size_t i = 0; i < o.k.size(); ++i) os << (i ? ", " : "") << o.k[i];
      os << ")";
      r.notes.push_back(os.str());
    }
  } catch (const NonResonanceError& e) {
    r.notes.push_back(std::string("non-resonance: ") + e.what());
  }
}

RateReport run_weyl(const ExperimentConfig& c) {
  RateReport r;
  const SurfaceChart s = surface_from_json(c.surface);
  OscillatoryOptions opt;
  opt.exec = c.exec;
  SurfaceWeight phi = unit_weight;
  if (c.data.count("phi")) {
    const Polynomial p = c.data.at("phi").front();
    phi = [p](const QuadratureNode& q) { return p.value(Vec2(q.x.x(), q.x.y())); };
  }
  const auto series = stage(c.eps.front(), "oscillatory quadrature",
                            [&] { return weyl_defect_series(s, c.fields.at("f"), phi, c.eps, opt); });
  r.columns = {"eps", "value_re", "value_im", "defect", "est_quad_err"};
  double min_defect = 1e300;
  for (const auto& e : series.entries) {
    r.rows.push_back({e.eps, e.value.real(), e.value.imag(), e.defect, e.est_error});
    min_defect = std::min(min_defect, e.defect);
  }
  r.scalars.emplace_back("limit_re", series.limit.real());
  r.scalars.emplace_back("limit_im", series.limit.imag());
  r.scalars.emplace_back("min_defect", min_defect);
  r.flags.emplace_back("no_convergence", min_defect >= c.no_convergence_threshold);
  add_non_resonance(c, s, r);
  r.budget["nodes_per_wavelength"] = opt.nodes_per_wavelength;
  return r;
}

RateReport run_m_eps(const ExperimentConfig& c) {
  RateReport r;
  const SurfaceChart s = surface_from_json(c.surface);
  const PeriodicField& b = c.fields.at("b");
  OscillatoryOptions opt;
  opt.exec = c.exec;
  std::vector<MEpsilon> out(c.eps.size());
  sweep(c.eps.size(), [&](std::size_t i) {
    out[i] = stage(c.eps[i], "m_epsilon", [&] { return m_epsilon(s, b, c.eps[i], opt); });
  });
  r.columns = {"eps", "m_eps", "abs_m_eps", "est_err"};
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double v = out[i].value.size() == 1 ? out[i].value(0, 0) : out[i].value.norm();
    r.rows.push_back({c.eps[i], v, out[i].value.norm(), out[i].est_error});
  }
  return r;
}

RateReport run_neumann_aux(const ExperimentConfig& c) {
  RateReport r;
  const SurfaceChart s = surface_from_json(c.surface);
  const HomogenizedTensor a = constant_tensor(c);
  const PeriodicField& f = c.fields.at("f");
  SolveOptions so;
  so.exec = c.exec;
  r.columns = {"eps", "h", "vertices", "linf", "grad_l1", "l2", "boundary_mean", "compat", "m_eps", "iterations"};
  r.rows.assign(c.eps.size(), {});
  sweep(c.eps.size(), [&](std::size_t i) {
    const double eps = c.eps[i];
    const double h = mesh_size(c, eps);
    const auto mesh = stage(eps, "mesh", [&] { return make_mesh(s, h, c.band * eps, c.coarse_h); });
    const auto res = stage(eps, "neumann solve", [&] { return solve_neumann_aux(mesh, s, a, f, eps, so); });
    NormOptions l1;
    l1.p = 1.0;
    const auto bm = boundary_integral(res.v, s);
    double bmax = 0;
    for (double v : bm) bmax = std::max(bmax, std::fabs(v));
    double mm = 0;
    for (double v : res.m_eps) mm = std::max(mm, std::fabs(v));
    r.rows[i] = {eps,
                 h,
                 static_cast<double>(mesh->vertex_count()),
                 norm(res.v, Norm::Linf),
                 norm(res.v, Norm::W1p_semi, l1),
                 norm(res.v, Norm::L2),
                 bmax,
                 res.compatibility,
                 mm,
                 static_cast<double>(res.solve.iterations)};
  });
  double worst_bm = 0, worst_compat = 0;
  for (const auto& row : r.rows) {
    worst_bm = std::max(worst_bm, row[6]);
    worst_compat = std::max(worst_compat, row[7]);
  }
  r.scalars.emplace_back("max_boundary_mean", worst_bm);
  r.scalars.emplace_back("max_compat", worst_compat);
  r.budget["h_over_eps"] = c.h > 0 ? c.h / c.eps.back() : c.h_factor;
  r.budget["band_over_eps"] = c.band;
  r.budget["coarse_h"] = c.coarse_h;
  return r;
}

RateReport run_duality(const ExperimentConfig& c) {
  RateReport r;
  const SurfaceChart s = surface_from_json(c.surface);
  const HomogenizedTensor a = constant_tensor(c);
  const PeriodicField& f = c.fields.at("f");
  const auto& phis = c.data.at("phi");
  if (static_cast<int>(phis.size()) != c.m) throw ConfigError("phi needs one polynomial per component");
  const FieldFunction phi = polynomial_field(phis);
  SolveOptions so;
  so.exec = c.exec;
  r.columns = {"eps", "h", "lhs", "rhs", "gap", "rel_gap", "volume_term", "boundary_term"};
  r.rows.assign(c.eps.size(), {});
  sweep(c.eps.size(), [&](std::size_t i) {
    const double eps = c.eps[i];
    const double h = mesh_size(c, eps);
    const auto mesh = stage(eps, "mesh", [&] { return make_mesh(s, h, c.band * eps, c.coarse_h); });
    const auto d = stage(eps, "duality", [&] { return duality_check(mesh, s, a, f, phi, c.m, eps, so); });
    r.rows[i] = {eps, h, d.lhs, d.rhs, d.gap, d.gap / (std::fabs(d.lhs) + 1.0), d.volume_term, d.boundary_term};
  });
  double worst = 0;
  for (const auto& row : r.rows) worst = std::max(worst, row[5]);
  r.scalars.emplace_back("max_rel_gap", worst);
  return r;
}

RateReport run_robin(const ExperimentConfig& c) {
  RateReport r;
  const SurfaceChart s = surface_from_json(c.surface);
  const PeriodicField& a = c.fields.at("A");
  const PeriodicField& b = c.fields.at("b");
  const int n = c.grids.back();
  CellOptions copt;
  copt.exec = c.exec;
  const CorrectorSet chi = stage(c.eps.front(), "cell", [&] { return solve_correctors(a, n, copt); });
  HomogenizedTensor t = homogenize(a, chi);
  attach_effective_robin(t, b);
  const int m = t.m;
  const auto mesh = stage(c.eps.front(), "mesh", [&] { return make_mesh(s, c.h, 0.0, 0.0); });
  const Coefficient g = polynomial_coefficient(c.data.at("g"));
  std::optional<Coefficient> f;
  if (c.data.count("F")) f = polynomial_coefficient(c.data.at("F"));
  if (static_cast<int>(c.data.at("g").size()) != m) throw ConfigError("g needs one polynomial per component");

  SolveOptions so;
  so.exec = c.exec;
  const Coefficient b_bar = Coefficient::constant(FieldKind::matrix, m, t.b_bar);
  const auto sys0 = stage(c.eps.front(), "assemble u0", [&] { return assemble_robin(mesh, s, Coefficient::tensor(t), b_bar, f, g); });
  const auto u0 = stage(c.eps.front(), "solve u0", [&] { return solve(sys0, so); });
  add_tensor_scalars(r, t);

  r.columns = {"eps", "l2_err", "h1_err", "w_h1", "w_l2", "linf_err", "iterations", "residual"};
  r.rows.assign(c.eps.size(), {});
  sweep(c.eps.size(), [&](std::size_t i) {
    const double eps = c.eps[i];
    const auto sys = stage(eps, "assemble", [&] {
      return assemble_robin(mesh, s, Coefficient::oscillating(a, eps), Coefficient::oscillating(b, eps), f, g);
    });
    const auto ue = stage(eps, "solve", [&] { return solve(sys, so); });
    const double res = variational_residual(sys, ue.field);
    const FieldOnMesh diff = ue.field.minus(u0.field);
    const FieldOnMesh w = stage(eps, "expansion", [&] { return first_order_expansion(ue.field, u0.field, chi, eps, s); });
    r.rows[i] = {eps,
                 norm(diff, Norm::L2),
                 norm(diff, Norm::H1),
                 norm(w, Norm::H1),
                 norm(w, Norm::L2),
                 norm(diff, Norm::Linf),
                 static_cast<double>(ue.iterations),
                 res};
  });
  bool decreasing = true, improves = true;
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    if (i > 0) decreasing = decreasing && r.rows[i][1] < r.rows[i - 1][1];
    improves = improves && r.rows[i][3] <= r.rows[i][2];
  }
  r.flags.emplace_back("strictly_decreasing", decreasing);
  r.flags.emplace_back("corrector_improves", improves);
  r.scalars.emplace_back("u0_iterations", u0.iterations);
  r.budget["h"] = c.h;
  r.budget["eps_min"] = c.eps.back();
  r.budget["h_over_eps_min"] = c.h / c.eps.back();
  r.budget["vertices"] = mesh->vertex_count();
  r.budget["corrector_grid"] = n;
  return r;
}

}  // namespace

RateReport run(const ExperimentConfig& config) {
  RateReport r;
  int d = 2;
  switch (config.kind) {
    case ExperimentKind::cell:
      r = run_cell(config);
      d = config.fields.at("A").dimension();
      break;
    case ExperimentKind::weyl:
      r = run_weyl(config);
      break;
    case ExperimentKind::m_eps:
      r = run_m_eps(config);
      break;
    case ExperimentKind::neumann_aux:
      r = run_neumann_aux(config);
      break;
    case ExperimentKind::robin_rate:
      r = run_robin(config);
      break;
    case ExperimentKind::duality:
      r = run_duality(config);
      break;
  }
  if (!config.surface.is_null()) d = surface_from_json(config.surface).dimension();
  r.kind = to_string(config.kind);
  r.name = config.name;
  apply_slopes(config, r, d);
  apply_checks(config, r);
  return r;
}

void write_report(const RateReport& report, const std::optional<std::filesystem::path>& json_path,
                  const std::optional<std::filesystem::path>& csv_path) {
  auto write = [](const std::filesystem::path& p, const std::string& text) {
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream os(p);
    if (!os) throw ConfigError("cannot write " + p.string());
    os << text;
  };
  if (json_path) write(*json_path, report.to_json().dump(2) + "\n");
  if (csv_path) write(*csv_path, report.to_csv());
}

}  // namespace homolab
