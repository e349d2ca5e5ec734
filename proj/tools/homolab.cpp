#include "homolab/field_io.hpp"
#include "homolab/harness.hpp"
#include "homolab/surface_io.hpp"

#include <CLI11.hpp>

#include <cstdio>

namespace {

using namespace homolab;

enum Exit { pass = 0, acceptance_failure = 1, config_error = 2, numerical_failure = 3 };

struct Args {
  std::string config;
  std::string out;
  std::string csv;
  std::string field;
  std::string b_field;
  std::string surface;
  std::string eps;
  int grid = 0;
  bool serial = false;
};

ExperimentConfig shortcut_config(ExperimentKind kind, const Args& a) {
  nlohmann::json j;
  j["kind"] = to_string(kind);
  auto rel = [&](const std::string& p) { return std::filesystem::absolute(p).string(); };
  if (!a.field.empty()) {
    const char* key = kind == ExperimentKind::cell ? "A" : (kind == ExperimentKind::m_eps ? "b" : "f");
    j["fields"][key] = rel(a.field);
  }
  if (!a.b_field.empty()) j["fields"]["b"] = rel(a.b_field);
  if (!a.surface.empty()) j["surface"] = rel(a.surface);
  if (!a.eps.empty()) j["eps"] = a.eps;
  if (a.grid > 0) j["grid"] = a.grid;
  j["drop_first"] = 0;
  return parse_config(j, "/");
}

void print_summary(const RateReport& r) {
  std::printf("%s '%s': %zu rows\n", r.kind.c_str(), r.name.c_str(), r.rows.size());
  for (const auto& s : r.slopes) {
    std::printf("  slope %-12s %.4f (drop_first %d, %d points)%s", s.spec.name.c_str(), s.fit.slope, s.fit.drop_first,
                s.fit.used, s.fit.exact ? " exact" : "");
    if (s.pass) std::printf("  target %.3f +- %.3f [%s] %s", *s.spec.target, s.spec.tolerance, s.spec.source.c_str(),
                            *s.pass ? "PASS" : "FAIL");
    std::printf("\n");
  }
  for (const auto& c : r.checks)
    std::printf("  check %s: observed %.6g %s\n", c.description.c_str(), c.observed, c.pass ? "PASS" : "FAIL");
  std::printf("%s\n", r.passed() ? "PASS" : "FAIL");
}

int execute(ExperimentKind kind, const Args& a) {
  try {
    ExperimentConfig cfg = a.config.empty() ? shortcut_config(kind, a) : load_config(a.config);
    if (cfg.kind != kind)
      throw ConfigError("config kind '" + to_string(cfg.kind) + "' does not match subcommand '" + to_string(kind) + "'");
    if (a.serial) cfg.exec = Exec::serial;
    std::optional<std::filesystem::path> json_out = cfg.out_json, csv_out = cfg.out_csv;
    if (!a.out.empty()) {
      if (std::filesystem::path(a.out).extension() == ".csv")
        csv_out = a.out;
      else
        json_out = a.out;
    }
    if (!a.csv.empty()) csv_out = a.csv;
    if (!json_out && !csv_out) throw ConfigError("no output path: pass --out");
    const RateReport report = run(cfg);
    write_report(report, json_out, csv_out);
    print_summary(report);
    return report.passed() ? pass : acceptance_failure;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return config_error;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return numerical_failure;
  } catch (const FieldError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return config_error;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return numerical_failure;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"homolab: periodic homogenization with oscillating Robin data"};
  app.require_subcommand(1);
  Args args;
  ExperimentKind chosen = ExperimentKind::cell;

  const std::vector<std::pair<ExperimentKind, std::string>> kinds = {
      {ExperimentKind::cell, "effective tensor and correctors"},
      {ExperimentKind::weyl, "surface equidistribution defect series"},
      {ExperimentKind::m_eps, "boundary constant M_eps sweep"},
      {ExperimentKind::neumann_aux, "auxiliary Neumann problem sweep"},
      {ExperimentKind::robin_rate, "oscillating Robin convergence rates"},
      {ExperimentKind::duality, "duality identity check"}};
  for (const auto& [kind, help] : kinds) {
    auto* sub = app.add_subcommand(to_string(kind), help);
    sub->add_option("--config", args.config, "experiment config (JSON)")->check(CLI::ExistingFile);
    sub->add_option("--out", args.out, "report path (.json, or .csv for the row table)");
    sub->add_option("--csv", args.csv, "additional CSV path");
    sub->add_flag("--serial", args.serial, "serial kernels");
    if (kind == ExperimentKind::cell) {
      sub->add_option("--field", args.field, "coefficient A (field JSON)")->check(CLI::ExistingFile);
      sub->add_option("--b", args.b_field, "boundary coefficient b (field JSON)")->check(CLI::ExistingFile);
      sub->add_option("--grid", args.grid, "cell grid size N");
    }
    if (kind == ExperimentKind::weyl || kind == ExperimentKind::m_eps) {
      sub->add_option("--surface", args.surface, "surface JSON")->check(CLI::ExistingFile);
      sub->add_option("--field", args.field, "periodic field JSON")->check(CLI::ExistingFile);
      sub->add_option("--eps", args.eps, "eps list, e.g. 2^-3..2^-9");
    }
    sub->callback([&chosen, kind = kind] { chosen = kind; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : config_error;
  }
  return execute(chosen, args);
}
