#pragma once

#include "homolab/kernels.hpp"
#include "homolab/oscillatory.hpp"
#include "homolab/periodic_field.hpp"
#include "homolab/surface.hpp"

#include <json.hpp>

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace homolab {

inline constexpr int kReportSchemaVersion = 1;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A sub-operation failed; the message names the eps and stage.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, double eps, std::string stage)
      : std::runtime_error(what), eps(eps), stage(std::move(stage)) {}
  double eps;
  std::string stage;
};

enum class ExperimentKind { cell, weyl, m_eps, neumann_aux, robin_rate, duality };

std::string to_string(ExperimentKind kind);
/// Accepts both "m-eps" and "m_eps" spellings.
ExperimentKind experiment_kind_from_string(const std::string& name);

/// Sum of c x^i y^j terms.
struct Polynomial {
  std::vector<std::array<double, 3>> terms;  // c, i, j

  double value(const Vec2& x) const;
  Vec2 gradient(const Vec2& x) const;
  static Polynomial from_json(const nlohmann::json& j);
};

/// One acceptance rule. `quantity` names a scalar, a flag, a column (checked
/// on every row) or "slope:<name>".
struct CheckSpec {
  std::string quantity;
  std::optional<double> value;
  std::optional<double> tol;
  std::optional<double> min;
  std::optional<double> max;
  std::optional<bool> equals;
};

struct SlopeSpec {
  std::string name;
  std::string column;
  int drop_first = 2;
  std::optional<double> target;
  double tolerance = 0.1;
  /// |slope - target| <= tolerance instead of slope >= target - tolerance.
  bool two_sided = false;
  /// "oracle(2D)" or "theory(d>=3)"; empty picks by surface dimension.
  std::string source;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::cell;
  std::string name;
  nlohmann::json surface;
  std::map<std::string, PeriodicField> fields;        // A, b, f
  std::map<std::string, std::vector<Polynomial>> data;  // g, F, phi (one per component)
  std::vector<double> eps;

  std::vector<int> grids{256};
  std::string discretization = "spectral";
  double h = 0.0;         // fixed mesh size
  double h_factor = 0.125;  // h = h_factor * eps when h == 0
  double band = 0.0;      // graded meshes: band width in multiples of eps
  double coarse_h = 0.05;
  std::vector<double> a_hat;  // constant tensor, tensor_index layout
  int m = 1;

  std::vector<SlopeSpec> slopes;
  std::vector<CheckSpec> checks;
  double no_convergence_threshold = 0.9;
  std::vector<std::vector<int>> lattice;
  long long max_denominator = 1'000'000'000;
  std::uint64_t seed = 2024;
  Exec exec = Exec::parallel;

  std::filesystem::path base_dir;
  std::optional<std::filesystem::path> out_json;
  std::optional<std::filesystem::path> out_csv;
};

/// "2^-3..2^-9", "1/8..1/64" (every integer denominator), or a comma list of
/// numbers, fractions p/q and powers 2^k.
std::vector<double> parse_eps_list(const std::string& text);

ExperimentConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

struct SlopeRow {
  SlopeSpec spec;
  SlopeFit fit;
  std::optional<bool> pass;
};

struct CheckRow {
  std::string description;
  double observed = 0.0;
  bool pass = false;
};

struct RateReport {
  std::string kind;
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::vector<std::pair<std::string, double>> scalars;
  std::vector<std::pair<std::string, bool>> flags;
  std::vector<SlopeRow> slopes;
  std::vector<CheckRow> checks;
  /// Discretization versus homogenization scales.
  nlohmann::ordered_json budget = nlohmann::ordered_json::object();
  std::vector<std::string> notes;

  bool passed() const;
  std::optional<double> scalar(const std::string& name) const;
  std::optional<bool> flag(const std::string& name) const;
  std::vector<double> column(const std::string& name) const;
  const SlopeRow* slope(const std::string& name) const;

  nlohmann::ordered_json to_json() const;
  /// Header line of `columns` then one line per row; reports without rows
  /// list their scalars as "quantity,value".
  std::string to_csv() const;
};

struct TheoryVerdict {
  bool pass = false;
  double slope = 0.0;
  double target = 0.0;
  double tolerance = 0.0;
  bool exact = false;
  std::string message;
};

/// One-sided: pass iff slope >= target - tolerance; exact decay always passes.
TheoryVerdict compare_to_theory(const SlopeFit& fit, double target, double tolerance);
TheoryVerdict compare_to_theory(const RateReport& report, const std::string& slope_name, double target,
                                double tolerance);

/// Runs the experiment, fits the declared slopes and evaluates the checks.
RateReport run(const ExperimentConfig& config);

void write_report(const RateReport& report, const std::optional<std::filesystem::path>& json_path,
                  const std::optional<std::filesystem::path>& csv_path);

}  // namespace homolab
