#pragma once

#include "homolab/kernels.hpp"
#include "homolab/periodic_field.hpp"
#include "homolab/surface.hpp"

#include <Eigen/Dense>

#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

namespace homolab {

/// Smooth weight phi on the surface, evaluated at quadrature nodes.
using SurfaceWeight = std::function<double(const QuadratureNode&)>;

inline double unit_weight(const QuadratureNode&) { return 1.0; }

class QuadratureBudgetError : public std::runtime_error {
 public:
  QuadratureBudgetError(const std::string& what, std::size_t required)
      : std::runtime_error(what), required_nodes(required) {}
  std::size_t required_nodes;
};

struct OscillatoryOptions {
  double nodes_per_wavelength = 16.0;
  /// Density floor in nodes per unit length, for the weight itself.
  double min_density = 64.0;
  std::size_t node_budget = 10'000'000;
  Exec exec = Exec::serial;
};

struct OscillatoryValue {
  std::vector<Complex> value;  // one per field component
  double est_error = 0.0;      // max over components
  std::size_t nodes = 0;
};

/// Integral over the surface of f(x / eps) phi(x) for every component of f,
/// with a composite Gauss rule of at least nodes_per_wavelength nodes per
/// oscillation. The value comes from the rule at twice that density; the
/// error estimate is the change from the base rule (never below roundoff).
OscillatoryValue oscillatory_integral_components(const SurfaceChart& surface, const PeriodicField& f,
                                                 const SurfaceWeight& phi, double eps,
                                                 const OscillatoryOptions& options = {});

struct ScalarOscillatory {
  Complex value;
  double est_error = 0.0;
  std::size_t nodes = 0;
};

/// Scalar field version.
ScalarOscillatory oscillatory_integral(const SurfaceChart& surface, const PeriodicField& f, const SurfaceWeight& phi,
                                       double eps, const OscillatoryOptions& options = {});

struct SeriesEntry {
  double eps = 0.0;
  Complex value;
  double defect = 0.0;
  double est_error = 0.0;
};

struct OscillatorySeries {
  std::vector<SeriesEntry> entries;
  Complex limit;  // <f> * integral of phi
  std::string f_descriptor;
  std::string surface_descriptor;
};

/// defect(eps) = |integral - <f> integral(phi)| for each eps (strictly decreasing).
OscillatorySeries weyl_defect_series(const SurfaceChart& surface, const PeriodicField& f, const SurfaceWeight& phi,
                                     const std::vector<double>& eps_list, const OscillatoryOptions& options = {});

struct MEpsilon {
  Eigen::MatrixXd value;  // m x m
  double est_error = 0.0;
};

/// Surface average of b_bar - b(x / eps).
MEpsilon m_epsilon(const SurfaceChart& surface, const PeriodicField& b, double eps,
                   const OscillatoryOptions& options = {});

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double max_residual = 0.0;
  /// Every used defect was below the zero floor: decay is exact.
  bool exact = false;
  int used = 0;
  int drop_first = 0;
};

class FitError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Least-squares line through (log eps, log defect) after dropping the first
/// drop_first entries. Defects at or below zero_floor count as zero; if all
/// are zero the fit is flagged exact with slope +infinity.
SlopeFit fit_decay_slope(const std::vector<double>& eps, const std::vector<double>& defect, int drop_first = 2,
                         double zero_floor = 1e-12);
SlopeFit fit_decay_slope(const OscillatorySeries& series, int drop_first = 2, double zero_floor = 1e-12);

}  // namespace homolab
