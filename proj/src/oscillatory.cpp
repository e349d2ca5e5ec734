#include "homolab/oscillatory.hpp"

#include <cmath>
#include <exception>
#include <sstream>

namespace homolab {

namespace {

double density_for(const PeriodicField& f, double eps, const OscillatoryOptions& o) {
  if (!(eps > 0)) throw std::invalid_argument("eps must be positive");
  return std::max(o.min_density, o.nodes_per_wavelength * f.max_wavenumber() / eps);
}

std::size_t estimated_nodes(const SurfaceChart& s, double density) {
  double per_piece = 0.0;
  for (int p = 0; p < s.piece_count(); ++p) {
    const double len = s.piece_measure(p);
    per_piece += s.dimension() == 2 ? len * density + 8 : 2.0 * len * density * density + 64;
  }
  return static_cast<std::size_t>(1.1 * per_piece);
}

struct RuleSum {
  std::vector<Complex> value;
  std::vector<double> magnitude;
  std::size_t nodes = 0;
};

RuleSum integrate_rule(const SurfaceChart& surface, const PeriodicField& f, const SurfaceWeight& phi, double eps,
                       double density, Exec exec) {
  const auto nodes = surface.quadrature(density);
  const int nc = f.components();
  const int d = f.dimension();
  const auto n = static_cast<std::int64_t>(nodes.size());
  std::vector<double> w(n);
  std::vector<std::vector<Complex>> vals(nc, std::vector<Complex>(n));
  const bool par = exec == Exec::parallel;
#pragma omp parallel if (par)
  {
    std::vector<double> y(d);
    std::vector<Complex> out(nc);
#pragma omp for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
      const auto& node = nodes[i];
      for (int k = 0; k < d; ++k) y[k] = node.x[k] / eps;
      f.evaluate_complex_into(y, out);
      const double p = phi(node);
      w[i] = node.w * p;
      for (int c = 0; c < nc; ++c) vals[c][i] = out[c];
    }
  }
  RuleSum r;
  r.nodes = nodes.size();
  std::vector<double> absw(n);
  for (std::int64_t i = 0; i < n; ++i) absw[i] = std::fabs(w[i]);
  for (int c = 0; c < nc; ++c) {
    r.value.push_back(kernels::weighted_sum(exec, w, vals[c]));
    std::vector<Complex> mags(n);
    for (std::int64_t i = 0; i < n; ++i) mags[i] = std::abs(vals[c][i]);
    r.magnitude.push_back(kernels::weighted_sum(exec, absw, mags).real());
  }
  return r;
}

}  // namespace

OscillatoryValue oscillatory_integral_components(const SurfaceChart& surface, const PeriodicField& f,
                                                 const SurfaceWeight& phi, double eps,
                                                 const OscillatoryOptions& options) {
  if (f.dimension() != surface.dimension())
    throw std::invalid_argument("field dimension does not match the surface dimension");
  const double density = density_for(f, eps, options);
  const std::size_t need = estimated_nodes(surface, density) * 3;
  if (need > options.node_budget) {
    std::ostringstream msg;
    msg << "oscillatory integral at eps=" << eps << " needs about " << need << " nodes, budget is "
        << options.node_budget;
    throw QuadratureBudgetError(msg.str(), need);
  }
  const RuleSum coarse = integrate_rule(surface, f, phi, eps, density, options.exec);
  const RuleSum fine = integrate_rule(surface, f, phi, eps, 2.0 * density, options.exec);
  OscillatoryValue out;
  out.value = fine.value;
  out.nodes = fine.nodes;
  for (std::size_t c = 0; c < fine.value.size(); ++c) {
    const double roundoff =
        16.0 * std::sqrt(static_cast<double>(fine.nodes)) * std::numeric_limits<double>::epsilon() * fine.magnitude[c];
    out.est_error = std::max(out.est_error, std::max(std::abs(fine.value[c] - coarse.value[c]), roundoff));
  }
  return out;
}

ScalarOscillatory oscillatory_integral(const SurfaceChart& surface, const PeriodicField& f, const SurfaceWeight& phi,
                                       double eps, const OscillatoryOptions& options) {
  if (f.components() != 1) throw std::invalid_argument("oscillatory_integral needs a scalar field");
  const auto v = oscillatory_integral_components(surface, f, phi, eps, options);
  return {v.value[0], v.est_error, v.nodes};
}

OscillatorySeries weyl_defect_series(const SurfaceChart& surface, const PeriodicField& f, const SurfaceWeight& phi,
                                     const std::vector<double>& eps_list, const OscillatoryOptions& options) {
  if (eps_list.empty()) throw std::invalid_argument("eps list is empty");
  for (std::size_t i = 1; i < eps_list.size(); ++i)
    if (!(eps_list[i] < eps_list[i - 1])) throw std::invalid_argument("eps list must be strictly decreasing");
  if (f.components() != 1) throw std::invalid_argument("weyl_defect_series needs a scalar field");

  OscillatorySeries series;
  series.surface_descriptor = surface.name();
  series.f_descriptor = f.representation() == PeriodicField::Representation::fourier
                            ? std::to_string(f.modes().size()) + "-mode Fourier field"
                            : "grid field N=" + std::to_string(f.grid_size());
  const auto phi_rule = integrate_rule(surface, PeriodicField::constant(FieldKind::scalar, f.dimension(), 1, {1.0}),
                                       phi, 1.0, 4.0 * options.min_density, Exec::serial);
  series.limit = f.mean_complex()[0] * phi_rule.value[0];

  series.entries.resize(eps_list.size());
  const auto count = static_cast<std::int64_t>(eps_list.size());
  std::vector<std::exception_ptr> errors(count);
  OscillatoryOptions inner = options;
  const bool par = options.exec == Exec::parallel;
  if (par) inner.exec = Exec::serial;
#pragma omp parallel for schedule(dynamic) if (par)
  for (std::int64_t i = 0; i < count; ++i) {
    try {
      const auto r = oscillatory_integral(surface, f, phi, eps_list[i], inner);
      series.entries[i] = {eps_list[i], r.value, std::abs(r.value - series.limit), r.est_error};
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return series;
}

MEpsilon m_epsilon(const SurfaceChart& surface, const PeriodicField& b, double eps, const OscillatoryOptions& options) {
  int m = 1;
  if (b.kind() == FieldKind::matrix) m = b.system_size();
  else if (b.kind() != FieldKind::scalar) throw std::invalid_argument("m_epsilon needs a scalar or matrix field");
  const auto v = oscillatory_integral_components(surface, b, unit_weight, eps, options);
  const PeriodicField one = PeriodicField::constant(FieldKind::scalar, b.dimension(), 1, {1.0});
  const double measure =
      integrate_rule(surface, one, unit_weight, 1.0, 2.0 * density_for(b, eps, options), Exec::serial).value[0].real();
  const auto mean = b.mean();
  MEpsilon out;
  out.value.resize(m, m);
  for (int a = 0; a < m; ++a)
    for (int c = 0; c < m; ++c) out.value(a, c) = mean[a * m + c] - v.value[a * m + c].real() / measure;
  out.est_error = v.est_error / measure;
  return out;
}

SlopeFit fit_decay_slope(const std::vector<double>& eps, const std::vector<double>& defect, int drop_first,
                         double zero_floor) {
  if (eps.size() != defect.size()) throw FitError("eps and defect lengths differ");
  if (drop_first < 0) throw FitError("drop_first must be non-negative");
  SlopeFit fit;
  fit.drop_first = drop_first;
  std::vector<double> lx, ly;
  int zeros = 0;
  for (std::size_t i = static_cast<std::size_t>(drop_first); i < eps.size(); ++i) {
    if (!(eps[i] > 0)) throw FitError("eps must be positive");
    if (defect[i] <= zero_floor) {
      ++zeros;
      continue;
    }
    lx.push_back(std::log(eps[i]));
    ly.push_back(std::log(defect[i]));
  }
  const int total = static_cast<int>(lx.size()) + zeros;
  if (total < 2) throw FitError("slope fit needs at least 2 entries after drop_first");
  if (lx.empty()) {
    fit.exact = true;
    fit.slope = std::numeric_limits<double>::infinity();
    fit.used = zeros;
    return fit;
  }
  if (lx.size() < 2) throw FitError("slope fit needs at least 2 positive defects");
  const double n = static_cast<double>(lx.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sx += lx[i];
    sy += ly[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (sxx == 0.0) throw FitError("slope fit needs distinct eps values");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  for (std::size_t i = 0; i < lx.size(); ++i)
    fit.max_residual = std::max(fit.max_residual, std::fabs(ly[i] - (fit.intercept + fit.slope * lx[i])));
  fit.used = static_cast<int>(lx.size());
  return fit;
}

SlopeFit fit_decay_slope(const OscillatorySeries& series, int drop_first, double zero_floor) {
  std::vector<double> e, d;
  for (const auto& s : series.entries) {
    e.push_back(s.eps);
    d.push_back(s.defect);
  }
  return fit_decay_slope(e, d, drop_first, zero_floor);
}

}  // namespace homolab
