#include "homolab/cell_homogenizer.hpp"

#include "homolab/fft.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <memory>
#include <numbers>

namespace homolab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
using Cplx = std::complex<double>;

std::size_t ipow(int n, int d) {
  std::size_t p = 1;
  for (int i = 0; i < d; ++i) p *= static_cast<std::size_t>(n);
  return p;
}

void unravel(std::size_t p, int n, int d, std::span<int> idx) {
  for (int i = d - 1; i >= 0; --i) {
    idx[i] = static_cast<int>(p % n);
    p /= n;
  }
}

/// Macro gradient e_j e^b added to the discrete gradient of u, or none.
struct Macro {
  int j = -1;
  int beta = -1;
  bool active() const { return j >= 0; }
};

/// Discrete cell operator u -> -div(A grad u) on mean-zero grid functions.
class CellOperator {
 public:
  CellOperator(int d, int m, int n) : d_(d), m_(m), n_(n), points_(ipow(n, d)), fft_(d, n) {}
  virtual ~CellOperator() = default;

  int d() const { return d_; }
  int m() const { return m_; }
  std::size_t points() const { return points_; }

  /// out = -div(A(grad u + macro)), strong-form values at grid points.
  virtual void flux_divergence(std::span<const double> u, Macro macro, std::span<double> out) const = 0;
  /// d_l u^g at the grid points of the discretization.
  virtual std::vector<double> gradient(std::span<const double> u_component, int l) const = 0;
  /// Coefficient samples aligned with gradient().
  virtual double coefficient(std::size_t p, int component) const = 0;
  virtual void precondition(std::span<const double> r, std::span<double> z) const = 0;

  void project_mean(std::span<double> u) const {
    for (int g = 0; g < m_; ++g) {
      auto comp = u.subspan(g * points_, points_);
      double s = 0.0;
      for (double v : comp) s += v;
      s /= static_cast<double>(points_);
      for (double& v : comp) v -= s;
    }
  }

 protected:
  int d_;
  int m_;
  int n_;
  std::size_t points_;
  RealFft fft_;

  // Inverse m x m blocks of a constant-coefficient symbol, one per half-spectrum entry.
  void apply_block_inverse(const std::vector<Eigen::MatrixXcd>& blocks, std::span<const double> r,
                           std::span<double> z) const {
    const std::size_t ns = fft_.spectral_size();
    std::vector<std::vector<Cplx>> rh(m_, std::vector<Cplx>(ns));
    for (int g = 0; g < m_; ++g) fft_.forward(r.subspan(g * points_, points_), rh[g]);
    std::vector<std::vector<Cplx>> zh(m_, std::vector<Cplx>(ns, 0.0));
    Eigen::VectorXcd in(m_), out(m_);
    for (std::size_t q = 0; q < ns; ++q) {
      if (blocks[q].size() == 0) continue;
      for (int g = 0; g < m_; ++g) in(g) = rh[g][q];
      out = blocks[q] * in;
      for (int g = 0; g < m_; ++g) zh[g][q] = out(g);
    }
    for (int g = 0; g < m_; ++g) fft_.backward(zh[g], z.subspan(g * points_, points_));
  }
};

class SpectralCellOperator final : public CellOperator {
 public:
  SpectralCellOperator(const PeriodicField& a, int n) : CellOperator(a.dimension(), a.system_size(), n) {
    ncomp_ = a.components();
    const auto samples = a.sample_grid(n);
    coeff_.assign(static_cast<std::size_t>(ncomp_) * points_, 0.0);
    for (std::size_t p = 0; p < points_; ++p)
      for (int c = 0; c < ncomp_; ++c) coeff_[c * points_ + p] = samples[p * ncomp_ + c];

    const std::size_t ns = fft_.spectral_size();
    const int cutoff = n / 3;
    wave_.resize(ns * d_);
    keep_.assign(ns, 0);
    std::vector<int> k(d_);
    for (std::size_t q = 0; q < ns; ++q) {
      fft_.wavenumber(q, k);
      bool keep = true;
      bool zero = true;
      for (int i = 0; i < d_; ++i) {
        wave_[q * d_ + i] = k[i];
        keep = keep && std::abs(k[i]) <= cutoff;
        zero = zero && k[i] == 0;
      }
      keep_[q] = keep && !zero;
    }

    const auto mean = a.mean();
    blocks_.resize(ns);
    for (std::size_t q = 0; q < ns; ++q) {
      if (!keep_[q]) continue;
      Eigen::MatrixXd s = Eigen::MatrixXd::Zero(m_, m_);
      for (int al = 0; al < m_; ++al)
        for (int be = 0; be < m_; ++be)
          for (int i = 0; i < d_; ++i)
            for (int j = 0; j < d_; ++j)
              s(al, be) += mean[tensor_index(al, be, i, j, d_, m_)] * kTwoPi * wave_[q * d_ + i] * kTwoPi *
                           wave_[q * d_ + j];
      const Eigen::MatrixXd sym = 0.5 * (s + s.transpose());
      blocks_[q] = sym.inverse().cast<Cplx>();
    }
  }

  void flux_divergence(std::span<const double> u, Macro macro, std::span<double> out) const override {
    const std::size_t ns = fft_.spectral_size();
    std::vector<std::vector<double>> grad(static_cast<std::size_t>(m_) * d_, std::vector<double>(points_));
    std::vector<Cplx> uh(ns), tmp(ns);
    for (int g = 0; g < m_; ++g) {
      fft_.forward(u.subspan(g * points_, points_), uh);
      for (int l = 0; l < d_; ++l) {
        for (std::size_t q = 0; q < ns; ++q)
          tmp[q] = keep_[q] ? Cplx(0.0, kTwoPi * wave_[q * d_ + l]) * uh[q] : Cplx(0.0);
        fft_.backward(tmp, grad[g * d_ + l]);
        if (macro.active() && macro.j == l && macro.beta == g)
          for (double& v : grad[g * d_ + l]) v += 1.0;
      }
    }
    std::vector<double> flux(points_);
    std::vector<Cplx> acc(ns);
    for (int al = 0; al < m_; ++al) {
      std::fill(acc.begin(), acc.end(), Cplx(0.0));
      for (int k = 0; k < d_; ++k) {
        std::fill(flux.begin(), flux.end(), 0.0);
        for (int be = 0; be < m_; ++be)
          for (int l = 0; l < d_; ++l) {
            const double* c = coeff_.data() + tensor_index(al, be, k, l, d_, m_) * points_;
            const double* gr = grad[be * d_ + l].data();
            for (std::size_t p = 0; p < points_; ++p) flux[p] += c[p] * gr[p];
          }
        fft_.forward(flux, tmp);
        for (std::size_t q = 0; q < ns; ++q)
          if (keep_[q]) acc[q] -= Cplx(0.0, kTwoPi * wave_[q * d_ + k]) * tmp[q];
      }
      fft_.backward(acc, out.subspan(al * points_, points_));
    }
  }

  std::vector<double> gradient(std::span<const double> u_component, int l) const override {
    const std::size_t ns = fft_.spectral_size();
    std::vector<Cplx> uh(ns);
    fft_.forward(u_component, uh);
    for (std::size_t q = 0; q < ns; ++q)
      uh[q] = keep_[q] ? Cplx(0.0, kTwoPi * wave_[q * d_ + l]) * uh[q] : Cplx(0.0);
    std::vector<double> out(points_);
    fft_.backward(uh, out);
    return out;
  }

  double coefficient(std::size_t p, int component) const override { return coeff_[component * points_ + p]; }

  void precondition(std::span<const double> r, std::span<double> z) const override {
    apply_block_inverse(blocks_, r, z);
  }

 private:
  int ncomp_ = 0;
  std::vector<double> coeff_;  // component-major
  std::vector<int> wave_;
  std::vector<char> keep_;
  std::vector<Eigen::MatrixXcd> blocks_;
};

/// Nodal unknowns at i/N, coefficients constant on the cell whose lower corner
/// is node i. Diagonal terms a_kk pair differences along each cell edge,
/// off-diagonal terms pair cell-averaged differences; the resulting form is
/// symmetric positive definite on mean-zero functions for strongly elliptic A.
class FiniteDifferenceCellOperator final : public CellOperator {
 public:
  FiniteDifferenceCellOperator(const PeriodicField& a, int n) : CellOperator(a.dimension(), a.system_size(), n) {
    ncomp_ = a.components();
    h_ = 1.0 / n;
    coeff_.assign(static_cast<std::size_t>(ncomp_) * points_, 0.0);
    if (a.representation() == PeriodicField::Representation::grid && a.grid_size() == n) {
      const auto& s = a.samples();
      for (std::size_t p = 0; p < points_; ++p)
        for (int c = 0; c < ncomp_; ++c) coeff_[c * points_ + p] = s[p * ncomp_ + c];
    } else {
      std::vector<int> idx(d_);
      std::vector<double> y(d_), value(ncomp_);
      for (std::size_t p = 0; p < points_; ++p) {
        unravel(p, n_, d_, idx);
        for (int i = 0; i < d_; ++i) y[i] = (idx[i] + 0.5) * h_;
        a.evaluate_into(y, value);
        for (int c = 0; c < ncomp_; ++c) coeff_[c * points_ + p] = value[c];
      }
    }

    corners_.resize(points_ * (1u << d_));
    std::vector<int> idx(d_);
    for (std::size_t p = 0; p < points_; ++p) {
      unravel(p, n_, d_, idx);
      for (int s = 0; s < (1 << d_); ++s) {
        std::size_t q = 0;
        for (int i = 0; i < d_; ++i) q = q * n_ + static_cast<std::size_t>((idx[i] + ((s >> i) & 1)) % n_);
        corners_[p * (1u << d_) + s] = q;
      }
    }
    for (int color = 0; color < (1 << d_); ++color) colors_.emplace_back();
    for (std::size_t p = 0; p < points_; ++p) {
      unravel(p, n_, d_, idx);
      int color = 0;
      for (int i = 0; i < d_; ++i) color |= (idx[i] & 1) << i;
      colors_[color].push_back(p);
    }

    // Exact symbol of the constant-coefficient operator with mean coefficients.
    const auto mean = cell_mean();
    const std::size_t ns = fft_.spectral_size();
    blocks_.resize(ns);
    std::vector<int> k(d_);
    for (std::size_t q = 0; q < ns; ++q) {
      fft_.wavenumber(q, k);
      bool zero = true;
      for (int v : k) zero = zero && v == 0;
      if (zero) continue;
      std::vector<Cplx> delta(d_), sigma(d_);
      for (int i = 0; i < d_; ++i) delta[i] = (std::polar(1.0, kTwoPi * k[i] / n_) - 1.0) / h_;
      for (int i = 0; i < d_; ++i) {
        Cplx avg = 1.0;
        for (int l = 0; l < d_; ++l)
          if (l != i) avg *= 0.5 * (1.0 + std::polar(1.0, kTwoPi * k[l] / n_));
        sigma[i] = delta[i] * avg;
      }
      Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(m_, m_);
      for (int al = 0; al < m_; ++al)
        for (int be = 0; be < m_; ++be)
          for (int i = 0; i < d_; ++i)
            for (int j = 0; j < d_; ++j) {
              const double c = mean[tensor_index(al, be, i, j, d_, m_)];
              s(al, be) += i == j ? c * std::norm(delta[i]) : c * std::conj(sigma[i]) * sigma[j];
            }
      const Eigen::MatrixXcd herm = 0.5 * (s + s.adjoint());
      blocks_[q] = herm.inverse();
    }
  }

  void set_exec(Exec e) { exec_ = e; }

  void flux_divergence(std::span<const double> u, Macro macro, std::span<double> out) const override {
    std::fill(out.begin(), out.end(), 0.0);
    const int edges = 1 << (d_ - 1);
    auto cell = [&](std::size_t c, std::vector<double>& diff, std::vector<double>& g) {
      const std::size_t* nodes = corners_.data() + c * (1u << d_);
      // diff[(b*d + k)*edges + e]: difference of u^b along the e-th k-edge.
      for (int b = 0; b < m_; ++b) {
        const double* ub = u.data() + b * points_;
        for (int k = 0; k < d_; ++k) {
          double sum = 0.0;
          int e = 0;
          for (int s = 0; s < (1 << d_); ++s) {
            if (s & (1 << k)) continue;
            double v = (ub[nodes[s | (1 << k)]] - ub[nodes[s]]) / h_;
            if (macro.active() && macro.j == k && macro.beta == b) v += 1.0;
            diff[(b * d_ + k) * edges + e] = v;
            sum += v;
            ++e;
          }
          g[b * d_ + k] = sum / edges;
        }
      }
      for (int al = 0; al < m_; ++al) {
        double* oa = out.data() + al * points_;
        for (int k = 0; k < d_; ++k) {
          double cross = 0.0;
          for (int b = 0; b < m_; ++b)
            for (int l = 0; l < d_; ++l)
              if (l != k) cross += coeff_[tensor_index(al, b, k, l, d_, m_) * points_ + c] * g[b * d_ + l];
          int e = 0;
          for (int s = 0; s < (1 << d_); ++s) {
            if (s & (1 << k)) continue;
            double t = cross;
            for (int b = 0; b < m_; ++b)
              t += coeff_[tensor_index(al, b, k, k, d_, m_) * points_ + c] * diff[(b * d_ + k) * edges + e];
            t /= edges * h_;
            oa[nodes[s]] -= t;
            oa[nodes[s | (1 << k)]] += t;
            ++e;
          }
        }
      }
    };
    if (exec_ == Exec::parallel) {
      for (const auto& color : colors_) {
        const std::int64_t nc = static_cast<std::int64_t>(color.size());
#pragma omp parallel
        {
          std::vector<double> diff(static_cast<std::size_t>(m_) * d_ * edges), g(static_cast<std::size_t>(m_) * d_);
#pragma omp for schedule(static)
          for (std::int64_t i = 0; i < nc; ++i) cell(color[i], diff, g);
        }
      }
    } else {
      std::vector<double> diff(static_cast<std::size_t>(m_) * d_ * edges), g(static_cast<std::size_t>(m_) * d_);
      for (std::size_t c = 0; c < points_; ++c) cell(c, diff, g);
    }
  }

  std::vector<double> gradient(std::span<const double> u_component, int l) const override {
    std::vector<double> out(points_);
    const int edges = 1 << (d_ - 1);
    for (std::size_t c = 0; c < points_; ++c) {
      const std::size_t* nodes = corners_.data() + c * (1u << d_);
      double sum = 0.0;
      for (int s = 0; s < (1 << d_); ++s)
        if (!(s & (1 << l))) sum += (u_component[nodes[s | (1 << l)]] - u_component[nodes[s]]) / h_;
      out[c] = sum / edges;
    }
    return out;
  }

  double coefficient(std::size_t p, int component) const override { return coeff_[component * points_ + p]; }

  void precondition(std::span<const double> r, std::span<double> z) const override {
    apply_block_inverse(blocks_, r, z);
  }

 private:
  std::vector<double> cell_mean() const {
    std::vector<double> mean(ncomp_, 0.0);
    for (int c = 0; c < ncomp_; ++c) {
      double s = 0.0;
      for (std::size_t p = 0; p < points_; ++p) s += coeff_[c * points_ + p];
      mean[c] = s / static_cast<double>(points_);
    }
    return mean;
  }

  int ncomp_ = 0;
  double h_ = 0.0;
  Exec exec_ = Exec::serial;
  std::vector<double> coeff_;
  std::vector<std::size_t> corners_;
  std::vector<std::vector<std::size_t>> colors_;
  std::vector<Eigen::MatrixXcd> blocks_;
};

PeriodicField as_cell_coefficient(const PeriodicField& a) {
  if (a.kind() == FieldKind::scalar) return a.as_tensor4(1);
  if (a.kind() != FieldKind::tensor4) throw CellError("cell problem needs a scalar or tensor4 coefficient");
  return a;
}

std::unique_ptr<CellOperator> make_operator(const PeriodicField& a, int n, CellDiscretization disc, Exec exec) {
  if (disc == CellDiscretization::spectral) return std::make_unique<SpectralCellOperator>(a, n);
  auto op = std::make_unique<FiniteDifferenceCellOperator>(a, n);
  op->set_exec(exec);
  return op;
}

CellDiscretization choose_discretization(const PeriodicField& a, bool force_fd) {
  if (force_fd || a.representation() == PeriodicField::Representation::grid)
    return CellDiscretization::finite_difference;
  return CellDiscretization::spectral;
}

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

// Legendre condition checked at every coefficient sample the discretization uses.
double min_legendre_eigenvalue(const CellOperator& op) {
  const int d = op.d();
  const int m = op.m();
  Eigen::MatrixXd mat(m * d, m * d);
  double mu = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < op.points(); ++p) {
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b)
        for (int i = 0; i < d; ++i)
          for (int j = 0; j < d; ++j) mat(a * d + i, b * d + j) = op.coefficient(p, tensor_index(a, b, i, j, d, m));
    const Eigen::MatrixXd sym = 0.5 * (mat + mat.transpose());
    mu = std::min(mu, Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(sym, Eigen::EigenvaluesOnly).eigenvalues().minCoeff());
  }
  return mu;
}

}  // namespace

std::size_t CorrectorSet::points() const { return ipow(n, d); }

double CorrectorSet::interpolate(int j, int beta, int gamma, std::span<const double> y) const {
  const auto values = component(j, beta, gamma);
  std::vector<int> lo(d);
  std::vector<double> t(d);
  for (int i = 0; i < d; ++i) {
    const double s = (y[i] - std::floor(y[i])) * n;
    const int l = static_cast<int>(std::floor(s));
    t[i] = s - l;
    lo[i] = ((l % n) + n) % n;
  }
  double out = 0.0;
  for (int corner = 0; corner < (1 << d); ++corner) {
    double w = 1.0;
    std::size_t p = 0;
    for (int i = 0; i < d; ++i) {
      const int bit = (corner >> i) & 1;
      w *= bit ? t[i] : 1.0 - t[i];
      p = p * n + static_cast<std::size_t>((lo[i] + bit) % n);
    }
    out += w * values[p];
  }
  return out;
}

CorrectorSet CorrectorSet::zero(int d, int m, int n, CellDiscretization disc) {
  CorrectorSet set;
  set.d = d;
  set.m = m;
  set.n = n;
  set.discretization = disc;
  set.chi.assign(static_cast<std::size_t>(d) * m, std::vector<double>(static_cast<std::size_t>(m) * ipow(n, d), 0.0));
  set.iterations.assign(static_cast<std::size_t>(d) * m, 0);
  set.residuals.assign(static_cast<std::size_t>(d) * m, 0.0);
  return set;
}

double HomogenizedTensor::min_eigenvalue() const {
  const int size = m * d;
  Eigen::MatrixXd mat(size, size);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) mat(a * d + i, b * d + j) = (*this)(a, b, i, j);
  const Eigen::MatrixXd sym = 0.5 * (mat + mat.transpose());
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(sym, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
}

double HomogenizedTensor::max_asymmetry() const {
  double worst = 0.0;
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) worst = std::max(worst, std::abs((*this)(a, b, i, j) - (*this)(b, a, j, i)));
  return worst;
}

CorrectorSet solve_correctors(const PeriodicField& a_in, int n, const CellOptions& options) {
  if (!is_power_of_two(n)) throw CellError("cell grid size must be a power of two");
  if (!a_in.is_real()) throw CellError("cell coefficient must be real");
  const PeriodicField a = as_cell_coefficient(a_in);
  const int d = a.dimension();
  const int m = a.system_size();

  const auto disc = choose_discretization(a, options.force_finite_difference);
  const auto op = make_operator(a, n, disc, options.exec);
  const double mu = min_legendre_eigenvalue(*op);
  if (!(mu > 0.0)) throw CellError("coefficient is not elliptic (min eigenvalue " + std::to_string(mu) + ")");
  CorrectorSet set = CorrectorSet::zero(d, m, n, disc);
  const std::size_t total = static_cast<std::size_t>(m) * op->points();

  PcgOptions pcg_options;
  pcg_options.rel_tol = options.rel_tol;
  pcg_options.max_iterations = options.max_iterations;
  pcg_options.exec = options.exec;
  pcg_options.project = [&](std::span<double> u) { op->project_mean(u); };

  const int columns = d * m;
  std::vector<std::string> failures(columns);
#pragma omp parallel for schedule(dynamic) if (options.exec == Exec::parallel)
  for (int col = 0; col < columns; ++col) {
    const Macro macro{col / m, col % m};
    std::vector<double> zero(total, 0.0), rhs(total);
    op->flux_divergence(zero, macro, rhs);
    for (double& v : rhs) v = -v;
    std::vector<double>& x = set.chi[col];
    const auto res = pcg([&](std::span<const double> u, std::span<double> out) { op->flux_divergence(u, {}, out); },
                         [&](std::span<const double> r, std::span<double> z) { op->precondition(r, z); }, rhs, x,
                         pcg_options);
    set.iterations[col] = res.iterations;
    set.residuals[col] = res.relative_residual;
    if (!res.converged)
      failures[col] = "cell solve (j=" + std::to_string(macro.j) + ", beta=" + std::to_string(macro.beta) +
                      ") did not converge: relative residual " + std::to_string(res.relative_residual) + " after " +
                      std::to_string(res.iterations) + " iterations";
  }
  for (const auto& f : failures)
    if (!f.empty()) throw CellError(f);
  return set;
}

HomogenizedTensor homogenize(const PeriodicField& a_in, const CorrectorSet& chi) {
  const PeriodicField a = as_cell_coefficient(a_in);
  const int d = a.dimension();
  const int m = a.system_size();
  if (d != chi.d || m != chi.m) throw CellError("corrector set does not match the coefficient shape");
  if (a.representation() == PeriodicField::Representation::grid && chi.discretization == CellDiscretization::finite_difference &&
      a.grid_size() != chi.n)
    throw CellError("coefficient grid does not match the corrector grid");
  const auto op = make_operator(a, chi.n, chi.discretization, Exec::serial);
  const std::size_t points = op->points();

  HomogenizedTensor t;
  t.d = d;
  t.m = m;
  t.a_hat.assign(component_count(FieldKind::tensor4, d, m), 0.0);
  for (int j = 0; j < d; ++j)
    for (int be = 0; be < m; ++be) {
      // grads[g*d + k] = d_k chi_j^{g be}
      std::vector<std::vector<double>> grads;
      for (int g = 0; g < m; ++g)
        for (int k = 0; k < d; ++k) grads.push_back(op->gradient(chi.component(j, be, g), k));
      for (int al = 0; al < m; ++al)
        for (int i = 0; i < d; ++i) {
          double sum = 0.0;
          for (std::size_t p = 0; p < points; ++p) {
            double v = op->coefficient(p, tensor_index(al, be, i, j, d, m));
            for (int g = 0; g < m; ++g)
              for (int k = 0; k < d; ++k) v += op->coefficient(p, tensor_index(al, g, i, k, d, m)) * grads[g * d + k][p];
            sum += v;
          }
          t.a_hat[tensor_index(al, be, i, j, d, m)] = sum / static_cast<double>(points);
        }
    }
  return t;
}

void attach_effective_robin(HomogenizedTensor& tensor, const PeriodicField& b) {
  if (b.kind() != FieldKind::matrix && b.kind() != FieldKind::scalar)
    throw CellError("Robin coefficient must be scalar or matrix");
  if (b.system_size() != tensor.m) throw CellError("Robin coefficient has wrong system size");
  tensor.b_bar = b.mean();
}

double cell_residual(const PeriodicField& a_in, const CorrectorSet& chi) {
  const PeriodicField a = as_cell_coefficient(a_in);
  const auto op = make_operator(a, chi.n, chi.discretization, Exec::serial);
  const std::size_t total = static_cast<std::size_t>(chi.m) * op->points();
  std::vector<double> r(total);
  double worst = 0.0;
  for (int j = 0; j < chi.d; ++j)
    for (int be = 0; be < chi.m; ++be) {
      op->flux_divergence(chi.corrector(j, be), Macro{j, be}, r);
      double s = 0.0;
      for (double v : r) s += v * v;
      worst = std::max(worst, std::sqrt(s / static_cast<double>(op->points())));
    }
  return worst;
}

std::vector<double> corrector_gradient(const CorrectorSet& chi, int j, int beta, int gamma, int l) {
  // The gradient only depends on the grid, so a unit coefficient suffices.
  const PeriodicField unit = PeriodicField::constant(FieldKind::scalar, chi.d, 1, {1.0}).as_tensor4(chi.m);
  const auto op = make_operator(unit, chi.n, chi.discretization, Exec::serial);
  return op->gradient(chi.component(j, beta, gamma), l);
}

}  // namespace homolab
