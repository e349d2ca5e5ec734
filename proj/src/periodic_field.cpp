#include "homolab/periodic_field.hpp"

#include "homolab/fft.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>

namespace homolab {

std::string to_string(FieldKind kind) {
  switch (kind) {
    case FieldKind::scalar: return "scalar";
    case FieldKind::vector: return "vector";
    case FieldKind::matrix: return "matrix";
    case FieldKind::tensor4: return "tensor4";
  }
  return "unknown";
}

FieldKind field_kind_from_string(const std::string& name) {
  if (name == "scalar") return FieldKind::scalar;
  if (name == "vector") return FieldKind::vector;
  if (name == "matrix") return FieldKind::matrix;
  if (name == "tensor4") return FieldKind::tensor4;
  throw FieldError("unknown field kind '" + name + "'");
}

int component_count(FieldKind kind, int d, int m) {
  switch (kind) {
    case FieldKind::scalar: return 1;
    case FieldKind::vector: return m;
    case FieldKind::matrix: return m * m;
    case FieldKind::tensor4: return m * m * d * d;
  }
  return 0;
}

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

// Canonical half lattice: k == 0, or first nonzero entry positive.
int half_lattice_sign(const std::vector<int>& k) {
  for (int v : k) {
    if (v > 0) return 1;
    if (v < 0) return -1;
  }
  return 0;
}

double wrap_unit(double y) { return y - std::floor(y); }

void validate_shape(FieldKind kind, int d, int m) {
  if (d != 2 && d != 3) throw FieldError("field dimension must be 2 or 3");
  if (m < 1) throw FieldError("system size must be positive");
  if (kind == FieldKind::scalar && m != 1) throw FieldError("scalar fields have m = 1");
}

}  // namespace

PeriodicField PeriodicField::fourier(FieldKind kind, int d, int m, std::vector<FourierMode> modes,
                                     bool real) {
  validate_shape(kind, d, m);
  PeriodicField f;
  f.kind_ = kind;
  f.repr_ = Representation::fourier;
  f.d_ = d;
  f.m_ = m;
  f.ncomp_ = component_count(kind, d, m);
  f.real_ = real;

  for (const auto& mode : modes) {
    if (static_cast<int>(mode.k.size()) != d) throw FieldError("mode wavevector has wrong dimension");
    if (static_cast<int>(mode.amp.size()) != f.ncomp_)
      throw FieldError("mode amplitude has " + std::to_string(mode.amp.size()) +
                       " components, expected " + std::to_string(f.ncomp_));
  }

  // Merge duplicates on the full lattice first.
  std::map<std::vector<int>, std::vector<Complex>> full;
  for (auto& mode : modes) {
    auto [it, inserted] = full.emplace(mode.k, mode.amp);
    if (!inserted)
      for (int c = 0; c < f.ncomp_; ++c) it->second[c] += mode.amp[c];
  }

  if (!real) {
    for (auto& [k, amp] : full) f.modes_.push_back({k, amp});
    return f;
  }

  // Hermitian completion: keep the half lattice; a partner -k, when given,
  // must be the conjugate.
  const double tol = 1e-12;
  for (auto& [k, amp] : full) {
    const int sign = half_lattice_sign(k);
    if (sign == 0) {
      for (const auto& a : amp)
        if (std::abs(a.imag()) > tol * (1.0 + std::abs(a.real())))
          throw FieldError("real field has a complex zero mode");
      std::vector<Complex> re(amp.size());
      for (std::size_t c = 0; c < amp.size(); ++c) re[c] = amp[c].real();
      f.modes_.push_back({k, re});
      continue;
    }
    std::vector<int> neg(k.size());
    for (std::size_t i = 0; i < k.size(); ++i) neg[i] = -k[i];
    auto partner = full.find(neg);
    if (sign > 0) {
      if (partner != full.end()) {
        for (int c = 0; c < f.ncomp_; ++c)
          if (std::abs(partner->second[c] - std::conj(amp[c])) > tol * (1.0 + std::abs(amp[c])))
            throw FieldError("real field modes are not Hermitian symmetric");
      }
      f.modes_.push_back({k, amp});
    } else if (partner == full.end()) {
      std::vector<Complex> conj(amp.size());
      for (std::size_t c = 0; c < amp.size(); ++c) conj[c] = std::conj(amp[c]);
      f.modes_.push_back({neg, conj});
    }
  }
  std::sort(f.modes_.begin(), f.modes_.end(),
            [](const FourierMode& a, const FourierMode& b) { return a.k < b.k; });
  return f;
}

PeriodicField PeriodicField::grid(FieldKind kind, int d, int m, int n, std::vector<double> samples) {
  validate_shape(kind, d, m);
  if (n < 2) throw FieldError("grid size must be at least 2");
  PeriodicField f;
  f.kind_ = kind;
  f.repr_ = Representation::grid;
  f.d_ = d;
  f.m_ = m;
  f.ncomp_ = component_count(kind, d, m);
  f.n_ = n;
  std::size_t total = 1;
  for (int i = 0; i < d; ++i) total *= static_cast<std::size_t>(n);
  if (samples.size() != total * f.ncomp_)
    throw FieldError("grid sample count " + std::to_string(samples.size()) + " != " +
                     std::to_string(total * f.ncomp_));
  f.samples_ = std::move(samples);
  f.trig_ = is_power_of_two(n);
  if (f.trig_) f.build_spectral_cache();
  return f;
}

PeriodicField PeriodicField::constant(FieldKind kind, int d, int m, std::vector<double> value) {
  validate_shape(kind, d, m);
  const int nc = component_count(kind, d, m);
  if (static_cast<int>(value.size()) != nc) throw FieldError("constant value has wrong size");
  FourierMode zero{std::vector<int>(d, 0), std::vector<Complex>(value.begin(), value.end())};
  return fourier(kind, d, m, {zero});
}

void PeriodicField::build_spectral_cache() {
  const std::size_t total = samples_.size() / ncomp_;
  spectral_.clear();
  std::vector<std::vector<Complex>> coeff(ncomp_);
  for (int c = 0; c < ncomp_; ++c) {
    std::vector<Complex> in(total);
    for (std::size_t p = 0; p < total; ++p) in[p] = samples_[p * ncomp_ + c];
    coeff[c] = complex_dft(d_, n_, in);
    for (auto& v : coeff[c]) v /= static_cast<double>(total);
  }
  // Nyquist entries are split symmetrically between +N/2 and -N/2 so the
  // interpolant stays real.
  std::vector<int> idx(d_);
  for (std::size_t p = 0; p < total; ++p) {
    std::size_t rem = p;
    for (int i = d_ - 1; i >= 0; --i) {
      idx[i] = static_cast<int>(rem % n_);
      rem /= n_;
    }
    std::vector<int> base(d_);
    std::vector<int> nyquist_axes;
    for (int i = 0; i < d_; ++i) {
      base[i] = idx[i] <= n_ / 2 ? idx[i] : idx[i] - n_;
      if (2 * idx[i] == n_) nyquist_axes.push_back(i);
    }
    const int copies = 1 << nyquist_axes.size();
    for (int s = 0; s < copies; ++s) {
      FourierMode mode{base, std::vector<Complex>(ncomp_)};
      for (std::size_t a = 0; a < nyquist_axes.size(); ++a)
        if (s & (1 << a)) mode.k[nyquist_axes[a]] = -n_ / 2;
      for (int c = 0; c < ncomp_; ++c) mode.amp[c] = coeff[c][p] / static_cast<double>(copies);
      spectral_.push_back(std::move(mode));
    }
  }
}

void PeriodicField::check_point(std::span<const double> y) const {
  if (static_cast<int>(y.size()) != d_)
    throw FieldError("point has dimension " + std::to_string(y.size()) + ", field has " +
                     std::to_string(d_));
}

void PeriodicField::evaluate_modes(std::span<const double> y, std::span<Complex> out) const {
  const auto& modes = repr_ == Representation::fourier ? modes_ : spectral_;
  const bool half = repr_ == Representation::fourier && real_;
  int kmax = 0;
  for (const auto& mode : modes)
    for (int v : mode.k) kmax = std::max(kmax, std::abs(v));
  const int width = 2 * kmax + 1;
  thread_local std::vector<Complex> table;
  table.resize(static_cast<std::size_t>(d_) * width);
  for (int i = 0; i < d_; ++i) {
    const double yi = wrap_unit(y[i]);
    for (int k = -kmax; k <= kmax; ++k)
      table[i * width + (k + kmax)] = std::polar(1.0, kTwoPi * k * yi);
  }
  std::fill(out.begin(), out.end(), Complex(0.0));
  for (const auto& mode : modes) {
    Complex phase = 1.0;
    bool zero = true;
    for (int i = 0; i < d_; ++i) {
      phase *= table[i * width + (mode.k[i] + kmax)];
      zero = zero && mode.k[i] == 0;
    }
    const double w = (half && !zero) ? 2.0 : 1.0;
    for (int c = 0; c < ncomp_; ++c) out[c] += w * mode.amp[c] * phase;
  }
}

void PeriodicField::evaluate_multilinear(std::span<const double> y, std::span<double> out) const {
  std::vector<int> lo(d_);
  std::vector<double> t(d_);
  for (int i = 0; i < d_; ++i) {
    const double s = wrap_unit(y[i]) * n_;
    int l = static_cast<int>(std::floor(s));
    t[i] = s - l;
    lo[i] = ((l % n_) + n_) % n_;
  }
  std::fill(out.begin(), out.end(), 0.0);
  for (int corner = 0; corner < (1 << d_); ++corner) {
    double w = 1.0;
    std::size_t p = 0;
    for (int i = 0; i < d_; ++i) {
      const int bit = (corner >> i) & 1;
      w *= bit ? t[i] : 1.0 - t[i];
      p = p * n_ + static_cast<std::size_t>((lo[i] + bit) % n_);
    }
    if (w == 0.0) continue;
    for (int c = 0; c < ncomp_; ++c) out[c] += w * samples_[p * ncomp_ + c];
  }
}

void PeriodicField::evaluate_into(std::span<const double> y, std::span<double> out) const {
  check_point(y);
  if (static_cast<int>(out.size()) != ncomp_) throw FieldError("output span has wrong size");
  if (!real_) throw FieldError("complex field evaluated as real");
  if (repr_ == Representation::grid && !trig_) {
    evaluate_multilinear(y, out);
    return;
  }
  thread_local std::vector<Complex> tmp;
  tmp.resize(ncomp_);
  evaluate_modes(y, tmp);
  for (int c = 0; c < ncomp_; ++c) out[c] = tmp[c].real();
}

std::vector<double> PeriodicField::evaluate(std::span<const double> y) const {
  std::vector<double> out(ncomp_);
  evaluate_into(y, out);
  return out;
}

void PeriodicField::evaluate_complex_into(std::span<const double> y, std::span<Complex> out) const {
  check_point(y);
  if (static_cast<int>(out.size()) != ncomp_) throw FieldError("output span has wrong size");
  if (repr_ == Representation::grid && !trig_) {
    thread_local std::vector<double> tmp;
    tmp.resize(ncomp_);
    evaluate_multilinear(y, tmp);
    for (int c = 0; c < ncomp_; ++c) out[c] = tmp[c];
    return;
  }
  evaluate_modes(y, out);
  if (real_)
    for (auto& v : out) v = v.real();
}

std::vector<Complex> PeriodicField::evaluate_complex(std::span<const double> y) const {
  std::vector<Complex> out(ncomp_);
  evaluate_complex_into(y, out);
  return out;
}

std::vector<Complex> PeriodicField::mean_complex() const {
  std::vector<Complex> out(ncomp_, 0.0);
  if (repr_ == Representation::fourier) {
    for (const auto& mode : modes_)
      if (std::all_of(mode.k.begin(), mode.k.end(), [](int v) { return v == 0; }))
        for (int c = 0; c < ncomp_; ++c) out[c] += mode.amp[c];
    return out;
  }
  const std::size_t total = samples_.size() / ncomp_;
  for (std::size_t p = 0; p < total; ++p)
    for (int c = 0; c < ncomp_; ++c) out[c] += samples_[p * ncomp_ + c];
  for (auto& v : out) v /= static_cast<double>(total);
  return out;
}

std::vector<double> PeriodicField::mean() const {
  const auto mc = mean_complex();
  std::vector<double> out(ncomp_);
  for (int c = 0; c < ncomp_; ++c) out[c] = mc[c].real();
  return out;
}

double PeriodicField::max_wavenumber() const {
  if (repr_ == Representation::grid) return 0.5 * n_ * std::sqrt(static_cast<double>(d_));
  double kmax = 0.0;
  for (const auto& mode : modes_) {
    double s = 0.0;
    for (int v : mode.k) s += static_cast<double>(v) * v;
    kmax = std::max(kmax, std::sqrt(s));
  }
  return kmax;
}

int PeriodicField::max_frequency() const {
  if (repr_ == Representation::grid) return n_ / 2;
  int kmax = 0;
  for (const auto& mode : modes_)
    for (int v : mode.k) kmax = std::max(kmax, std::abs(v));
  return kmax;
}

std::vector<double> PeriodicField::sample_grid(int n) const {
  if (!real_) throw FieldError("complex field cannot be sampled on a real grid");
  if (repr_ == Representation::grid && n == n_) return samples_;
  std::size_t total = 1;
  for (int i = 0; i < d_; ++i) total *= static_cast<std::size_t>(n);
  std::vector<double> out(total * ncomp_);
  std::vector<double> y(d_);
  for (std::size_t p = 0; p < total; ++p) {
    std::size_t rem = p;
    for (int i = d_ - 1; i >= 0; --i) {
      y[i] = static_cast<double>(rem % n) / n;
      rem /= n;
    }
    evaluate_into(y, std::span<double>(out.data() + p * ncomp_, ncomp_));
  }
  return out;
}

PeriodicField PeriodicField::shifted(std::span<const double> shift) const {
  check_point(shift);
  if (repr_ == Representation::fourier) {
    PeriodicField f = *this;
    for (auto& mode : f.modes_) {
      double arg = 0.0;
      for (int i = 0; i < d_; ++i) arg += mode.k[i] * wrap_unit(shift[i]);
      const Complex phase = std::polar(1.0, kTwoPi * arg);
      for (auto& a : mode.amp) a *= phase;
    }
    return f;
  }
  std::vector<double> shift_copy(shift.begin(), shift.end());
  return sampled(kind_, d_, m_, n_, [&](std::span<const double> y, std::span<double> out) {
    std::vector<double> z(d_);
    for (int i = 0; i < d_; ++i) z[i] = y[i] + shift_copy[i];
    evaluate_into(z, out);
  });
}

PeriodicField PeriodicField::scaled(double c) const {
  PeriodicField f = *this;
  for (auto& mode : f.modes_)
    for (auto& a : mode.amp) a *= c;
  for (auto& mode : f.spectral_)
    for (auto& a : mode.amp) a *= c;
  for (auto& v : f.samples_) v *= c;
  return f;
}

PeriodicField PeriodicField::centered() const {
  const auto mu = mean_complex();
  PeriodicField f = *this;
  if (repr_ == Representation::fourier) {
    std::erase_if(f.modes_, [](const FourierMode& mode) {
      return std::all_of(mode.k.begin(), mode.k.end(), [](int v) { return v == 0; });
    });
    return f;
  }
  const std::size_t total = f.samples_.size() / ncomp_;
  for (std::size_t p = 0; p < total; ++p)
    for (int c = 0; c < ncomp_; ++c) f.samples_[p * ncomp_ + c] -= mu[c].real();
  if (f.trig_) f.build_spectral_cache();
  return f;
}

PeriodicField PeriodicField::as_tensor4(int m) const {
  if (kind_ == FieldKind::tensor4) {
    if (m != m_) throw FieldError("tensor4 field has a different system size");
    return *this;
  }
  if (kind_ != FieldKind::scalar) throw FieldError("only scalar fields promote to tensor4");
  const int nc = component_count(FieldKind::tensor4, d_, m);
  auto expand = [&](auto s, auto& out) {
    for (int a = 0; a < m; ++a)
      for (int i = 0; i < d_; ++i) out[tensor_index(a, a, i, i, d_, m)] = s;
  };
  if (repr_ == Representation::fourier) {
    std::vector<FourierMode> modes;
    for (const auto& mode : modes_) {
      FourierMode t{mode.k, std::vector<Complex>(nc, 0.0)};
      expand(mode.amp[0], t.amp);
      modes.push_back(std::move(t));
    }
    PeriodicField f = fourier(FieldKind::tensor4, d_, m, {}, real_);
    f.modes_ = std::move(modes);
    return f;
  }
  const std::size_t total = samples_.size();
  std::vector<double> out(total * nc, 0.0);
  for (std::size_t p = 0; p < total; ++p) {
    std::span<double> slot(out.data() + p * nc, nc);
    expand(samples_[p], slot);
  }
  return grid(FieldKind::tensor4, d_, m, n_, std::move(out));
}

EllipticityReport check_ellipticity(const PeriodicField& field, int n_samples, std::uint64_t seed) {
  if (field.kind() == FieldKind::vector) throw FieldError("ellipticity needs a square field kind");
  if (!field.is_real()) throw FieldError("ellipticity needs a real field");
  if (n_samples < 1) throw FieldError("n_samples must be positive");
  const int d = field.dimension();
  const int m = field.system_size();
  const int size = field.kind() == FieldKind::tensor4 ? m * d : (field.kind() == FieldKind::matrix ? m : 1);

  std::vector<std::vector<double>> points;
  const int lattice_total = std::max(1, n_samples / 2);
  const int per_axis = std::max(1, static_cast<int>(std::floor(std::pow(lattice_total, 1.0 / d) + 1e-9)));
  int lattice_count = 1;
  for (int i = 0; i < d; ++i) lattice_count *= per_axis;
  for (int p = 0; p < lattice_count; ++p) {
    std::vector<double> y(d);
    int rem = p;
    for (int i = d - 1; i >= 0; --i) {
      y[i] = static_cast<double>(rem % per_axis) / per_axis;
      rem /= per_axis;
    }
    points.push_back(std::move(y));
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  while (static_cast<int>(points.size()) < n_samples) {
    std::vector<double> y(d);
    for (auto& v : y) v = uni(rng);
    points.push_back(std::move(y));
  }

  EllipticityReport report;
  report.mu_lower = std::numeric_limits<double>::infinity();
  report.mu_upper = -std::numeric_limits<double>::infinity();
  Eigen::MatrixXd mat(size, size);
  std::vector<double> value(field.components());
  for (const auto& y : points) {
    field.evaluate_into(y, value);
    if (field.kind() == FieldKind::tensor4) {
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
          for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) mat(a * d + i, b * d + j) = value[tensor_index(a, b, i, j, d, m)];
    } else {
      for (int r = 0; r < size; ++r)
        for (int c = 0; c < size; ++c) mat(r, c) = value[r * size + c];
    }
    const Eigen::MatrixXd sym = 0.5 * (mat + mat.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    if (lo < report.mu_lower) {
      report.mu_lower = lo;
      report.argmin = y;
    }
    if (hi > report.mu_upper) {
      report.mu_upper = hi;
      report.argmax = y;
    }
  }
  return report;
}

}  // namespace homolab
