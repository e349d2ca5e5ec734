#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace homolab {

using Complex = std::complex<double>;

enum class FieldKind { scalar, vector, matrix, tensor4 };

std::string to_string(FieldKind kind);
FieldKind field_kind_from_string(const std::string& name);

/// Number of stored components for a field of the given kind.
/// tensor4 entries a_ij^{ab} are stored at ((a*m + b)*d + i)*d + j.
int component_count(FieldKind kind, int d, int m);

inline int tensor_index(int alpha, int beta, int i, int j, int d, int m) {
  return ((alpha * m + beta) * d + i) * d + j;
}

class FieldError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One Fourier mode k with one complex amplitude per component.
struct FourierMode {
  std::vector<int> k;
  std::vector<Complex> amp;
};

/// A 1-periodic coefficient field on the unit torus T^d.
///
/// Two representations are supported: a truncated Fourier series, and a
/// uniform grid of N^d samples at the points i/N. Real Fourier fields keep only
/// the half lattice (first nonzero index positive) and evaluate as
/// a_0 + 2 Re sum a_k e^{2 pi i k.y}; complex fields keep every mode.
/// Grid fields with N a power of two are interpolated trigonometrically,
/// otherwise multilinearly. Fields are immutable once built.
class PeriodicField {
 public:
  enum class Representation { fourier, grid };

  static PeriodicField fourier(FieldKind kind, int d, int m, std::vector<FourierMode> modes,
                               bool real = true);
  /// samples: row-major (N, ..., N, components), component index fastest.
  static PeriodicField grid(FieldKind kind, int d, int m, int n, std::vector<double> samples);
  static PeriodicField constant(FieldKind kind, int d, int m, std::vector<double> value);

  template <class Fn>
  static PeriodicField sampled(FieldKind kind, int d, int m, int n, Fn&& fn);

  FieldKind kind() const { return kind_; }
  Representation representation() const { return repr_; }
  int dimension() const { return d_; }
  int system_size() const { return m_; }
  int components() const { return ncomp_; }
  bool is_real() const { return real_; }
  int grid_size() const { return n_; }

  std::vector<double> evaluate(std::span<const double> y) const;
  void evaluate_into(std::span<const double> y, std::span<double> out) const;
  std::vector<Complex> evaluate_complex(std::span<const double> y) const;
  void evaluate_complex_into(std::span<const double> y, std::span<Complex> out) const;

  std::vector<double> mean() const;
  std::vector<Complex> mean_complex() const;

  /// Stored modes (half lattice for real Fourier fields). Empty for grid fields.
  const std::vector<FourierMode>& modes() const { return modes_; }
  /// Raw grid samples. Empty for Fourier fields.
  const std::vector<double>& samples() const { return samples_; }

  /// Largest Euclidean |k| among nonzero modes; N/2*sqrt(d) for grid fields.
  double max_wavenumber() const;
  /// Largest |k_i| among modes; N/2 for grid fields.
  int max_frequency() const;

  /// Samples every component on the n^d grid at points i/n; layout as grid().
  std::vector<double> sample_grid(int n) const;

  /// Field y -> field(y + shift).
  PeriodicField shifted(std::span<const double> shift) const;
  PeriodicField scaled(double c) const;
  /// Field minus its mean.
  PeriodicField centered() const;

  /// Scalar field s (or an existing tensor4) promoted to a_ij^{ab} = s delta_ij delta^{ab}.
  PeriodicField as_tensor4(int m) const;

 private:
  PeriodicField() = default;
  void check_point(std::span<const double> y) const;
  void build_spectral_cache();
  void evaluate_modes(std::span<const double> y, std::span<Complex> out) const;
  void evaluate_multilinear(std::span<const double> y, std::span<double> out) const;

  FieldKind kind_ = FieldKind::scalar;
  Representation repr_ = Representation::fourier;
  int d_ = 2;
  int m_ = 1;
  int ncomp_ = 1;
  bool real_ = true;
  int n_ = 0;
  std::vector<FourierMode> modes_;
  std::vector<double> samples_;
  // Trigonometric interpolant of power-of-two grids, full lattice.
  std::vector<FourierMode> spectral_;
  bool trig_ = false;
};

template <class Fn>
PeriodicField PeriodicField::sampled(FieldKind kind, int d, int m, int n, Fn&& fn) {
  const int nc = component_count(kind, d, m);
  std::size_t total = 1;
  for (int i = 0; i < d; ++i) total *= static_cast<std::size_t>(n);
  std::vector<double> samples(total * nc);
  std::vector<double> y(d);
  std::vector<double> value(nc);
  for (std::size_t p = 0; p < total; ++p) {
    std::size_t rem = p;
    for (int i = d - 1; i >= 0; --i) {
      y[i] = static_cast<double>(rem % n) / n;
      rem /= n;
    }
    fn(std::span<const double>(y), std::span<double>(value));
    for (int c = 0; c < nc; ++c) samples[p * nc + c] = value[c];
  }
  return grid(kind, d, m, n, std::move(samples));
}

struct EllipticityReport {
  double mu_lower = 0.0;
  double mu_upper = 0.0;
  std::vector<double> argmin;
  std::vector<double> argmax;
};

/// Extremes of the symmetric-part spectrum of the quadratic form over sampled
/// points: A's Legendre form for tensor4, eta^T b eta for matrix (1x1 for scalar).
/// Half of the samples lie on a regular lattice, half are drawn from `seed`.
EllipticityReport check_ellipticity(const PeriodicField& field, int n_samples,
                                    std::uint64_t seed = 2024);

}  // namespace homolab
