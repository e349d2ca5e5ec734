#pragma once

#include <complex>
#include <span>
#include <vector>

namespace homolab {

/// Real-to-complex transforms on an N^d periodic grid (FFTW backed).
/// Plans are created once under a global lock; execute() is thread safe as
/// long as each caller passes its own buffers. Forward is unnormalized,
/// backward divides by N^d so backward(forward(u)) == u.
class RealFft {
 public:
  RealFft(int d, int n);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  int dimension() const { return d_; }
  int size() const { return n_; }
  std::size_t real_size() const { return real_size_; }
  /// Number of complex coefficients in the half spectrum (last axis N/2+1).
  std::size_t spectral_size() const { return spectral_size_; }

  void forward(std::span<const double> in, std::span<std::complex<double>> out) const;
  void backward(std::span<const std::complex<double>> in, std::span<double> out) const;

  /// Signed integer wavenumbers of half-spectrum entry `idx`.
  void wavenumber(std::size_t idx, std::span<int> k) const;

 private:
  int d_;
  int n_;
  std::size_t real_size_;
  std::size_t spectral_size_;
  void* plan_fwd_ = nullptr;
  void* plan_bwd_ = nullptr;
};

/// Unnormalized forward complex DFT of an N^d row-major array.
std::vector<std::complex<double>> complex_dft(int d, int n, std::span<const std::complex<double>> in);

}  // namespace homolab
