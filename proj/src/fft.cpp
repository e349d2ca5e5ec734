#include "homolab/fft.hpp"

#include <fftw3.h>

#include <mutex>
#include <stdexcept>

namespace homolab {

namespace {
std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

RealFft::RealFft(int d, int n) : d_(d), n_(n) {
  if (d < 1 || d > 3 || n < 2) throw std::invalid_argument("RealFft: unsupported shape");
  real_size_ = 1;
  for (int i = 0; i < d; ++i) real_size_ *= static_cast<std::size_t>(n);
  spectral_size_ = real_size_ / n * (n / 2 + 1);

  std::vector<int> dims(d, n);
  std::vector<double> re(real_size_);
  std::vector<fftw_complex> sp(spectral_size_);
  std::lock_guard<std::mutex> lock(plan_mutex());
  plan_fwd_ = fftw_plan_dft_r2c(d, dims.data(), re.data(), sp.data(), FFTW_ESTIMATE);
  plan_bwd_ = fftw_plan_dft_c2r(d, dims.data(), sp.data(), re.data(), FFTW_ESTIMATE);
  if (!plan_fwd_ || !plan_bwd_) throw std::runtime_error("RealFft: FFTW planning failed");
}

RealFft::~RealFft() {
  std::lock_guard<std::mutex> lock(plan_mutex());
  if (plan_fwd_) fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
  if (plan_bwd_) fftw_destroy_plan(static_cast<fftw_plan>(plan_bwd_));
}

void RealFft::forward(std::span<const double> in, std::span<std::complex<double>> out) const {
  if (in.size() != real_size_ || out.size() != spectral_size_)
    throw std::invalid_argument("RealFft::forward: size mismatch");
  // r2c does not modify its input when planned out of place.
  fftw_execute_dft_r2c(static_cast<fftw_plan>(plan_fwd_), const_cast<double*>(in.data()),
                       reinterpret_cast<fftw_complex*>(out.data()));
}

void RealFft::backward(std::span<const std::complex<double>> in, std::span<double> out) const {
  if (in.size() != spectral_size_ || out.size() != real_size_)
    throw std::invalid_argument("RealFft::backward: size mismatch");
  // c2r destroys its input.
  std::vector<std::complex<double>> scratch(in.begin(), in.end());
  fftw_execute_dft_c2r(static_cast<fftw_plan>(plan_bwd_),
                       reinterpret_cast<fftw_complex*>(scratch.data()), out.data());
  const double scale = 1.0 / static_cast<double>(real_size_);
  for (double& v : out) v *= scale;
}

void RealFft::wavenumber(std::size_t idx, std::span<int> k) const {
  const int last = n_ / 2 + 1;
  int q = static_cast<int>(idx % last);
  k[d_ - 1] = q;
  idx /= last;
  for (int i = d_ - 2; i >= 0; --i) {
    const int qi = static_cast<int>(idx % n_);
    idx /= n_;
    k[i] = qi <= n_ / 2 ? qi : qi - n_;
  }
}

std::vector<std::complex<double>> complex_dft(int d, int n, std::span<const std::complex<double>> in) {
  std::vector<int> dims(d, n);
  std::vector<std::complex<double>> src(in.begin(), in.end());
  std::vector<std::complex<double>> out(src.size());
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(plan_mutex());
    plan = fftw_plan_dft(d, dims.data(), reinterpret_cast<fftw_complex*>(src.data()),
                         reinterpret_cast<fftw_complex*>(out.data()), FFTW_FORWARD, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(plan_mutex());
    fftw_destroy_plan(plan);
  }
  return out;
}

}  // namespace homolab
