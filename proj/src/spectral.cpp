#include "sprint/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sprint::spectral {

struct RealFft::Impl {
  int n = 0;
  double* real = nullptr;
  fftw_complex* complex = nullptr;
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;

  explicit Impl(int size) : n(size) {
    real = fftw_alloc_real(static_cast<std::size_t>(n));
    complex = fftw_alloc_complex(static_cast<std::size_t>(n / 2 + 1));
    forward = fftw_plan_dft_r2c_1d(n, real, complex, FFTW_ESTIMATE);
    backward = fftw_plan_dft_c2r_1d(n, complex, real, FFTW_ESTIMATE);
  }
  ~Impl() {
    fftw_destroy_plan(forward);
    fftw_destroy_plan(backward);
    fftw_free(real);
    fftw_free(complex);
  }
};

RealFft::RealFft(int n) {
  if (n < 2 || n % 2 != 0) throw std::invalid_argument("RealFft: size must be even and >= 2");
  impl_ = std::make_unique<Impl>(n);
}

RealFft::~RealFft() = default;
RealFft::RealFft(RealFft&&) noexcept = default;
RealFft& RealFft::operator=(RealFft&&) noexcept = default;

int RealFft::size() const { return impl_->n; }

Eigen::VectorXcd RealFft::forward(const Eigen::Ref<const Eigen::VectorXd>& u) {
  const int n = impl_->n;
  if (u.size() != n) throw std::invalid_argument("RealFft::forward: length mismatch");
  for (int i = 0; i < n; ++i) impl_->real[i] = u(i);
  fftw_execute(impl_->forward);
  Eigen::VectorXcd c(n / 2 + 1);
  const double scale = 1.0 / n;
  for (int j = 0; j <= n / 2; ++j) {
    c(j) = std::complex<double>(impl_->complex[j][0], impl_->complex[j][1]) * scale;
  }
  return c;
}

Eigen::VectorXd RealFft::inverse(const Eigen::Ref<const Eigen::VectorXcd>& c) {
  const int n = impl_->n;
  const int half = n / 2;
  const auto available = static_cast<int>(c.size());
  for (int j = 0; j <= half; ++j) {
    std::complex<double> v = j < available ? c(j) : std::complex<double>{};
    // A truncated spectrum would leave an unpaired mode at the new Nyquist.
    if (j == half && available > half + 1) v = {};
    impl_->complex[j][0] = v.real();
    impl_->complex[j][1] = v.imag();
  }
  // The imaginary parts of the mean and Nyquist modes do not exist for real data.
  impl_->complex[0][1] = 0.0;
  impl_->complex[half][1] = 0.0;
  fftw_execute(impl_->backward);
  return Eigen::Map<Eigen::VectorXd>(impl_->real, n);
}

Eigen::VectorXd wavenumbers(int n, double length) {
  Eigen::VectorXd q(n / 2 + 1);
  for (int j = 0; j <= n / 2; ++j) q(j) = 2.0 * std::numbers::pi * j / length;
  return q;
}

Eigen::VectorXd differentiate(RealFft& fft, const Eigen::Ref<const Eigen::VectorXd>& u,
                              double length, int order) {
  if (order == 0) return u;
  Eigen::VectorXcd c = fft.forward(u);
  const Eigen::VectorXd q = wavenumbers(fft.size(), length);
  const std::complex<double> iunit(0.0, 1.0);
  for (Eigen::Index j = 0; j < c.size(); ++j) c(j) *= std::pow(iunit * q(j), order);
  if (order % 2 != 0) c(c.size() - 1) = 0.0;
  return fft.inverse(c);
}

}  // namespace sprint::spectral
