#pragma once

#include <Eigen/Dense>

#include <complex>
#include <memory>

namespace sprint::spectral {

/// Real <-> half-complex FFT of fixed size. Coefficients are normalized so
/// that u(x_k) = sum_j c_j exp(2 pi i j k / n); zero-padding the coefficient
/// vector therefore interpolates onto a finer grid without rescaling.
///
/// Owns FFTW plans and scratch buffers: not safe to share across threads.
class RealFft {
 public:
  explicit RealFft(int n);
  ~RealFft();
  RealFft(RealFft&&) noexcept;
  RealFft& operator=(RealFft&&) noexcept;
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  int size() const;
  int spectral_size() const { return size() / 2 + 1; }

  Eigen::VectorXcd forward(const Eigen::Ref<const Eigen::VectorXd>& u);
  /// Coefficient vectors shorter or longer than spectral_size() are
  /// zero-padded or truncated.
  Eigen::VectorXd inverse(const Eigen::Ref<const Eigen::VectorXcd>& c);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Angular wavenumbers 2 pi j / length for j = 0..n/2.
Eigen::VectorXd wavenumbers(int n, double length);

/// d^order/dx^order of a periodic sample vector on [0, length). The Nyquist
/// mode is dropped for odd orders.
Eigen::VectorXd differentiate(RealFft& fft, const Eigen::Ref<const Eigen::VectorXd>& u,
                              double length, int order);

}  // namespace sprint::spectral
