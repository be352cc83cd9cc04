#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>

#include "sprint/error.hpp"
#include "sprint/spectral.hpp"

namespace sprint::ks {

/// Modified Kuramoto-Sivashinsky run:
///   u_t + u u_x + u_xx + u_xxxx - epsilon * sum_{k=3..6} (u^k)_x = 0
/// on a periodic domain of length L.
struct SimConfig {
  double length = 22.0;
  double duration = 400.0;
  int nx = 128;
  int nt = 5120;  // stored samples, t = 0 .. duration inclusive
  double epsilon = 1e-6;
  double newton_tol = 1e-9;
  int max_newton_iterations = 100;
  int substeps = 1;    // integration steps per stored sample interval
  int pad_factor = 4;  // dealiasing grid = pad_factor * nx

  void validate() const;
  double sample_interval() const { return duration / (nt - 1); }
  double step() const { return sample_interval() / substeps; }
};

struct NoiseSpec {
  double amplitude = 1e-7;
  double mean = 0.0;
  double stddev = 0.218;
  std::uint64_t seed = 0;
};

struct TrajectoryRecord {
  Eigen::MatrixXd u;  // nt x nx, row = time sample
  Eigen::VectorXd x;
  Eigen::VectorXd t;
  SimConfig config;
  std::optional<NoiseSpec> noise;
  double mean_newton_iterations = 0.0;
};

/// Initial field cos(3 s) - sin(s)/2 with s = 2 pi x / L.
Eigen::VectorXd initial_condition(const SimConfig& config);

struct Gl6Result {
  int iterations = 0;
  double residual = 0.0;
};

/// One step of the 3-stage Gauss-Legendre Runge-Kutta method for
/// y' = f(y). Stage equations are solved by simplified Newton iterations
/// whose Jacobian is the diagonal `linear` part of f (exact for the stiff
/// linear terms); `norm_weights` define the squared l2 norm of the stage
/// residual. Throws NumericalError("stage solve diverged") if the residual
/// does not drop below `tol` within `max_iterations`.
using VectorField = std::function<Eigen::VectorXcd(const Eigen::VectorXcd&)>;
Gl6Result gauss_legendre6_step(Eigen::VectorXcd& y, double dt, const VectorField& f,
                               const Eigen::VectorXd& linear, const Eigen::VectorXd& norm_weights,
                               double tol, int max_iterations);

/// Pseudospectral KS operator on the half-complex coefficients of a real
/// field. Holds FFT plans; one instance per thread.
class KsSystem {
 public:
  explicit KsSystem(const SimConfig& config);

  const SimConfig& config() const { return config_; }
  const Eigen::VectorXd& wavenumbers() const { return q_; }
  /// Diagonal of the linear part: q^2 - q^4.
  const Eigen::VectorXd& linear_diagonal() const { return linear_; }
  /// Weights turning coefficient magnitudes into the physical-grid l2 norm.
  const Eigen::VectorXd& norm_weights() const { return weights_; }

  Eigen::VectorXcd to_spectral(const Eigen::VectorXd& u);
  Eigen::VectorXd to_physical(const Eigen::VectorXcd& u_hat);

  /// Full right-hand side: linear part plus dealiased nonlinear terms.
  Eigen::VectorXcd rhs(const Eigen::VectorXcd& u_hat);
  /// -(u^2/2)_x + epsilon * sum_k (u^k)_x, products on the padded grid.
  Eigen::VectorXcd nonlinear(const Eigen::VectorXcd& u_hat);

  Gl6Result gl6_step(Eigen::VectorXcd& u_hat, double dt);

 private:
  SimConfig config_;
  Eigen::VectorXd q_;
  Eigen::VectorXd linear_;
  Eigen::VectorXd weights_;
  spectral::RealFft grid_fft_;
  spectral::RealFft padded_fft_;
};

/// Physical-space convenience wrapper around KsSystem::gl6_step.
Eigen::VectorXd gl6_step(const Eigen::VectorXd& u, double dt, const SimConfig& config);

/// Integrates from initial_condition() and stores nt equispaced samples.
/// Throws NumericalError naming the last good time on blowup.
TrajectoryRecord simulate(const SimConfig& config);

/// u <- u + amplitude * N(mean, stddev^2), i.i.d. per sample.
TrajectoryRecord add_noise(TrajectoryRecord trajectory, const NoiseSpec& spec);

}  // namespace sprint::ks
