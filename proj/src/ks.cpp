#include "sprint/ks.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace sprint::ks {

namespace {

struct GaussLegendre3 {
  Eigen::Matrix3d a;
  Eigen::Vector3d b;
  GaussLegendre3() {
    const double r = std::sqrt(15.0);
    a << 5.0 / 36.0, 2.0 / 9.0 - r / 15.0, 5.0 / 36.0 - r / 30.0,  //
        5.0 / 36.0 + r / 24.0, 2.0 / 9.0, 5.0 / 36.0 - r / 24.0,    //
        5.0 / 36.0 + r / 30.0, 2.0 / 9.0 + r / 15.0, 5.0 / 36.0;
    b << 5.0 / 18.0, 4.0 / 9.0, 5.0 / 18.0;
  }
};

const GaussLegendre3& tableau() {
  static const GaussLegendre3 t;
  return t;
}

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

void SimConfig::validate() const {
  if (!(length > 0.0) || !(duration > 0.0)) throw ConfigError("simulation: length and duration must be positive");
  if (!is_power_of_two(nx) || nx < 8) throw ConfigError("simulation: nx must be a power of two >= 8");
  if (nt < 2) throw ConfigError("simulation: nt must be >= 2");
  if (!(epsilon >= 0.0)) throw ConfigError("simulation: epsilon must be >= 0");
  if (!(newton_tol > 0.0) || max_newton_iterations < 1) throw ConfigError("simulation: bad Newton settings");
  if (substeps < 1) throw ConfigError("simulation: substeps must be >= 1");
  if (pad_factor < 4) throw ConfigError("simulation: pad_factor must be >= 4 to dealias u^6");
}

Eigen::VectorXd initial_condition(const SimConfig& config) {
  Eigen::VectorXd u(config.nx);
  for (int i = 0; i < config.nx; ++i) {
    const double s = 2.0 * std::numbers::pi * i / config.nx;
    u(i) = std::cos(3.0 * s) - 0.5 * std::sin(s);
  }
  return u;
}

Gl6Result gauss_legendre6_step(Eigen::VectorXcd& y, double dt, const VectorField& f,
                               const Eigen::VectorXd& linear, const Eigen::VectorXd& norm_weights,
                               double tol, int max_iterations) {
  if (!(dt > 0.0)) throw std::invalid_argument("gl6: dt must be positive");
  const Eigen::Index n = y.size();
  if (linear.size() != n || norm_weights.size() != n) throw std::invalid_argument("gl6: size mismatch");
  const auto& gl = tableau();

  // Per-component (I - dt * lambda * A)^{-1}: the simplified Newton matrix.
  std::vector<Eigen::Matrix3d> solve(static_cast<std::size_t>(n));
  for (Eigen::Index c = 0; c < n; ++c) {
    solve[static_cast<std::size_t>(c)] =
        (Eigen::Matrix3d::Identity() - dt * linear(c) * gl.a).inverse();
  }

  const Eigen::VectorXcd f0 = f(y);
  std::array<Eigen::VectorXcd, 3> k = {f0, f0, f0};
  std::array<Eigen::VectorXcd, 3> r;
  Gl6Result result;
  for (int it = 0;; ++it) {
    double norm2 = 0.0;
    for (int i = 0; i < 3; ++i) {
      Eigen::VectorXcd stage = y;
      for (int j = 0; j < 3; ++j) stage += (dt * gl.a(i, j)) * k[j];
      r[i] = k[i] - f(stage);
      norm2 += norm_weights.dot(r[i].cwiseAbs2());
    }
    result.residual = std::sqrt(norm2);
    result.iterations = it;
    if (!std::isfinite(result.residual)) throw NumericalError("blowup");
    if (result.residual < tol) break;
    if (it >= max_iterations) throw NumericalError("stage solve diverged");
    for (Eigen::Index c = 0; c < n; ++c) {
      const auto& m = solve[static_cast<std::size_t>(c)];
      const Eigen::Vector3cd rc(r[0](c), r[1](c), r[2](c));
      const Eigen::Vector3cd dk = -(m.cast<std::complex<double>>() * rc);
      for (int i = 0; i < 3; ++i) k[i](c) += dk(i);
    }
  }
  for (int i = 0; i < 3; ++i) y += (dt * gl.b(i)) * k[i];
  return result;
}

KsSystem::KsSystem(const SimConfig& config)
    : config_(config),
      grid_fft_((config.validate(), config.nx)),
      padded_fft_(config.pad_factor * config.nx) {
  q_ = spectral::wavenumbers(config_.nx, config_.length);
  linear_ = q_.array().square() - q_.array().pow(4);
  weights_ = Eigen::VectorXd::Constant(q_.size(), 2.0 * config_.nx);
  weights_(0) = config_.nx;
  weights_(q_.size() - 1) = config_.nx;
}

Eigen::VectorXcd KsSystem::to_spectral(const Eigen::VectorXd& u) {
  Eigen::VectorXcd c = grid_fft_.forward(u);
  c(c.size() - 1) = 0.0;
  return c;
}

Eigen::VectorXd KsSystem::to_physical(const Eigen::VectorXcd& u_hat) {
  return grid_fft_.inverse(u_hat);
}

Eigen::VectorXcd KsSystem::nonlinear(const Eigen::VectorXcd& u_hat) {
  const Eigen::VectorXd u = padded_fft_.inverse(u_hat);
  const double eps = config_.epsilon;
  Eigen::VectorXd p(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    const double v = u(i);
    const double v2 = v * v;
    const double v3 = v2 * v;
    p(i) = -0.5 * v2 + eps * (v3 + v3 * v + v3 * v2 + v3 * v3);
  }
  const Eigen::VectorXcd p_hat = padded_fft_.forward(p);
  Eigen::VectorXcd out(u_hat.size());
  const std::complex<double> iunit(0.0, 1.0);
  for (Eigen::Index j = 0; j < out.size(); ++j) out(j) = iunit * q_(j) * p_hat(j);
  out(out.size() - 1) = 0.0;
  return out;
}

Eigen::VectorXcd KsSystem::rhs(const Eigen::VectorXcd& u_hat) {
  Eigen::VectorXcd out = nonlinear(u_hat);
  out += linear_.cast<std::complex<double>>().cwiseProduct(u_hat);
  if (!out.allFinite()) throw NumericalError("blowup");
  return out;
}

Gl6Result KsSystem::gl6_step(Eigen::VectorXcd& u_hat, double dt) {
  return gauss_legendre6_step(
      u_hat, dt, [this](const Eigen::VectorXcd& v) { return rhs(v); }, linear_, weights_,
      config_.newton_tol, config_.max_newton_iterations);
}

Eigen::VectorXd gl6_step(const Eigen::VectorXd& u, double dt, const SimConfig& config) {
  KsSystem sys(config);
  Eigen::VectorXcd u_hat = sys.to_spectral(u);
  sys.gl6_step(u_hat, dt);
  return sys.to_physical(u_hat);
}

TrajectoryRecord simulate(const SimConfig& config) {
  KsSystem sys(config);
  TrajectoryRecord rec;
  rec.config = config;
  rec.u.resize(config.nt, config.nx);
  rec.x = Eigen::VectorXd::LinSpaced(config.nx, 0.0, config.length * (config.nx - 1) / config.nx);
  rec.t = Eigen::VectorXd::LinSpaced(config.nt, 0.0, config.duration);

  Eigen::VectorXcd u_hat = sys.to_spectral(initial_condition(config));
  rec.u.row(0) = sys.to_physical(u_hat).transpose();
  const double dt = config.step();
  long total_iterations = 0;
  for (int s = 1; s < config.nt; ++s) {
    for (int sub = 0; sub < config.substeps; ++sub) {
      try {
        total_iterations += sys.gl6_step(u_hat, dt).iterations;
      } catch (const NumericalError& e) {
        std::ostringstream msg;
        msg << "simulation failed (" << e.what() << "); last good time t = " << rec.t(s - 1);
        throw NumericalError(msg.str());
      }
    }
    rec.u.row(s) = sys.to_physical(u_hat).transpose();
  }
  rec.mean_newton_iterations =
      static_cast<double>(total_iterations) / ((config.nt - 1.0) * config.substeps);
  return rec;
}

TrajectoryRecord add_noise(TrajectoryRecord trajectory, const NoiseSpec& spec) {
  if (!(spec.stddev > 0.0)) throw ConfigError("noise: stddev must be positive");
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(spec.mean, spec.stddev);
  for (Eigen::Index i = 0; i < trajectory.u.rows(); ++i) {
    for (Eigen::Index j = 0; j < trajectory.u.cols(); ++j) {
      trajectory.u(i, j) += spec.amplitude * normal(rng);
    }
  }
  trajectory.noise = spec;
  return trajectory;
}

}  // namespace sprint::ks
