#pragma once

#include <cstdint>
#include <vector>

#include "sprint/ks.hpp"
#include "sprint/linalg.hpp"
#include "sprint/symlib.hpp"

namespace sprint::weakform {

using linalg::Index;

/// Uniform periodic-in-x grid of a trajectory.
struct Grid {
  Index nx = 0;
  Index nt = 0;
  double dx = 0.0;
  double dt = 0.0;
  static Grid of(const ks::TrajectoryRecord& traj);
};

/// Rectangle snapped to the grid: x indices x0 .. x0 + 2 hx (mod nx),
/// t indices t0 .. t0 + 2 ht. Rescaled coordinates run over [-1, 1].
struct Subdomain {
  Index x0 = 0;
  Index hx = 0;
  Index t0 = 0;
  Index ht = 0;
  double center_x(const Grid& g) const { return static_cast<double>(x0 + hx) * g.dx; }
  double center_t(const Grid& g) const { return static_cast<double>(t0 + ht) * g.dt; }
  double half_width_x(const Grid& g) const { return static_cast<double>(hx) * g.dx; }
  double half_width_t(const Grid& g) const { return static_cast<double>(ht) * g.dt; }
};

struct HalfWidths {
  double x = 0.0;
  double t = 0.0;
};

/// Default physical half-widths: L/8 in space, T/100 in time.
HalfWidths default_half_widths(const ks::TrajectoryRecord& traj);

/// Centers uniform over grid points: any x (periodic), t such that the
/// window fits. Half-widths are rounded to whole grid spacings and must
/// cover at least 4 spacings (9 points) per axis.
std::vector<Subdomain> sample_subdomains(const Grid& grid, HalfWidths half_widths, int count,
                                         std::uint64_t seed);

struct WeightSpec {
  int beta = 8;
};

/// (1 - s^2)^beta and its derivatives in s.
double envelope(double s, int beta, int derivative = 0);

struct ScaleModel {
  double mu_u = 1.0;
  double sigma_u = 1.0;
  double L_u = 1.0;
  double T_u = 1.0;
};

/// mu_u = mean |u|, sigma_u = std u, L_u = sigma_u / std u_x (spectral),
/// T_u = sigma_u / std u_t (central differences on interior samples).
ScaleModel estimate_scales(const ks::TrajectoryRecord& traj);

/// Product of per-factor scales: mu_u for a bare field, otherwise
/// sigma_u / (L_u^nx T_u^nt).
double scale_of(const symlib::SymbolicWord& word, const symlib::Alphabet& alphabet,
                const ScaleModel& scales);

/// Spatial derivatives of a single-field trajectory, computed spectrally on
/// the full periodic grid and cached by order.
class DerivativeFields {
 public:
  explicit DerivativeFields(const ks::TrajectoryRecord& traj);
  const Eigen::MatrixXd& order(int n);
  const Grid& grid() const { return grid_; }

 private:
  const ks::TrajectoryRecord* traj_;
  Grid grid_;
  std::vector<Eigen::MatrixXd> cache_;
  std::vector<bool> ready_;
};

/// Integral of envelope * word over the subdomain in rescaled coordinates
/// (trapezoid rule on grid points). Words with a time derivative must be a
/// single factor; the time derivative is moved onto the envelope.
double evaluate_word(const symlib::SymbolicWord& word, const symlib::Alphabet& alphabet,
                     DerivativeFields& fields, const Subdomain& omega, const WeightSpec& weight = {});

/// Integral of |envelope| over the subdomain in rescaled coordinates.
double weight_volume(const Subdomain& omega, const WeightSpec& weight = {});

struct FeatureBuild {
  linalg::FeatureMatrix G;
  Eigen::VectorXd column_scales;  // S_n
  ScaleModel scales;
};

/// G_mn = evaluate_word(n, m) / (V_m S_n).
FeatureBuild build_feature_matrix(const symlib::Library& library, const ks::TrajectoryRecord& traj,
                                  const std::vector<Subdomain>& subdomains,
                                  const WeightSpec& weight, const ScaleModel& scales);

/// Coefficients in physical units: c_n / S_n, aligned with c.support.
Eigen::VectorXd physical_coefficients(const linalg::CoefficientVector& c,
                                      const Eigen::VectorXd& column_scales);

}  // namespace sprint::weakform
