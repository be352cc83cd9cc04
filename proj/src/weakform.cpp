#include "sprint/weakform.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "sprint/error.hpp"
#include "sprint/spectral.hpp"

namespace sprint::weakform {

namespace {

constexpr Index kMinHalfPoints = 4;

struct FactorOrders {
  int x = 0;
  int t = 0;
};

FactorOrders orders_of(const symlib::Factor& f, const symlib::Alphabet& alphabet) {
  FactorOrders o;
  for (std::size_t d = 0; d < f.counts.size(); ++d) {
    if (f.counts[d] == 0) continue;
    const std::string& axis = alphabet.derivatives().at(d);
    if (axis == "x") {
      o.x = f.counts[d];
    } else if (axis == "t") {
      o.t = f.counts[d];
    } else {
      throw ConfigError("weak form: derivative axis '" + axis + "' is not on the trajectory grid");
    }
  }
  return o;
}

Eigen::VectorXd envelope_samples(Index h, int beta, int derivative) {
  Eigen::VectorXd v(2 * h + 1);
  for (Index i = 0; i <= 2 * h; ++i) {
    v(i) = envelope(static_cast<double>(i - h) / static_cast<double>(h), beta, derivative);
  }
  return v;
}

// (2 ht + 1) x (2 hx + 1) block of `field`, x wrapped periodically.
Eigen::MatrixXd block(const Eigen::MatrixXd& field, const Subdomain& omega) {
  const Index nx = field.cols();
  Eigen::MatrixXd out(2 * omega.ht + 1, 2 * omega.hx + 1);
  for (Index j = 0; j <= 2 * omega.hx; ++j) {
    out.col(j) = field.col((omega.x0 + j) % nx).segment(omega.t0, 2 * omega.ht + 1);
  }
  return out;
}

double population_std(const Eigen::ArrayXXd& a) {
  const double mean = a.mean();
  return std::sqrt((a - mean).square().mean());
}

}  // namespace

Grid Grid::of(const ks::TrajectoryRecord& traj) {
  Grid g;
  g.nx = traj.u.cols();
  g.nt = traj.u.rows();
  g.dx = traj.config.length / static_cast<double>(g.nx);
  g.dt = traj.config.duration / static_cast<double>(g.nt - 1);
  return g;
}

HalfWidths default_half_widths(const ks::TrajectoryRecord& traj) {
  return {traj.config.length / 8.0, traj.config.duration / 100.0};
}

std::vector<Subdomain> sample_subdomains(const Grid& grid, HalfWidths half_widths, int count,
                                         std::uint64_t seed) {
  if (count < 1) throw ConfigError("subdomains: count must be >= 1");
  if (!(half_widths.x > 0.0) || !(half_widths.t > 0.0)) {
    throw ConfigError("subdomains: half-widths must be positive");
  }
  const auto hx = static_cast<Index>(std::llround(half_widths.x / grid.dx));
  const auto ht = static_cast<Index>(std::llround(half_widths.t / grid.dt));
  if (2 * hx + 1 > grid.nx || 2 * ht + 1 > grid.nt) {
    throw ConfigError("subdomains: window larger than the domain");
  }
  if (hx < kMinHalfPoints || ht < kMinHalfPoints) {
    throw ConfigError("subdomains: window spans fewer than 9 grid points on an axis");
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Index> pick_x(0, grid.nx - 1);
  std::uniform_int_distribution<Index> pick_t(0, grid.nt - 1 - 2 * ht);
  std::vector<Subdomain> out(static_cast<std::size_t>(count));
  for (auto& s : out) {
    s.hx = hx;
    s.ht = ht;
    s.x0 = pick_x(rng);
    s.t0 = pick_t(rng);
  }
  return out;
}

double envelope(double s, int beta, int derivative) {
  if (beta < 2) throw ConfigError("envelope: beta must be >= 2");
  if (derivative < 0) throw std::invalid_argument("envelope: negative derivative order");
  // (1 - s^2)^beta = sum_k binom(beta, k) (-1)^k s^{2k}
  double sum = 0.0;
  double binom = 1.0;
  for (int k = 0; k <= beta; ++k) {
    const int power = 2 * k;
    if (power >= derivative) {
      double falling = 1.0;
      for (int i = 0; i < derivative; ++i) falling *= power - i;
      sum += ((k % 2 == 0) ? binom : -binom) * falling * std::pow(s, power - derivative);
    }
    binom = binom * (beta - k) / (k + 1);
  }
  return sum;
}

ScaleModel estimate_scales(const ks::TrajectoryRecord& traj) {
  const Eigen::ArrayXXd u = traj.u.array();
  ScaleModel m;
  m.mu_u = u.abs().mean();
  m.sigma_u = population_std(u);

  spectral::RealFft fft(static_cast<int>(u.cols()));
  Eigen::ArrayXXd ux(u.rows(), u.cols());
  for (Index i = 0; i < u.rows(); ++i) {
    ux.row(i) = spectral::differentiate(fft, traj.u.row(i).transpose(), traj.config.length, 1)
                    .transpose()
                    .array();
  }
  const double dt = traj.config.duration / static_cast<double>(u.rows() - 1);
  const Eigen::ArrayXXd ut =
      (u.bottomRows(u.rows() - 2) - u.topRows(u.rows() - 2)) / (2.0 * dt);
  m.L_u = m.sigma_u / population_std(ux);
  m.T_u = m.sigma_u / population_std(ut);
  if (!(m.mu_u > 0.0 && m.sigma_u > 0.0 && std::isfinite(m.L_u) && m.L_u > 0.0 &&
        std::isfinite(m.T_u) && m.T_u > 0.0)) {
    throw NumericalError("scale estimation: degenerate (constant or stationary) field");
  }
  return m;
}

double scale_of(const symlib::SymbolicWord& word, const symlib::Alphabet& alphabet,
                const ScaleModel& scales) {
  double s = 1.0;
  for (const auto& f : word.factors()) {
    const FactorOrders o = orders_of(f, alphabet);
    if (o.x == 0 && o.t == 0) {
      s *= scales.mu_u;
    } else {
      s *= scales.sigma_u / (std::pow(scales.L_u, o.x) * std::pow(scales.T_u, o.t));
    }
  }
  return s;
}

DerivativeFields::DerivativeFields(const ks::TrajectoryRecord& traj)
    : traj_(&traj), grid_(Grid::of(traj)) {}

const Eigen::MatrixXd& DerivativeFields::order(int n) {
  if (n < 0) throw std::invalid_argument("derivative order must be >= 0");
  const auto idx = static_cast<std::size_t>(n);
  if (idx >= cache_.size()) {
    cache_.resize(idx + 1);
    ready_.resize(idx + 1, false);
  }
  if (!ready_[idx]) {
    if (n == 0) {
      cache_[idx] = traj_->u;
    } else {
      spectral::RealFft fft(static_cast<int>(grid_.nx));
      Eigen::MatrixXd d(grid_.nt, grid_.nx);
      for (Index i = 0; i < grid_.nt; ++i) {
        d.row(i) = spectral::differentiate(fft, traj_->u.row(i).transpose(),
                                           traj_->config.length, n)
                       .transpose();
      }
      cache_[idx] = std::move(d);
    }
    ready_[idx] = true;
  }
  return cache_[idx];
}

namespace {

// Per-order blocks of one subdomain, gathered lazily.
class SubdomainBlocks {
 public:
  SubdomainBlocks(DerivativeFields& fields, const Subdomain& omega) : fields_(fields), omega_(omega) {}
  const Eigen::MatrixXd& order(int n) {
    const auto idx = static_cast<std::size_t>(n);
    if (idx >= blocks_.size()) blocks_.resize(idx + 1);
    if (blocks_[idx].size() == 0) blocks_[idx] = block(fields_.order(n), omega_);
    return blocks_[idx];
  }

 private:
  DerivativeFields& fields_;
  const Subdomain& omega_;
  std::vector<Eigen::MatrixXd> blocks_;
};

double evaluate_in(const symlib::SymbolicWord& word, const symlib::Alphabet& alphabet,
                   SubdomainBlocks& blocks, const Subdomain& omega, const Grid& g,
                   const WeightSpec& weight) {
  const Index rows = 2 * omega.ht + 1;
  const Index cols = 2 * omega.hx + 1;
  int t_order = 0;
  Eigen::MatrixXd f = Eigen::MatrixXd::Ones(rows, cols);
  for (const auto& factor : word.factors()) {
    if (factor.field != 0) {
      throw ConfigError("weak form: word references a field the trajectory does not carry");
    }
    const FactorOrders o = orders_of(factor, alphabet);
    if (o.t > 0) {
      if (word.factors().size() != 1) {
        throw ConfigError("weak form: time derivatives are supported only in single-factor words");
      }
      t_order = o.t;
    }
    f.array() *= blocks.order(o.x).array();
  }
  // Time derivatives move onto the envelope: d/dt = (1/Ht) d/dt_bar.
  const Eigen::VectorXd phi_x = envelope_samples(omega.hx, weight.beta, 0);
  const Eigen::VectorXd phi_t = envelope_samples(omega.ht, weight.beta, t_order);
  double sign_scale = 1.0;
  if (t_order > 0) {
    sign_scale = ((t_order % 2 == 0) ? 1.0 : -1.0) / std::pow(omega.half_width_t(g), t_order);
  }
  const double cell = 1.0 / static_cast<double>(omega.hx * omega.ht);
  return sign_scale * cell * phi_t.dot(f * phi_x);
}

void check_inside(const Subdomain& omega, const Grid& g) {
  if (omega.t0 < 0 || omega.t0 + 2 * omega.ht + 1 > g.nt || 2 * omega.hx + 1 > g.nx ||
      omega.x0 < 0 || omega.hx < 1 || omega.ht < 1) {
    throw ConfigError("weak form: subdomain outside the trajectory");
  }
}

}  // namespace

double evaluate_word(const symlib::SymbolicWord& word, const symlib::Alphabet& alphabet,
                     DerivativeFields& fields, const Subdomain& omega, const WeightSpec& weight) {
  check_inside(omega, fields.grid());
  SubdomainBlocks blocks(fields, omega);
  return evaluate_in(word, alphabet, blocks, omega, fields.grid(), weight);
}

double weight_volume(const Subdomain& omega, const WeightSpec& weight) {
  const Eigen::VectorXd phi_x = envelope_samples(omega.hx, weight.beta, 0);
  const Eigen::VectorXd phi_t = envelope_samples(omega.ht, weight.beta, 0);
  return phi_x.cwiseAbs().sum() * phi_t.cwiseAbs().sum() /
         static_cast<double>(omega.hx * omega.ht);
}

FeatureBuild build_feature_matrix(const symlib::Library& library, const ks::TrajectoryRecord& traj,
                                  const std::vector<Subdomain>& subdomains,
                                  const WeightSpec& weight, const ScaleModel& scales) {
  if (library.size() == 0) throw ConfigError("featurize: empty library");
  if (subdomains.empty()) throw ConfigError("featurize: no subdomains");
  const auto terms = library.terms();
  const auto m = static_cast<Index>(subdomains.size());
  const auto n = static_cast<Index>(terms.size());

  FeatureBuild out;
  out.scales = scales;
  out.column_scales.resize(n);
  for (Index j = 0; j < n; ++j) {
    out.column_scales(j) = scale_of(terms[static_cast<std::size_t>(j)], library.alphabet, scales);
  }

  DerivativeFields fields(traj);
  Eigen::MatrixXd values(m, n);
  for (Index i = 0; i < m; ++i) {
    const auto& omega = subdomains[static_cast<std::size_t>(i)];
    check_inside(omega, fields.grid());
    SubdomainBlocks blocks(fields, omega);
    const double v = weight_volume(omega, weight);
    for (Index j = 0; j < n; ++j) {
      values(i, j) = evaluate_in(terms[static_cast<std::size_t>(j)], library.alphabet, blocks,
                                 omega, fields.grid(), weight) /
                     (v * out.column_scales(j));
    }
  }
  out.G = linalg::FeatureMatrix(std::move(values), library.labels());
  return out;
}

Eigen::VectorXd physical_coefficients(const linalg::CoefficientVector& c,
                                      const Eigen::VectorXd& column_scales) {
  Eigen::VectorXd out(c.values.size());
  for (Index i = 0; i < c.values.size(); ++i) {
    out(i) = c.values(i) / column_scales(c.support[static_cast<std::size_t>(i)]);
  }
  return out;
}

}  // namespace sprint::weakform
