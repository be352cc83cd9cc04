#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "sprint/linalg.hpp"

namespace sprint::secular {

using linalg::Index;
using linalg::SvdFactorization;

enum class Direction { Remove, Add };

/// Which weight the addition secular function puts on w_j. `Squared` is the
/// matrix-determinant-lemma form and the one every caller should use;
/// `Linear` exists so tests can show it disagrees with a direct SVD.
enum class PlusForm { Squared, Linear };

/// Rank-one column modification G' = G -/+ g e_k^T, reduced to what the
/// secular functions need: alpha = 1/||g||, w = alpha U^T g, and
/// `outside` = alpha^2 ||g - U U^T g||^2 (the part of g the economy basis
/// misses; equals 1 - ||w||^2 without the cancellation).
struct RankOneUpdate {
  Direction direction = Direction::Remove;
  double alpha = 0.0;
  Eigen::VectorXd w;
  double outside = 0.0;

  static RankOneUpdate make(Direction direction, const SvdFactorization& F,
                            const Eigen::Ref<const Eigen::VectorXd>& g);
  /// From precomputed projections: `projection` = U^T g, `outside_norm2` =
  /// ||g - U U^T g||^2.
  static RankOneUpdate from_projection(Direction direction,
                                       const Eigen::Ref<const Eigen::VectorXd>& projection,
                                       double g_norm, double outside_norm2);
};

struct BisectionConfig {
  int max_iterations = 60;
  /// Stop once (upper - lower) <= relative_tolerance * upper.
  double relative_tolerance = 1e-14;
};

/// Raised whenever the secular route cannot be trusted for a candidate and
/// the caller should recompute a direct SVD instead.
class SecularBreakdown : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

struct Bracket {
  double lower = 0.0;
  double upper = 0.0;
};

/// f_-(s) = 1 - (1/alpha^2) sum_j w_j^2 / (sigma_j^2 - s^2).
double secular_minus(double s, const Eigen::VectorXd& sigma, const RankOneUpdate& upd);
double secular_minus(double s, const SvdFactorization& F, const RankOneUpdate& upd);

/// f_+(s) = 1 + (1/alpha^2) sum_j w_j^2 / (sigma_j^2 - s^2) - (1 - ||w||^2) / (alpha^2 s^2).
double secular_plus(double s, const Eigen::VectorXd& sigma, const RankOneUpdate& upd,
                    PlusForm form = PlusForm::Squared);
double secular_plus(double s, const SvdFactorization& F, const RankOneUpdate& upd,
                    PlusForm form = PlusForm::Squared);

/// Pole-free rescaling of f_-/f_+ that is finite on the closed bracket,
/// positive at its lower end and negative at its upper end.
double secular_regularized(double s, const Eigen::VectorXd& sigma, const RankOneUpdate& upd,
                           PlusForm form = PlusForm::Squared);
double secular_regularized(double s, const SvdFactorization& F, const RankOneUpdate& upd,
                           PlusForm form = PlusForm::Squared);

/// Interval holding the new smallest (nonzero) singular value:
/// Remove -> (sigma_r, sigma_{r-1}), Add -> (0, sigma_r).
Bracket bracket(const Eigen::VectorXd& sigma, Direction direction);
inline Bracket bracket(const SvdFactorization& F, Direction direction) {
  return bracket(F.sigma, direction);
}

struct BisectionStep {
  int iteration = 0;
  double lower = 0.0;
  double upper = 0.0;
  double guess = 0.0;
  double value = 0.0;
};

/// Smallest singular value of the modified matrix by midpoint bisection on
/// the regularized secular function. Throws SecularBreakdown when the
/// spectrum is degenerate, the column is not representable in U (Remove),
/// or the endpoint signs are wrong.
double bisect_min_singular(const Eigen::VectorXd& sigma, const RankOneUpdate& upd,
                           const BisectionConfig& cfg = {},
                           std::vector<BisectionStep>* trace = nullptr,
                           PlusForm form = PlusForm::Squared);
inline double bisect_min_singular(const SvdFactorization& F, const RankOneUpdate& upd,
                                  const BisectionConfig& cfg = {},
                                  std::vector<BisectionStep>* trace = nullptr,
                                  PlusForm form = PlusForm::Squared) {
  return bisect_min_singular(F.sigma, upd, cfg, trace, form);
}

/// Debug dump of a bisection trace: columns k,lower,upper,guess,value.
void write_trace_csv(const std::filesystem::path& path, const std::vector<BisectionStep>& trace);

}  // namespace sprint::secular
