#pragma once

#include <Eigen/Dense>

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sprint/error.hpp"

namespace sprint::linalg {

using Index = Eigen::Index;

/// "c0", "c1", ... for matrices without symbolic terms.
std::vector<std::string> index_labels(Index n);

/// Dense observation matrix: one row per weak-form observation, one column
/// per library term. Column-major storage.
///
/// `observations()` is the row count used to normalize residuals. It starts
/// as rows() and is carried through row-reducing transforms (QR), so
/// residuals computed before and after reduction are directly comparable.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(Eigen::MatrixXd values, std::vector<std::string> labels,
                Index observations = -1);

  const Eigen::MatrixXd& values() const { return values_; }
  const std::vector<std::string>& labels() const { return labels_; }
  Index rows() const { return values_.rows(); }
  Index cols() const { return values_.cols(); }
  Index observations() const { return observations_; }

  auto column(Index j) const { return values_.col(j); }

  /// Submatrix of the given columns (in the given order), labels carried.
  FeatureMatrix select_columns(std::span<const Index> columns) const;
  FeatureMatrix drop_column(Index column) const;

 private:
  Eigen::MatrixXd values_;
  std::vector<std::string> labels_;
  Index observations_ = 0;
};

/// Unit-norm coefficients on a sparse support of a parent FeatureMatrix.
struct CoefficientVector {
  std::vector<Index> support;  // strictly increasing
  Eigen::VectorXd values;      // aligned with support, ||values||_2 == 1

  /// Normalizes `values` and sorts the pair by support index. Throws on a
  /// zero vector or duplicate indices.
  static CoefficientVector make(std::vector<Index> support, Eigen::VectorXd values);

  Index size() const { return static_cast<Index>(support.size()); }
  /// Dense length-n representation.
  Eigen::VectorXd dense(Index n) const;
  /// Coefficient for column `j`, zero if `j` is outside the support.
  double at(Index j) const;
};

struct SvdFactorization {
  Eigen::MatrixXd U;      // m x r
  Eigen::VectorXd sigma;  // r, nonincreasing
  Eigen::MatrixXd V;      // n x r

  Index rank() const { return sigma.size(); }
  double sigma_min() const { return sigma(sigma.size() - 1); }
};

/// (1/sqrt(m)) ||G c|| / ||c|| with m = G.observations().
double residual(const FeatureMatrix& G, const CoefficientVector& c);

/// Economy SVD, r = min(m, n), singular values nonincreasing.
SvdFactorization economy_svd(const Eigen::MatrixXd& G);
inline SvdFactorization economy_svd(const FeatureMatrix& G) { return economy_svd(G.values()); }

/// Singular values only (nonincreasing). Cheaper than economy_svd.
Eigen::VectorXd singular_values(const Eigen::MatrixXd& G);

/// Right singular vector of the smallest singular value, sign-fixed so the
/// largest-magnitude entry is positive, paired with sigma_min. Requires
/// m >= n so that the factorization spans the whole coefficient space.
std::pair<CoefficientVector, double> min_null_vector(const SvdFactorization& F);

/// Square upper-triangular factor R of G = QR (m >= n). Labels and
/// observations() are preserved.
FeatureMatrix qr_reduce(const FeatureMatrix& G);

/// Throws NumericalError if any entry is NaN or infinite.
void require_finite(const Eigen::MatrixXd& G, const char* what);

}  // namespace sprint::linalg
