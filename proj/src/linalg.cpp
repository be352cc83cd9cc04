#include "sprint/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

namespace sprint::linalg {

std::vector<std::string> index_labels(Index n) {
  std::vector<std::string> out;
  out.reserve(static_cast<std::size_t>(n));
  for (Index j = 0; j < n; ++j) out.push_back("c" + std::to_string(j));
  return out;
}

FeatureMatrix::FeatureMatrix(Eigen::MatrixXd values, std::vector<std::string> labels,
                             Index observations)
    : values_(std::move(values)), labels_(std::move(labels)) {
  if (static_cast<Index>(labels_.size()) != values_.cols()) {
    throw ConfigError("feature matrix: " + std::to_string(labels_.size()) + " labels for " +
                      std::to_string(values_.cols()) + " columns");
  }
  std::unordered_set<std::string> seen;
  for (const auto& label : labels_) {
    if (!seen.insert(label).second) throw ConfigError("feature matrix: duplicate label '" + label + "'");
  }
  require_finite(values_, "feature matrix");
  observations_ = observations < 0 ? values_.rows() : observations;
}

FeatureMatrix FeatureMatrix::select_columns(std::span<const Index> columns) const {
  Eigen::MatrixXd sub(rows(), static_cast<Index>(columns.size()));
  std::vector<std::string> sub_labels;
  sub_labels.reserve(columns.size());
  for (std::size_t j = 0; j < columns.size(); ++j) {
    sub.col(static_cast<Index>(j)) = values_.col(columns[j]);
    sub_labels.push_back(labels_.at(static_cast<std::size_t>(columns[j])));
  }
  return FeatureMatrix(std::move(sub), std::move(sub_labels), observations_);
}

FeatureMatrix FeatureMatrix::drop_column(Index column) const {
  std::vector<Index> keep;
  for (Index j = 0; j < cols(); ++j) {
    if (j != column) keep.push_back(j);
  }
  return select_columns(keep);
}

CoefficientVector CoefficientVector::make(std::vector<Index> support, Eigen::VectorXd values) {
  if (static_cast<Index>(support.size()) != values.size()) {
    throw std::invalid_argument("coefficient vector: support/value length mismatch");
  }
  const double norm = values.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) throw NumericalError("degenerate coefficient vector");

  std::vector<std::size_t> order(support.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return support[a] < support[b]; });

  CoefficientVector out;
  out.support.resize(support.size());
  out.values.resize(values.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    out.support[i] = support[order[i]];
    out.values(static_cast<Index>(i)) = values(static_cast<Index>(order[i])) / norm;
    if (i > 0 && out.support[i] == out.support[i - 1]) {
      throw std::invalid_argument("coefficient vector: duplicate support index");
    }
  }
  return out;
}

Eigen::VectorXd CoefficientVector::dense(Index n) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  for (std::size_t i = 0; i < support.size(); ++i) out(support[i]) = values(static_cast<Index>(i));
  return out;
}

double CoefficientVector::at(Index j) const {
  auto it = std::lower_bound(support.begin(), support.end(), j);
  if (it == support.end() || *it != j) return 0.0;
  return values(it - support.begin());
}

void require_finite(const Eigen::MatrixXd& G, const char* what) {
  if (!G.allFinite()) throw NumericalError(std::string(what) + ": non-finite entries");
}

double residual(const FeatureMatrix& G, const CoefficientVector& c) {
  const double cnorm = c.values.norm();
  if (!(cnorm > 0.0)) throw NumericalError("degenerate coefficient vector");
  Eigen::VectorXd Gc = Eigen::VectorXd::Zero(G.rows());
  for (std::size_t i = 0; i < c.support.size(); ++i) {
    const Index j = c.support[i];
    if (j < 0 || j >= G.cols()) throw std::out_of_range("coefficient support outside feature matrix");
    Gc += c.values(static_cast<Index>(i)) * G.column(j);
  }
  return Gc.norm() / cnorm / std::sqrt(static_cast<double>(G.observations()));
}

// Eigen's divide-and-conquer SVD rather than LAPACK: the OpenBLAS builds we
// tested return wrong singular values and vectors from dgesdd/dgesvd on some
// x86 cores once n exceeds a few dozen.
SvdFactorization economy_svd(const Eigen::MatrixXd& G) {
  require_finite(G, "economy_svd");
  if (G.size() == 0) throw std::invalid_argument("economy_svd: empty matrix");
  Eigen::BDCSVD<Eigen::MatrixXd> svd(G, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) throw NumericalError("economy_svd: SVD did not converge");
  return SvdFactorization{svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

Eigen::VectorXd singular_values(const Eigen::MatrixXd& G) {
  require_finite(G, "singular_values");
  if (G.size() == 0) throw std::invalid_argument("singular_values: empty matrix");
  Eigen::BDCSVD<Eigen::MatrixXd> svd(G);
  if (svd.info() != Eigen::Success) throw NumericalError("singular_values: SVD did not converge");
  return svd.singularValues();
}

std::pair<CoefficientVector, double> min_null_vector(const SvdFactorization& F) {
  if (F.rank() < F.V.rows()) {
    throw std::invalid_argument(
        "min_null_vector: factorization has fewer singular values than columns (m < n)");
  }
  Eigen::VectorXd v = F.V.col(F.rank() - 1);
  Index imax = 0;
  v.cwiseAbs().maxCoeff(&imax);
  if (v(imax) < 0.0) v = -v;
  std::vector<Index> support(static_cast<std::size_t>(v.size()));
  std::iota(support.begin(), support.end(), Index{0});
  return {CoefficientVector::make(std::move(support), std::move(v)), F.sigma_min()};
}

FeatureMatrix qr_reduce(const FeatureMatrix& G) {
  if (G.rows() < G.cols()) throw ConfigError("underdetermined; QR reduction skipped");
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(G.values());
  Eigen::MatrixXd R = qr.matrixQR().topRows(G.cols()).triangularView<Eigen::Upper>();
  return FeatureMatrix(std::move(R), G.labels(), G.observations());
}

}  // namespace sprint::linalg
