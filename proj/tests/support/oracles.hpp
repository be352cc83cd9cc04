#pragma once

// Independent reference implementations used only by tests. None of these
// call into the library's SVD, secular or integrator code.

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <vector>

namespace oracle {

/// m x n matrix U diag(s) V^T with s log-spaced from 1 down to 1/cond.
Eigen::MatrixXd with_condition(Eigen::Index m, Eigen::Index n, double cond, std::mt19937_64& rng);

Eigen::MatrixXd gaussian(Eigen::Index m, Eigen::Index n, std::mt19937_64& rng);

/// Singular values by Eigen's two-sided Jacobi SVD in long double.
Eigen::VectorXd jacobi_singular_values(const Eigen::MatrixXd& A);

/// Greedy backward elimination ranked by Jacobi singular values. `support[s]`
/// holds the active columns after s removals; residual is sigma_min / sqrt(m).
struct GreedyPath {
  std::vector<std::vector<Eigen::Index>> support;
  std::vector<double> residual;
};
GreedyPath greedy_removal(const Eigen::MatrixXd& A, Eigen::Index observations);

/// Planted relations: `count` disjoint sparse null vectors hidden in an
/// m x n matrix plus i.i.d. noise of the given amplitude.
struct Planted {
  Eigen::MatrixXd A;
  std::vector<std::vector<Eigen::Index>> supports;
};
Planted planted_relations(Eigen::Index m, Eigen::Index n, int count, double noise, std::mt19937_64& rng);

/// Fourth-order exponential time differencing (Kassam-Trefethen contour
/// form) for u_t = -(u^2/2)_x - u_xx - u_xxxx + eps sum_{k=3..6}(u^k)_x on a
/// periodic grid. Uses a plain complex DFT; no FFTW.
Eigen::VectorXd etdrk4_ks(const Eigen::VectorXd& u0, double length, double epsilon, double dt,
                          int steps);

}  // namespace oracle
