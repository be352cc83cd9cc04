#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "oracles.hpp"
#include "sprint/secular.hpp"

using namespace sprint;
using namespace sprint::secular;
using Eigen::Index;

namespace {

Eigen::MatrixXd drop(const Eigen::MatrixXd& A, Index k) {
  Eigen::MatrixXd out(A.rows(), A.cols() - 1);
  out << A.leftCols(k), A.rightCols(A.cols() - k - 1);
  return out;
}

Eigen::MatrixXd append(const Eigen::MatrixXd& A, const Eigen::VectorXd& g) {
  Eigen::MatrixXd out(A.rows(), A.cols() + 1);
  out << A, g;
  return out;
}

// Plain bisection on an arbitrary function; independent of bisect_min_singular.
template <class F>
double root(F f, double lo, double hi) {
  double flo = f(lo);
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm > 0) == (flo > 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_SUITE("secular") {
  TEST_CASE("asymptotes approach one") {
    std::mt19937_64 rng(10);
    const Eigen::MatrixXd A = oracle::gaussian(8, 6, rng);
    const auto F = linalg::economy_svd(A);
    const double far = 1e6 * F.sigma(0);
    const auto rem = RankOneUpdate::make(Direction::Remove, F, A.col(2));
    CHECK(std::abs(secular_minus(far, F, rem) - 1.0) < 1e-6);
    const auto add = RankOneUpdate::make(Direction::Add, F, oracle::gaussian(8, 1, rng).col(0));
    CHECK(std::abs(secular_plus(far, F, add) - 1.0) < 1e-6);
  }

  TEST_CASE("3x3 removal: two sign changes, roots are the new singular values") {
    Eigen::Matrix3d A;
    A << 2.0, -1.0, 0.5, 0.3, 1.5, -0.7, -0.4, 0.2, 1.1;
    const auto F = linalg::economy_svd(Eigen::MatrixXd(A));
    const auto upd = RankOneUpdate::make(Direction::Remove, F, A.col(2));
    auto f = [&](double s) { return secular_minus(s, F, upd); };

    int changes = 0;
    double prev = NAN;
    const int samples = 20000;
    for (int i = 1; i < samples; ++i) {
      const double s = F.sigma(0) * i / samples;
      bool near_pole = false;
      for (Index j = 0; j < 3; ++j) near_pole |= std::abs(s - F.sigma(j)) < 1e-9;
      if (near_pole) continue;
      const double v = f(s);
      // Crossing a pole flips the sign without a root: f jumps from -inf to +inf.
      bool crossed_pole = false;
      for (Index j = 0; j < 3; ++j) {
        crossed_pole |= (F.sigma(0) * (i - 1) / samples < F.sigma(j) && s > F.sigma(j));
      }
      if (!std::isnan(prev) && !crossed_pole && (v > 0) != (prev > 0)) ++changes;
      prev = v;
    }
    CHECK(changes == 2);

    const Eigen::VectorXd expect = oracle::jacobi_singular_values(drop(A, 2));
    for (Index j = 0; j < 2; ++j) {
      const double r = root(f, F.sigma(j + 1) * (1 + 1e-15), F.sigma(j) * (1 - 1e-15));
      CHECK(r == doctest::Approx(expect(j)).epsilon(1e-10));
    }
    CHECK_THROWS_WITH(secular_minus(F.sigma(1), F, upd), "pole");
  }

  TEST_CASE("random 10x10 removal: every interval root matches the direct SVD") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
      const Eigen::MatrixXd A = oracle::gaussian(10, 10, rng);
      const Index k = trial % 10;
      const auto F = linalg::economy_svd(A);
      const auto upd = RankOneUpdate::make(Direction::Remove, F, A.col(k));
      const Eigen::VectorXd expect = oracle::jacobi_singular_values(drop(A, k));
      for (Index j = 0; j + 1 < 10; ++j) {
        const double r = root([&](double s) { return secular_minus(s, F, upd); }, F.sigma(j + 1) * (1 + 1e-15),
                              F.sigma(j) * (1 - 1e-15));
        CHECK(std::abs(r - expect(j)) <= 1e-10 * expect(j));
      }
    }
  }

  TEST_CASE("addition: orthogonal column of norm nu into diag(3, 2)") {
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(3, 2);
    A(0, 0) = 3.0;
    A(1, 1) = 2.0;
    const auto F = linalg::economy_svd(A);
    for (double nu : {0.1, 0.7, 1.9}) {
      const Eigen::Vector3d g(0.0, 0.0, nu);
      const auto upd = RankOneUpdate::make(Direction::Add, F, g);
      const double r = root([&](double s) { return secular_plus(s, F, upd); }, 1e-12, 2.0 * (1 - 1e-15));
      CHECK(r == doctest::Approx(std::min(nu, 2.0)).epsilon(1e-10));
      // w_n = 0 deflates the bracket end to an exact zero; the caller must fall back.
      CHECK_THROWS_AS(bisect_min_singular(F, upd), SecularBreakdown);

      const Eigen::Vector3d tilted(1e-3, 2e-3, nu);
      const auto near = RankOneUpdate::make(Direction::Add, F, tilted);
      const double expect = oracle::jacobi_singular_values(append(A, tilted)).minCoeff();
      CHECK(bisect_min_singular(F, near) == doctest::Approx(expect).epsilon(1e-10));
    }
  }

  TEST_CASE("addition: duplicated column lowers sigma_min, root in (0, sigma_n)") {
    std::mt19937_64 rng(12);
    const Eigen::MatrixXd A = oracle::gaussian(9, 4, rng);
    const auto F = linalg::economy_svd(A);
    const Eigen::VectorXd g = A.col(1);
    const auto upd = RankOneUpdate::make(Direction::Add, F, g);
    const double expect = oracle::jacobi_singular_values(append(A, g)).minCoeff();
    const double got = bisect_min_singular(F, upd);
    CHECK(got < F.sigma_min());
    CHECK(got > 0.0);
    CHECK(std::abs(got - expect) <= 1e-10 * F.sigma(0));
  }

  TEST_CASE("the linear-weight addition form disagrees with the direct SVD") {
    std::mt19937_64 rng(13);
    int disagreements = 0;
    for (int trial = 0; trial < 20; ++trial) {
      const Eigen::MatrixXd A = oracle::gaussian(12, 6, rng);
      const Eigen::VectorXd g = oracle::gaussian(12, 1, rng).col(0);
      const auto F = linalg::economy_svd(A);
      const auto upd = RankOneUpdate::make(Direction::Add, F, g);
      const double expect = oracle::jacobi_singular_values(append(A, g)).minCoeff();
      CHECK(std::abs(bisect_min_singular(F, upd) - expect) <= 1e-10 * expect);
      try {
        const double lin = bisect_min_singular(F, upd, {}, nullptr, PlusForm::Linear);
        if (std::abs(lin - expect) > 1e-6 * expect) ++disagreements;
      } catch (const SecularBreakdown&) {
        ++disagreements;
      }
    }
    CHECK(disagreements == 20);
  }

  TEST_CASE("regularized functions: finite endpoints, signs, same interior root") {
    std::mt19937_64 rng(14);
    const Eigen::MatrixXd A = oracle::gaussian(10, 7, rng);
    const auto F = linalg::economy_svd(A);
    for (Direction dir : {Direction::Remove, Direction::Add}) {
      const Eigen::VectorXd g = dir == Direction::Remove ? Eigen::VectorXd(A.col(3))
                                                         : Eigen::VectorXd(oracle::gaussian(10, 1, rng).col(0));
      const auto upd = RankOneUpdate::make(dir, F, g);
      const Bracket b = bracket(F, dir);
      const double lo = secular_regularized(b.lower, F, upd);
      const double hi = secular_regularized(b.upper, F, upd);
      CHECK(std::isfinite(lo));
      CHECK(std::isfinite(hi));
      CHECK(lo > 0.0);
      CHECK(hi < 0.0);
      auto raw = [&](double s) {
        return dir == Direction::Remove ? secular_minus(s, F, upd) : secular_plus(s, F, upd);
      };
      const double r_raw = root(raw, b.lower + 1e-15 * b.upper, b.upper * (1 - 1e-15));
      const double r_reg = root([&](double s) { return secular_regularized(s, F, upd); }, b.lower, b.upper);
      CHECK(std::abs(r_raw - r_reg) <= 1e-12 * b.upper);
    }
  }

  TEST_CASE("brackets") {
    const Eigen::Vector3d s(3, 2, 1);
    CHECK(bracket(s, Direction::Remove).lower == 1.0);
    CHECK(bracket(s, Direction::Remove).upper == 2.0);
    CHECK(bracket(s, Direction::Add).lower == 0.0);
    CHECK(bracket(s, Direction::Add).upper == 1.0);
    CHECK_THROWS(bracket(Eigen::VectorXd::Ones(1), Direction::Remove));

    std::mt19937_64 rng(15);
    int outside = 0;
    for (int trial = 0; trial < 1000; ++trial) {
      const Eigen::MatrixXd A = oracle::gaussian(12, 12, rng);
      const auto F = linalg::economy_svd(A);
      const Index k = trial % 12;
      const double s = oracle::jacobi_singular_values(drop(A, k)).minCoeff();
      const Bracket b = bracket(F, Direction::Remove);
      if (!(s > b.lower && s < b.upper)) ++outside;
    }
    CHECK(outside == 0);
  }

  TEST_CASE("bisection halves the bracket and converges like 2^-k") {
    std::mt19937_64 rng(16);
    const Eigen::MatrixXd A = oracle::gaussian(6, 6, rng);
    const auto F = linalg::economy_svd(A);
    const auto upd = RankOneUpdate::make(Direction::Remove, F, A.col(5));
    std::vector<BisectionStep> trace;
    const double s = bisect_min_singular(F, upd, {}, &trace);
    const double expect = oracle::jacobi_singular_values(drop(A, 5)).minCoeff();
    CHECK(std::abs(s - expect) <= 1e-12 * expect);
    REQUIRE(trace.size() >= 30);
    for (std::size_t i = 1; i < trace.size(); ++i) {
      const double w0 = trace[i - 1].upper - trace[i - 1].lower;
      const double w1 = trace[i].upper - trace[i].lower;
      CHECK(w1 == doctest::Approx(0.5 * w0).epsilon(1e-6));
    }
    // Least-squares slope of log2 |guess - root| over the first 30 iterations.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const int n = 30;
    for (int i = 0; i < n; ++i) {
      const double y = std::log2(std::abs(trace[static_cast<std::size_t>(i)].guess - expect));
      sx += i;
      sy += y;
      sxx += i * i;
      sxy += i * y;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    CHECK(slope == doctest::Approx(-1.0).epsilon(0.1));

    const auto path = std::filesystem::temp_directory_path() / "sprint_trace.csv";
    write_trace_csv(path, trace);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "k,lower,upper,guess,value");
    std::filesystem::remove(path);
  }

  TEST_CASE("removing from orthogonal columns leaves the smallest remaining norm") {
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(5, 4);
    const Eigen::Vector4d norms(4.0, 0.5, 2.0, 1.0);
    for (Index j = 0; j < 4; ++j) A(j, j) = norms(j);
    const auto F = linalg::economy_svd(A);
    // Removing the smallest column (0.5) exposes the next smallest (1.0),
    // which sits exactly on the bracket end: a deflation the caller must handle.
    const auto upd = RankOneUpdate::make(Direction::Remove, F, A.col(1));
    CHECK(root([&](double s) { return secular_regularized(s, F, upd); }, 0.5, 1.0) ==
          doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(bisect_min_singular(F, upd), SecularBreakdown);

    A(0, 1) = 1e-3;  // break the orthogonality slightly
    A(3, 1) = 2e-3;
    const auto G = linalg::economy_svd(A);
    const auto near = RankOneUpdate::make(Direction::Remove, G, A.col(1));
    const double expect = oracle::jacobi_singular_values(drop(A, 1)).minCoeff();
    CHECK(bisect_min_singular(G, near) == doctest::Approx(expect).epsilon(1e-10));
  }

  TEST_CASE("breakdowns signal a fallback") {
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(4, 3);
    A(0, 0) = 2.0;
    A(1, 1) = 1.0;
    A(2, 2) = 1.0;  // degenerate smallest pair
    const auto F = linalg::economy_svd(A);
    const auto upd = RankOneUpdate::make(Direction::Remove, F, A.col(0));
    CHECK_THROWS_AS(bisect_min_singular(F, upd), SecularBreakdown);
    CHECK_THROWS_AS(secular_regularized(1.0, F, upd), SecularBreakdown);

    const auto G = linalg::economy_svd(Eigen::MatrixXd(Eigen::Vector3d(3, 2, 1).asDiagonal()));
    const auto off = RankOneUpdate::from_projection(Direction::Remove, Eigen::Vector3d(0.0, 0.0, 0.5), 1.0, 0.75);
    CHECK_THROWS_AS(bisect_min_singular(G, off), SecularBreakdown);
    CHECK_THROWS_AS(RankOneUpdate::make(Direction::Add, G, Eigen::Vector3d::Zero()), SecularBreakdown);
  }
}
