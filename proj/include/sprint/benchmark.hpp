#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include <json.hpp>

#include "sprint/regression.hpp"

namespace sprint::benchmark {

using linalg::Index;
using regression::Method;

struct BenchmarkConfig {
  std::vector<Index> sizes = {32, 64, 128, 256};
  std::vector<Method> methods = {Method::Exhaustive, Method::SprintMinus, Method::SprintPlus};
  int trials = 8;
  std::uint64_t seed = 0;
  int threads = 1;
  void validate() const;
};

struct Cell {
  Method method = Method::Exhaustive;
  Index n = 0;
  std::vector<double> seconds;  // successful trials only
  int failures = 0;
  double mean() const;
};

/// log10 t = alpha log10 n + beta.
struct PowerLaw {
  Method method = Method::Exhaustive;
  double alpha = 0.0;
  double beta = 0.0;
  bool valid = false;
  double predict(double n) const;
};

struct BenchmarkReport {
  int trials = 0;
  std::vector<Cell> cells;
  std::vector<PowerLaw> fits;
  const Cell* cell(Method method, Index n) const;
  const PowerLaw* fit(Method method) const;
};

/// n x n, entries i.i.d. uniform on [-1, 1]; reproducible from (seed, n, trial).
Eigen::MatrixXd uniform_matrix(Index n, std::uint64_t seed, int trial);

/// Least squares in log10-log10 space. Without two distinct positive sizes
/// the result has valid == false.
PowerLaw fit_power_law(const std::vector<double>& n, const std::vector<double>& seconds);

/// Times only the regression call. SPRINT+ is seeded by dominant_seed()
/// (computed outside the timer) and halts at n/4 terms. A failed trial is
/// recorded and excluded from the fit; progress lines go to `log`.
BenchmarkReport run_benchmark(const BenchmarkConfig& cfg, std::ostream* log = nullptr);

nlohmann::json report_to_json(const BenchmarkReport& report);
BenchmarkReport report_from_json(const nlohmann::json& j);

}  // namespace sprint::benchmark
