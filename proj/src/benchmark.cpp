#include "sprint/benchmark.hpp"

#include <chrono>
#include <cmath>
#include <ostream>
#include <random>

#include "sprint/error.hpp"

namespace sprint::benchmark {

void BenchmarkConfig::validate() const {
  if (sizes.empty() || methods.empty()) throw ConfigError("benchmark: sizes and methods must be nonempty");
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (sizes[i] < 8) throw ConfigError("benchmark: sizes must be >= 8");
    if (i > 0 && sizes[i] <= sizes[i - 1]) throw ConfigError("benchmark: sizes must be strictly increasing");
  }
  if (trials < 3) throw ConfigError("benchmark: at least 3 trials are needed for fitting");
}

double Cell::mean() const {
  if (seconds.empty()) return std::nan("");
  double s = 0.0;
  for (double v : seconds) s += v;
  return s / static_cast<double>(seconds.size());
}

double PowerLaw::predict(double n) const { return std::pow(10.0, beta) * std::pow(n, alpha); }

const Cell* BenchmarkReport::cell(Method method, Index n) const {
  for (const auto& c : cells) {
    if (c.method == method && c.n == n) return &c;
  }
  return nullptr;
}

const PowerLaw* BenchmarkReport::fit(Method method) const {
  for (const auto& f : fits) {
    if (f.method == method) return &f;
  }
  return nullptr;
}

Eigen::MatrixXd uniform_matrix(Index n, std::uint64_t seed, int trial) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(n), static_cast<std::uint32_t>(trial)};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Eigen::MatrixXd a(n, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) a(i, j) = dist(rng);
  }
  return a;
}

PowerLaw fit_power_law(const std::vector<double>& n, const std::vector<double>& seconds) {
  PowerLaw fit;
  std::vector<double> x;
  std::vector<double> y;
  for (std::size_t i = 0; i < n.size() && i < seconds.size(); ++i) {
    if (n[i] > 0.0 && seconds[i] > 0.0 && std::isfinite(seconds[i])) {
      x.push_back(std::log10(n[i]));
      y.push_back(std::log10(seconds[i]));
    }
  }
  if (x.size() < 2) return fit;
  const auto k = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= k;
  my /= k;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx <= 0.0) return fit;
  fit.alpha = sxy / sxx;
  fit.beta = my - fit.alpha * mx;
  fit.valid = true;
  return fit;
}

BenchmarkReport run_benchmark(const BenchmarkConfig& cfg, std::ostream* log) {
  cfg.validate();
  BenchmarkReport report;
  report.trials = cfg.trials;
  for (Method method : cfg.methods) {
    for (Index n : cfg.sizes) {
      Cell cell;
      cell.method = method;
      cell.n = n;
      for (int trial = 0; trial < cfg.trials; ++trial) {
        const linalg::FeatureMatrix G(uniform_matrix(n, cfg.seed, trial), linalg::index_labels(n));
        regression::SearchConfig search;
        search.threads = cfg.threads;
        try {
          if (method == Method::SprintPlus) {
            search.initial_support = {regression::dominant_seed(G)};
            search.max_terms = std::max<Index>(n / 4, 2);
          }
          const auto start = std::chrono::steady_clock::now();
          const auto curve = regression::run_search(method, G, search);
          const auto stop = std::chrono::steady_clock::now();
          cell.seconds.push_back(std::chrono::duration<double>(stop - start).count());
        } catch (const NumericalError& e) {
          ++cell.failures;
          if (log) *log << "warning: " << regression::to_string(method) << " n=" << n << " trial " << trial
                        << " failed: " << e.what() << '\n';
        }
      }
      if (log) {
        *log << regression::to_string(method) << " n=" << n << " mean " << cell.mean() << " s over "
             << cell.seconds.size() << " trials\n";
      }
      report.cells.push_back(std::move(cell));
    }
    std::vector<double> ns, ts;
    for (const auto& c : report.cells) {
      if (c.method != method || c.seconds.empty()) continue;
      ns.push_back(static_cast<double>(c.n));
      ts.push_back(c.mean());
    }
    PowerLaw fit = fit_power_law(ns, ts);
    fit.method = method;
    report.fits.push_back(fit);
  }
  return report;
}

nlohmann::json report_to_json(const BenchmarkReport& report) {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : report.cells) {
    cells.push_back({{"method", regression::to_string(c.method)},
                     {"n", c.n},
                     {"seconds", c.seconds},
                     {"failures", c.failures},
                     {"mean_seconds", c.seconds.empty() ? nlohmann::json(nullptr) : nlohmann::json(c.mean())}});
  }
  nlohmann::json fits = nlohmann::json::array();
  for (const auto& f : report.fits) {
    fits.push_back({{"method", regression::to_string(f.method)},
                    {"alpha", f.alpha},
                    {"beta", f.beta},
                    {"valid", f.valid}});
  }
  return {{"trials", report.trials}, {"cells", cells}, {"fits", fits}};
}

BenchmarkReport report_from_json(const nlohmann::json& j) {
  BenchmarkReport r;
  try {
    r.trials = j.at("trials").get<int>();
    for (const auto& c : j.at("cells")) {
      Cell cell;
      cell.method = regression::method_from_string(c.at("method").get<std::string>());
      cell.n = c.at("n").get<Index>();
      cell.seconds = c.at("seconds").get<std::vector<double>>();
      cell.failures = c.value("failures", 0);
      r.cells.push_back(std::move(cell));
    }
    for (const auto& f : j.at("fits")) {
      PowerLaw p;
      p.method = regression::method_from_string(f.at("method").get<std::string>());
      p.alpha = f.at("alpha").get<double>();
      p.beta = f.at("beta").get<double>();
      p.valid = f.at("valid").get<bool>();
      r.fits.push_back(p);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("benchmark report: malformed JSON (") + e.what() + ")");
  }
  return r;
}

}  // namespace sprint::benchmark
