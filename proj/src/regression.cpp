#include "sprint/regression.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <thread>

namespace sprint::regression {

namespace {

constexpr double kTieTolerance = 1e-12;

// Runs body(i) for i in [0, n). Each index is handled by exactly one thread
// and results are written to caller-owned slots, so output is independent of
// the thread count.
template <class Body>
void parallel_for(Index n, int threads, Body&& body) {
  const Index workers = std::clamp<Index>(threads, 1, std::max<Index>(n, 1));
  if (workers <= 1) {
    for (Index i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::jthread> pool;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  for (Index w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (Index i = w; i < n; i += workers) body(i);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  pool.clear();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// G restricted to `columns`, zero-padded to at least `min_rows` rows. Zero
// rows leave every singular value and right singular vector unchanged but
// keep the economy factorization square in the coefficient space.
Eigen::MatrixXd active_matrix(const Eigen::MatrixXd& G, const std::vector<Index>& columns,
                              Index min_rows) {
  const Index rows = std::max(G.rows(), min_rows);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(rows, static_cast<Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j) {
    A.col(static_cast<Index>(j)).head(G.rows()) = G.col(columns[j]);
  }
  return A;
}

Eigen::MatrixXd drop_col(const Eigen::MatrixXd& A, Index p) {
  Eigen::MatrixXd B(A.rows(), A.cols() - 1);
  B.leftCols(p) = A.leftCols(p);
  B.rightCols(A.cols() - 1 - p) = A.rightCols(A.cols() - 1 - p);
  return B;
}

double min_singular(const Eigen::MatrixXd& A) {
  const Eigen::VectorXd s = linalg::singular_values(A);
  // Wide matrices have an exact null space that the economy spectrum omits.
  return A.cols() > A.rows() ? 0.0 : s(s.size() - 1);
}

CurveEntry make_entry(const linalg::SvdFactorization& F, const std::vector<Index>& columns,
                      Index observations) {
  auto [c, smin] = linalg::min_null_vector(F);
  std::vector<Index> support(columns.begin(), columns.end());
  CurveEntry e;
  e.k = static_cast<Index>(columns.size());
  e.residual = smin / std::sqrt(static_cast<double>(observations));
  e.coefficients = CoefficientVector::make(std::move(support), std::move(c.values));
  return e;
}

// Lowest position wins ties; positions are in increasing column order.
std::size_t argmin_with_ties(const std::vector<double>& values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] < values[best] - kTieTolerance * std::abs(values[best])) best = i;
  }
  return best;
}

OptimizationCurve empty_curve(Method method, const FeatureMatrix& G) {
  OptimizationCurve curve;
  curve.method = method;
  curve.labels = G.labels();
  curve.observations = G.observations();
  return curve;
}

void require_nonempty(const FeatureMatrix& G) {
  if (G.cols() < 1) throw ConfigError("search: library has no columns");
  linalg::require_finite(G.values(), "search");
}

bool spectrum_too_small(const Eigen::VectorXd& sigma, double ratio) {
  return sigma(sigma.size() - 1) < ratio * sigma(0);
}

}  // namespace

std::string to_string(Method method) {
  switch (method) {
    case Method::Exhaustive: return "exhaustive";
    case Method::SprintMinus: return "sprint-";
    case Method::SprintPlus: return "sprint+";
  }
  return "unknown";
}

Method method_from_string(std::string_view name) {
  if (name == "exhaustive") return Method::Exhaustive;
  if (name == "sprint-" || name == "sprint_minus" || name == "sprint-minus") return Method::SprintMinus;
  if (name == "sprint+" || name == "sprint_plus" || name == "sprint-plus") return Method::SprintPlus;
  throw ConfigError("unknown method '" + std::string(name) + "'");
}

const CurveEntry* OptimizationCurve::find(Index k) const {
  for (const auto& e : entries) {
    if (e.k == k) return &e;
  }
  return nullptr;
}

OptimizationCurve exhaustive_search(const FeatureMatrix& G, const SearchConfig& cfg) {
  require_nonempty(G);
  auto curve = empty_curve(Method::Exhaustive, G);
  std::vector<Index> active(static_cast<std::size_t>(G.cols()));
  std::iota(active.begin(), active.end(), Index{0});

  while (true) {
    const auto k = static_cast<Index>(active.size());
    const Eigen::MatrixXd A = active_matrix(G.values(), active, k);
    curve.entries.push_back(make_entry(linalg::economy_svd(A), active, G.observations()));
    if (k == 1) break;

    std::vector<double> candidate(active.size());
    parallel_for(k, cfg.threads, [&](Index p) {
      candidate[static_cast<std::size_t>(p)] = min_singular(drop_col(A, p));
    });
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(argmin_with_ties(candidate)));
  }
  return curve;
}

OptimizationCurve sprint_minus(const FeatureMatrix& G, const SearchConfig& cfg) {
  require_nonempty(G);
  auto curve = empty_curve(Method::SprintMinus, G);
  std::vector<Index> active(static_cast<std::size_t>(G.cols()));
  std::iota(active.begin(), active.end(), Index{0});

  while (true) {
    const auto k = static_cast<Index>(active.size());
    const Eigen::MatrixXd A = active_matrix(G.values(), active, k);
    const auto F = linalg::economy_svd(A);
    curve.entries.push_back(make_entry(F, active, G.observations()));
    if (k == 1) break;

    const bool degenerate = spectrum_too_small(F.sigma, cfg.degenerate_sigma_ratio);
    const Eigen::MatrixXd Z = F.U.transpose() * A;
    const Eigen::VectorXd outside = (A - F.U * Z).colwise().squaredNorm().transpose();
    const Eigen::VectorXd norms = A.colwise().norm().transpose();

    std::vector<double> candidate(active.size());
    std::vector<char> fell_back(active.size(), 0);
    parallel_for(k, cfg.threads, [&](Index p) {
      const auto slot = static_cast<std::size_t>(p);
      if (!degenerate) {
        try {
          const auto upd = secular::RankOneUpdate::from_projection(
              secular::Direction::Remove, Z.col(p), norms(p), outside(p));
          candidate[slot] = secular::bisect_min_singular(F.sigma, upd, cfg.bisection);
          return;
        } catch (const secular::SecularBreakdown&) {
        }
      }
      fell_back[slot] = 1;
      candidate[slot] = min_singular(drop_col(A, p));
    });
    for (char f : fell_back) ++(f ? curve.stats.fallback : curve.stats.secular);
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(argmin_with_ties(candidate)));
  }
  return curve;
}

Index dominant_seed(const FeatureMatrix& G) {
  require_nonempty(G);
  std::vector<Index> all(static_cast<std::size_t>(G.cols()));
  std::iota(all.begin(), all.end(), Index{0});
  const auto F = linalg::economy_svd(active_matrix(G.values(), all, G.cols()));
  const auto [c, smin] = linalg::min_null_vector(F);
  Index best = 0;
  c.values.cwiseAbs().maxCoeff(&best);
  return c.support[static_cast<std::size_t>(best)];
}

OptimizationCurve sprint_plus(const FeatureMatrix& G, const SearchConfig& cfg) {
  require_nonempty(G);
  const Index n = G.cols();
  std::vector<Index> active = cfg.initial_support;
  if (active.empty()) active.push_back(dominant_seed(G));
  std::sort(active.begin(), active.end());
  if (std::adjacent_find(active.begin(), active.end()) != active.end()) {
    throw ConfigError("sprint+: initial support has duplicate columns");
  }
  if (active.front() < 0 || active.back() >= n) {
    throw ConfigError("sprint+: initial support column out of range");
  }
  const Index max_terms = cfg.max_terms > 0 ? cfg.max_terms : n;
  if (max_terms > n) throw ConfigError("sprint+: max_terms exceeds library size");
  if (max_terms < static_cast<Index>(active.size())) {
    throw ConfigError("sprint+: max_terms smaller than the initial support");
  }

  auto curve = empty_curve(Method::SprintPlus, G);
  while (true) {
    const auto k = static_cast<Index>(active.size());
    const Index rows = std::max(G.rows(), k + 1);
    const Eigen::MatrixXd A = active_matrix(G.values(), active, rows);
    const auto F = linalg::economy_svd(A);
    curve.entries.push_back(make_entry(F, active, G.observations()));
    if (k >= max_terms) break;

    std::vector<Index> absent;
    absent.reserve(static_cast<std::size_t>(n - k));
    for (Index j = 0, a = 0; j < n; ++j) {
      if (a < k && active[static_cast<std::size_t>(a)] == j) ++a;
      else absent.push_back(j);
    }
    const Eigen::MatrixXd B = active_matrix(G.values(), absent, rows);
    const bool degenerate = spectrum_too_small(F.sigma, cfg.degenerate_sigma_ratio);
    const Eigen::MatrixXd Z = F.U.transpose() * B;
    const Eigen::VectorXd outside = (B - F.U * Z).colwise().squaredNorm().transpose();
    const Eigen::VectorXd norms = B.colwise().norm().transpose();

    std::vector<double> candidate(absent.size());
    std::vector<char> fell_back(absent.size(), 0);
    parallel_for(static_cast<Index>(absent.size()), cfg.threads, [&](Index p) {
      const auto slot = static_cast<std::size_t>(p);
      if (!degenerate) {
        try {
          const auto upd = secular::RankOneUpdate::from_projection(
              secular::Direction::Add, Z.col(p), norms(p), outside(p));
          candidate[slot] = secular::bisect_min_singular(F.sigma, upd, cfg.bisection);
          return;
        } catch (const secular::SecularBreakdown&) {
        }
      }
      fell_back[slot] = 1;
      Eigen::MatrixXd AB(A.rows(), k + 1);
      AB << A, B.col(p);
      candidate[slot] = min_singular(AB);
    });
    for (char f : fell_back) ++(f ? curve.stats.fallback : curve.stats.secular);
    const Index chosen = absent[argmin_with_ties(candidate)];
    active.insert(std::upper_bound(active.begin(), active.end(), chosen), chosen);
  }
  return curve;
}

OptimizationCurve run_search(Method method, const FeatureMatrix& G, const SearchConfig& cfg) {
  switch (method) {
    case Method::Exhaustive: return exhaustive_search(G, cfg);
    case Method::SprintMinus: return sprint_minus(G, cfg);
    case Method::SprintPlus: return sprint_plus(G, cfg);
  }
  throw std::invalid_argument("run_search: unknown method");
}

ModelSelection select_model(const OptimizationCurve& curve, double gamma) {
  if (curve.entries.empty()) throw std::invalid_argument("select_model: empty curve");
  if (!(gamma > 1.0)) throw ConfigError("select_model: gamma must exceed 1");
  ModelSelection sel;
  if (curve.entries.size() == 1) {
    sel.k_star = curve.entries.front().k;
    return sel;
  }
  std::map<Index, double> r;
  for (const auto& e : curve.entries) r[e.k] = e.residual;
  for (auto it = r.rbegin(); it != r.rend(); ++it) {
    const auto prev = r.find(it->first - 1);
    if (prev != r.end() && prev->second > gamma * it->second) sel.elbows.push_back(it->first);
  }
  if (!sel.elbows.empty()) sel.k_star = sel.elbows.front();
  return sel;
}

RelationSet find_relations(const FeatureMatrix& G, const SearchConfig& cfg, Method method) {
  require_nonempty(G);
  RelationSet out;
  const Eigen::VectorXd norms = G.values().colwise().norm().transpose();
  std::vector<Index> library(static_cast<std::size_t>(G.cols()));
  std::iota(library.begin(), library.end(), Index{0});
  const double root_m = std::sqrt(static_cast<double>(G.observations()));

  while (!library.empty()) {
    const FeatureMatrix reduced = G.select_columns(library);
    const Index k = reduced.cols();
    out.terminal_sigma_min = min_singular(reduced.values()) / root_m;
    if (out.terminal_sigma_min > cfg.relation_sigma_threshold) break;

    SearchConfig inner = cfg;
    inner.initial_support.clear();
    for (Index seed : cfg.initial_support) {
      auto it = std::find(library.begin(), library.end(), seed);
      if (it != library.end()) inner.initial_support.push_back(it - library.begin());
    }
    if (inner.max_terms > k) inner.max_terms = k;
    const auto curve = run_search(method, reduced, inner);
    const auto sel = select_model(curve, cfg.gamma);
    if (!sel.k_star) break;
    const CurveEntry* chosen = curve.find(*sel.k_star);

    std::vector<Index> support;
    for (Index local : chosen->coefficients.support) {
      support.push_back(library[static_cast<std::size_t>(local)]);
    }
    Relation rel;
    rel.coefficients = CoefficientVector::make(support, chosen->coefficients.values);
    rel.residual = chosen->residual;
    double best = -1.0;
    for (std::size_t i = 0; i < support.size(); ++i) {
      const double contribution =
          std::abs(rel.coefficients.values(static_cast<Index>(i))) * norms(support[i]);
      if (contribution > best) {
        best = contribution;
        rel.removed_term = support[i];
      }
    }
    library.erase(std::find(library.begin(), library.end(), rel.removed_term));
    out.relations.push_back(std::move(rel));
  }
  return out;
}

}  // namespace sprint::regression
