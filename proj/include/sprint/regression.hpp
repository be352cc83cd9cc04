#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sprint/linalg.hpp"
#include "sprint/secular.hpp"

namespace sprint::regression {

using linalg::CoefficientVector;
using linalg::FeatureMatrix;
using linalg::Index;

enum class Method { Exhaustive, SprintMinus, SprintPlus };

std::string to_string(Method method);
/// Accepts "exhaustive", "sprint-", "sprint+" (and "sprint_minus"/"sprint_plus").
Method method_from_string(std::string_view name);

struct CurveEntry {
  Index k = 0;
  double residual = 0.0;  // sigma_min / sqrt(observations)
  CoefficientVector coefficients;
};

/// Candidate evaluations in a secular-accelerated run, split by route.
struct SearchStats {
  Index secular = 0;
  Index fallback = 0;
};

/// One greedy run. Supports index into `labels` (the full library the run
/// started from). Entries are stored in the order they were produced: k
/// decreasing for removal methods, increasing for SPRINT+.
struct OptimizationCurve {
  Method method = Method::Exhaustive;
  std::vector<CurveEntry> entries;
  std::vector<std::string> labels;
  Index observations = 0;
  std::string library_id;
  SearchStats stats;

  const CurveEntry* find(Index k) const;
};

struct SearchConfig {
  double gamma = 1.25;
  /// SPRINT+ halting size; 0 means the full library.
  Index max_terms = 0;
  /// SPRINT+ starting columns; empty means dominant_seed().
  std::vector<Index> initial_support;
  /// sigma_min / sigma_1 below which secular evaluation is skipped.
  double degenerate_sigma_ratio = 1e-12;
  /// find_relations stops when the reduced library's residual exceeds this.
  double relation_sigma_threshold = 1e-2;
  secular::BisectionConfig bisection;
  int threads = 1;
};

/// Greedy removal with a direct SVD per candidate.
OptimizationCurve exhaustive_search(const FeatureMatrix& G, const SearchConfig& cfg = {});

/// Greedy removal ranked by secular bisection on the current factorization.
OptimizationCurve sprint_minus(const FeatureMatrix& G, const SearchConfig& cfg = {});

/// Greedy addition from `cfg.initial_support` up to `cfg.max_terms` columns.
OptimizationCurve sprint_plus(const FeatureMatrix& G, const SearchConfig& cfg = {});

OptimizationCurve run_search(Method method, const FeatureMatrix& G, const SearchConfig& cfg);

/// Column carrying the largest-magnitude entry of the full-library null
/// vector; the default one-term SPRINT+ seed.
Index dominant_seed(const FeatureMatrix& G);

struct ModelSelection {
  /// Largest flagged k. Empty when nothing is flagged, except that a
  /// single-entry curve selects its only entry.
  std::optional<Index> k_star;
  /// Every k with r_{k-1} > gamma * r_k, largest first.
  std::vector<Index> elbows;
};

ModelSelection select_model(const OptimizationCurve& curve, double gamma);

struct Relation {
  CoefficientVector coefficients;  // indices into the original library
  double residual = 0.0;
  Index removed_term = -1;  // original column index
};

struct RelationSet {
  std::vector<Relation> relations;
  /// Residual (sigma_min / sqrt(m)) of the library left when the search stopped.
  double terminal_sigma_min = 0.0;
};

/// Repeated search: select a model, record it, drop its dominant term
/// (largest ||c_n g_n||), and search the reduced library again.
RelationSet find_relations(const FeatureMatrix& G, const SearchConfig& cfg, Method method);

}  // namespace sprint::regression
