// Acceptance runner: one check per criterion, one PASS/FAIL line each.
// Exit status is 0 only when every requested criterion passes.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "sprint/benchmark.hpp"
#include "sprint/ks.hpp"
#include "sprint/linalg.hpp"
#include "sprint/regression.hpp"
#include "sprint/secular.hpp"
#include "sprint/symlib.hpp"
#include "sprint/weakform.hpp"

using namespace sprint;
using Eigen::Index;
using regression::Method;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

bool report(int n, bool pass, const std::string& detail) {
  std::cout << "criterion " << n << ": " << (pass ? "PASS" : "FAIL") << " (" << detail << ")" << std::endl;
  return pass;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

linalg::FeatureMatrix fm(const Eigen::MatrixXd& A) {
  return linalg::FeatureMatrix(A, linalg::index_labels(A.cols()));
}

Eigen::MatrixXd drop(const Eigen::MatrixXd& A, Index k) {
  Eigen::MatrixXd out(A.rows(), A.cols() - 1);
  out << A.leftCols(k), A.rightCols(A.cols() - k - 1);
  return out;
}

std::set<Index> as_set(const std::vector<Index>& v) { return {v.begin(), v.end()}; }

// ---------------------------------------------------------------------------

bool secular_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> log_cond(0.0, 8.0);
  const int trials = 1200;
  int fallbacks = 0, mismatches = 0, direct_mismatches = 0;
  double worst = 0.0, direct_worst = 0.0;
  int by_decade[8] = {};
  for (int trial = 0; trial < trials; ++trial) {
    const bool removal = trial % 2 == 0;
    const int n = std::uniform_int_distribution<int>(5, removal ? 50 : 49)(rng);
    const int m = std::uniform_int_distribution<int>(removal ? n : n + 1, 50)(rng);
    const double decades = log_cond(rng);
    const Eigen::MatrixXd A = oracle::with_condition(m, n, std::pow(10.0, decades), rng);
    const auto F = linalg::economy_svd(A);

    Eigen::MatrixXd modified;
    Eigen::VectorXd g;
    if (removal) {
      const Index k = std::uniform_int_distribution<Index>(0, n - 1)(rng);
      g = A.col(k);
      modified = drop(A, k);
    } else {
      g = oracle::gaussian(m, 1, rng).col(0) / std::sqrt(static_cast<double>(m));
      modified.resize(m, n + 1);
      modified << A, g;
    }
    const double expect = oracle::jacobi_singular_values(modified).minCoeff();

    // Reference point for the floor set by double precision: the library's
    // own direct SVD of the modified matrix against the same oracle.
    const double direct = std::abs(linalg::singular_values(modified).minCoeff() - expect) / expect;
    direct_worst = std::max(direct_worst, direct);
    if (direct > 1e-9) ++direct_mismatches;

    try {
      const auto upd = secular::RankOneUpdate::make(
          removal ? secular::Direction::Remove : secular::Direction::Add, F, g);
      const double got = secular::bisect_min_singular(F, upd);
      const double rel = std::abs(got - expect) / expect;
      worst = std::max(worst, rel);
      if (rel > 1e-9) {
        ++mismatches;
        ++by_decade[std::min(7, static_cast<int>(decades))];
      }
    } catch (const secular::SecularBreakdown&) {
      ++fallbacks;
    }
  }
  const double seconds = since(t0);
  const double fallback_rate = static_cast<double>(fallbacks) / trials;
  if (mismatches > 0) {
    std::cout << "  secular mismatches by log10(condition) decade:";
    for (int d = 0; d < 8; ++d) std::cout << " [" << d << "," << d + 1 << "):" << by_decade[d];
    std::cout << "\n  direct double-precision SVD vs oracle: " << direct_mismatches << " above 1e-9, worst "
              << fmt("%.2e", direct_worst) << std::endl;
  }
  return report(1, mismatches == 0 && fallback_rate < 0.05 && seconds < 60.0,
                std::to_string(trials) + " matrices, " + std::to_string(mismatches) + " mismatches, worst rel err " +
                    fmt("%.2e", worst) + ", fallbacks " + fmt("%.2f%%", 100.0 * fallback_rate) + ", " +
                    fmt("%.1f s", seconds));
}

// ---------------------------------------------------------------------------

bool bisection_rate() {
  std::mt19937_64 rng(202);
  secular::BisectionConfig cfg;
  cfg.max_iterations = 60;
  cfg.relative_tolerance = 1e-300;  // run all 60 steps so the floor is visible
  double lo_ratio = 1.0, hi_ratio = 0.0;
  int late = 0;
  const int instances = 50;
  for (int i = 0; i < instances; ++i) {
    const Eigen::MatrixXd A = oracle::gaussian(3, 3, rng);
    const auto F = linalg::economy_svd(A);
    const auto upd = secular::RankOneUpdate::make(secular::Direction::Remove, F, A.col(2));
    std::vector<secular::BisectionStep> trace;
    secular::bisect_min_singular(F, upd, cfg, &trace);

    int reached = -1;
    for (std::size_t k = 0; k < trace.size(); ++k) {
      if (std::abs(trace[k].value) < 1e-13) {
        reached = static_cast<int>(k) + 1;
        break;
      }
    }
    if (reached < 0 || reached > 60) ++late;

    // Fit log2 |f| against the iteration count above the rounding floor.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int count = 0;
    for (std::size_t k = 0; k < trace.size(); ++k) {
      const double v = std::abs(trace[k].value);
      if (v < 1e-12) break;
      const double x = static_cast<double>(k), y = std::log2(v);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++count;
    }
    const double slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
    const double ratio = std::exp2(slope);
    lo_ratio = std::min(lo_ratio, ratio);
    hi_ratio = std::max(hi_ratio, ratio);
  }
  const bool pass = lo_ratio >= 0.45 && hi_ratio <= 0.55 && late == 0;
  return report(2, pass, std::to_string(instances) + " 3x3 removals, per-iteration ratio in [" +
                             fmt("%.3f", lo_ratio) + ", " + fmt("%.3f", hi_ratio) + "], " + std::to_string(late) +
                             " above 1e-13 after 60 iterations");
}

// ---------------------------------------------------------------------------

bool minus_equals_exhaustive() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(303);
  int support_mismatch = 0, residual_mismatch = 0;
  double worst = 0.0;
  Index secular_count = 0, fallback_count = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = std::uniform_int_distribution<int>(5, 30)(rng);
    const int m = std::uniform_int_distribution<int>(n, 2 * n)(rng);
    const double cond = std::pow(10.0, std::uniform_real_distribution<double>(0.0, 2.0)(rng));
    const auto G = fm(oracle::with_condition(m, n, cond, rng));
    const auto ex = regression::exhaustive_search(G);
    const auto sm = regression::sprint_minus(G);
    secular_count += sm.stats.secular;
    fallback_count += sm.stats.fallback;
    for (const auto& e : ex.entries) {
      const auto* s = sm.find(e.k);
      if (s == nullptr || as_set(s->coefficients.support) != as_set(e.coefficients.support)) {
        ++support_mismatch;
        continue;
      }
      const double rel = std::abs(s->residual - e.residual) / e.residual;
      worst = std::max(worst, rel);
      if (rel > 1e-9) ++residual_mismatch;
    }
  }
  const double seconds = since(t0);
  return report(3, support_mismatch == 0 && residual_mismatch == 0 && seconds < 300.0,
                "100 matrices, " + std::to_string(support_mismatch) + " support mismatches, " +
                    std::to_string(residual_mismatch) + " residual mismatches, worst rel " + fmt("%.2e", worst) +
                    ", SPRINT- secular/fallback " + std::to_string(secular_count) + "/" +
                    std::to_string(fallback_count) + ", " + fmt("%.1f s", seconds));
}

// ---------------------------------------------------------------------------
// Modified KS pipeline at the reference configuration.

struct KsFeatures {
  linalg::FeatureMatrix G;  // QR-reduced
  weakform::FeatureBuild build;
  symlib::Library library;
  double simulate_seconds = 0.0;
  double featurize_seconds = 0.0;
};

KsFeatures ks_features(bool with_time_derivative) {
  KsFeatures out;
  auto t0 = Clock::now();
  const ks::SimConfig sim;  // L = 22, T = 400, 128 x 5120, epsilon = 1e-6
  const auto traj = ks::add_noise(ks::simulate(sim), ks::NoiseSpec{});  // 1e-7 N(0, 0.218)
  out.simulate_seconds = since(t0);

  t0 = Clock::now();
  out.library = with_time_derivative ? symlib::ks_dynamic_library() : symlib::ks_spatial_library();
  const auto subs = weakform::sample_subdomains(weakform::Grid::of(traj), weakform::default_half_widths(traj), 1024, 0);
  out.build = weakform::build_feature_matrix(out.library, traj, subs, {}, weakform::estimate_scales(traj));
  out.G = linalg::qr_reduce(out.build.G);
  out.featurize_seconds = since(t0);
  return out;
}

Index column_of(const symlib::Library& lib, const char* text) {
  const auto label = symlib::to_string(symlib::parse_word(text, lib.alphabet), lib.alphabet);
  const auto labels = lib.labels();
  const auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) throw std::runtime_error(std::string("term not in library: ") + text);
  return it - labels.begin();
}

std::string support_string(const std::vector<Index>& support, const std::vector<std::string>& labels) {
  std::string s;
  for (Index j : support) s += (s.empty() ? "" : " + ") + labels[static_cast<std::size_t>(j)];
  return s;
}

struct KsVerdict {
  bool pass = false;
  std::string detail;
};

// Checks a dynamic-library curve against the modified KS equation.
KsVerdict judge_dynamic(const regression::OptimizationCurve& curve, const KsFeatures& f,
                        const std::vector<Index>& truth) {
  KsVerdict v;
  const auto sel = regression::select_model(curve, 1.25);
  const auto labels = f.library.labels();
  const bool has_k4 = std::find(sel.elbows.begin(), sel.elbows.end(), 4) != sel.elbows.end();
  std::string elbows;
  for (Index k : sel.elbows) elbows += (elbows.empty() ? "" : ",") + std::to_string(k);
  v.detail = "elbows [" + elbows + "], k*=" + (sel.k_star ? std::to_string(*sel.k_star) : std::string("none"));
  v.detail += ", elbow at 4 " + std::string(has_k4 ? "present" : "absent");
  if (!sel.k_star) return v;
  const auto* chosen = curve.find(*sel.k_star);
  const bool exact = as_set(chosen->coefficients.support) == as_set(truth);
  if (!exact) v.detail += ", support {" + support_string(chosen->coefficients.support, labels) + "}";

  bool coefficients_ok = false;
  const auto* e8 = curve.find(8);
  if (e8 != nullptr && as_set(e8->coefficients.support) == as_set(truth)) {
    const Eigen::VectorXd phys = weakform::physical_coefficients(e8->coefficients, f.build.column_scales);
    auto coef = [&](const char* text) {
      const Index col = column_of(f.library, text);
      const auto& s = e8->coefficients.support;
      return phys(std::find(s.begin(), s.end(), col) - s.begin());
    };
    const double ut = coef("dt(u)");
    coefficients_ok = true;
    v.detail += ", eps estimates [";
    const char* words[] = {"u^2*dx(u)", "u^3*dx(u)", "u^4*dx(u)", "u^5*dx(u)"};
    for (int p = 3; p <= 6; ++p) {
      // -eps (u^p)_x = -eps p u^(p-1) u_x in a relation normalized to dt(u) = 1.
      const double eps = -coef(words[p - 3]) / ut / p;
      coefficients_ok &= std::abs(eps - 1e-6) <= 0.05e-6;
      v.detail += (p > 3 ? " " : "") + fmt("%.4g", eps);
    }
    v.detail += "]";
  }
  const auto* e4 = curve.find(4);
  double ratio = NAN;
  if (e4 != nullptr && e8 != nullptr) ratio = e4->residual / e8->residual;
  const bool ratio_ok = ratio >= 264.0 / 3.0 && ratio <= 264.0 * 3.0;
  v.detail += ", r4/r8=" + fmt("%.4g", ratio);
  v.pass = *sel.k_star == 8 && exact && coefficients_ok && has_k4 && ratio_ok;
  return v;
}

bool ks_dynamic() {
  const auto f = ks_features(true);
  const std::vector<Index> truth = {
      column_of(f.library, "dt(u)"),     column_of(f.library, "u*dx(u)"),   column_of(f.library, "dx^2(u)"),
      column_of(f.library, "dx^4(u)"),   column_of(f.library, "u^2*dx(u)"), column_of(f.library, "u^3*dx(u)"),
      column_of(f.library, "u^4*dx(u)"), column_of(f.library, "u^5*dx(u)")};

  const auto t0 = Clock::now();
  regression::SearchConfig cfg;
  cfg.initial_support = {column_of(f.library, "dx^2(u)")};
  const auto plus = regression::sprint_plus(f.G, cfg);
  const double regress_seconds = since(t0);
  const auto verdict = judge_dynamic(plus, f, truth);

  // Diagnostic only: the same features through the exhaustive search.
  const auto ex = regression::exhaustive_search(f.G, cfg);
  const auto diag = judge_dynamic(ex, f, truth);
  std::cout << "  exhaustive on the same features: " << (diag.pass ? "meets" : "misses") << " the criterion ("
            << diag.detail << ")" << std::endl;

  return report(4, verdict.pass,
                "SPRINT+ from dx^2(u): " + verdict.detail + "; simulate " + fmt("%.1f s", f.simulate_seconds) +
                    ", featurize " + fmt("%.1f s", f.featurize_seconds) + ", regress " +
                    fmt("%.1f s", regress_seconds));
}

// ---------------------------------------------------------------------------

// Sign picked up by a word under u(x) -> -u(-x): each factor d^n u gives (-1)^(n+1).
int reflection_parity(const symlib::SymbolicWord& w) {
  int parity = 1;
  for (const auto& factor : w.factors()) parity *= (factor.order() + 1) % 2 == 0 ? 1 : -1;
  return parity;
}

bool ks_spatial() {
  const auto f = ks_features(false);
  const char* expected_terms[] = {"u^2*dx^3(u)", "u*dx(u)*dx^2(u)", "u*dx^4(u)", "dx(u)^3",   "dx(u)*dx^3(u)",
                                  "dx^2(u)^2",   "dx^5(u)",         "u*dx^6(u)", "dx(u)*dx^5(u)", "dx^2(u)*dx^4(u)",
                                  "dx^3(u)^2",   "dx^7(u)",         "dx^9(u)"};
  std::vector<Index> truth;
  for (const char* t : expected_terms) truth.push_back(column_of(f.library, t));

  const auto curve = regression::exhaustive_search(f.G);
  const auto sel = regression::select_model(curve, 1.25);
  const bool flagged = std::find(sel.elbows.begin(), sel.elbows.end(), 13) != sel.elbows.end();
  const auto* e13 = curve.find(13);
  const auto labels = f.library.labels();
  const bool exact = e13 != nullptr && as_set(e13->coefficients.support) == as_set(truth);

  // Share of the relation's weight ||c_n g_n|| on terms of the minority reflection parity.
  const auto terms = f.library.terms();
  double even = 0.0, odd = 0.0;
  for (Index i = 0; i < e13->coefficients.size(); ++i) {
    const Index col = e13->coefficients.support[static_cast<std::size_t>(i)];
    const double weight = std::abs(e13->coefficients.values(i)) * f.G.column(col).norm();
    (reflection_parity(terms[static_cast<std::size_t>(col)]) > 0 ? even : odd) += weight;
  }
  const double mixed = std::min(even, odd) / (even + odd);

  std::string elbows;
  for (Index k : sel.elbows) elbows += (elbows.empty() ? "" : ",") + std::to_string(k);
  std::string detail = "elbows [" + elbows + "], elbow at 13 " + (flagged ? "flagged" : "not flagged");
  detail += exact ? ", support matches" : ", support {" + support_string(e13->coefficients.support, labels) + "}";
  detail += ", minority-parity weight " + fmt("%.2e", mixed);
  return report(5, flagged && exact && mixed < 0.1, detail);
}

// ---------------------------------------------------------------------------

bool library_counts() {
  const auto t0 = Clock::now();
  const auto lib = symlib::ks_dynamic_library();
  bool bounded = true;
  std::string counts;
  for (int n = 1; n <= 5; ++n) {
    const auto c = symlib::count(symlib::Alphabet::mhd(), n);
    const auto b = symlib::upper_bound(symlib::Alphabet::mhd().size(), n);
    bounded &= b.saturated || c <= b.value;
    counts += (n > 1 ? "," : "") + std::to_string(c);
  }
  const auto c5 = symlib::count(symlib::Alphabet::mhd(), 5);
  const double seconds = since(t0);
  const bool pass = lib.size() == 139 && bounded && c5 >= 5000 && c5 <= 50000 && seconds < 60.0;
  return report(6, pass, "KS library " + std::to_string(lib.size()) + " terms, MHD counts n=1..5 [" + counts +
                             "], bound " + (bounded ? "respected" : "violated"));
}

// ---------------------------------------------------------------------------

bool scaling_exponents() {
  const auto t0 = Clock::now();
  benchmark::BenchmarkConfig cfg;  // n = 32..256, 8 trials, all methods
  const auto rep = benchmark::run_benchmark(cfg, &std::cout);
  const auto* ex = rep.fit(Method::Exhaustive);
  const auto* sm = rep.fit(Method::SprintMinus);
  const auto* sp = rep.fit(Method::SprintPlus);
  const bool fits = ex && sm && sp && ex->valid && sm->valid && sp->valid;
  bool pass = fits;
  std::string detail;
  if (fits) {
    pass &= ex->alpha >= 3.3 && ex->alpha <= 4.5;
    pass &= sm->alpha >= 2.7 && sm->alpha <= 3.8;
    pass &= sp->alpha >= 1.3 && sp->alpha <= 2.2;
    const double speedup = rep.cell(Method::Exhaustive, 256)->mean() / rep.cell(Method::SprintPlus, 256)->mean();
    pass &= speedup >= 10.0;
    detail = "alpha exhaustive " + fmt("%.2f", ex->alpha) + ", SPRINT- " + fmt("%.2f", sm->alpha) + ", SPRINT+ " +
             fmt("%.2f", sp->alpha) + ", exhaustive/SPRINT+ at n=256 " + fmt("%.1f", speedup) + "x";
  } else {
    detail = "a fit was missing or invalid";
  }
  return report(7, pass, detail + ", " + fmt("%.0f s", since(t0)));
}

// ---------------------------------------------------------------------------

bool planted_recovery() {
  const auto t0 = Clock::now();
  int missed = 0;
  std::string first_miss;
  for (int seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(static_cast<std::uint64_t>(8000 + seed));
    const int count = 1 + seed % 3;
    const auto planted = oracle::planted_relations(200, 24, count, 1e-8, rng);
    const auto found = regression::find_relations(fm(planted.A), regression::SearchConfig{}, Method::SprintMinus);
    std::set<std::set<Index>> got;
    for (const auto& r : found.relations) got.insert(as_set(r.coefficients.support));
    bool all = true;
    for (const auto& s : planted.supports) all &= got.count(as_set(s)) == 1;
    if (!all) {
      ++missed;
      if (first_miss.empty()) first_miss = ", first miss at seed " + std::to_string(seed);
    }
  }
  const double seconds = since(t0);
  return report(8, missed == 0 && seconds < 120.0,
                "100 seeds, " + std::to_string(missed) + " with a missed relation" + first_miss + ", " +
                    fmt("%.1f s", seconds));
}

// ---------------------------------------------------------------------------

bool qr_invariance() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(909);
  int support_mismatch = 0, residual_mismatch = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = std::uniform_int_distribution<int>(8, 64)(rng);
    const auto G = fm(oracle::gaussian(1024, n, rng));
    const auto R = linalg::qr_reduce(G);
    for (Method m : {Method::Exhaustive, Method::SprintMinus}) {
      const auto a = regression::run_search(m, G, {});
      const auto b = regression::run_search(m, R, {});
      for (const auto& e : a.entries) {
        const auto* f = b.find(e.k);
        if (f == nullptr || f->coefficients.support != e.coefficients.support) {
          ++support_mismatch;
          continue;
        }
        const double rel = std::abs(f->residual - e.residual) / e.residual;
        worst = std::max(worst, rel);
        if (rel > 1e-9) ++residual_mismatch;
      }
    }
  }
  const double seconds = since(t0);
  return report(9, support_mismatch == 0 && residual_mismatch == 0 && seconds < 120.0,
                "20 matrices 1024 x n, exhaustive and SPRINT-, " + std::to_string(support_mismatch) +
                    " support mismatches, worst rel residual " + fmt("%.2e", worst) + ", " + fmt("%.1f s", seconds));
}

// ---------------------------------------------------------------------------

bool integrator_order() {
  ks::SimConfig cfg;
  cfg.epsilon = 0.0;
  cfg.newton_tol = 1e-13;  // keep the stage solve well below the step error
  ks::KsSystem sys(cfg);
  const Eigen::VectorXd u0 = ks::initial_condition(cfg);
  std::vector<Eigen::VectorXd> end;
  for (double dt : {0.1, 0.05, 0.025}) {
    Eigen::VectorXcd h = sys.to_spectral(u0);
    const int steps = static_cast<int>(std::lround(1.0 / dt));
    for (int i = 0; i < steps; ++i) sys.gl6_step(h, dt);
    end.push_back(sys.to_physical(h));
  }
  const double e1 = (end[0] - end[1]).norm(), e2 = (end[1] - end[2]).norm();
  const double order = std::log2(e1 / e2);
  return report(10, order >= 5.5,
                "self-convergence order " + fmt("%.2f", order) + " from differences " + fmt("%.2e", e1) + ", " +
                    fmt("%.2e", e2));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  std::vector<int> selected;
  app.add_option("--criterion", selected, "Criterion number(s) to run; all when omitted")
      ->check(CLI::Range(1, 10));
  CLI11_PARSE(app, argc, argv);
  if (selected.empty()) selected = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};

  const std::map<int, bool (*)()> checks = {
      {1, secular_oracle}, {2, bisection_rate},   {3, minus_equals_exhaustive}, {4, ks_dynamic},
      {5, ks_spatial},     {6, library_counts},   {7, scaling_exponents},       {8, planted_recovery},
      {9, qr_invariance},  {10, integrator_order}};
  bool all = true;
  for (int c : selected) {
    try {
      all &= checks.at(c)();
    } catch (const std::exception& e) {
      all &= report(c, false, std::string("threw: ") + e.what());
    }
  }
  return all ? 0 : 1;
}
