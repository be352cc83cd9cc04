#include "sprint/secular.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>

namespace sprint::secular {

namespace {

// Relative gap below which the two bracketing singular values are treated as
// one and the removal bracket collapses.
constexpr double kDegenerateGap = 1e-12;
// Fraction of ||g||^2 a removed column may have outside span(U).
constexpr double kOutsideTolerance = 1e-8;
constexpr double kEndpointClamp = 1e-15;

// (x - y)(x + y) loses less than x*x - y*y near x == y.
inline double diff_sq(double x, double y) { return (x - y) * (x + y); }

void require_direction(const RankOneUpdate& upd, Direction expected, const char* fn) {
  if (upd.direction != expected) throw std::invalid_argument(std::string(fn) + ": wrong direction");
}

}  // namespace

RankOneUpdate RankOneUpdate::make(Direction direction, const SvdFactorization& F,
                                  const Eigen::Ref<const Eigen::VectorXd>& g) {
  if (g.size() != F.U.rows()) throw std::invalid_argument("rank-one update: column length mismatch");
  const Eigen::VectorXd projection = F.U.transpose() * g;
  const double outside = (g - F.U * projection).squaredNorm();
  return from_projection(direction, projection, g.norm(), outside);
}

RankOneUpdate RankOneUpdate::from_projection(Direction direction,
                                             const Eigen::Ref<const Eigen::VectorXd>& projection,
                                             double g_norm, double outside_norm2) {
  if (!(g_norm > 0.0) || !std::isfinite(g_norm)) {
    throw SecularBreakdown("rank-one update: zero or non-finite column");
  }
  RankOneUpdate upd;
  upd.direction = direction;
  upd.alpha = 1.0 / g_norm;
  upd.w = upd.alpha * projection;
  upd.outside = outside_norm2 * upd.alpha * upd.alpha;
  return upd;
}

double secular_minus(double s, const Eigen::VectorXd& sigma, const RankOneUpdate& upd) {
  require_direction(upd, Direction::Remove, "secular_minus");
  double sum = 0.0;
  for (Index j = 0; j < sigma.size(); ++j) {
    const double denom = diff_sq(sigma(j), s);
    if (denom == 0.0) throw NumericalError("pole");
    sum += upd.w(j) * upd.w(j) / denom;
  }
  return 1.0 - sum / (upd.alpha * upd.alpha);
}

double secular_minus(double s, const SvdFactorization& F, const RankOneUpdate& upd) {
  return secular_minus(s, F.sigma, upd);
}

double secular_plus(double s, const Eigen::VectorXd& sigma, const RankOneUpdate& upd,
                    PlusForm form) {
  require_direction(upd, Direction::Add, "secular_plus");
  if (s == 0.0) throw NumericalError("pole");
  double sum = 0.0;
  for (Index j = 0; j < sigma.size(); ++j) {
    const double denom = diff_sq(sigma(j), s);
    if (denom == 0.0) throw NumericalError("pole");
    const double weight = form == PlusForm::Squared ? upd.w(j) * upd.w(j) : upd.w(j);
    sum += weight / denom;
  }
  const double a2 = upd.alpha * upd.alpha;
  return 1.0 + sum / a2 - upd.outside / (a2 * s * s);
}

double secular_plus(double s, const SvdFactorization& F, const RankOneUpdate& upd,
                    PlusForm form) {
  return secular_plus(s, F.sigma, upd, form);
}

double secular_regularized(double s, const Eigen::VectorXd& sigma, const RankOneUpdate& upd,
                           PlusForm form) {
  const Index r = sigma.size();
  const double a2 = upd.alpha * upd.alpha;
  if (upd.direction == Direction::Remove) {
    if (r < 2) throw std::invalid_argument("secular_regularized: removal needs rank >= 2");
    const double sn = sigma(r - 1);
    const double sn1 = sigma(r - 2);
    if (sn1 - sn <= kDegenerateGap * sn1) throw SecularBreakdown("degenerate spectrum");
    const double a = diff_sq(s, sn);
    const double b = diff_sq(s, sn1);
    const double d = diff_sq(sn, sn1);
    double sum = 0.0;
    for (Index j = 0; j < r - 2; ++j) sum += upd.w(j) * upd.w(j) / diff_sq(sigma(j), s);
    const double wn = upd.w(r - 1);
    const double wn1 = upd.w(r - 2);
    return (a2 * a * b + wn * wn * b + wn1 * wn1 * a - a * b * sum) / d;
  }

  if (r < 1) throw std::invalid_argument("secular_regularized: empty spectrum");
  const double sn = sigma(r - 1);
  if (!(sn > 0.0)) throw SecularBreakdown("degenerate spectrum");
  const double a = diff_sq(s, sn);
  const double sn2 = sn * sn;
  const double p = a * s * s / sn2;
  double sum = 0.0;
  for (Index j = 0; j < r - 1; ++j) {
    const double weight = form == PlusForm::Squared ? upd.w(j) * upd.w(j) : upd.w(j);
    sum += weight / diff_sq(sigma(j), s);
  }
  const double wn = form == PlusForm::Squared ? upd.w(r - 1) * upd.w(r - 1) : upd.w(r - 1);
  return a2 * p + p * sum - wn * s * s / sn2 - upd.outside * a / sn2;
}

double secular_regularized(double s, const SvdFactorization& F, const RankOneUpdate& upd,
                           PlusForm form) {
  return secular_regularized(s, F.sigma, upd, form);
}

Bracket bracket(const Eigen::VectorXd& sigma, Direction direction) {
  const Index r = sigma.size();
  if (direction == Direction::Remove) {
    if (r < 2) throw std::invalid_argument("bracket: removal needs at least two singular values");
    return {sigma(r - 1), sigma(r - 2)};
  }
  if (r < 1) throw std::invalid_argument("bracket: empty spectrum");
  return {0.0, sigma(r - 1)};
}

double bisect_min_singular(const Eigen::VectorXd& sigma, const RankOneUpdate& upd,
                           const BisectionConfig& cfg, std::vector<BisectionStep>* trace,
                           PlusForm form) {
  if (cfg.max_iterations < 1 || !(cfg.relative_tolerance > 0.0)) {
    throw std::invalid_argument("bisection config: need max_iterations >= 1 and tolerance > 0");
  }
  if (upd.direction == Direction::Remove && upd.outside > kOutsideTolerance) {
    throw SecularBreakdown("removed column not representable in the retained basis");
  }
  auto [lower, upper] = bracket(sigma, upd.direction);
  const double f_lower = secular_regularized(lower, sigma, upd, form);
  const double f_upper = secular_regularized(upper, sigma, upd, form);
  if (!(f_lower > 0.0 && f_upper < 0.0)) throw SecularBreakdown("secular breakdown");

  const double clamp = kEndpointClamp * sigma(sigma.size() - 1);
  for (int it = 1; it <= cfg.max_iterations; ++it) {
    double guess = 0.5 * (lower + upper);
    if (upper - lower > 2.0 * clamp) guess = std::clamp(guess, lower + clamp, upper - clamp);
    const double value = secular_regularized(guess, sigma, upd, form);
    if (trace) trace->push_back({it, lower, upper, guess, value});
    if (value > 0.0) lower = guess;
    else if (value < 0.0) upper = guess;
    else return guess;
    if (upper - lower <= cfg.relative_tolerance * upper) break;
  }
  return 0.5 * (lower + upper);
}

void write_trace_csv(const std::filesystem::path& path, const std::vector<BisectionStep>& trace) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open '" + path.string() + "' for writing");
  out << "k,lower,upper,guess,value\n" << std::setprecision(17);
  for (const auto& s : trace) {
    out << s.iteration << ',' << s.lower << ',' << s.upper << ',' << s.guess << ',' << s.value << '\n';
  }
}

}  // namespace sprint::secular
