#include "sprint/curve_io.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>

namespace sprint::io {

nlohmann::json curve_to_json(const regression::OptimizationCurve& curve, double gamma) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : curve.entries) {
    entries.push_back({{"k", e.k},
                       {"residual", e.residual},
                       {"support", e.coefficients.support},
                       {"coefficients", std::vector<double>(e.coefficients.values.begin(),
                                                            e.coefficients.values.end())}});
  }
  return {{"method", regression::to_string(curve.method)},
          {"library_id", curve.library_id},
          {"observations", curve.observations},
          {"gamma", gamma},
          {"labels", curve.labels},
          {"stats", {{"secular", curve.stats.secular}, {"fallback", curve.stats.fallback}}},
          {"entries", entries}};
}

regression::OptimizationCurve curve_from_json(const nlohmann::json& j) {
  try {
    regression::OptimizationCurve curve;
    curve.method = regression::method_from_string(j.at("method").get<std::string>());
    curve.library_id = j.value("library_id", std::string{});
    curve.observations = j.at("observations").get<linalg::Index>();
    curve.labels = j.at("labels").get<std::vector<std::string>>();
    if (j.contains("stats")) {
      curve.stats.secular = j["stats"].value("secular", linalg::Index{0});
      curve.stats.fallback = j["stats"].value("fallback", linalg::Index{0});
    }
    for (const auto& e : j.at("entries")) {
      auto support = e.at("support").get<std::vector<linalg::Index>>();
      auto values = e.at("coefficients").get<std::vector<double>>();
      regression::CurveEntry entry;
      entry.k = e.at("k").get<linalg::Index>();
      entry.residual = e.at("residual").get<double>();
      entry.coefficients = linalg::CoefficientVector::make(
          std::move(support), Eigen::Map<Eigen::VectorXd>(values.data(),
                                                          static_cast<Eigen::Index>(values.size())));
      curve.entries.push_back(std::move(entry));
    }
    return curve;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("curve JSON: ") + e.what());
  }
}

void write_curve_json(const std::filesystem::path& path,
                      const regression::OptimizationCurve& curve, double gamma) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ConfigError("cannot open '" + path.string() + "' for writing");
  out << curve_to_json(curve, gamma).dump(1) << '\n';
}

regression::OptimizationCurve read_curve_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path.string() + "' for reading");
  try {
    return curve_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("'" + path.string() + "': " + e.what());
  }
}

void write_curve_csv(const std::filesystem::path& path,
                     const regression::OptimizationCurve& curve) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ConfigError("cannot open '" + path.string() + "' for writing");
  std::vector<const regression::CurveEntry*> rows;
  for (const auto& e : curve.entries) rows.push_back(&e);
  std::sort(rows.begin(), rows.end(), [](auto* a, auto* b) { return a->k < b->k; });
  out << "k,r_k\n" << std::setprecision(17);
  for (const auto* e : rows) out << e->k << ',' << e->residual << '\n';
}

}  // namespace sprint::io
