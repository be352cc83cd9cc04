#pragma once

#include <filesystem>

#include <json.hpp>

#include "sprint/regression.hpp"

namespace sprint::io {

nlohmann::json curve_to_json(const regression::OptimizationCurve& curve, double gamma);
regression::OptimizationCurve curve_from_json(const nlohmann::json& j);

/// JSON with labels, supports and coefficients for every k.
void write_curve_json(const std::filesystem::path& path,
                      const regression::OptimizationCurve& curve, double gamma);
regression::OptimizationCurve read_curve_json(const std::filesystem::path& path);

/// Plot-ready "k,r_k" table, rows in increasing k.
void write_curve_csv(const std::filesystem::path& path,
                     const regression::OptimizationCurve& curve);

}  // namespace sprint::io
