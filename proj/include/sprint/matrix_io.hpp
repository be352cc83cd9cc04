#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sprint/linalg.hpp"

namespace sprint::io {

/// Framed binary container shared by feature matrices and trajectories:
///
///   8 bytes   magic (ASCII)
///   8 bytes   header length H, uint64 little-endian
///   H bytes   UTF-8 JSON header
///   rest      float64 little-endian payload, row-major
struct Frame {
  nlohmann::json header;
  std::vector<double> payload;
};

void write_frame(const std::filesystem::path& path, std::string_view magic, const Frame& frame);
Frame read_frame(const std::filesystem::path& path, std::string_view magic);

inline constexpr std::string_view kFeatureMatrixMagic = "SPRNTFM1";

/// CSV: header row of term labels, then one observation per row.
void write_feature_matrix_csv(const std::filesystem::path& path, const linalg::FeatureMatrix& G);
linalg::FeatureMatrix read_feature_matrix_csv(const std::filesystem::path& path);

/// Binary: header {"rows","cols","observations","labels"}, payload row-major.
void write_feature_matrix_bin(const std::filesystem::path& path, const linalg::FeatureMatrix& G);
linalg::FeatureMatrix read_feature_matrix_bin(const std::filesystem::path& path);

/// Dispatches on extension: ".csv" or anything else (binary).
void write_feature_matrix(const std::filesystem::path& path, const linalg::FeatureMatrix& G);
linalg::FeatureMatrix read_feature_matrix(const std::filesystem::path& path);

}  // namespace sprint::io
