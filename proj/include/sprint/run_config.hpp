#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sprint/benchmark.hpp"
#include "sprint/ks.hpp"
#include "sprint/regression.hpp"

namespace sprint::config {

/// Run file grammar (TOML subset):
///
///   # comment
///   [section]
///   key = value
///
/// where value is a JSON literal on one line: number, "string", true/false,
/// or a flat array of those. Unknown sections, unknown keys and mistyped
/// values are rejected.
nlohmann::json parse_run_file(std::string_view text, const std::string& source = "<run file>");

struct LibrarySpec {
  /// "ks-dynamic", "ks-spatial" or "enumerate".
  std::string kind = "ks-dynamic";
  std::vector<std::string> fields = {"u"};
  std::vector<std::string> derivatives = {"x"};
  int max_length = 10;
  std::vector<std::string> pinned;
};

struct SubdomainSpec {
  int count = 1024;
  std::optional<double> half_width_x;  // default L/8
  std::optional<double> half_width_t;  // default T/100
  std::uint64_t seed = 0;
  int beta = 8;
};

struct RegressionSpec {
  regression::Method method = regression::Method::SprintPlus;
  double gamma = 1.25;
  std::vector<std::string> seed_terms;  // SPRINT+ start, by label
  linalg::Index max_terms = 0;
  bool qr_reduce = true;
  bool find_relations = false;
  double relation_threshold = 1e-2;
};

struct ExtrapolateSpec {
  std::vector<double> sizes;
  /// Also extrapolate to the MHD library sizes for max lengths 1..n.
  int mhd_max_length = 0;
};

struct Paths {
  std::string trajectory = "trajectory.bin";
  std::string library = "library.json";
  std::string features = "features.bin";
  std::string scales = "scales.json";
  std::string curve = "curve.json";
  std::string curve_csv = "curve.csv";
  std::string selection = "selection.json";
  std::string relations = "relations.json";
  std::string benchmark = "benchmark.json";
  std::string extrapolation = "extrapolation.csv";
};

struct RunConfig {
  ks::SimConfig simulation;
  std::optional<ks::NoiseSpec> noise = ks::NoiseSpec{};
  LibrarySpec library;
  SubdomainSpec subdomains;
  RegressionSpec regression;
  benchmark::BenchmarkConfig benchmark;
  ExtrapolateSpec extrapolate;
  Paths paths;
  int threads = 1;
  nlohmann::json source = nlohmann::json::object();  // parsed run file, for manifests

  /// Replaces every seed (noise, subdomains, benchmark).
  void override_seed(std::uint64_t seed);
};

RunConfig from_run_file(const nlohmann::json& parsed);
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace sprint::config
