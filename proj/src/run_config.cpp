#include "sprint/run_config.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "sprint/error.hpp"

namespace sprint::config {

using nlohmann::json;

namespace {

enum class Kind { Number, Integer, Bool, String, Numbers, Integers, Strings };

// section -> key -> expected type
const std::map<std::string, std::map<std::string, Kind>>& schema() {
  static const std::map<std::string, std::map<std::string, Kind>> s = {
      {"run", {{"threads", Kind::Integer}, {"seed", Kind::Integer}}},
      {"simulation",
       {{"length", Kind::Number},
        {"duration", Kind::Number},
        {"nx", Kind::Integer},
        {"nt", Kind::Integer},
        {"epsilon", Kind::Number},
        {"newton_tol", Kind::Number},
        {"max_newton_iterations", Kind::Integer},
        {"substeps", Kind::Integer},
        {"pad_factor", Kind::Integer}}},
      {"noise",
       {{"enabled", Kind::Bool},
        {"amplitude", Kind::Number},
        {"mean", Kind::Number},
        {"stddev", Kind::Number},
        {"seed", Kind::Integer}}},
      {"library",
       {{"kind", Kind::String},
        {"fields", Kind::Strings},
        {"derivatives", Kind::Strings},
        {"max_length", Kind::Integer},
        {"pinned", Kind::Strings}}},
      {"subdomains",
       {{"count", Kind::Integer},
        {"half_width_x", Kind::Number},
        {"half_width_t", Kind::Number},
        {"seed", Kind::Integer},
        {"beta", Kind::Integer}}},
      {"regression",
       {{"method", Kind::String},
        {"gamma", Kind::Number},
        {"seed_terms", Kind::Strings},
        {"max_terms", Kind::Integer},
        {"qr_reduce", Kind::Bool},
        {"find_relations", Kind::Bool},
        {"relation_threshold", Kind::Number}}},
      {"benchmark",
       {{"sizes", Kind::Integers}, {"methods", Kind::Strings}, {"trials", Kind::Integer}, {"seed", Kind::Integer}}},
      {"extrapolate", {{"sizes", Kind::Numbers}, {"mhd_max_length", Kind::Integer}}},
      {"paths",
       {{"trajectory", Kind::String},
        {"library", Kind::String},
        {"features", Kind::String},
        {"scales", Kind::String},
        {"curve", Kind::String},
        {"curve_csv", Kind::String},
        {"selection", Kind::String},
        {"relations", Kind::String},
        {"benchmark", Kind::String},
        {"extrapolation", Kind::String}}},
  };
  return s;
}

bool matches(const json& v, Kind kind) {
  auto all = [&](auto pred) {
    if (!v.is_array()) return false;
    for (const auto& e : v) {
      if (!pred(e)) return false;
    }
    return true;
  };
  switch (kind) {
    case Kind::Number: return v.is_number();
    case Kind::Integer: return v.is_number_integer();
    case Kind::Bool: return v.is_boolean();
    case Kind::String: return v.is_string();
    case Kind::Numbers: return all([](const json& e) { return e.is_number(); });
    case Kind::Integers: return all([](const json& e) { return e.is_number_integer(); });
    case Kind::Strings: return all([](const json& e) { return e.is_string(); });
  }
  return false;
}

std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
void take(const json& section, const char* key, T& out) {
  if (section.contains(key)) out = section.at(key).get<T>();
}

}  // namespace

json parse_run_file(std::string_view text, const std::string& source) {
  json out = json::object();
  std::istringstream in{std::string(text)};
  std::string raw;
  std::string section;
  int lineno = 0;
  auto fail = [&](const std::string& what) {
    throw ConfigError(source + ":" + std::to_string(lineno) + ": " + what);
  };
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail("unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!schema().contains(section)) fail("unknown section [" + section + "]");
      if (out.contains(section)) fail("duplicate section [" + section + "]");
      out[section] = json::object();
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected key = value");
    if (section.empty()) fail("key outside of a section");
    const std::string key = trim(line.substr(0, eq));
    const auto& keys = schema().at(section);
    const auto it = keys.find(key);
    if (it == keys.end()) fail("unknown key '" + key + "' in [" + section + "]");
    if (out[section].contains(key)) fail("duplicate key '" + key + "'");
    json value;
    try {
      value = json::parse(trim(line.substr(eq + 1)));
    } catch (const json::parse_error&) {
      fail("cannot parse value of '" + key + "'");
    }
    if (!matches(value, it->second)) fail("wrong type for '" + key + "'");
    out[section][key] = std::move(value);
  }
  return out;
}

void RunConfig::override_seed(std::uint64_t seed) {
  if (noise) noise->seed = seed;
  subdomains.seed = seed;
  benchmark.seed = seed;
}

RunConfig from_run_file(const json& parsed) {
  RunConfig c;
  c.source = parsed;
  const json empty = json::object();
  auto section = [&](const char* name) -> const json& {
    return parsed.contains(name) ? parsed.at(name) : empty;
  };
  try {
    const json& run = section("run");
    take(run, "threads", c.threads);
    if (c.threads < 1) throw ConfigError("run.threads must be >= 1");

    const json& sim = section("simulation");
    take(sim, "length", c.simulation.length);
    take(sim, "duration", c.simulation.duration);
    take(sim, "nx", c.simulation.nx);
    take(sim, "nt", c.simulation.nt);
    take(sim, "epsilon", c.simulation.epsilon);
    take(sim, "newton_tol", c.simulation.newton_tol);
    take(sim, "max_newton_iterations", c.simulation.max_newton_iterations);
    take(sim, "substeps", c.simulation.substeps);
    take(sim, "pad_factor", c.simulation.pad_factor);
    c.simulation.validate();

    const json& noise = section("noise");
    if (noise.value("enabled", true)) {
      take(noise, "amplitude", c.noise->amplitude);
      take(noise, "mean", c.noise->mean);
      take(noise, "stddev", c.noise->stddev);
      take(noise, "seed", c.noise->seed);
      if (!(c.noise->stddev > 0.0)) throw ConfigError("noise.stddev must be positive");
    } else {
      c.noise.reset();
    }

    const json& lib = section("library");
    take(lib, "kind", c.library.kind);
    take(lib, "fields", c.library.fields);
    take(lib, "derivatives", c.library.derivatives);
    take(lib, "max_length", c.library.max_length);
    take(lib, "pinned", c.library.pinned);
    static const std::set<std::string> kinds = {"ks-dynamic", "ks-spatial", "enumerate"};
    if (!kinds.contains(c.library.kind)) throw ConfigError("library.kind must be ks-dynamic, ks-spatial or enumerate");
    if (c.library.max_length < 1) throw ConfigError("library.max_length must be >= 1");

    const json& sub = section("subdomains");
    take(sub, "count", c.subdomains.count);
    if (sub.contains("half_width_x")) c.subdomains.half_width_x = sub.at("half_width_x").get<double>();
    if (sub.contains("half_width_t")) c.subdomains.half_width_t = sub.at("half_width_t").get<double>();
    take(sub, "seed", c.subdomains.seed);
    take(sub, "beta", c.subdomains.beta);
    if (c.subdomains.count < 1) throw ConfigError("subdomains.count must be >= 1");
    if (c.subdomains.beta < 2) throw ConfigError("subdomains.beta must be >= 2");

    const json& reg = section("regression");
    if (reg.contains("method")) {
      c.regression.method = regression::method_from_string(reg.at("method").get<std::string>());
    }
    take(reg, "gamma", c.regression.gamma);
    take(reg, "seed_terms", c.regression.seed_terms);
    take(reg, "max_terms", c.regression.max_terms);
    take(reg, "qr_reduce", c.regression.qr_reduce);
    take(reg, "find_relations", c.regression.find_relations);
    take(reg, "relation_threshold", c.regression.relation_threshold);
    if (!(c.regression.gamma > 1.0)) throw ConfigError("regression.gamma must be > 1");
    if (c.regression.max_terms < 0) throw ConfigError("regression.max_terms must be >= 0");

    const json& bench = section("benchmark");
    take(bench, "sizes", c.benchmark.sizes);
    take(bench, "trials", c.benchmark.trials);
    take(bench, "seed", c.benchmark.seed);
    if (bench.contains("methods")) {
      c.benchmark.methods.clear();
      for (const auto& m : bench.at("methods")) {
        c.benchmark.methods.push_back(regression::method_from_string(m.get<std::string>()));
      }
    }
    c.benchmark.threads = c.threads;

    const json& ext = section("extrapolate");
    take(ext, "sizes", c.extrapolate.sizes);
    take(ext, "mhd_max_length", c.extrapolate.mhd_max_length);

    const json& paths = section("paths");
    take(paths, "trajectory", c.paths.trajectory);
    take(paths, "library", c.paths.library);
    take(paths, "features", c.paths.features);
    take(paths, "scales", c.paths.scales);
    take(paths, "curve", c.paths.curve);
    take(paths, "curve_csv", c.paths.curve_csv);
    take(paths, "selection", c.paths.selection);
    take(paths, "relations", c.paths.relations);
    take(paths, "benchmark", c.paths.benchmark);
    take(paths, "extrapolation", c.paths.extrapolation);

    if (run.contains("seed")) c.override_seed(run.at("seed").get<std::uint64_t>());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("run file: ") + e.what());
  }
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open run file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return from_run_file(parse_run_file(text.str(), path.string()));
}

}  // namespace sprint::config
