// Command-line driver: simulate -> library -> featurize -> regress -> select,
// plus the scaling benchmark and its extrapolation.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sprint/benchmark.hpp"
#include "sprint/curve_io.hpp"
#include "sprint/error.hpp"
#include "sprint/ks.hpp"
#include "sprint/manifest.hpp"
#include "sprint/matrix_io.hpp"
#include "sprint/regression.hpp"
#include "sprint/run_config.hpp"
#include "sprint/symlib.hpp"
#include "sprint/trajectory_io.hpp"
#include "sprint/weakform.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace sprint;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  std::optional<int> threads;
};

struct Context {
  config::RunConfig cfg;
  fs::path out_dir;
  std::vector<fs::path> config_inputs;  // the run file, when given

  fs::path resolve(const std::string& p) const {
    const fs::path path(p);
    return path.is_absolute() ? path : out_dir / path;
  }
};

/// Outputs are written to "<path>.partial" and renamed on commit; anything
/// not committed is removed.
class OutputSet {
 public:
  fs::path stage(const fs::path& final_path) {
    fs::path tmp = final_path;
    tmp += ".partial";
    staged_.emplace_back(tmp, final_path);
    return tmp;
  }
  std::vector<fs::path> commit() {
    std::vector<fs::path> done;
    for (const auto& [tmp, final_path] : staged_) {
      fs::rename(tmp, final_path);
      done.push_back(final_path);
    }
    staged_.clear();
    return done;
  }
  ~OutputSet() {
    std::error_code ec;
    for (const auto& [tmp, final_path] : staged_) fs::remove(tmp, ec);
  }

 private:
  std::vector<std::pair<fs::path, fs::path>> staged_;
};

void publish(OutputSet& outputs, const Context& ctx, const std::string& command,
             std::vector<fs::path> inputs) {
  inputs.insert(inputs.end(), ctx.config_inputs.begin(), ctx.config_inputs.end());
  for (const auto& artifact : outputs.commit()) {
    manifest::write_manifest(artifact, command, inputs, ctx.cfg.source);
    std::cout << "wrote " << artifact.string() << '\n';
  }
}

fs::path checked_input(const Context& ctx, const std::string& p) {
  const fs::path path = ctx.resolve(p);
  manifest::verify_input(path);
  return path;
}

symlib::Library build_library(const config::LibrarySpec& spec) {
  symlib::Library lib;
  if (spec.kind == "ks-dynamic") {
    lib = symlib::ks_dynamic_library(spec.max_length);
  } else if (spec.kind == "ks-spatial") {
    lib = symlib::ks_spatial_library(spec.max_length);
  } else {
    lib = symlib::enumerate(symlib::Alphabet(spec.fields, spec.derivatives), spec.max_length);
  }
  for (const auto& term : spec.pinned) lib.pin(term);
  return lib;
}

void cmd_simulate(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto start = std::chrono::steady_clock::now();
  ks::TrajectoryRecord traj = ks::simulate(cfg.simulation);
  if (cfg.noise) traj = ks::add_noise(std::move(traj), *cfg.noise);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::cout << "simulated " << traj.u.rows() << " x " << traj.u.cols() << " samples in " << secs
            << " s, mean Newton iterations " << traj.mean_newton_iterations << ", max |u| "
            << traj.u.cwiseAbs().maxCoeff() << '\n';
  OutputSet out;
  io::write_trajectory(out.stage(ctx.resolve(cfg.paths.trajectory)), traj);
  publish(out, ctx, "simulate", {});
}

void cmd_library(const Context& ctx) {
  const symlib::Library lib = build_library(ctx.cfg.library);
  std::cout << "library: " << lib.size() << " terms (max length " << lib.max_length << ")\n";
  OutputSet out;
  symlib::write_library_json(out.stage(ctx.resolve(ctx.cfg.paths.library)), lib);
  publish(out, ctx, "library", {});
}

void cmd_featurize(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  const fs::path traj_path = checked_input(ctx, cfg.paths.trajectory);
  const fs::path lib_path = checked_input(ctx, cfg.paths.library);
  const ks::TrajectoryRecord traj = io::read_trajectory(traj_path);
  const symlib::Library lib = symlib::read_library_json(lib_path);

  weakform::HalfWidths hw = weakform::default_half_widths(traj);
  if (cfg.subdomains.half_width_x) hw.x = *cfg.subdomains.half_width_x;
  if (cfg.subdomains.half_width_t) hw.t = *cfg.subdomains.half_width_t;
  const auto subdomains =
      weakform::sample_subdomains(weakform::Grid::of(traj), hw, cfg.subdomains.count, cfg.subdomains.seed);
  const weakform::ScaleModel scales = weakform::estimate_scales(traj);
  const auto build = weakform::build_feature_matrix(lib, traj, subdomains,
                                                    weakform::WeightSpec{cfg.subdomains.beta}, scales);
  std::cout << "feature matrix " << build.G.rows() << " x " << build.G.cols() << "; scales mu=" << scales.mu_u
            << " sigma=" << scales.sigma_u << " L=" << scales.L_u << " T=" << scales.T_u << '\n';

  json sc = {{"mu_u", scales.mu_u},
             {"sigma_u", scales.sigma_u},
             {"L_u", scales.L_u},
             {"T_u", scales.T_u},
             {"labels", build.G.labels()},
             {"column_scales", std::vector<double>(build.column_scales.data(),
                                                   build.column_scales.data() + build.column_scales.size())}};
  OutputSet out;
  io::write_feature_matrix(out.stage(ctx.resolve(cfg.paths.features)), build.G);
  {
    std::ofstream s(out.stage(ctx.resolve(cfg.paths.scales)));
    s << sc.dump(1) << '\n';
    if (!s) throw std::runtime_error("cannot write " + cfg.paths.scales);
  }
  publish(out, ctx, "featurize", {traj_path, lib_path});
}

std::vector<linalg::Index> seed_columns(const std::vector<std::string>& terms,
                                        const std::vector<std::string>& labels) {
  std::vector<linalg::Index> out;
  for (const auto& term : terms) {
    const auto it = std::find(labels.begin(), labels.end(), term);
    if (it == labels.end()) throw ConfigError("seed term '" + term + "' is not in the library");
    out.push_back(static_cast<linalg::Index>(it - labels.begin()));
  }
  return out;
}

void cmd_regress(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  const fs::path features = checked_input(ctx, cfg.paths.features);
  linalg::FeatureMatrix G = io::read_feature_matrix(features);
  if (cfg.regression.qr_reduce && G.rows() > G.cols()) G = linalg::qr_reduce(G);

  regression::SearchConfig search;
  search.gamma = cfg.regression.gamma;
  search.max_terms = cfg.regression.max_terms;
  search.relation_sigma_threshold = cfg.regression.relation_threshold;
  search.threads = cfg.threads;
  search.initial_support = seed_columns(cfg.regression.seed_terms, G.labels());

  const auto start = std::chrono::steady_clock::now();
  regression::OptimizationCurve curve = regression::run_search(cfg.regression.method, G, search);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  curve.library_id = manifest::sha256_file(features).substr(0, 16);
  std::cout << regression::to_string(curve.method) << ": " << curve.entries.size() << " curve entries in "
            << secs << " s (secular " << curve.stats.secular << ", fallback " << curve.stats.fallback << ")\n";

  OutputSet out;
  io::write_curve_json(out.stage(ctx.resolve(cfg.paths.curve)), curve, cfg.regression.gamma);
  io::write_curve_csv(out.stage(ctx.resolve(cfg.paths.curve_csv)), curve);
  if (cfg.regression.find_relations) {
    const auto rel = regression::find_relations(G, search, cfg.regression.method);
    json rj = {{"terminal_residual", rel.terminal_sigma_min}, {"relations", json::array()}};
    for (const auto& r : rel.relations) {
      json terms = json::array();
      for (std::size_t i = 0; i < r.coefficients.support.size(); ++i) {
        terms.push_back({{"term", G.labels()[static_cast<std::size_t>(r.coefficients.support[i])]},
                         {"coefficient", r.coefficients.values(static_cast<linalg::Index>(i))}});
      }
      rj["relations"].push_back({{"residual", r.residual},
                                 {"removed_term", G.labels()[static_cast<std::size_t>(r.removed_term)]},
                                 {"terms", terms}});
    }
    std::ofstream s(out.stage(ctx.resolve(cfg.paths.relations)));
    s << rj.dump(1) << '\n';
    std::cout << "relations found: " << rel.relations.size() << '\n';
  }
  publish(out, ctx, "regress", {features});
}

void cmd_select(const Context& ctx, std::optional<double> gamma_flag) {
  const auto& cfg = ctx.cfg;
  const double gamma = gamma_flag.value_or(cfg.regression.gamma);
  if (!(gamma > 1.0)) throw ConfigError("gamma must be > 1");
  const fs::path curve_path = checked_input(ctx, cfg.paths.curve);
  const regression::OptimizationCurve curve = io::read_curve_json(curve_path);
  const regression::ModelSelection sel = regression::select_model(curve, gamma);

  std::vector<fs::path> inputs{curve_path};
  std::optional<Eigen::VectorXd> column_scales;
  const fs::path scales_path = ctx.resolve(cfg.paths.scales);
  if (fs::exists(scales_path)) {
    manifest::verify_input(scales_path);
    std::ifstream in(scales_path);
    const json sc = json::parse(in);
    if (sc.at("labels").get<std::vector<std::string>>() == curve.labels) {
      const auto v = sc.at("column_scales").get<std::vector<double>>();
      column_scales = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
      inputs.push_back(scales_path);
    }
  }

  json result = {{"gamma", gamma}, {"elbows", sel.elbows}, {"k_star", nullptr}};
  if (sel.k_star) {
    const regression::CurveEntry* e = curve.find(*sel.k_star);
    result["k_star"] = *sel.k_star;
    result["residual"] = e->residual;
    json terms = json::array();
    const Eigen::VectorXd phys =
        column_scales ? weakform::physical_coefficients(e->coefficients, *column_scales) : Eigen::VectorXd();
    std::cout << "k* = " << *sel.k_star << ", r = " << e->residual << '\n';
    for (std::size_t i = 0; i < e->coefficients.support.size(); ++i) {
      const auto idx = static_cast<Eigen::Index>(i);
      json t = {{"term", curve.labels[static_cast<std::size_t>(e->coefficients.support[i])]},
                {"coefficient", e->coefficients.values(idx)}};
      if (column_scales) t["physical"] = phys(idx);
      std::cout << "  " << std::setw(14) << t["term"].get<std::string>() << "  " << e->coefficients.values(idx);
      if (column_scales) std::cout << "  (physical " << phys(idx) << ")";
      std::cout << '\n';
      terms.push_back(std::move(t));
    }
    result["terms"] = terms;
  } else {
    std::cout << "no elbow flagged at gamma = " << gamma << '\n';
  }
  OutputSet out;
  {
    std::ofstream s(out.stage(ctx.resolve(cfg.paths.selection)));
    s << result.dump(1) << '\n';
  }
  publish(out, ctx, "select", inputs);
}

void cmd_benchmark(const Context& ctx) {
  const auto report = benchmark::run_benchmark(ctx.cfg.benchmark, &std::cout);
  for (const auto& f : report.fits) {
    std::cout << regression::to_string(f.method) << ": alpha = " << f.alpha << ", beta = " << f.beta
              << (f.valid ? "" : " (no fit)") << '\n';
  }
  OutputSet out;
  const fs::path json_path = ctx.resolve(ctx.cfg.paths.benchmark);
  {
    std::ofstream s(out.stage(json_path));
    s << benchmark::report_to_json(report).dump(1) << '\n';
  }
  {
    fs::path csv = json_path;
    csv.replace_extension(".csv");
    std::ofstream s(out.stage(csv));
    s << "method,n,mean_seconds,trials,failures\n" << std::setprecision(17);
    for (const auto& c : report.cells) {
      s << regression::to_string(c.method) << ',' << c.n << ',' << c.mean() << ',' << c.seconds.size() << ','
        << c.failures << '\n';
    }
  }
  publish(out, ctx, "benchmark", {});
}

void cmd_extrapolate(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  const fs::path report_path = checked_input(ctx, cfg.paths.benchmark);
  std::ifstream in(report_path);
  const auto report = benchmark::report_from_json(json::parse(in));

  std::vector<std::pair<std::string, double>> targets;
  for (double n : cfg.extrapolate.sizes) targets.emplace_back("requested", n);
  const auto mhd = symlib::Alphabet::mhd();
  for (int len = 1; len <= cfg.extrapolate.mhd_max_length; ++len) {
    targets.emplace_back("mhd_length_" + std::to_string(len), static_cast<double>(symlib::count(mhd, len)));
  }
  if (targets.empty()) throw ConfigError("extrapolate: no target sizes");

  OutputSet out;
  {
    std::ofstream s(out.stage(ctx.resolve(cfg.paths.extrapolation)));
    s << "source,n";
    for (const auto& f : report.fits) s << ",seconds_" << regression::to_string(f.method);
    s << '\n' << std::setprecision(6);
    for (const auto& [source, n] : targets) {
      s << source << ',' << n;
      for (const auto& f : report.fits) {
        s << ',';
        if (f.valid) s << f.predict(n);
      }
      s << '\n';
    }
  }
  publish(out, ctx, "extrapolate", {report_path});
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse null-vector regression toolkit"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_path, "Run file")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Override every seed in the run file");
  app.add_option("--out-dir", g.out_dir, "Directory for relative artifact paths");
  app.add_option("--threads", g.threads, "Worker threads for candidate scans")->check(CLI::PositiveNumber);

  std::optional<double> gamma;
  std::map<std::string, CLI::App*> verbs;
  verbs["simulate"] = app.add_subcommand("simulate", "Integrate the modified KS equation");
  verbs["library"] = app.add_subcommand("library", "Enumerate a symbolic library");
  verbs["featurize"] = app.add_subcommand("featurize", "Build the weak-form feature matrix");
  verbs["regress"] = app.add_subcommand("regress", "Compute an optimization curve");
  verbs["select"] = app.add_subcommand("select", "Apply the elbow rule to a stored curve");
  verbs["select"]->add_option("--gamma", gamma, "Residual jump factor (> 1)");
  verbs["benchmark"] = app.add_subcommand("benchmark", "Time the regression methods on random matrices");
  verbs["extrapolate"] = app.add_subcommand("extrapolate", "Extrapolate benchmark fits to larger libraries");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    Context ctx;
    if (!g.config_path.empty()) {
      ctx.cfg = config::load_run_config(g.config_path);
      ctx.config_inputs.emplace_back(g.config_path);
    }
    if (g.seed) ctx.cfg.override_seed(*g.seed);
    if (g.threads) {
      ctx.cfg.threads = *g.threads;
      ctx.cfg.benchmark.threads = *g.threads;
    }
    ctx.out_dir = g.out_dir;
    fs::create_directories(ctx.out_dir);

    if (verbs["simulate"]->parsed()) cmd_simulate(ctx);
    if (verbs["library"]->parsed()) cmd_library(ctx);
    if (verbs["featurize"]->parsed()) cmd_featurize(ctx);
    if (verbs["regress"]->parsed()) cmd_regress(ctx);
    if (verbs["select"]->parsed()) cmd_select(ctx, gamma);
    if (verbs["benchmark"]->parsed()) cmd_benchmark(ctx);
    if (verbs["extrapolate"]->parsed()) cmd_extrapolate(ctx);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const json::exception& e) {
    std::cerr << "error: malformed input (" << e.what() << ")\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
