#include "sprint/trajectory_io.hpp"

#include "sprint/error.hpp"
#include "sprint/matrix_io.hpp"

namespace sprint::io {

using nlohmann::json;

namespace {

json to_json_vector(const Eigen::VectorXd& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

Eigen::VectorXd vector_from_json(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

json sim_config_to_json(const ks::SimConfig& c) {
  return json{{"length", c.length},
              {"duration", c.duration},
              {"nx", c.nx},
              {"nt", c.nt},
              {"epsilon", c.epsilon},
              {"newton_tol", c.newton_tol},
              {"max_newton_iterations", c.max_newton_iterations},
              {"substeps", c.substeps},
              {"pad_factor", c.pad_factor}};
}

ks::SimConfig sim_config_from_json(const json& j) {
  ks::SimConfig c;
  c.length = j.value("length", c.length);
  c.duration = j.value("duration", c.duration);
  c.nx = j.value("nx", c.nx);
  c.nt = j.value("nt", c.nt);
  c.epsilon = j.value("epsilon", c.epsilon);
  c.newton_tol = j.value("newton_tol", c.newton_tol);
  c.max_newton_iterations = j.value("max_newton_iterations", c.max_newton_iterations);
  c.substeps = j.value("substeps", c.substeps);
  c.pad_factor = j.value("pad_factor", c.pad_factor);
  return c;
}

void write_trajectory(const std::filesystem::path& path, const ks::TrajectoryRecord& traj) {
  Frame frame;
  frame.header = json{{"config", sim_config_to_json(traj.config)},
                      {"nt", traj.u.rows()},
                      {"nx", traj.u.cols()},
                      {"x", to_json_vector(traj.x)},
                      {"t", to_json_vector(traj.t)},
                      {"mean_newton_iterations", traj.mean_newton_iterations}};
  if (traj.noise) {
    frame.header["noise"] = json{{"amplitude", traj.noise->amplitude},
                                 {"mean", traj.noise->mean},
                                 {"stddev", traj.noise->stddev},
                                 {"seed", traj.noise->seed}};
  }
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows = traj.u;
  frame.payload.assign(rows.data(), rows.data() + rows.size());
  write_frame(path, kTrajectoryMagic, frame);
}

ks::TrajectoryRecord read_trajectory(const std::filesystem::path& path) {
  Frame frame = read_frame(path, kTrajectoryMagic);
  ks::TrajectoryRecord traj;
  try {
    const auto& h = frame.header;
    traj.config = sim_config_from_json(h.at("config"));
    const auto nt = h.at("nt").get<Eigen::Index>();
    const auto nx = h.at("nx").get<Eigen::Index>();
    if (nt < 2 || nx < 1 || static_cast<std::size_t>(nt * nx) != frame.payload.size()) {
      throw ConfigError("trajectory " + path.string() + ": payload size does not match header");
    }
    traj.u = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        frame.payload.data(), nt, nx);
    traj.x = vector_from_json(h.at("x"));
    traj.t = vector_from_json(h.at("t"));
    if (traj.x.size() != nx || traj.t.size() != nt) {
      throw ConfigError("trajectory " + path.string() + ": grid sizes do not match header");
    }
    traj.mean_newton_iterations = h.value("mean_newton_iterations", 0.0);
    if (h.contains("noise")) {
      const auto& n = h.at("noise");
      traj.noise = ks::NoiseSpec{n.at("amplitude").get<double>(), n.at("mean").get<double>(),
                                 n.at("stddev").get<double>(), n.at("seed").get<std::uint64_t>()};
    }
  } catch (const json::exception& e) {
    throw ConfigError("trajectory " + path.string() + ": malformed header (" + e.what() + ")");
  }
  if (!traj.u.allFinite()) throw NumericalError("trajectory " + path.string() + ": non-finite samples");
  return traj;
}

}  // namespace sprint::io
