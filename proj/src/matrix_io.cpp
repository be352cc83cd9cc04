#include "sprint/matrix_io.hpp"

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace sprint::io {

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

namespace {

std::ifstream open_in(const std::filesystem::path& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw ConfigError("cannot open '" + path.string() + "' for reading");
  return in;
}

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode | std::ios::trunc);
  if (!out) throw ConfigError("cannot open '" + path.string() + "' for writing");
  return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cell.push_back('"');
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cell.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      cells.push_back(std::move(cell));
      cell.clear();
    } else if (ch != '\r') {
      cell.push_back(ch);
    }
  }
  cells.push_back(std::move(cell));
  return cells;
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += "\"\"";
    else out.push_back(ch);
  }
  return out + "\"";
}

}  // namespace

void write_frame(const std::filesystem::path& path, std::string_view magic, const Frame& frame) {
  if (magic.size() != 8) throw std::invalid_argument("frame magic must be 8 bytes");
  const std::string header = frame.header.dump();
  const std::uint64_t header_len = header.size();
  auto out = open_out(path, std::ios::binary);
  out.write(magic.data(), 8);
  out.write(reinterpret_cast<const char*>(&header_len), sizeof header_len);
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  out.write(reinterpret_cast<const char*>(frame.payload.data()),
            static_cast<std::streamsize>(frame.payload.size() * sizeof(double)));
  if (!out) throw ConfigError("write failed: '" + path.string() + "'");
}

Frame read_frame(const std::filesystem::path& path, std::string_view magic) {
  auto in = open_in(path, std::ios::binary);
  char got[8] = {};
  in.read(got, 8);
  if (!in || std::string_view(got, 8) != magic) {
    throw ConfigError("'" + path.string() + "': bad magic, expected " + std::string(magic));
  }
  std::uint64_t header_len = 0;
  in.read(reinterpret_cast<char*>(&header_len), sizeof header_len);
  if (!in || header_len > (1ull << 32)) throw ConfigError("'" + path.string() + "': corrupt header");
  std::string header(header_len, '\0');
  in.read(header.data(), static_cast<std::streamsize>(header_len));
  if (!in) throw ConfigError("'" + path.string() + "': truncated header");

  Frame frame;
  try {
    frame.header = nlohmann::json::parse(header);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("'" + path.string() + "': header is not JSON: " + e.what());
  }
  const auto begin = in.tellg();
  in.seekg(0, std::ios::end);
  const auto bytes = static_cast<std::size_t>(in.tellg() - begin);
  in.seekg(begin);
  if (bytes % sizeof(double) != 0) throw ConfigError("'" + path.string() + "': ragged payload");
  frame.payload.resize(bytes / sizeof(double));
  in.read(reinterpret_cast<char*>(frame.payload.data()), static_cast<std::streamsize>(bytes));
  return frame;
}

void write_feature_matrix_csv(const std::filesystem::path& path, const linalg::FeatureMatrix& G) {
  auto out = open_out(path);
  for (std::size_t j = 0; j < G.labels().size(); ++j) {
    if (j) out << ',';
    out << csv_quote(G.labels()[j]);
  }
  out << '\n' << std::setprecision(17);
  for (linalg::Index i = 0; i < G.rows(); ++i) {
    for (linalg::Index j = 0; j < G.cols(); ++j) {
      if (j) out << ',';
      out << G.values()(i, j);
    }
    out << '\n';
  }
}

linalg::FeatureMatrix read_feature_matrix_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("'" + path.string() + "': empty CSV");
  auto labels = split_csv_line(line);
  std::vector<double> data;
  linalg::Index rows = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    auto cells = split_csv_line(line);
    if (cells.size() != labels.size()) {
      throw ConfigError("'" + path.string() + "': row " + std::to_string(rows + 1) + " has " +
                        std::to_string(cells.size()) + " cells, expected " +
                        std::to_string(labels.size()));
    }
    for (const auto& cell : cells) {
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc{} || ptr != cell.data() + cell.size()) {
        throw ConfigError("'" + path.string() + "': not a number: '" + cell + "'");
      }
      data.push_back(v);
    }
    ++rows;
  }
  const auto cols = static_cast<linalg::Index>(labels.size());
  Eigen::MatrixXd values =
      Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
          data.data(), rows, cols);
  return linalg::FeatureMatrix(std::move(values), std::move(labels));
}

void write_feature_matrix_bin(const std::filesystem::path& path, const linalg::FeatureMatrix& G) {
  Frame frame;
  frame.header = {{"rows", G.rows()},
                  {"cols", G.cols()},
                  {"observations", G.observations()},
                  {"labels", G.labels()}};
  frame.payload.resize(static_cast<std::size_t>(G.values().size()));
  Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      frame.payload.data(), G.rows(), G.cols()) = G.values();
  write_frame(path, kFeatureMatrixMagic, frame);
}

linalg::FeatureMatrix read_feature_matrix_bin(const std::filesystem::path& path) {
  auto frame = read_frame(path, kFeatureMatrixMagic);
  try {
    const auto rows = frame.header.at("rows").get<linalg::Index>();
    const auto cols = frame.header.at("cols").get<linalg::Index>();
    const auto obs = frame.header.value("observations", rows);
    auto labels = frame.header.at("labels").get<std::vector<std::string>>();
    if (static_cast<std::size_t>(rows * cols) != frame.payload.size()) {
      throw ConfigError("'" + path.string() + "': payload size does not match shape");
    }
    Eigen::MatrixXd values =
        Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
            frame.payload.data(), rows, cols);
    return linalg::FeatureMatrix(std::move(values), std::move(labels), obs);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("'" + path.string() + "': bad header: " + e.what());
  }
}

void write_feature_matrix(const std::filesystem::path& path, const linalg::FeatureMatrix& G) {
  if (path.extension() == ".csv") write_feature_matrix_csv(path, G);
  else write_feature_matrix_bin(path, G);
}

linalg::FeatureMatrix read_feature_matrix(const std::filesystem::path& path) {
  if (path.extension() == ".csv") return read_feature_matrix_csv(path);
  return read_feature_matrix_bin(path);
}

}  // namespace sprint::io
