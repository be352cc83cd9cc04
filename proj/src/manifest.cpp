#include "sprint/manifest.hpp"

#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <memory>

#include "sprint/error.hpp"

namespace sprint::manifest {

namespace fs = std::filesystem;

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256: digest initialization failed");
  }
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    const auto got = in.gcount();
    if (got > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(got));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md.data(), &len);
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 0xf]);
  }
  return out;
}

fs::path manifest_path(const fs::path& artifact) {
  fs::path p = artifact;
  p += ".manifest.json";
  return p;
}

void write_manifest(const fs::path& artifact, const std::string& command,
                    const std::vector<fs::path>& inputs, const nlohmann::json& config) {
  nlohmann::json in = nlohmann::json::array();
  for (const auto& p : inputs) {
    in.push_back({{"path", p.string()}, {"sha256", sha256_file(p)}});
  }
  const nlohmann::json m = {{"tool", kToolName},
                            {"version", kToolVersion},
                            {"command", command},
                            {"artifact", artifact.filename().string()},
                            {"sha256", sha256_file(artifact)},
                            {"inputs", in},
                            {"config", config}};
  std::ofstream out(manifest_path(artifact));
  out << m.dump(2) << '\n';
  if (!out) throw std::runtime_error("cannot write manifest for " + artifact.string());
}

void verify_input(const fs::path& input) {
  if (!fs::exists(input)) throw ConfigError("missing input " + input.string());
  const fs::path mp = manifest_path(input);
  if (!fs::exists(mp)) return;
  std::ifstream in(mp);
  nlohmann::json m;
  try {
    in >> m;
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("unreadable manifest " + mp.string());
  }
  if (m.value("sha256", std::string()) != sha256_file(input)) {
    throw ConfigError("hash mismatch: " + input.string() + " differs from its manifest");
  }
}

}  // namespace sprint::manifest
