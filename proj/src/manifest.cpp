#include "projlab/manifest.hpp"

#include <openssl/evp.h>

#include <array>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <memory>

#include "projlab/types.hpp"

namespace projlab {

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("sha256: cannot open '" + path + "'");
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256: digest initialisation failed");
  }
  std::array<char, 1 << 16> buf;
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> md;
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md.data(), &len);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[md[i] >> 4];
    out += kHex[md[i] & 0xf];
  }
  return out;
}

std::string utc_timestamp() {
  const auto now = std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void RunManifest::add_output(const std::string& dir, const std::string& name) {
  const std::filesystem::path p = std::filesystem::path(dir) / name;
  outputs.push_back({name, sha256_file(p.string()), std::filesystem::file_size(p)});
}

nlohmann::json RunManifest::to_json() const {
  nlohmann::json outs = nlohmann::json::array();
  for (const auto& o : outputs) {
    outs.push_back({{"path", o.path}, {"sha256", o.sha256}, {"bytes", o.bytes}});
  }
  return {{"artifact_version", kArtifactVersion},
          {"command", command},
          {"config", config},
          {"seed", seed},
          {"workers", workers},
          {"started_at", started_at},
          {"finished_at", finished_at},
          {"outputs", outs},
          {"notes", notes}};
}

void RunManifest::write(const std::string& dir) {
  finished_at = utc_timestamp();
  const std::filesystem::path p = std::filesystem::path(dir) / "manifest.json";
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("manifest: cannot write '" + p.string() + "'");
  out << to_json().dump(2) << '\n';
  if (!out) throw std::runtime_error("manifest: write failed for '" + p.string() + "'");
}

}  // namespace projlab
