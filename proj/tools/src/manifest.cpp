#include "manifest.hpp"

#include <array>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <memory>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "dce/error.hpp"

namespace dce::cli {

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io_error", "cannot read '" + path + "' for hashing");
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw Error("io_error", "SHA-256 unavailable");
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md.data(), &len);
  std::string hex;
  char byte[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(byte, sizeof byte, "%02x", md[i]);
    hex += byte;
  }
  return hex;
}

RunManifest::RunManifest(std::string command, std::vector<std::string> args)
    : command_(std::move(command)), args_(std::move(args)), start_(std::chrono::steady_clock::now()),
      wall_start_(std::chrono::system_clock::now()) {}

void RunManifest::add_input(const std::string& path) { inputs_.push_back(path); }
void RunManifest::add_output(const std::string& path) { outputs_.push_back(path); }
void RunManifest::add_seed(const std::string& name, std::uint64_t value) { seeds_[name] = value; }
void RunManifest::add_config(const std::string& name, const std::string& value) { config_[name] = value; }

void RunManifest::write(const std::string& path) const {
  using nlohmann::json;
  auto files = [](const std::vector<std::string>& paths) {
    json out = json::array();
    for (const auto& p : paths) out.push_back({{"path", p}, {"sha256", sha256_file(p)}});
    return out;
  };
  const std::time_t t = std::chrono::system_clock::to_time_t(wall_start_);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm);
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();

  json j = {
      {"tool", "dce"},
      {"version", DCE_VERSION},
      {"command", command_},
      {"args", args_},
      {"seeds", seeds_},
      {"config", config_},
      {"inputs", files(inputs_)},
      {"outputs", files(outputs_)},
      {"started_utc", stamp},
      {"elapsed_seconds", elapsed},
  };
  std::ofstream out(path);
  if (!out) throw Error("io_error", "cannot write manifest '" + path + "'");
  out << j.dump(2) << '\n';
}

} // namespace dce::cli
