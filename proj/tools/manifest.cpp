#include "manifest.hpp"

#include <array>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>

#include <openssl/evp.h>

#include "cli.hpp"
#include "dmimo/errors.hpp"

namespace dmimo::cli {

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw std::runtime_error("sha256 init failed");
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md.data(), &len);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return hex.str();
}

RunOutputs::RunOutputs(std::filesystem::path dir, std::string command, std::vector<std::string> argv)
    : dir_(std::move(dir)), command_(std::move(command)), argv_(std::move(argv)), start_(std::chrono::steady_clock::now()) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir_.string() + ": " + ec.message());
}

void RunOutputs::write(const std::string& name, const std::function<void(std::ostream&)>& fn) {
  const auto path = dir_ / name;
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot write " + path.string());
  fn(os);
  os.close();
  if (!os) throw ConfigError("write failed: " + path.string());
  files_.push_back(name);
}

void RunOutputs::finish(const SystemConfig& cfg, const nlohmann::json& extra) {
  using nlohmann::json;
  json m;
  m["command"] = command_;
  m["argv"] = argv_;
  m["seed"] = cfg.rng_seed;
  m["config"] = config_to_json(cfg);
  m["inputs"] = inputs_;
  json outs = json::array();
  for (const auto& f : files_) {
    const auto p = dir_ / f;
    outs.push_back({{"file", f}, {"bytes", std::filesystem::file_size(p)}, {"sha256", sha256_file(p)}});
  }
  m["outputs"] = outs;
  m["wall_clock_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  for (auto it = extra.begin(); it != extra.end(); ++it) m[it.key()] = it.value();
  std::ofstream os(dir_ / "manifest.json");
  os << m.dump(2) << '\n';
}

}  // namespace dmimo::cli
