#include "run_manifest.hpp"

#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <memory>

#include "specband/dataio.hpp"
#include "specband/error.hpp"

namespace specband::cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open " + path.string() + " for hashing");
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) fail(ErrorKind::Io, "sha256 init failed");
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  if (in.bad()) fail(ErrorKind::Io, "read error while hashing " + path.string());
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md.data(), &len);
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

RunManifest::RunManifest(std::string command, std::vector<std::string> argv)
    : command_(std::move(command)), argv_(std::move(argv)), start_(std::chrono::steady_clock::now()) {}

void RunManifest::add_input(const std::string& role, const fs::path& path) {
  json entry{{"role", role}, {"path", path.string()}};
  const fs::path header = header_path(path);
  const fs::path payload = payload_path(path);
  if (fs::exists(header) && fs::exists(payload)) {
    entry["sha256"] = {{"header", sha256_file(header)}, {"payload", sha256_file(payload)}};
  } else {
    entry["sha256"] = sha256_file(path);
  }
  inputs_.push_back(std::move(entry));
}

void RunManifest::add_output(const fs::path& path) { outputs_.push_back(path); }

void RunManifest::mark(const std::string& name) {
  const auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
  timings_[name] = ms;
}

void RunManifest::write(const fs::path& out_dir) const {
  json outputs = json::array();
  for (const fs::path& p : outputs_) {
    outputs.push_back({{"path", fs::relative(p, out_dir).generic_string()}, {"sha256", sha256_file(p)}});
  }
  json timings = timings_;
  timings["total_ms"] =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
  const json doc{{"command", command_}, {"argv", argv_},     {"config", config_}, {"seed", seed_},
                 {"inputs", inputs_},   {"outputs", outputs}, {"timings_ms", timings}};
  const fs::path target = out_dir / "manifest.json";
  std::ofstream out(target);
  if (!out) fail(ErrorKind::Io, "cannot write " + target.string());
  out << doc.dump(2) << '\n';
  if (!out) fail(ErrorKind::Io, "write failed for " + target.string());
}

}  // namespace specband::cli
