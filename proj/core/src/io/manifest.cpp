#include "abba/io/manifest.hpp"

#include <openssl/evp.h>

#include <ctime>
#include <memory>
#include "json.hpp"

#include "abba/errors.hpp"
#include "abba/io/csv.hpp"

namespace abba::io {

std::string sha256_hex(std::string_view bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xF]);
  }
  return out;
}

std::string sha256_file(const std::filesystem::path& path) { return sha256_hex(read_file(path)); }

std::string iso8601_utc(std::chrono::system_clock::time_point t) {
  const std::time_t tt = std::chrono::system_clock::to_time_t(t);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string engine_version() {
#ifdef ABBA_VERSION
  return ABBA_VERSION;
#else
  return "unknown";
#endif
}

std::string format_manifest(const RunManifest& m) {
  nlohmann::ordered_json j;
  j["command"] = m.command;
  j["argv"] = m.argv;
  j["config"] = nlohmann::ordered_json::parse(m.config_json);
  j["seed"] = m.seed;
  j["engine_version"] = m.engine_version;
  j["started"] = m.started;
  j["finished"] = m.finished;
  j["inputs"] = nlohmann::ordered_json::array();
  for (const auto& f : m.inputs) j["inputs"].push_back({{"path", f.path}, {"sha256", f.sha256}});
  if (!m.subtrial_labels.empty()) j["subtrial_labels"] = m.subtrial_labels;
  return j.dump(2) + "\n";
}

RunManifest parse_manifest(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    RunManifest m;
    m.command = j.at("command").get<std::string>();
    m.argv = j.at("argv").get<std::vector<std::string>>();
    m.config_json = j.at("config").dump();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.engine_version = j.at("engine_version").get<std::string>();
    m.started = j.at("started").get<std::string>();
    m.finished = j.at("finished").get<std::string>();
    for (const auto& f : j.at("inputs")) {
      m.inputs.push_back({f.at("path").get<std::string>(), f.at("sha256").get<std::string>()});
    }
    if (j.contains("subtrial_labels")) m.subtrial_labels = j["subtrial_labels"].get<std::vector<std::string>>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw MalformedInput(std::string("manifest: ") + e.what());
  }
}

}  // namespace abba::io
