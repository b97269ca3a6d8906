#include "hwut/provider.hpp"

#include <openssl/evp.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "hwut/error.hpp"

namespace hwut {

using nlohmann::json;

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(Errc::kIoError, "SHA-256 failed");
  }
  static const char* kHex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 15];
  }
  return out;
}

ProviderBinding ProviderBinding::live_from_env() {
  ProviderBinding b;
  b.kind = ProviderKind::kLive;
  auto env = [](const char* name) {
    const char* v = std::getenv(name);
    return v ? std::string(v) : std::string();
  };
  b.endpoint = env("HWUT_LLM_ENDPOINT");
  b.model = env("HWUT_LLM_MODEL");
  b.api_key = env("HWUT_LLM_API_KEY");
  return b;
}

// --- mock ---------------------------------------------------------------------

MockProvider::MockProvider(const std::filesystem::path& dir) : dir_(dir) {
  std::ifstream in(dir / "index.json");
  if (!in) throw Error(Errc::kIoError, "cannot read " + (dir / "index.json").string());
  json index;
  try {
    in >> index;
    if (index.contains("digests")) {
      for (const auto& [k, v] : index.at("digests").items()) {
        digests_[k] = v.get<std::string>();
      }
    }
    if (index.contains("sequences")) {
      for (const auto& [k, v] : index.at("sequences").items()) {
        sequences_[k] = v.get<std::vector<std::string>>();
      }
    }
  } catch (const json::exception& e) {
    throw Error(Errc::kInvalidArgument,
                "bad mock index " + (dir / "index.json").string() + ": " + e.what());
  }
}

std::string MockProvider::read(const std::string& file) const {
  std::ifstream in(dir_ / file, std::ios::binary);
  if (!in) throw Error(Errc::kIoError, "missing mock response " + (dir_ / file).string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

size_t MockProvider::calls() const {
  std::lock_guard lock(mu_);
  return calls_;
}

std::string MockProvider::complete(const std::string& prompt, const GenConfig&,
                                   const CallContext& ctx) {
  std::string file;
  {
    std::lock_guard lock(mu_);
    ++calls_;
    auto d = digests_.find(sha256_hex(prompt));
    if (d != digests_.end()) {
      file = d->second;
    } else {
      const std::vector<std::string> scopes = {
          ctx.problem + "/" + ctx.source + "/" + ctx.role, ctx.problem + "/" + ctx.role,
          ctx.role, "*"};
      const std::vector<std::string>* seq = nullptr;
      std::string scope;
      for (const std::string& s : scopes) {
        auto it = sequences_.find(s);
        if (it != sequences_.end()) {
          seq = &it->second;
          scope = s;
          break;
        }
      }
      if (!seq) {
        throw Error(Errc::kScriptExhausted, "no scripted response for " + scopes.front());
      }
      size_t& pos = cursor_[{ctx.session, scope}];
      if (pos >= seq->size()) {
        throw Error(Errc::kScriptExhausted, "script for '" + scope + "' exhausted after " +
                                                std::to_string(seq->size()) + " responses");
      }
      file = (*seq)[pos++];
    }
  }
  return read(file);
}

// --- live ---------------------------------------------------------------------

LiveProvider::LiveProvider(ProviderBinding binding)
    : binding_(std::move(binding)),
      slots_(std::max<std::ptrdiff_t>(1, std::min<std::ptrdiff_t>(1024, binding_.max_concurrency))) {
  if (binding_.endpoint.empty() || binding_.model.empty() || binding_.api_key.empty()) {
    throw Error(Errc::kProviderRejection,
                "live provider needs HWUT_LLM_ENDPOINT, HWUT_LLM_MODEL and HWUT_LLM_API_KEY");
  }
  const size_t scheme = binding_.endpoint.find("://");
  if (scheme == std::string::npos) {
    throw Error(Errc::kProviderRejection, "endpoint must be an http(s) URL");
  }
  const size_t slash = binding_.endpoint.find('/', scheme + 3);
  scheme_host_ = binding_.endpoint.substr(0, slash);
  path_ = slash == std::string::npos ? "/" : binding_.endpoint.substr(slash);
}

LiveProvider::~LiveProvider() = default;

void LiveProvider::log(const std::string& name, const std::string& body) {
  if (!binding_.log_dir) return;
  std::string text = body;
  // Never let the credential reach disk, even if a server echoes it.
  for (size_t at = text.find(binding_.api_key); at != std::string::npos;
       at = text.find(binding_.api_key, at)) {
    text.replace(at, binding_.api_key.size(), "[REDACTED]");
  }
  std::lock_guard lock(log_mu_);
  std::filesystem::create_directories(*binding_.log_dir);
  char seq[16];
  std::snprintf(seq, sizeof seq, "%06zu", ++log_seq_);
  std::ofstream(*binding_.log_dir / (std::string(seq) + "_" + name), std::ios::binary) << text;
}

std::string LiveProvider::complete(const std::string& prompt, const GenConfig& cfg,
                                   const CallContext& ctx) {
  json req = {{"model", binding_.model},
              {"messages", json::array({{{"role", "user"}, {"content", prompt}}})},
              {"temperature", cfg.temperature},
              {"max_tokens", cfg.max_output_tokens}};
  const std::string body = req.dump();
  const std::string tag = ctx.problem + "_" + ctx.source + "_" + ctx.role;
  log(tag + "_request.json", body);

  slots_.acquire();
  struct Release {
    std::counting_semaphore<1024>& s;
    ~Release() { s.release(); }
  } release{slots_};

  httplib::Client client(scheme_host_);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(binding_.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(
      binding_.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());
  httplib::Headers headers = {{"Authorization", "Bearer " + binding_.api_key}};

  std::string last_error;
  bool timed_out = false;
  for (int attempt = 0; attempt <= binding_.retries; ++attempt) {
    auto res = client.Post(path_, headers, body, "application/json");
    if (!res) {
      const auto err = res.error();
      timed_out = err == httplib::Error::Read || err == httplib::Error::Write ||
                  err == httplib::Error::Connection;
      last_error = httplib::to_string(err);
      continue;
    }
    log(tag + "_response.json", res->body);
    if (res->status == 429 || res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      timed_out = false;
      std::this_thread::sleep_for(std::chrono::milliseconds(50 * (attempt + 1)));
      continue;
    }
    if (res->status < 200 || res->status >= 300) {
      throw Error(Errc::kProviderRejection, "provider answered HTTP " +
                                                std::to_string(res->status));
    }
    try {
      const json reply = json::parse(res->body);
      return reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
      throw Error(Errc::kProviderRejection, std::string("unreadable provider reply: ") +
                                                e.what());
    }
  }
  throw Error(timed_out ? Errc::kProviderTimeout : Errc::kProviderRejection,
              "provider request failed: " + last_error);
}

std::unique_ptr<Provider> make_provider(const ProviderBinding& binding) {
  if (binding.kind == ProviderKind::kMock) {
    return std::make_unique<MockProvider>(binding.script_dir);
  }
  return std::make_unique<LiveProvider>(binding);
}

}  // namespace hwut
