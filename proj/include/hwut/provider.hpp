#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <vector>

#include "hwut/prompt.hpp"

namespace hwut {

// Identifies the loop making a request. `session` separates loop instances
// so each one replays a scripted sequence from its start.
struct CallContext {
  std::string problem;
  std::string source;  // BC id the loop works on
  std::string role;    // "testgen" or "debug"
  std::string session;
};

class Provider {
 public:
  virtual ~Provider() = default;
  // Throws kProviderTimeout, kProviderRejection, kScriptExhausted.
  virtual std::string complete(const std::string& prompt, const GenConfig& cfg,
                               const CallContext& ctx) = 0;
  virtual std::string kind() const = 0;
};

enum class ProviderKind { kMock, kLive };

struct ProviderBinding {
  ProviderKind kind = ProviderKind::kMock;
  std::filesystem::path script_dir;  // mock
  std::string endpoint;              // live: full URL of the chat-completions route
  std::string model;
  std::string api_key;
  std::chrono::milliseconds timeout{60000};
  int retries = 2;
  int max_concurrency = 4;
  std::optional<std::filesystem::path> log_dir;  // live request/response log

  // Fills endpoint/model/api_key from HWUT_LLM_ENDPOINT, HWUT_LLM_MODEL and
  // HWUT_LLM_API_KEY.
  static ProviderBinding live_from_env();
};

// Lower-case hex SHA-256.
std::string sha256_hex(std::string_view data);

// Replays recorded responses from a directory:
//   index.json  {"digests": {"<sha256 of prompt>": "0001.txt", ...},
//                "sequences": {"<scope>": ["0002.txt", ...], ...}}
// A prompt whose digest is indexed always gets that file. Otherwise the first
// scope of <problem>/<source>/<role>, <problem>/<role>, <role>, "*" that has a
// sequence is consumed in order, separately for every session.
class MockProvider : public Provider {
 public:
  // Throws kIoError, kInvalidArgument for a broken index.
  explicit MockProvider(const std::filesystem::path& dir);

  std::string complete(const std::string& prompt, const GenConfig& cfg,
                       const CallContext& ctx) override;
  std::string kind() const override { return "mock"; }

  // Every call served so far, in call order per session.
  size_t calls() const;

 private:
  std::string read(const std::string& file) const;

  std::filesystem::path dir_;
  std::map<std::string, std::string> digests_;
  std::map<std::string, std::vector<std::string>> sequences_;
  mutable std::mutex mu_;
  std::map<std::pair<std::string, std::string>, size_t> cursor_;
  size_t calls_ = 0;
};

// Chat-completion style JSON over HTTP(S).
class LiveProvider : public Provider {
 public:
  // Throws kProviderRejection when endpoint, model or key is missing.
  explicit LiveProvider(ProviderBinding binding);
  ~LiveProvider() override;

  std::string complete(const std::string& prompt, const GenConfig& cfg,
                       const CallContext& ctx) override;
  std::string kind() const override { return "live"; }

 private:
  void log(const std::string& name, const std::string& body);

  ProviderBinding binding_;
  std::string scheme_host_;
  std::string path_;
  std::counting_semaphore<1024> slots_;
  std::mutex log_mu_;
  size_t log_seq_ = 0;
};

std::unique_ptr<Provider> make_provider(const ProviderBinding& binding);

}  // namespace hwut
