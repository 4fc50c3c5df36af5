#pragma once

#include <atomic>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace tkgf {

struct PLLMRequest {
  std::string prompt;
  double top_p = 1.0;
  double temperature = 0.0;
  int max_tokens = 256;
  std::string model_name = "mock";

  // Throws std::invalid_argument when a field is out of range.
  void validate() const;
  // Content address over (model_name, prompt hash, top_p, temperature).
  std::string cache_key() const;
};

struct PLLMResponse {
  std::string text;
  bool cached = false;
  std::map<std::string, std::string> provider_meta;
};

enum class PllmErrorKind { unavailable, timeout, provider_error };

class PllmError : public std::runtime_error {
 public:
  PllmError(PllmErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  PllmErrorKind kind() const { return kind_; }

 private:
  PllmErrorKind kind_;
};

class PllmProvider {
 public:
  virtual ~PllmProvider() = default;
  virtual PLLMResponse complete(const PLLMRequest& request) = 0;
  virtual std::string name() const = 0;
};

// Deterministic stand-in: exact-prompt fixtures, then either an echo of the
// prompt or a fixed default text.
class MockProvider final : public PllmProvider {
 public:
  struct Options {
    bool echo = true;
    std::string default_text;
  };

  MockProvider() = default;
  explicit MockProvider(Options options) : options_(std::move(options)) {}

  void add_fixture(const std::string& prompt, std::string text);
  // Fixture document: {"fixtures": [{"prompt", "text"}...], "reciprocals": {label: inverse}}.
  void load_fixtures(std::istream& in);
  // Every later call fails with the given kind until cleared.
  void fail_with(std::optional<PllmErrorKind> kind) { failure_ = kind; }

  PLLMResponse complete(const PLLMRequest& request) override;
  std::string name() const override { return "mock"; }
  std::size_t calls() const { return calls_.load(); }

 private:
  Options options_;
  std::unordered_map<std::string, std::string> fixtures_;
  std::optional<PllmErrorKind> failure_;
  std::atomic<std::size_t> calls_{0};
  mutable std::mutex mu_;
};

// Provider for configurations with the live adapter switched off.
class DisabledProvider final : public PllmProvider {
 public:
  PLLMResponse complete(const PLLMRequest&) override {
    throw PllmError(PllmErrorKind::unavailable, "provider unavailable: live PLLM adapter disabled");
  }
  std::string name() const override { return "disabled"; }
};

// HTTP JSON adapter: POST {model, prompt, top_p, temperature, max_tokens},
// expects {text}.
class HttpProvider final : public PllmProvider {
 public:
  HttpProvider(std::string endpoint, std::string token, double timeout_seconds = 60.0);
  // Reads TKGF_PLLM_ENDPOINT / TKGF_PLLM_TOKEN. Throws PllmError(unavailable)
  // when the endpoint is unset.
  static std::unique_ptr<HttpProvider> from_environment(double timeout_seconds = 60.0);

  PLLMResponse complete(const PLLMRequest& request) override;
  std::string name() const override { return "http"; }

 private:
  std::string endpoint_;
  std::string token_;
  double timeout_seconds_;
};

// In-memory map backed by one JSON record per request under `dir`.
class ResponseCache {
 public:
  explicit ResponseCache(std::optional<std::filesystem::path> dir = std::nullopt);

  std::optional<std::string> get(const std::string& key);
  void put(const std::string& key, const PLLMRequest& request, const std::string& text);
  const std::optional<std::filesystem::path>& dir() const { return dir_; }

 private:
  std::optional<std::filesystem::path> dir_;
  std::unordered_map<std::string, std::string> memory_;
  std::mutex mu_;
};

struct SummaryRequest {
  std::string subject;
  std::string question;
  std::string cutoff;               // last date the summary may cover
  std::vector<std::string> facts;   // verbalized context facts, all before the query time
};

inline constexpr const char* kDefaultSummaryTemplate =
    "Summarize the historical relationships of {subject} up to {cutoff}.\n"
    "Question: {question}\n"
    "Known facts:\n"
    "{facts}";

std::string build_summary_prompt(const SummaryRequest& request,
                                 const std::string& tmpl = kDefaultSummaryTemplate);
std::string reciprocal_prompt(const std::string& relation_label);

class PllmClient {
 public:
  explicit PllmClient(std::shared_ptr<PllmProvider> provider,
                      std::optional<std::filesystem::path> cache_dir = std::nullopt,
                      PLLMRequest defaults = {});

  // Cached completion. Throws PllmError on provider failure.
  PLLMResponse complete(PLLMRequest request);
  // Completion of `prompt` with the default sampling parameters.
  PLLMResponse complete(const std::string& prompt);

  std::string summarize(const SummaryRequest& request);
  // Inverse relation label; falls back to "<label>⁻¹" when the provider fails
  // or answers with something that is not a single short label.
  std::string name_reciprocal(const std::string& relation_label);

  const PLLMRequest& defaults() const { return defaults_; }
  void set_summary_template(std::string tmpl) { summary_template_ = std::move(tmpl); }
  PllmProvider& provider() { return *provider_; }

 private:
  std::shared_ptr<PllmProvider> provider_;
  ResponseCache cache_;
  PLLMRequest defaults_;
  std::string summary_template_ = kDefaultSummaryTemplate;
};

}  // namespace tkgf
