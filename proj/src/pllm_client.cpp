#include "tkgf/pllm_client.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <sstream>

#include <json.hpp>

#include "tkgf/hashing.hpp"

namespace tkgf {

namespace fs = std::filesystem;

void PLLMRequest::validate() const {
  if (!(top_p >= 0.0 && top_p <= 1.0)) throw std::invalid_argument("top_p must lie in [0, 1]");
  if (!(temperature >= 0.0 && temperature <= 3.0))
    throw std::invalid_argument("temperature must lie in [0, 3]");
  if (max_tokens <= 0) throw std::invalid_argument("max_tokens must be positive");
}

std::string PLLMRequest::cache_key() const {
  char params[64];
  std::snprintf(params, sizeof params, "%.17g\x1f%.17g", top_p, temperature);
  const std::string canonical = model_name + '\x1f' + hex64(fnv1a64(prompt)) + '\x1f' + params;
  return hex64(fnv1a64(canonical));
}

// ---------------------------------------------------------------------- mock

void MockProvider::add_fixture(const std::string& prompt, std::string text) {
  std::lock_guard lock(mu_);
  fixtures_[prompt] = std::move(text);
}

void MockProvider::load_fixtures(std::istream& in) {
  const nlohmann::json doc = nlohmann::json::parse(in);
  if (doc.contains("fixtures"))
    for (const auto& f : doc["fixtures"])
      add_fixture(f.at("prompt").get<std::string>(), f.at("text").get<std::string>());
  if (doc.contains("reciprocals"))
    for (const auto& [label, inverse] : doc["reciprocals"].items())
      add_fixture(reciprocal_prompt(label), inverse.get<std::string>());
}

PLLMResponse MockProvider::complete(const PLLMRequest& request) {
  ++calls_;
  if (failure_) throw PllmError(*failure_, "mock provider configured to fail");
  PLLMResponse resp;
  std::lock_guard lock(mu_);
  if (auto it = fixtures_.find(request.prompt); it != fixtures_.end()) {
    resp.text = it->second;
    resp.provider_meta["source"] = "fixture";
  } else if (options_.echo) {
    resp.text = request.prompt;
    resp.provider_meta["source"] = "echo";
  } else {
    resp.text = options_.default_text;
    resp.provider_meta["source"] = "default";
  }
  return resp;
}

// --------------------------------------------------------------------- cache

ResponseCache::ResponseCache(std::optional<fs::path> dir) : dir_(std::move(dir)) {
  if (dir_) fs::create_directories(*dir_);
}

std::optional<std::string> ResponseCache::get(const std::string& key) {
  std::lock_guard lock(mu_);
  if (auto it = memory_.find(key); it != memory_.end()) return it->second;
  if (!dir_) return std::nullopt;
  std::ifstream in(*dir_ / (key + ".json"));
  if (!in) return std::nullopt;
  try {
    const auto j = nlohmann::json::parse(in);
    std::string text = j.at("text").get<std::string>();
    memory_.emplace(key, text);
    return text;
  } catch (const nlohmann::json::exception&) {
    return std::nullopt;  // unreadable record counts as a miss and is rewritten
  }
}

void ResponseCache::put(const std::string& key, const PLLMRequest& request, const std::string& text) {
  std::lock_guard lock(mu_);
  memory_[key] = text;
  if (!dir_) return;
  const nlohmann::json record{{"key", key},
                              {"model", request.model_name},
                              {"prompt", request.prompt},
                              {"top_p", request.top_p},
                              {"temperature", request.temperature},
                              {"max_tokens", request.max_tokens},
                              {"text", text}};
  const fs::path final_path = *dir_ / (key + ".json");
  const fs::path tmp = *dir_ / (key + ".json.tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << record.dump(2) << '\n';
  }
  fs::rename(tmp, final_path);
}

// -------------------------------------------------------------------- client

std::string build_summary_prompt(const SummaryRequest& request, const std::string& tmpl) {
  std::string facts;
  if (request.facts.empty()) {
    facts = "No prior facts are known.\n";
  } else {
    for (const auto& f : request.facts) facts += f + '\n';
  }
  const std::pair<const char*, const std::string*> fields[] = {{"{subject}", &request.subject},
                                                               {"{cutoff}", &request.cutoff},
                                                               {"{question}", &request.question},
                                                               {"{facts}", &facts}};
  std::string out = tmpl;
  for (const auto& [name, value] : fields) {
    const std::string key = name;
    for (std::size_t pos = out.find(key); pos != std::string::npos; pos = out.find(key, pos + value->size()))
      out.replace(pos, key.size(), *value);
  }
  return out;
}

std::string reciprocal_prompt(const std::string& relation_label) {
  return "Give the inverse of the relation \"" + relation_label +
         "\", so that (A, " + relation_label + ", B) becomes (B, inverse, A). Answer with the label only.";
}

PllmClient::PllmClient(std::shared_ptr<PllmProvider> provider, std::optional<fs::path> cache_dir,
                       PLLMRequest defaults)
    : provider_(std::move(provider)), cache_(std::move(cache_dir)), defaults_(std::move(defaults)) {
  if (!provider_) throw std::invalid_argument("PllmClient needs a provider");
  defaults_.validate();
}

PLLMResponse PllmClient::complete(PLLMRequest request) {
  request.validate();
  const std::string key = request.cache_key();
  if (auto hit = cache_.get(key)) return {*hit, true, {{"cache_key", key}}};
  PLLMResponse resp = provider_->complete(request);
  cache_.put(key, request, resp.text);
  resp.cached = false;
  resp.provider_meta["cache_key"] = key;
  return resp;
}

PLLMResponse PllmClient::complete(const std::string& prompt) {
  PLLMRequest req = defaults_;
  req.prompt = prompt;
  return complete(std::move(req));
}

std::string PllmClient::summarize(const SummaryRequest& request) {
  return complete(build_summary_prompt(request, summary_template_)).text;
}

std::string PllmClient::name_reciprocal(const std::string& relation_label) {
  const std::string prompt = reciprocal_prompt(relation_label);
  std::string answer;
  try {
    answer = complete(prompt).text;
  } catch (const PllmError&) {
    return relation_label + "⁻¹";
  }
  const auto first = answer.find_first_not_of(" \t\r\n\"");
  const auto last = answer.find_last_not_of(" \t\r\n\".");
  if (first == std::string::npos) return relation_label + "⁻¹";
  answer = answer.substr(first, last - first + 1);
  if (answer.empty() || answer.size() > 64 || answer.find('\n') != std::string::npos || answer == prompt)
    return relation_label + "⁻¹";
  return answer;
}

}  // namespace tkgf
